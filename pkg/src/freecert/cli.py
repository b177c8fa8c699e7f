"""Command-line front end.

Problem files are line-oriented with section headers, exact-rational
literals, and positioned parse errors.  Certificates go to stdout (or
--out), logs to stderr.  Exit codes: 0 certified/yes, 2 input error,
3 refuted/no, 4 unknown/not-found/partial.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields as dc_fields
from fractions import Fraction

from . import certfmt
from .certfmt import VerifyError
from .dynamics import (
    certify_contracting,
    certify_proximal,
    certify_very_proximal,
    direction_candidates,
    power_to_proximal,
    singular_profile,
)
from .pingpong import PingPongPlayer, certify_simple_tuple, certify_tuple, freeness_oracle, simple_player
from .projective import Ball, HNbhd, ProjMat, ProjSet, ball, hnbhd
from .scalar import ARCH, Place, padic, parse_rat
from .synthesis import (
    Budgets,
    MarkedGroup,
    NormalData,
    auto_very_proximal,
    b1b2b3_synthesize,
    concat,
    conjugate_contract,
    coset_pingpong,
    double_coset_wrap,
    normal_proximal,
    proximal_sets,
    truncated_prodense,
    very_proximal_search,
    word_inverse,
)
from .tree import (
    AmalgamData,
    BassSerreTree,
    FiniteGroup,
    TreeError,
    classify,
    expand_tree,
    kernel_of_action,
    parse_word as tree_parse_word,
    tree_pingpong,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_REFUTED = 3
EXIT_UNKNOWN = 4


class ProblemError(ValueError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


# ---------------------------------------------------------------------------
# Problem-file parsing
# ---------------------------------------------------------------------------


class Problem:
    def __init__(self):
        self.place: Place | None = None
        self.dim: int | None = None
        self.generators: list[tuple[str, list[list[Fraction]]]] = []
        self.amalgam_raw: dict = {}
        self.task: dict[str, list[tuple[int, str]]] = {}  # key -> [(line, value)]
        self.task_order: list[tuple[str, int, str]] = []

    def task_get(self, key: str, default: str | None = None) -> str | None:
        vals = self.task.get(key)
        return vals[0][1] if vals else default

    def task_all(self, key: str) -> list[tuple[int, str]]:
        return self.task.get(key, [])


def _parse_rat_at(text: str, line: int, col: int) -> Fraction:
    try:
        return parse_rat(text)
    except ValueError as e:
        raise ProblemError(line, col, str(e)) from None


def _parse_matrix_literal(text: str, line: int) -> list[list[Fraction]]:
    rows: list[list[Fraction]] = []
    depth = 0
    token = ""
    row: list[Fraction] | None = None
    for col, ch in enumerate(text, start=1):
        if ch == "[":
            depth += 1
            if depth == 2:
                row = []
            elif depth > 2:
                raise ProblemError(line, col, "matrix literal nests too deep")
        elif ch == "]":
            if depth == 2:
                if token.strip():
                    row.append(_parse_rat_at(token.strip(), line, col))
                token = ""
                rows.append(row)
                row = None
            elif depth == 1:
                pass
            else:
                raise ProblemError(line, col, "unbalanced ']' in matrix literal")
            depth -= 1
        elif ch == ",":
            if depth == 2:
                if not token.strip():
                    raise ProblemError(line, col, "empty matrix entry")
                row.append(_parse_rat_at(token.strip(), line, col))
                token = ""
        elif depth == 2:
            token += ch
        elif ch.strip() and depth == 0 and rows:
            raise ProblemError(line, col, "trailing characters after matrix literal")
    if depth != 0:
        raise ProblemError(line, len(text), "unterminated matrix literal")
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ProblemError(line, 1, "matrix literal must be square")
    return rows


def parse_problem(text: str) -> Problem:
    prob = Problem()
    section = None
    pending_table: str | None = None
    table_rows: list[list[int]] = []
    saw_format = False

    def close_table(line_no: int):
        nonlocal pending_table, table_rows
        if pending_table is not None:
            if not table_rows:
                raise ProblemError(line_no, 1, f"{pending_table} has no rows")
            prob.amalgam_raw[pending_table.replace("-", "_")] = table_rows
            pending_table = None
            table_rows = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        body = stripped.strip()
        if pending_table is not None:
            if all(tok.lstrip("-").isdigit() for tok in body.split()):
                table_rows.append([int(t) for t in body.split()])
                continue
            close_table(line_no)
        if body.startswith("[") and body.endswith("]"):
            section = body[1:-1].strip()
            if section not in ("matrix-group", "amalgam", "task"):
                raise ProblemError(line_no, 2, f"unknown section {section!r}")
            continue
        key, _, rest = body.partition(" ")
        rest = rest.strip()
        if section is None:
            if key == "format":
                if rest != "1":
                    raise ProblemError(line_no, len(key) + 2, f"unsupported format {rest!r}")
                saw_format = True
            elif key == "place":
                if rest == "arch":
                    prob.place = ARCH
                elif rest.startswith("p:"):
                    try:
                        prob.place = padic(int(rest[2:]))
                    except ValueError as e:
                        raise ProblemError(line_no, len(key) + 2, str(e)) from None
                else:
                    raise ProblemError(line_no, len(key) + 2, f"place must be arch or p:PRIME, got {rest!r}")
            else:
                raise ProblemError(line_no, 1, f"unexpected directive {key!r} before any section")
            continue
        if section == "matrix-group":
            if key == "dim":
                prob.dim = int(rest)
            elif key == "gen":
                name, eq, literal = rest.partition("=")
                name = name.strip()
                if not eq or not name.isidentifier():
                    raise ProblemError(line_no, len(key) + 2, "expected: gen NAME = [[...], [...]]")
                prob.generators.append((name, _parse_matrix_literal(literal.strip(), line_no)))
            else:
                raise ProblemError(line_no, 1, f"unknown matrix-group directive {key!r}")
        elif section == "amalgam":
            if key in ("table-a", "table-b", "table-h"):
                pending_table = key
                table_rows = []
            elif key in ("names-a", "names-b", "names-h"):
                prob.amalgam_raw[key.replace("-", "_")] = rest.split()
            elif key in ("embed-a", "embed-b"):
                prob.amalgam_raw[key.replace("-", "_")] = [int(t) for t in rest.split()]
            else:
                raise ProblemError(line_no, 1, f"unknown amalgam directive {key!r}")
        elif section == "task":
            prob.task.setdefault(key, []).append((line_no, rest))
            prob.task_order.append((key, line_no, rest))
    close_table(len(text.splitlines()) + 1)
    if not saw_format:
        raise ProblemError(1, 1, "missing 'format 1' header")
    return prob


def _build_group(prob: Problem) -> MarkedGroup:
    if not prob.generators:
        raise ProblemError(1, 1, "task needs a [matrix-group] section")
    place = prob.place or ARCH
    try:
        gens = tuple((name, ProjMat(tuple(tuple(r) for r in rows), place)) for name, rows in prob.generators)
        return MarkedGroup(gens)
    except ValueError as e:
        raise ProblemError(1, 1, f"bad generator: {e}") from None


def _build_amalgam(prob: Problem) -> AmalgamData:
    raw = prob.amalgam_raw
    needed = ("table_a", "table_b", "table_h", "embed_a", "embed_b")
    missing = [k for k in needed if k not in raw]
    if missing:
        raise ProblemError(1, 1, f"amalgam section incomplete: missing {missing[0].replace('_', '-')}")
    try:
        ga = FiniteGroup(tuple(tuple(r) for r in raw["table_a"]), tuple(raw["names_a"]) if raw.get("names_a") else None)
        gb = FiniteGroup(tuple(tuple(r) for r in raw["table_b"]), tuple(raw["names_b"]) if raw.get("names_b") else None)
        gh = FiniteGroup(tuple(tuple(r) for r in raw["table_h"]), tuple(raw["names_h"]) if raw.get("names_h") else None)
        return AmalgamData(ga, gb, gh, tuple(raw["embed_a"]), tuple(raw["embed_b"]))
    except TreeError as e:
        raise ProblemError(1, 1, f"bad amalgam: {e}") from None


def _amalgam_header(prob: Problem) -> dict:
    raw = prob.amalgam_raw
    return {
        "amalgam": {
            "table_a": raw["table_a"],
            "table_b": raw["table_b"],
            "table_h": raw["table_h"],
            "names_a": raw.get("names_a"),
            "names_b": raw.get("names_b"),
            "names_h": raw.get("names_h"),
            "embed_a": raw["embed_a"],
            "embed_b": raw["embed_b"],
        }
    }


def _group_header(group: MarkedGroup) -> dict:
    return {"generators": {name: certfmt.mat_json(m) for name, m in group.gens}}


def _budgets(prob: Problem, overrides: list[str]) -> Budgets:
    values: dict[str, int] = {}
    names = {f.name for f in dc_fields(Budgets)}
    for line_no, spec in prob.task_all("budget"):
        name, eq, val = spec.partition("=")
        if not eq or name.strip() not in names:
            raise ProblemError(line_no, 1, f"unknown budget {name.strip()!r}")
        values[name.strip()] = int(val)
    for spec in overrides:
        name, eq, val = spec.partition("=")
        if not eq or name.strip() not in names:
            raise ValueError(f"unknown budget {name.strip()!r}")
        values[name.strip()] = int(val)
    return Budgets(**values)


def _need(prob: Problem, key: str) -> str:
    val = prob.task_get(key)
    if val is None:
        raise ProblemError(1, 1, f"task needs '{key}'")
    return val


def _parse_set(text: str, line: int, place: Place) -> ProjSet:
    # ball [1, 0] 1/25   |   hnbhd [1, 0] 1/25
    parts = text.split("]")
    kind = text.split()[0]
    if kind not in ("ball", "hnbhd") or len(parts) != 2:
        raise ProblemError(line, 1, "set literal must be: ball|hnbhd [coords] radius-sq")
    coords_text = parts[0].split("[", 1)[1]
    coords = [
        _parse_rat_at(tok.strip(), line, 1) for tok in coords_text.split(",") if tok.strip()
    ]
    radius = _parse_rat_at(parts[1].strip(), line, 1)
    try:
        if kind == "ball":
            from .projective import ProjPoint

            return ball(ProjPoint(tuple(coords)), radius)
        from .projective import ProjHyperplane

        return hnbhd(ProjHyperplane(tuple(coords)), radius)
    except ValueError as e:
        raise ProblemError(line, 1, str(e)) from None


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def _verdict_exit(verdict: str) -> int:
    if verdict in ("yes", "certified", "ok", "no-relation"):
        return EXIT_OK
    if verdict in ("no", "refuted", "relation"):
        return EXIT_REFUTED
    return EXIT_UNKNOWN


def cmd_analyze(prob: Problem, args) -> tuple[dict, int]:
    group = _build_group(prob)
    place = group.place
    subop = _need(prob, "subop")
    word = group.parse_word(_need(prob, "element"))
    m = group.eval(word)
    task = {"op": "analyze", "subop": subop, "element": group.word_str(word)}
    header = _group_header(group)
    claims = [certfmt.claim_word_eval(group.word_str(word), m)]
    if subop == "profile":
        prof = singular_profile(m)
        result = {"values_sq": [certfmt.interval_json(v) for v in prof.values_sq], "exact": prof.exact}
        return certfmt.certificate(place, "matrix", header, task, "ok", result, claims), EXIT_OK
    if subop == "contracting":
        eps_sq = parse_rat(_need(prob, "epsilon-sq"))
        task["epsilon_sq"] = certfmt.rat(eps_sq)
        v = certify_contracting(m, eps_sq)
        if v.kind == "yes":
            claims.append(certfmt.claim_contraction(m, v.cert))
            result = {"cert": certfmt.contraction_json(v.cert)}
        elif v.kind == "no":
            dirs = direction_candidates(m)
            claims.append(certfmt.claim_contraction_refuted(m, eps_sq, v.counterexample, dirs.attract, dirs.repel))
            result = {"counterexample": certfmt.point_json(v.counterexample)}
        else:
            result = {}
        return certfmt.certificate(place, "matrix", header, task, v.kind, result, claims), _verdict_exit(v.kind)
    if subop in ("proximal", "very-proximal"):
        eps_sq = parse_rat(_need(prob, "epsilon-sq"))
        r_sq = parse_rat(_need(prob, "r-sq"))
        task["epsilon_sq"] = certfmt.rat(eps_sq)
        task["r_sq"] = certfmt.rat(r_sq)
        fn = certify_proximal if subop == "proximal" else certify_very_proximal
        v = fn(m, r_sq, eps_sq)
        if v.kind == "yes":
            claims.extend(certfmt.claims_for_proximal(m, v.cert))
            result = {"cert": certfmt.proximal_json(v.cert)}
        elif v.kind == "no" and v.counterexample is not None:
            dirs = direction_candidates(m)
            claims.append(certfmt.claim_contraction_refuted(m, eps_sq, v.counterexample, dirs.attract, dirs.repel))
            result = {"counterexample": certfmt.point_json(v.counterexample)}
        else:
            result = {}
        return certfmt.certificate(place, "matrix", header, task, v.kind, result, claims), _verdict_exit(v.kind)
    if subop == "power-proximal":
        eps_sq = parse_rat(_need(prob, "epsilon-sq"))
        r_sq = parse_rat(_need(prob, "r-sq"))
        max_n = int(prob.task_get("max-n", "16"))
        task.update({"epsilon_sq": certfmt.rat(eps_sq), "r_sq": certfmt.rat(r_sq), "max_n": max_n})
        out = power_to_proximal(m, r_sq, eps_sq, max_n)
        if out is None:
            return certfmt.certificate(place, "matrix", header, task, "not-found", {}, claims), EXIT_UNKNOWN
        n, cert = out
        claims.extend(certfmt.claims_for_proximal(m.power(n), cert))
        result = {"n": n, "cert": certfmt.proximal_json(cert)}
        return certfmt.certificate(place, "matrix", header, task, "yes", result, claims), EXIT_OK
    raise ProblemError(1, 1, f"unknown analyze subop {subop!r}")


def _tuple_claims(players, tup, place) -> list[dict]:
    claims = []
    by_name = {}
    for p in players:
        for label, s in p.sets():
            by_name[f"{p.name}.{label}"] = s
    for check in tup.checks:
        if check.kind == "disjoint" and check.ok:
            left, right = check.detail.split(" vs ")
            claims.append(certfmt.claim_set_disjoint(by_name[left], by_name[right], check.detail))
    for p in players:
        if hasattr(p.evidence, "contraction"):
            claims.extend(certfmt.claims_for_proximal(p.element, p.evidence))
    return claims


def cmd_pingpong(prob: Problem, args) -> tuple[dict, int]:
    if prob.generators and prob.amalgam_raw:
        raise ProblemError(1, 1, "mixed backends in one file")
    if prob.amalgam_raw:
        return _tree_pingpong_cert(prob, args)
    group = _build_group(prob)
    place = group.place
    subop = prob.task_get("subop", "tuple")
    oracle_len = int(args.oracle_len or prob.task_get("oracle-len", "6"))
    players_spec = prob.task_all("player")
    if not players_spec:
        raise ProblemError(1, 1, "task needs at least one 'player NAME = word'")
    names, words, mats = [], [], []
    for line_no, spec in players_spec:
        name, eq, word_text = spec.partition("=")
        if not eq:
            raise ProblemError(line_no, 1, "expected: player NAME = word")
        names.append(name.strip())
        try:
            w = group.parse_word(word_text.strip())
        except KeyError as e:
            raise ProblemError(line_no, 1, str(e)) from None
        words.append(w)
        mats.append(group.eval(w))
    task = {"op": "pingpong", "subop": subop, "players": {n: group.word_str(w) for n, w in zip(names, words)}, "oracle_len": oracle_len}
    header = _group_header(group)
    if subop == "oracle":
        out = freeness_oracle(mats, oracle_len, names=names)
        claims = [certfmt.claim_oracle(oracle_len, out.kind, out.word, names)]
        result = {"oracle": out.kind, "relation": out.word}
        return certfmt.certificate(place, "matrix", header, task, out.kind, result, claims), _verdict_exit(out.kind)
    declared = prob.task_get("radius-sq")
    players = []
    for name, w, m in zip(names, words, mats):
        cert = auto_very_proximal(m)
        if cert is None:
            result = {"failed_player": name}
            return certfmt.certificate(place, "matrix", header, task, "unknown", result, []), EXIT_UNKNOWN
        if declared is not None:
            radius = parse_rat(declared)
            c_f, c_b = cert.contraction, cert.very.contraction
            if subop == "simple-tuple":
                players.append(simple_player(name, m, ball(c_f.attract, radius), ball(c_b.attract, radius), cert))
            else:
                players.append(
                    PingPongPlayer(
                        name,
                        m,
                        ball(c_f.attract, radius),
                        hnbhd(c_f.repel, radius),
                        ball(c_b.attract, radius),
                        hnbhd(c_b.repel, radius),
                        cert,
                    )
                )
        else:
            a_p, r_p, a_m, r_m = proximal_sets(cert)
            players.append(PingPongPlayer(name, m, a_p, r_p, a_m, r_m, cert))
    tup = certify_tuple(players) if subop == "tuple" else certify_simple_tuple(players)
    claims = _tuple_claims(players, tup, place)
    result = {
        "verdict": tup.verdict,
        "witness_detail": tup.witness_detail,
        "players": {
            p.name: {label: certfmt.set_json(s) for label, s in p.sets()} for p in players
        },
    }
    if tup.witness is not None:
        result["witness"] = certfmt.point_json(tup.witness)
    if tup.verdict == "certified":
        oracle = freeness_oracle(mats, oracle_len, names=names)
        claims.append(certfmt.claim_oracle(oracle_len, oracle.kind, oracle.word, names))
        result["oracle"] = oracle.kind
    return certfmt.certificate(place, "matrix", header, task, tup.verdict, result, claims), _verdict_exit(tup.verdict)


def _tree_pingpong_cert(prob: Problem, args) -> tuple[dict, int]:
    am = _build_amalgam(prob)
    oracle_len = int(args.oracle_len or prob.task_get("oracle-len", "8"))
    words_spec = prob.task_all("word")
    if not words_spec:
        raise ProblemError(1, 1, "tree pingpong needs 'word' lines")
    elements = []
    texts = []
    for line_no, text in words_spec:
        try:
            elements.append(tree_parse_word(am, text))
        except TreeError as e:
            raise ProblemError(line_no, 1, str(e)) from None
        texts.append(text)
    task = {"op": "pingpong", "subop": "tree", "words": texts, "oracle_len": oracle_len}
    header = _amalgam_header(prob)
    try:
        tup = tree_pingpong(elements, am, radius_budget=int(args.radius or prob.task_get("radius", "8")))
    except TreeError as e:
        raise ProblemError(1, 1, str(e)) from None
    claims = []
    for text in texts:
        cls = classify(tree_parse_word(am, text), am)
        claims.append({"type": "tree-classify", "word": text, "kind": cls.kind, "translation_length": cls.translation_length})
    for p, text in zip(tup.players, texts):
        from .tree import axis_shadow_sets

        tree = p.a_plus.tree
        cls = p.evidence.classification
        sets = axis_shadow_sets(tree, p.element, cls)
        claims.append({"type": "tree-evidence", "word": text, "sets": [certfmt.shadow_json(s) for s in sets]})
    for check in tup.checks:
        if check.kind == "disjoint" and check.ok:
            names = dict()
            for p, text in zip(tup.players, texts):
                for label, s in p.sets():
                    names[f"{p.name}.{label}"] = s
            left, right = check.detail.split(" vs ")
            claims.append(
                {
                    "type": "shadow-disjoint",
                    "left": certfmt.shadow_json(names[left]),
                    "right": certfmt.shadow_json(names[right]),
                    "note": check.detail,
                }
            )
    result = {"verdict": tup.verdict, "witness_detail": tup.witness_detail}
    if tup.verdict == "certified":
        oracle = freeness_oracle(elements, oracle_len, names=[f"t{i}" for i in range(len(elements))])
        claims.append(certfmt.claim_oracle(oracle_len, oracle.kind, oracle.word, texts))
        result["oracle"] = oracle.kind
    return certfmt.certificate(None, "amalgam", header, task, tup.verdict, result, claims), _verdict_exit(tup.verdict)


def cmd_synthesize(prob: Problem, args) -> tuple[dict, int]:
    group = _build_group(prob)
    place = group.place
    subop = _need(prob, "subop")
    header = _group_header(group)
    budgets = _budgets(prob, args.budget or [])
    task = {"op": "synthesize", "subop": subop}

    def parse_normals() -> list[NormalData]:
        normals = {}
        for line_no, spec in prob.task_all("normal"):
            label, eq, reps = spec.partition("=")
            if not eq:
                raise ProblemError(line_no, 1, "expected: normal LABEL = word [; word ...]")
            words = tuple(group.parse_word(w.strip()) for w in reps.split(";") if w.strip())
            if not words:
                raise ProblemError(line_no, 1, "normal datum needs class representatives")
            normals[label.strip()] = [words, ()]
        for line_no, spec in prob.task_all("cosets"):
            label, eq, reps = spec.partition("=")
            label = label.strip()
            if not eq or label not in normals:
                raise ProblemError(line_no, 1, f"cosets for unknown normal {label!r}")
            normals[label][1] = tuple(group.parse_word(w.strip()) if w.strip() else () for w in reps.split("|"))
        return [NormalData(lbl, reps, cosets) for lbl, (reps, cosets) in normals.items()]

    if subop == "truncated-prodense":
        normals = parse_normals()
        if not normals:
            raise ProblemError(1, 1, "truncated-prodense needs at least one 'normal' line")
        try:
            report = truncated_prodense(group, normals, budgets=budgets)
        except ValueError as e:
            raise ProblemError(1, 1, str(e)) from None
        claims, result = _report_payload(group, report)
        task["normals"] = {d.label: [group.word_str(w) for w in d.class_reps] for d in normals}
        verdict = report.verdict
        return certfmt.certificate(place, "matrix", header, task, verdict, result, claims), _verdict_exit(verdict)
    if subop == "conjugate-contract":
        g = group.parse_word(_need(prob, "element"))
        x = group.parse_word(_need(prob, "x-element"))
        eps_sq = parse_rat(_need(prob, "epsilon-sq"))
        m_max = int(prob.task_get("m-max", "8"))
        task.update({"element": group.word_str(g), "x": group.word_str(x), "epsilon_sq": certfmt.rat(eps_sq)})
        try:
            out = conjugate_contract(group, g, x, m_max, eps_sq)
        except ValueError as e:
            raise ProblemError(1, 1, str(e)) from None
        if out is None:
            return certfmt.certificate(place, "matrix", header, task, "not-found", {}, []), EXIT_UNKNOWN
        m, word, cert = out
        mat = group.eval(word)
        claims = [certfmt.claim_word_eval(group.word_str(word), mat), certfmt.claim_contraction(mat, cert)]
        result = {"m": m, "word": group.word_str(word), "cert": certfmt.contraction_json(cert)}
        return certfmt.certificate(place, "matrix", header, task, "yes", result, claims), EXIT_OK
    if subop == "b1b2b3":
        g = group.parse_word(_need(prob, "element"))
        words = {k: group.parse_word(_need(prob, k)) for k in ("b1", "b2", "b3")}
        attract_line = prob.task_all("attract")
        repel_line = prob.task_all("repel")
        if not attract_line or not repel_line:
            raise ProblemError(1, 1, "b1b2b3 needs 'attract' and 'repel' set literals")
        a_set = _parse_set(attract_line[0][1], attract_line[0][0], place)
        r_set = _parse_set(repel_line[0][1], repel_line[0][0], place)
        k_max = int(prob.task_get("k-max", "32"))
        task.update({"element": group.word_str(g), "k_max": k_max})
        try:
            out = b1b2b3_synthesize(group, g, a_set, r_set, words["b1"], words["b2"], words["b3"], k_max)
        except ValueError as e:
            raise ProblemError(1, 1, str(e)) from None
        if out is None:
            return certfmt.certificate(place, "matrix", header, task, "not-found", {}, []), EXIT_UNKNOWN
        mat = group.eval(out.word)
        claims = [
            certfmt.claim_word_eval(group.word_str(out.word), mat),
            certfmt.claim_contraction(mat, out.cert),
            certfmt.claim_set_disjoint(out.attract, out.repel, "produced sets disjoint"),
            certfmt.claim_set_contains(a_set, out.attract, note="attracting set inside host"),
            certfmt.claim_set_contains(a_set, out.repel, note="repelling set inside host"),
        ]
        result = {
            "k": out.k,
            "word": group.word_str(out.word),
            "attract": certfmt.set_json(out.attract),
            "repel": certfmt.set_json(out.repel),
            "cert": certfmt.contraction_json(out.cert),
        }
        return certfmt.certificate(place, "matrix", header, task, "yes", result, claims), EXIT_OK
    if subop == "very-proximal":
        g = group.parse_word(_need(prob, "element"))
        word_len = int(prob.task_get("word-len", "2"))
        r_sq = parse_rat(_need(prob, "r-sq"))
        eps_sq = parse_rat(_need(prob, "epsilon-sq"))
        task.update({"element": group.word_str(g), "r_sq": certfmt.rat(r_sq), "epsilon_sq": certfmt.rat(eps_sq)})
        try:
            out = very_proximal_search(group, g, word_len, r_sq, eps_sq)
        except ValueError as e:
            raise ProblemError(1, 1, str(e)) from None
        if out is None:
            return certfmt.certificate(place, "matrix", header, task, "not-found", {}, []), EXIT_UNKNOWN
        f1, f2, w, cert = out
        mat = group.eval(w)
        claims = [certfmt.claim_word_eval(group.word_str(w), mat)] + certfmt.claims_for_proximal(mat, cert)
        result = {
            "f1": group.word_str(f1),
            "f2": group.word_str(f2),
            "word": group.word_str(w),
            "cert": certfmt.proximal_json(cert),
        }
        return certfmt.certificate(place, "matrix", header, task, "yes", result, claims), EXIT_OK
    if subop == "normal-proximal":
        normals = parse_normals()
        if len(normals) != 1:
            raise ProblemError(1, 1, "normal-proximal takes exactly one 'normal' line")
        try:
            out = normal_proximal(group, normals[0], None, budgets)
        except ValueError as e:
            raise ProblemError(1, 1, str(e)) from None
        if out is None:
            return certfmt.certificate(place, "matrix", header, task, "not-found", {}, []), EXIT_UNKNOWN
        mat = group.eval(out.word)
        proof_word = out.proof.to_word(list(normals[0].class_reps))
        claims = [
            certfmt.claim_word_eval(group.word_str(out.word), mat),
            {
                "type": "normal-membership",
                "element": group.word_str(out.word),
                "factorization": group.word_str(proof_word),
            },
        ] + certfmt.claims_for_proximal(mat, out.cert)
        result = {"word": group.word_str(out.word), "cert": certfmt.proximal_json(out.cert)}
        return certfmt.certificate(place, "matrix", header, task, "yes", result, claims), EXIT_OK
    if subop == "coset-pingpong":
        normals = parse_normals()
        if len(normals) != 1:
            raise ProblemError(1, 1, "coset-pingpong takes exactly one 'normal' line")
        data = normals[0]
        if not data.coset_reps:
            raise ProblemError(1, 1, "coset-pingpong needs a 'cosets' line")
        a_n = normal_proximal(group, data, None, budgets)
        if a_n is None:
            return certfmt.certificate(place, "matrix", header, task, "not-found", {}, []), EXIT_UNKNOWN
        got, failed = coset_pingpong(group, data, a_n, budgets)
        claims = []
        deltas = []
        for cr in got:
            mat = group.eval(cr.word)
            claims.append(certfmt.claim_word_eval(group.word_str(cr.word), mat))
            claims.append(
                {
                    "type": "normal-membership",
                    "element": group.word_str(concat(cr.word, word_inverse(cr.coset_rep))),
                    "factorization": group.word_str(cr.membership.to_word(list(data.class_reps))),
                }
            )
            claims.extend(certfmt.claims_for_proximal(mat, cr.cert))
            deltas.append({"coset": group.word_str(cr.coset_rep), "word": group.word_str(cr.word), "power": cr.power})
        result = {"deltas": deltas, "failed": [group.word_str(w) for w in failed], "a_N": group.word_str(a_n.word)}
        verdict = "yes" if got and not failed else ("unknown" if got else "not-found")
        return certfmt.certificate(place, "matrix", header, task, verdict, result, claims), _verdict_exit(verdict)
    if subop == "double-coset":
        h1 = group.parse_word(_need(prob, "h1"))
        h2 = group.parse_word(_need(prob, "h2"))
        cs = [group.parse_word(t.strip()) if t.strip() else () for _, spec in prob.task_all("coset-rep") for t in [spec]]
        c1 = auto_very_proximal(group.eval(h1))
        c2 = auto_very_proximal(group.eval(h2))
        if c1 is None or c2 is None:
            return certfmt.certificate(place, "matrix", header, task, "unknown", {"reason": "h1/h2 not certified"}, []), EXIT_UNKNOWN
        out = double_coset_wrap(group, h1, h2, c1, c2, cs, budgets)
        claims = []
        items = []
        for r in out:
            if r.skipped:
                items.append({"coset": group.word_str(r.original), "skipped": r.skipped})
                continue
            mat = group.eval(r.word)
            claims.append(certfmt.claim_word_eval(group.word_str(r.word), mat))
            claims.append(certfmt.claim_contraction(mat, r.cert))
            items.append({"coset": group.word_str(r.original), "m": r.m, "n": r.n, "word": group.word_str(r.word)})
        produced = [r for r in out if not r.skipped]
        verdict = "yes" if len(produced) == len([c for c in cs if c]) else "unknown"
        result = {"wrapped": items}
        return certfmt.certificate(place, "matrix", header, task, verdict, result, claims), _verdict_exit(verdict)
    raise ProblemError(1, 1, f"unknown synthesize subop {subop!r}")


def _report_payload(group: MarkedGroup, report) -> tuple[list[dict], dict]:
    claims: list[dict] = []
    result: dict = {
        "host": {"word": group.word_str(report.host_word), "power": report.host_power},
        "notes": list(report.notes),
        "verdict": report.verdict,
    }
    step1 = []
    for r in report.step1:
        mat = group.eval(r.word)
        claims.append(certfmt.claim_word_eval(group.word_str(r.word), mat))
        claims.extend(certfmt.claims_for_proximal(mat, r.cert))
        step1.append({"label": r.label, "word": group.word_str(r.word), "nest": r.nest_exponent})
    result["step1"] = step1
    result["step1_tuple"] = report.step1_tuple.verdict if report.step1_tuple else None
    step2 = {}
    for label, crs in report.step2.items():
        entries = []
        for cr in crs:
            mat = group.eval(cr.word)
            claims.append(certfmt.claim_word_eval(group.word_str(cr.word), mat))
            claims.extend(certfmt.claims_for_proximal(mat, cr.cert))
            entries.append({"coset": group.word_str(cr.coset_rep), "word": group.word_str(cr.word), "power": cr.power})
        step2[label] = entries
    result["step2"] = step2
    result["combined"] = report.combined.verdict if report.combined else None
    if report.oracle is not None:
        result["oracle"] = report.oracle.kind
        claims.append(certfmt.claim_oracle(6, report.oracle.kind, report.oracle.word, []))
    return claims, result


def cmd_tree(prob: Problem, args) -> tuple[dict, int]:
    am = _build_amalgam(prob)
    subop = _need(prob, "subop")
    header = _amalgam_header(prob)
    task = {"op": "tree", "subop": subop}
    radius = int(args.radius or prob.task_get("radius", "8"))
    if subop == "normal-form":
        text = _need(prob, "word")
        try:
            w = tree_parse_word(am, text)
        except TreeError as e:
            raise ProblemError(1, 1, str(e)) from None
        task["word"] = text
        claims = [
            {
                "type": "tree-normal-form",
                "word": text,
                "syllables": [list(s) for s in w.syllables],
                "tail": w.tail,
            }
        ]
        result = {"syllables": [list(s) for s in w.syllables], "tail": w.tail, "is_identity": w.is_identity()}
        return certfmt.certificate(None, "amalgam", header, task, "ok", result, claims), EXIT_OK
    if subop == "classify":
        text = _need(prob, "word")
        try:
            w = tree_parse_word(am, text)
        except TreeError as e:
            raise ProblemError(1, 1, str(e)) from None
        out = classify(w, am, radius_budget=radius)
        task["word"] = text
        claims = [
            {"type": "tree-classify", "word": text, "kind": out.kind, "translation_length": out.translation_length}
        ]
        result = {"kind": out.kind}
        if out.kind == "hyperbolic":
            result["translation_length"] = out.translation_length
            result["axis_edge"] = [certfmt.vertex_json(out.axis_edge[0]), certfmt.vertex_json(out.axis_edge[1])]
        elif out.kind == "elliptic":
            result["fixed_vertex"] = certfmt.vertex_json(out.fixed_vertex)
        verdict = "ok" if out.kind != "unknown" else "unknown"
        return certfmt.certificate(None, "amalgam", header, task, verdict, result, claims), _verdict_exit(verdict)
    if subop == "expand":
        ball_map = expand_tree(am, radius=radius)
        tree = BassSerreTree(am)
        claims = []
        listing = []
        for v, depth in sorted(ball_map.items(), key=lambda kv: (kv[1], str(kv[0]))):
            entry = {"vertex": certfmt.vertex_json(v), "depth": depth}
            if depth < radius:
                deg = len(tree.neighbors(v))
                entry["degree"] = deg
                claims.append({"type": "tree-degree", "vertex": certfmt.vertex_json(v), "degree": deg})
            listing.append(entry)
        task["radius"] = radius
        result = {"vertices": listing, "count": len(listing)}
        return certfmt.certificate(None, "amalgam", header, task, "ok", result, claims), EXIT_OK
    if subop == "pingpong":
        return _tree_pingpong_cert(prob, args)
    if subop == "kernel":
        k = kernel_of_action(am)
        claims = [{"type": "kernel", "elements": k}]
        result = {"elements": k, "names": [am.group_h.name_of(x) for x in k]}
        return certfmt.certificate(None, "amalgam", header, task, "ok", result, claims), EXIT_OK
    raise ProblemError(1, 1, f"unknown tree subop {subop!r}")


def cmd_verify(path: str) -> int:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cert = certfmt.loads(fh.read())
        ok, failures = certfmt.verify(cert)
    except (OSError, VerifyError) as e:
        print(f"verify: {e}", file=sys.stderr)
        return EXIT_INPUT
    if ok:
        print(f"verify: all {len(cert.get('claims', []))} claims re-checked", file=sys.stderr)
        return EXIT_OK
    for f in failures:
        print(f"verify: {f}", file=sys.stderr)
    return EXIT_REFUTED


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _run_problem(args, runner) -> int:
    try:
        with open(args.problem, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        prob = parse_problem(text)
        if args.place:
            if args.place == "arch":
                prob.place = ARCH
            elif args.place.startswith("p:"):
                prob.place = padic(int(args.place[2:]))
            else:
                raise ValueError(f"--place must be arch or p:PRIME, got {args.place!r}")
        cert, code = runner(prob, args)
    except ProblemError as e:
        print(f"{args.problem}:{e}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, TreeError, KeyError) as e:
        print(f"{args.problem}: {e}", file=sys.stderr)
        return EXIT_INPUT
    payload = certfmt.dumps(cert)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="freecert", description="Exact certificates for projective and tree dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("problem", help="problem file")
        p.add_argument("--out", help="write the certificate here instead of stdout")
        p.add_argument("--place", help="override the place: arch or p:PRIME")
        p.add_argument("--budget", action="append", help="NAME=VALUE, repeatable")
        p.add_argument("--radius", type=int, help="tree radius budget")
        p.add_argument("--oracle-len", type=int, dest="oracle_len", help="freeness oracle word length")

    for name in ("analyze", "pingpong", "synthesize", "tree"):
        common(sub.add_parser(name))
    vp = sub.add_parser("verify")
    vp.add_argument("certificate", help="certificate file to re-check")

    args = parser.parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args.certificate)
    runner = {"analyze": cmd_analyze, "pingpong": cmd_pingpong, "synthesize": cmd_synthesize, "tree": cmd_tree}[args.command]
    return _run_problem(args, runner)


if __name__ == "__main__":
    sys.exit(main())
