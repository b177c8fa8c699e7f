"""Certificate serialization and independent re-verification.

Certificates are canonical JSON: sorted keys, two-space indent, exact
rationals as "p/q" strings, a fixed seed echo, and no timestamps, so a
rerun produces byte-identical output.  Every certificate carries a list
of claims; the verifier re-checks each claim semantically (set verdicts,
containments, memberships, word algebra, enclosure inequalities,
deterministic recomputation of certified data) without re-running any
search.  Oracle no-relation results are search outcomes and are echoed,
not re-run.
"""

from __future__ import annotations

import json
from fractions import Fraction

from . import __version__
from .dynamics import (
    ContractionCert,
    Enclosure,
    ProximalCert,
    certify_contracting,
    contraction_gap_sq,
    direction_candidates,
    singular_profile,
)
from .projective import (
    Ball,
    HNbhd,
    ProjHyperplane,
    ProjMat,
    ProjPoint,
    ProjSet,
    apply,
    dist_sq,
    dist_to_hyperplane_sq,
    set_contains,
    set_disjoint,
    set_member,
)
from .scalar import ARCH, Place, Rat, cmp_sqrt_sum, format_rat, padic, parse_rat, sqrt_lower, sqrt_upper

FORMAT = "freecert-certificate/1"


class VerifyError(ValueError):
    """Certificate is structurally unusable (distinct from failing checks)."""


# ---------------------------------------------------------------------------
# Encoders
# ---------------------------------------------------------------------------


def rat(x: Rat) -> str:
    return format_rat(Fraction(x))


def place_str(place: Place) -> str:
    return str(place)


def place_from(s: str) -> Place:
    if s == "arch":
        return ARCH
    if s.startswith("p:"):
        return padic(int(s[2:]))
    raise VerifyError(f"bad place {s!r}")


def vec_json(v) -> list[str]:
    return [rat(c) for c in v]


def vec_from(data) -> tuple:
    return tuple(parse_rat(c) for c in data)


def mat_json(m: ProjMat) -> list[list[str]]:
    return [[rat(c) for c in row] for row in m.entries]


def mat_from(data, place: Place) -> ProjMat:
    return ProjMat(tuple(tuple(parse_rat(c) for c in row) for row in data), place)


def point_json(p: ProjPoint) -> list[str]:
    return vec_json(p.rep)


def point_from(data) -> ProjPoint:
    return ProjPoint(vec_from(data))


def plane_json(h: ProjHyperplane) -> list[str]:
    return vec_json(h.functional)


def plane_from(data) -> ProjHyperplane:
    return ProjHyperplane(vec_from(data))


def component_json(c) -> dict:
    if isinstance(c, Ball):
        return {"kind": "ball", "center": point_json(c.center), "radius_sq": rat(c.radius_sq)}
    return {"kind": "hnbhd", "plane": plane_json(c.plane), "radius_sq": rat(c.radius_sq)}


def component_from(data):
    if data["kind"] == "ball":
        return Ball(point_from(data["center"]), parse_rat(data["radius_sq"]))
    if data["kind"] == "hnbhd":
        return HNbhd(plane_from(data["plane"]), parse_rat(data["radius_sq"]))
    raise VerifyError(f"bad set component kind {data.get('kind')!r}")


def set_json(s: ProjSet) -> list[dict]:
    return [component_json(c) for c in s.components]


def set_from(data) -> ProjSet:
    return ProjSet(tuple(component_from(c) for c in data))


def enclosure_json(e: Enclosure) -> dict:
    return {
        "center": point_json(e.ball.center),
        "radius_sq": rat(e.ball.radius_sq),
        "lipschitz_sq": rat(e.lipschitz_sq),
        "region_low_sq": rat(e.region_low_sq),
        "move_sq": rat(e.move_sq),
    }


def contraction_json(c: ContractionCert) -> dict:
    return {
        "epsilon_sq": rat(c.epsilon_sq),
        "attract": point_json(c.attract),
        "repel": plane_json(c.repel),
        "method": c.method,
        "attract_err_sq": rat(c.attract_err_sq),
        "repel_err_sq": rat(c.repel_err_sq),
        "gap_sq_hi": rat(c.gap_sq_hi),
        "image_radius_sq": rat(c.image_radius_sq),
    }


def proximal_json(c: ProximalCert) -> dict:
    out = {
        "r_sq": rat(c.r_sq),
        "epsilon_sq": rat(c.epsilon_sq),
        "contraction": contraction_json(c.contraction),
        "fixed_point": enclosure_json(c.fixed_point),
        "fixed_plane_dual": enclosure_json(c.fixed_plane_dual),
    }
    if c.very is not None:
        out["inverse"] = proximal_json(c.very)
    return out


def interval_json(iv) -> dict:
    return {"lo": rat(iv.lo), "hi": rat(iv.hi)}


# ---------------------------------------------------------------------------
# Claims: emitted next to certified data, re-checked by the verifier
# ---------------------------------------------------------------------------


def claim_set_disjoint(left: ProjSet, right: ProjSet, note: str = "") -> dict:
    return {"type": "set-disjoint", "left": set_json(left), "right": set_json(right), "note": note}


def claim_set_contains(outer: ProjSet, inner: ProjSet, closed_inner: bool = False, note: str = "") -> dict:
    return {
        "type": "set-contains",
        "outer": set_json(outer),
        "inner": set_json(inner),
        "closed_inner": closed_inner,
        "note": note,
    }


def claim_word_eval(word: str, matrix: ProjMat, note: str = "") -> dict:
    return {"type": "word-eval", "word": word, "matrix": mat_json(matrix), "note": note}


def claim_contraction(matrix: ProjMat, cert: ContractionCert) -> dict:
    return {"type": "contraction", "matrix": mat_json(matrix), "cert": contraction_json(cert)}


def claim_contraction_refuted(matrix: ProjMat, epsilon_sq: Rat, witness: ProjPoint, attract: ProjPoint, repel: ProjHyperplane) -> dict:
    return {
        "type": "contraction-refuted",
        "matrix": mat_json(matrix),
        "epsilon_sq": rat(epsilon_sq),
        "witness": point_json(witness),
        "attract": point_json(attract),
        "repel": plane_json(repel),
    }


def claim_point_plane_far(point: ProjPoint, plane: ProjHyperplane, r_sq: Rat) -> dict:
    return {"type": "point-plane-far", "point": point_json(point), "plane": plane_json(plane), "r_sq": rat(r_sq)}


def claim_selfmap(matrix: ProjMat, enclosure: Enclosure, repel: ProjHyperplane, repel_err_sq: Rat, gap_sq_hi: Rat, epsilon_sq: Rat, attract: ProjPoint) -> dict:
    return {
        "type": "selfmap-enclosure",
        "matrix": mat_json(matrix),
        "enclosure": enclosure_json(enclosure),
        "repel": plane_json(repel),
        "repel_err_sq": rat(repel_err_sq),
        "gap_sq_hi": rat(gap_sq_hi),
        "epsilon_sq": rat(epsilon_sq),
        "attract": point_json(attract),
    }


def claims_for_proximal(matrix: ProjMat, cert: ProximalCert) -> list[dict]:
    out = [
        claim_contraction(matrix, cert.contraction),
        claim_point_plane_far(cert.contraction.attract, cert.contraction.repel, cert.r_sq),
        claim_selfmap(
            matrix,
            cert.fixed_point,
            cert.contraction.repel,
            cert.contraction.repel_err_sq,
            cert.contraction.gap_sq_hi,
            cert.epsilon_sq,
            cert.contraction.attract,
        ),
        claim_selfmap(
            matrix.transpose(),
            cert.fixed_plane_dual,
            ProjHyperplane(cert.contraction.attract.rep),
            cert.contraction.attract_err_sq,
            cert.contraction.gap_sq_hi,
            cert.epsilon_sq,
            cert.contraction.repel.dual_point(),
        ),
    ]
    if cert.very is not None:
        out.extend(claims_for_proximal(matrix.inverse(), cert.very))
        a_p = ProjSet((cert.contraction.attract_set,))
        r_p = ProjSet((cert.contraction.repel_set,))
        a_m = ProjSet((cert.very.contraction.attract_set,))
        r_m = ProjSet((cert.very.contraction.repel_set,))
        out.append(claim_set_disjoint(a_p, r_p, "very: A+ vs R+"))
        out.append(claim_set_disjoint(a_p, a_m, "very: A+ vs A-"))
        out.append(claim_set_disjoint(a_m, r_m, "very: A- vs R-"))
    return out


def claim_oracle(max_len: int, result_kind: str, word: str | None, names: list[str]) -> dict:
    return {"type": "oracle", "max_len": max_len, "result": result_kind, "word": word, "names": names}


# ---------------------------------------------------------------------------
# Certificate assembly and canonical dumping
# ---------------------------------------------------------------------------


def certificate(place: Place | None, backend: str, header: dict, task: dict, verdict: str, result: dict, claims: list[dict]) -> dict:
    return {
        "format": FORMAT,
        "tool": {"name": "freecert", "version": __version__},
        "seed": 0,
        "place": place_str(place) if place is not None else None,
        "backend": backend,
        "header": header,
        "task": task,
        "verdict": verdict,
        "result": result,
        "claims": claims,
    }


def dumps(cert: dict) -> str:
    return json.dumps(cert, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def loads(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise VerifyError(f"not valid certificate JSON: {e}") from None
    if not isinstance(data, dict) or data.get("format") != FORMAT:
        raise VerifyError("missing or unsupported certificate format marker")
    return data


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def _check_contraction(matrix: ProjMat, stored: dict) -> bool:
    """Re-derive the contraction facts for the stored candidate pair.

    Checks, in order: the stored gap bound is a genuine upper bound for
    kappa^2; the stored direction errors bound the recomputed ones for the
    same candidates; the image-radius inequality B <= eps holds from the
    stored numbers.
    """
    eps_sq = parse_rat(stored["epsilon_sq"])
    attract = point_from(stored["attract"])
    repel = plane_from(stored["repel"])
    gap_hi = parse_rat(stored["gap_sq_hi"])
    a_err = parse_rat(stored["attract_err_sq"])
    r_err = parse_rat(stored["repel_err_sq"])
    image_sq = parse_rat(stored["image_radius_sq"])
    recomputed = contraction_gap_sq(matrix)
    if gap_hi < recomputed.hi:
        return False
    dirs = direction_candidates(matrix)
    if dirs.attract != attract or dirs.repel != repel:
        return False
    if dirs.attract_err_sq is None or dirs.repel_err_sq is None:
        return False
    if a_err < dirs.attract_err_sq or r_err < dirs.repel_err_sq:
        return False
    u_kappa = sqrt_upper(gap_hi)
    l_eps = sqrt_lower(eps_sq)
    denom = l_eps - sqrt_upper(r_err)
    if denom <= 0:
        return False
    bound = u_kappa / denom + sqrt_upper(a_err)
    if bound > l_eps:
        return False
    # the stored image radius must dominate the re-derived bound and stay
    # within the epsilon ball
    return image_sq >= bound * bound and image_sq <= eps_sq


def _check_selfmap(claim: dict, place: Place) -> bool:
    matrix = mat_from(claim["matrix"], place)
    enc = claim["enclosure"]
    center = point_from(enc["center"])
    t_sq = parse_rat(enc["radius_sq"])
    repel = plane_from(claim["repel"])
    r_err = parse_rat(claim["repel_err_sq"])
    gap_hi = parse_rat(claim["gap_sq_hi"])
    eps_sq = parse_rat(claim["epsilon_sq"])
    attract = point_from(claim["attract"])
    if contraction_gap_sq(matrix).hi > gap_hi:
        return False
    l_d = sqrt_lower(dist_to_hyperplane_sq(center, repel, place))
    d_low = l_d - sqrt_upper(t_sq) - sqrt_upper(r_err)
    if d_low <= 0:
        return False
    lip = sqrt_upper(gap_hi) / (d_low * d_low)
    if lip >= 1:
        return False
    move_sq = dist_sq(apply(matrix, center), center, place)
    if not move_sq < (1 - lip) ** 2 * t_sq:
        return False
    return cmp_sqrt_sum(dist_sq(center, attract, place), t_sq, eps_sq) <= 0


def check_claim(claim: dict, place: Place | None, header: dict) -> bool:
    kind = claim.get("type")
    if kind == "set-disjoint":
        return set_disjoint(set_from(claim["left"]), set_from(claim["right"]), place).kind == "disjoint"
    if kind == "set-contains":
        return set_contains(set_from(claim["outer"]), set_from(claim["inner"]), place, claim.get("closed_inner", False))
    if kind == "member":
        got = set_member(point_from(claim["point"]), set_from(claim["set"]), place)
        return got == claim["value"]
    if kind == "point-plane-far":
        d2 = dist_to_hyperplane_sq(point_from(claim["point"]), plane_from(claim["plane"]), place)
        return d2 >= parse_rat(claim["r_sq"])
    if kind == "word-eval":
        group = _group_from_header(header, place)
        return group.eval(group.parse_word(claim["word"])).proportional_to(mat_from(claim["matrix"], place))
    if kind == "contraction":
        return _check_contraction(mat_from(claim["matrix"], place), claim["cert"])
    if kind == "contraction-refuted":
        m = mat_from(claim["matrix"], place)
        eps_sq = parse_rat(claim["epsilon_sq"])
        x = point_from(claim["witness"])
        repel = plane_from(claim["repel"])
        attract = point_from(claim["attract"])
        return dist_to_hyperplane_sq(x, repel, place) > eps_sq and dist_sq(apply(m, x), attract, place) > eps_sq
    if kind == "selfmap-enclosure":
        return _check_selfmap(claim, place)
    if kind == "normal-membership":
        group = _group_from_header(header, place)
        lhs = group.eval(group.parse_word(claim["element"]))
        rhs = group.eval(group.parse_word(claim["factorization"]))
        return lhs.proportional_to(rhs)
    if kind == "oracle":
        return True  # search outcome: echoed, not re-run
    if kind in ("tree-classify", "tree-evidence", "shadow-disjoint", "kernel", "tree-normal-form", "tree-degree"):
        return _check_tree_claim(kind, claim, header)
    raise VerifyError(f"unknown claim type {kind!r}")


def _group_from_header(header: dict, place: Place):
    from .synthesis import MarkedGroup

    gens = header.get("generators")
    if not gens:
        raise VerifyError("certificate lacks a generator table")
    return MarkedGroup(tuple((name, mat_from(m, place)) for name, m in sorted(gens.items())))


def _amalgam_from_header(header: dict):
    from .tree import AmalgamData, FiniteGroup

    data = header.get("amalgam")
    if not data:
        raise VerifyError("certificate lacks an amalgam table")
    ga = FiniteGroup(tuple(tuple(r) for r in data["table_a"]), tuple(data["names_a"]) if data.get("names_a") else None)
    gb = FiniteGroup(tuple(tuple(r) for r in data["table_b"]), tuple(data["names_b"]) if data.get("names_b") else None)
    gh = FiniteGroup(tuple(tuple(r) for r in data["table_h"]), tuple(data["names_h"]) if data.get("names_h") else None)
    return AmalgamData(ga, gb, gh, tuple(data["embed_a"]), tuple(data["embed_b"]))


def _check_tree_claim(kind: str, claim: dict, header: dict) -> bool:
    from .tree import BassSerreTree, ShadowSet, classify, kernel_of_action, parse_word

    am = _amalgam_from_header(header)
    if kind == "kernel":
        return kernel_of_action(am) == list(claim["elements"])
    if kind == "tree-normal-form":
        w = parse_word(am, claim["word"])
        return [list(s) for s in w.syllables] == [list(s) for s in claim["syllables"]] and w.tail == claim["tail"]
    if kind == "tree-classify":
        out = classify(parse_word(am, claim["word"]), am)
        if out.kind != claim["kind"]:
            return False
        if out.kind == "hyperbolic":
            return out.translation_length == claim["translation_length"]
        return True
    if kind == "shadow-disjoint":
        tree = BassSerreTree(am)
        s1 = ShadowSet(tree, _vertex_from(claim["left"]["x"]), _vertex_from(claim["left"]["y"]))
        s2 = ShadowSet(tree, _vertex_from(claim["right"]["x"]), _vertex_from(claim["right"]["y"]))
        return s1.disjoint_from(s2).kind == "disjoint"
    if kind == "tree-evidence":
        from .tree import axis_shadow_sets

        tree = BassSerreTree(am)
        g = parse_word(am, claim["word"])
        cls = classify(g, am)
        if cls.kind != "hyperbolic":
            return False
        a_p, r_p, a_m, r_m = axis_shadow_sets(tree, g, cls)
        return [shadow_json(a_p), shadow_json(r_p), shadow_json(a_m), shadow_json(r_m)] == claim["sets"]
    if kind == "tree-degree":
        tree = BassSerreTree(am)
        v = _vertex_from(claim["vertex"])
        return len(tree.neighbors(v)) == claim["degree"]
    raise VerifyError(f"unknown tree claim {kind!r}")


def vertex_json(v) -> list:
    return [v[0], [list(l) for l in v[1]]]


def _vertex_from(data) -> tuple:
    return (data[0], tuple((l[0], int(l[1])) for l in data[1]))


def shadow_json(s) -> dict:
    return {"x": vertex_json(s.x), "y": vertex_json(s.y)}


def verify(cert: dict) -> tuple[bool, list[str]]:
    """Re-check every claim; returns (all passed, failure messages)."""
    place = place_from(cert["place"]) if cert.get("place") else None
    header = cert.get("header", {})
    failures = []
    claims = cert.get("claims")
    if claims is None:
        raise VerifyError("certificate lacks a claims list")
    for i, claim in enumerate(claims):
        try:
            ok = check_claim(claim, place, header)
        except VerifyError:
            raise
        except Exception as e:  # malformed payloads inside a claim
            failures.append(f"claim {i} ({claim.get('type')}): {e}")
            continue
        if not ok:
            failures.append(f"claim {i} ({claim.get('type')}{': ' + claim.get('note') if claim.get('note') else ''}) failed")
    return not failures, failures
