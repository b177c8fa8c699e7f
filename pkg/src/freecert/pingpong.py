"""Ping-pong tuples and an independent exact freeness oracle.

A tuple is certified from three ingredient checks: the per-player and
cross-player disjointness of the declared attracting/repelling sets, and
mapping evidence for each player (a proximality certificate on the
projective backend, a hyperbolicity witness on the tree backend).  The
complement of a repelling set is never enumerated: evidence sets are
compared against declared sets through certified containments only.

The oracle is deliberately independent: it enumerates every nonempty
reduced word in the players and their inverses in shortlex order
(inverses ordered after positives) and multiplies out exactly, so a
certified tuple can be cross-examined without trusting any geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dynamics import ProximalCert
from .projective import ProjSet, set_contains, set_disjoint
from .scalar import Place


@dataclass(frozen=True)
class PingPongPlayer:
    """An element with declared attracting/repelling sets and evidence.

    The mapping conditions g(X - R+) in A+ and g^-1(X - R-) in A- are
    established through the evidence object, never pointwise.
    """

    name: str
    element: object
    a_plus: object
    r_plus: object
    a_minus: object
    r_minus: object
    evidence: object

    def sets(self):
        return (
            ("A+", self.a_plus),
            ("R+", self.r_plus),
            ("A-", self.a_minus),
            ("R-", self.r_minus),
        )


@dataclass(frozen=True)
class TupleCheck:
    kind: str  # "disjoint" | "evidence"
    detail: str
    ok: bool


@dataclass(frozen=True)
class PingPongTuple:
    players: tuple[PingPongPlayer, ...]
    verdict: str  # "certified" | "refuted" | "unknown"
    witness: object | None = None
    witness_detail: str = ""
    checks: tuple[TupleCheck, ...] = field(default_factory=tuple)


def _place_of(player: PingPongPlayer) -> Place | None:
    el = player.element
    return getattr(el, "place", None)


def _disjoint(a, b, place):
    if isinstance(a, ProjSet):
        return set_disjoint(a, b, place)
    return a.disjoint_from(b)


def _backend_key(player: PingPongPlayer) -> str:
    if isinstance(player.a_plus, ProjSet):
        pl = _place_of(player)
        return f"proj/{player.a_plus.dim}/{pl}"
    return f"tree/{type(player.element).__name__}"


def _proj_evidence_ok(player: PingPongPlayer, place: Place) -> tuple[bool, str]:
    ev = player.evidence
    if not isinstance(ev, ProximalCert):
        return False, f"{player.name}: projective evidence must be a proximality certificate"
    if ev.very is None:
        return False, f"{player.name}: evidence lacks the inverse direction"
    pairs = (
        (ev, player.a_plus, player.r_plus, "forward"),
        (ev.very, player.a_minus, player.r_minus, "inverse"),
    )
    for cert, a_decl, r_decl, tag in pairs:
        c = cert.contraction
        image = ProjSet((type(c.attract_set)(c.attract, c.image_radius_sq),))
        if not set_contains(a_decl, image, place, closed_inner=True):
            return False, f"{player.name}: {tag} image ball not certified inside the declared attracting set"
        repel_ev = ProjSet((c.repel_set,))
        if not set_contains(r_decl, repel_ev, place):
            return False, f"{player.name}: {tag} evidence repelling set not certified inside the declared one"
    return True, ""


def _evidence_ok(player: PingPongPlayer) -> tuple[bool, str]:
    if isinstance(player.a_plus, ProjSet):
        return _proj_evidence_ok(player, _place_of(player))
    ev = player.evidence
    if hasattr(ev, "check_mapping"):
        return ev.check_mapping(player)
    return False, f"{player.name}: no usable mapping evidence"


def certify_tuple(players: list[PingPongPlayer]) -> PingPongTuple:
    """Certify the general four-set ping-pong conditions.

    (a) per player, A+ is disjoint from A- and R+, and A- from R-;
    (b) across players, each A of one is disjoint from every set of the
        other; (c) mapping evidence is present and its sets are certified
        inside the declared ones.  Certified tuples freely generate.
    """
    if not players:
        raise ValueError("at least one player required")
    keys = {_backend_key(p) for p in players}
    if len(keys) != 1:
        raise ValueError("players use mismatched action backends")
    place = _place_of(players[0])
    checks: list[TupleCheck] = []
    unknown: str | None = None

    def record(kind: str, detail: str, verdict) -> object | None:
        nonlocal unknown
        if verdict.kind == "disjoint":
            checks.append(TupleCheck(kind, detail, True))
            return None
        checks.append(TupleCheck(kind, detail, False))
        if verdict.kind == "overlap":
            return verdict
        unknown = detail
        return None

    for p in players:
        own = (("A+", p.a_plus, "A-", p.a_minus), ("A+", p.a_plus, "R+", p.r_plus), ("A-", p.a_minus, "R-", p.r_minus))
        for la, a, lb, b in own:
            v = _disjoint(a, b, place)
            bad = record("disjoint", f"{p.name}.{la} vs {p.name}.{lb}", v)
            if bad is not None:
                return PingPongTuple(tuple(players), "refuted", bad.witness, f"{p.name}.{la} meets {p.name}.{lb}", tuple(checks))
    for i, p in enumerate(players):
        for j, q in enumerate(players):
            if i == j:
                continue
            for la, a in (("A+", p.a_plus), ("A-", p.a_minus)):
                for lb, b in q.sets():
                    v = _disjoint(a, b, place)
                    bad = record("disjoint", f"{p.name}.{la} vs {q.name}.{lb}", v)
                    if bad is not None:
                        return PingPongTuple(
                            tuple(players), "refuted", bad.witness, f"{p.name}.{la} meets {q.name}.{lb}", tuple(checks)
                        )
    for p in players:
        ok, why = _evidence_ok(p)
        checks.append(TupleCheck("evidence", why or f"{p.name}: mapping evidence certified", ok))
        if not ok:
            return PingPongTuple(tuple(players), "unknown", None, why, tuple(checks))
    if unknown is not None:
        return PingPongTuple(tuple(players), "unknown", None, unknown, tuple(checks))
    return PingPongTuple(tuple(players), "certified", None, "", tuple(checks))


def simple_player(name: str, element, attract, repel, evidence) -> PingPongPlayer:
    """The two-set convention R- = A+ and R+ = A-: attract plays A+, repel plays A-."""
    return PingPongPlayer(name, element, attract, repel, repel, attract, evidence)


def certify_simple_tuple(players: list[PingPongPlayer]) -> PingPongTuple:
    """Certify a tuple in the simplified disjoint form.

    Players should come from simple_player(); the conditions reduce to
    pairwise disjointness of all attracting and repelling sets plus the
    usual mapping evidence.
    """
    return certify_tuple(players)


# ---------------------------------------------------------------------------
# Freeness oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    kind: str  # "no-relation" | "relation"
    letters: tuple[tuple[int, int], ...] | None = None  # (generator index, +-1)
    word: str | None = None


def word_string(letters, names) -> str:
    parts = []
    for idx, exp in letters:
        parts.append(names[idx] if exp > 0 else f"{names[idx]}^-1")
    return " ".join(parts)


def freeness_oracle(elements: list, max_len: int, names: list[str] | None = None) -> OracleResult:
    """Search every nonempty reduced word of length <= max_len for one
    that multiplies out to the identity.

    Elements must support @ (composition), inverse(), and is_identity();
    both exact backends (matrices up to scalar, amalgam normal forms) do.
    Deterministic shortlex order: by length, positives before inverses,
    so a returned relation is the shortlex-minimal one.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    k = len(elements)
    if k == 0:
        raise ValueError("no elements given")
    if names is None:
        names = [f"g{i}" for i in range(k)]
    letters = [(i, 1) for i in range(k)] + [(i, -1) for i in range(k)]
    values = [elements[i] if e > 0 else elements[i].inverse() for i, e in letters]

    found: list[tuple[tuple[int, int], ...]] = []

    def dfs(prefix: list[int], value, target_len: int) -> bool:
        if len(prefix) == target_len:
            if value.is_identity():
                found.append(tuple(letters[s] for s in prefix))
                return True
            return False
        for s, lt in enumerate(letters):
            if prefix:
                pi, pe = letters[prefix[-1]]
                if lt[0] == pi and lt[1] == -pe:
                    continue  # not freely reduced
            nxt = value @ values[s] if value is not None else values[s]
            if dfs(prefix + [s], nxt, target_len):
                return True
        return False

    for length in range(1, max_len + 1):
        if dfs([], None, length):
            w = found[0]
            return OracleResult("relation", w, word_string(w, names))
    return OracleResult("no-relation")
