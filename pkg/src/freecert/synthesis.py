"""Explicit constructions: contracting conjugates, the g b1 g^-(1+k) b2
g^(k+1) b3 g^-1 element, very-proximal synthesis, proximal elements inside
normal subgroups, coset representatives, the double-coset wrap, and the
truncated prodense builder.

Membership in a normal subgroup is never decided: candidates are built
syntactically as products of conjugates of the class representatives, so
membership holds by construction and can be re-checked at the word level.
All "sufficiently large" exponents are found by bounded smallest-first
search over certified checks; searches are deterministic and NotFound is
an honest outcome.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics import (
    ContractionCert,
    ProximalCert,
    certify_contracting,
    certify_very_proximal,
    contraction_gap_sq,
    direction_candidates,
    push_set,
    singular_profile,
)
from .pingpong import OracleResult, PingPongPlayer, PingPongTuple, certify_tuple, freeness_oracle
from .projective import (
    Ball,
    ProjMat,
    ProjSet,
    ProjPoint,
    apply,
    ball,
    dist_sq,
    dist_to_hyperplane_sq,
    identity,
    set_contains,
    set_disjoint,
)
from .scalar import Rat, sqrt_upper

Word = tuple[tuple[int, int], ...]  # letters (generator index, +-1), freely reduced


def reduce_word(letters) -> Word:
    out: list[tuple[int, int]] = []
    for idx, exp in letters:
        if out and out[-1][0] == idx and out[-1][1] == -exp:
            out.pop()
        else:
            out.append((idx, exp))
    return tuple(out)


def word_inverse(w: Word) -> Word:
    return tuple((i, -e) for i, e in reversed(w))


def concat(*words: Word) -> Word:
    out: list[tuple[int, int]] = []
    for w in words:
        for letter in w:
            if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
                out.pop()
            else:
                out.append(letter)
    return tuple(out)


def word_power(w: Word, n: int) -> Word:
    if n < 0:
        return word_power(word_inverse(w), -n)
    out: Word = ()
    for _ in range(n):
        out = concat(out, w)
    return out


@dataclass(frozen=True)
class MarkedGroup:
    """Named invertible generators over a shared place and dimension;
    identity testing is matrix equality up to a scalar."""

    gens: tuple[tuple[str, ProjMat], ...]

    def __post_init__(self) -> None:
        if not self.gens:
            raise ValueError("a marked group needs at least one generator")
        dims = {m.dim for _, m in self.gens}
        places = {m.place for _, m in self.gens}
        if len(dims) != 1 or len(places) != 1:
            raise ValueError("generators must share dimension and place")

    @property
    def place(self):
        return self.gens[0][1].place

    @property
    def dim(self) -> int:
        return self.gens[0][1].dim

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.gens]

    def gen_index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.gens):
            if n == name:
                return i
        raise KeyError(f"unknown generator {name!r}")

    def eval(self, w: Word) -> ProjMat:
        out = identity(self.dim, self.place)
        for idx, exp in w:
            m = self.gens[idx][1]
            out = out @ (m if exp > 0 else m.inverse())
        return out

    def parse_word(self, text: str) -> Word:
        letters = []
        for token in text.split():
            name, _, power = token.partition("^")
            idx = self.gen_index(name)
            e = int(power) if power else 1
            letters.extend([(idx, 1 if e > 0 else -1)] * abs(e))
        return reduce_word(letters)

    def word_str(self, w: Word) -> str:
        if not w:
            return "e"
        parts = []
        for idx, exp in w:
            parts.append(self.names[idx] if exp > 0 else f"{self.names[idx]}^-1")
        return " ".join(parts)

    def words_upto(self, max_len: int):
        """All nonempty freely reduced words of length <= max_len, shortlex,
        inverses ordered after positives."""
        k = len(self.gens)
        letters = [(i, 1) for i in range(k)] + [(i, -1) for i in range(k)]
        frontier: list[Word] = [()]
        for _ in range(max_len):
            nxt = []
            for w in frontier:
                for lt in letters:
                    if w and w[-1][0] == lt[0] and w[-1][1] == -lt[1]:
                        continue
                    nw = w + (lt,)
                    nxt.append(nw)
                    yield nw
            frontier = nxt


# ---------------------------------------------------------------------------
# Syntactic membership in normal closures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConjugateFactor:
    """t r^e t^-1 for a class representative r: visibly in the normal closure."""

    conjugator: Word
    rep_index: int
    exponent: int  # +-1


@dataclass(frozen=True)
class NormalWord:
    """A product of conjugates of class representatives.

    The data structure is the membership proof: flattening yields the
    group word, and any conjugate or positive power of a NormalWord is
    again one.
    """

    factors: tuple[ConjugateFactor, ...]

    def to_word(self, class_reps: list[Word]) -> Word:
        out: Word = ()
        for f in self.factors:
            r = class_reps[f.rep_index]
            if f.exponent < 0:
                r = word_inverse(r)
            out = concat(out, f.conjugator, r, word_inverse(f.conjugator))
        return out

    def conjugated_by(self, t: Word) -> "NormalWord":
        return NormalWord(tuple(ConjugateFactor(concat(t, f.conjugator), f.rep_index, f.exponent) for f in self.factors))

    def times(self, other: "NormalWord") -> "NormalWord":
        return NormalWord(self.factors + other.factors)

    def power(self, n: int) -> "NormalWord":
        if n < 0:
            inv = NormalWord(tuple(ConjugateFactor(f.conjugator, f.rep_index, -f.exponent) for f in reversed(self.factors)))
            return inv.power(-n)
        out = NormalWord(())
        for _ in range(n):
            out = out.times(self)
        return out


@dataclass(frozen=True)
class NormalData:
    label: str
    class_reps: tuple[Word, ...]
    coset_reps: tuple[Word, ...] = ()

    def __post_init__(self) -> None:
        if not self.class_reps:
            raise ValueError("a normal datum needs class representatives")


def validate_normal_data(group: MarkedGroup, data: NormalData) -> None:
    for w in data.class_reps:
        if group.eval(w).is_identity():
            raise ValueError("trivial class")


# ---------------------------------------------------------------------------
# Automatic (r, eps) selection for certificates
# ---------------------------------------------------------------------------


def _pow4_at_most(x: Rat, depth: int = 60) -> Rat | None:
    """Largest 4^-j <= x with j >= 1, or None."""
    if x <= 0:
        return None
    q = Fraction(1, 4)
    for _ in range(depth):
        if q <= x:
            return q
        q /= 4
    return None


def _pow4_at_least(x: Rat, lo_bits: int = 60) -> Rat | None:
    """Smallest 4^-j >= x with j >= 1, or None (x must be < 1)."""
    if x >= Fraction(1, 4):
        return Fraction(1, 4) if x <= Fraction(1, 4) else None
    q = Fraction(1, 4)
    best = None
    for _ in range(lo_bits):
        if q >= x:
            best = q
            q /= 4
        else:
            break
    return best


def _pow2_at_least(x: Rat, depth: int = 120) -> Rat | None:
    """Smallest 2^-j >= x with j >= 1, or None (needs x <= 1/2)."""
    if x <= 0 or x > Fraction(1, 2):
        return None
    q = Fraction(1, 2)
    best = None
    for _ in range(depth):
        if q >= x:
            best = q
            q /= 2
        else:
            break
    return best


def auto_very_proximal(m: ProjMat) -> ProximalCert | None:
    """Pick (r, eps) by a fixed rule and certify m very-proximal, or give up.

    r^2 is the exact candidate attract-repel distance (the smaller of the
    two directions); eps^2 starts at the smallest power of 1/2 above the
    certified kappa (the round-up is the slack the gap test needs) and is
    retried doubled while the r > 2 eps window allows.
    """
    mi = m.inverse()
    gap = max(contraction_gap_sq(m).hi, contraction_gap_sq(mi).hi)
    kappa_up = sqrt_upper(gap)
    eps0 = _pow2_at_least(kappa_up)
    if eps0 is None:
        return None
    d_fwd = _candidate_gap(m)
    d_bwd = _candidate_gap(mi)
    if d_fwd is None or d_bwd is None:
        return None
    r_sq = min(d_fwd, d_bwd)
    for eps_sq in (eps0, 2 * eps0, 4 * eps0):
        if not 0 < eps_sq < 1 or r_sq <= 4 * eps_sq:
            continue
        v = certify_very_proximal(m, r_sq, eps_sq)
        if v.kind == "yes":
            return v.cert
    return None


def _candidate_gap(m: ProjMat) -> Rat | None:
    dirs = direction_candidates(m)
    if dirs.attract_err_sq is None or dirs.repel_err_sq is None:
        return None
    return dist_to_hyperplane_sq(dirs.attract, dirs.repel, m.place)


def auto_contracting(m: ProjMat) -> ContractionCert | None:
    gap = contraction_gap_sq(m).hi
    eps0 = _pow2_at_least(sqrt_upper(gap))
    if eps0 is None:
        return None
    for eps_sq in (eps0, 2 * eps0, 4 * eps0):
        if eps_sq >= 1:
            continue
        v = certify_contracting(m, eps_sq)
        if v.kind == "yes":
            return v.cert
    return None


def proximal_sets(cert: ProximalCert) -> tuple[ProjSet, ProjSet, ProjSet, ProjSet]:
    """(A+, R+, A-, R-) as declared epsilon-sets of the certificate pair."""
    c, ci = cert.contraction, cert.very.contraction
    return (
        ProjSet((c.attract_set,)),
        ProjSet((c.repel_set,)),
        ProjSet((ci.attract_set,)),
        ProjSet((ci.repel_set,)),
    )


def player_from_cert(name: str, g: ProjMat, cert: ProximalCert) -> PingPongPlayer:
    a_p, r_p, a_m, r_m = proximal_sets(cert)
    return PingPongPlayer(name, g, a_p, r_p, a_m, r_m, cert)


# ---------------------------------------------------------------------------
# Budgets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Budgets:
    host_word_len: int = 2
    host_power_max: int = 16
    conj_len: int = 1
    num_factors: int = 2
    power_max: int = 6
    nest_max: int = 10
    pair_word_len: int = 2
    k_max: int = 32
    m_max: int = 12
    n_max: int = 12
    general_position: int = 8

    def updated(self, **kw) -> "Budgets":
        from dataclasses import replace

        return replace(self, **kw)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def conjugate_contract(
    group: MarkedGroup,
    g: Word,
    x: Word,
    m_max: int,
    epsilon_sq: Rat,
    g_cert: ProximalCert | None = None,
) -> tuple[int, Word, ContractionCert] | None:
    """Smallest m <= m_max making y = g^m x g^-m certifiably eps-contracting.

    Requires g certified very-proximal and x in general position: x must
    certifiably move the inverse's fixed point off the fixed hyperplane
    (checked against the certificate's enclosures)."""
    gm = group.eval(g)
    xm = group.eval(x)
    if g_cert is None:
        g_cert = auto_very_proximal(gm)
        if g_cert is None:
            raise ValueError("g is not certified very-proximal")
    fp_inv = g_cert.very.fixed_point.ball  # encloses the fixed point of g^-1
    moved = push_set(xm, ProjSet((fp_inv,)))
    plane_enc = ProjSet((g_cert.fixed_plane_nbhd,))
    if set_disjoint(moved, plane_enc, group.place).kind != "disjoint":
        raise ValueError("x not in general position")
    acc = gm
    for m in range(1, m_max + 1):
        y = acc @ xm @ acc.inverse()
        v = certify_contracting(y, epsilon_sq)
        if v.kind == "yes":
            word = concat(word_power(g, m), x, word_power(g, -m))
            return m, word, v.cert
        if m < m_max:
            acc = acc @ gm
    return None


@dataclass(frozen=True)
class BBBResult:
    k: int
    word: Word
    attract: ProjSet
    repel: ProjSet
    cert: ContractionCert
    inside_host: bool


def b1b2b3_synthesize(
    group: MarkedGroup,
    g: Word,
    attract: ProjSet,
    repel: ProjSet,
    b1: Word,
    b2: Word,
    b3: Word,
    k_max: int,
) -> BBBResult | None:
    """Search the smallest k <= k_max making
    a = g b1 g^-(1+k) b2 g^(k+1) b3 g^-1 certifiably d-contracting with
    attracting set g b1 g^-k (repel) and repelling set g b3^-1 g^-k (repel),
    both certified inside the declared attracting set.

    The four hypothesis disjointnesses are certified on pushed supersets
    first; a failure is an error naming the failing condition."""
    place = group.place
    gm = group.eval(g)
    b1m, b2m, b3m = group.eval(b1), group.eval(b2), group.eval(b3)
    hyps = (
        ("b1 R meets R", push_set(b1m, repel), repel),
        ("b2 A meets A", push_set(b2m, attract), attract),
        ("b3^-1 R meets R", push_set(b3m.inverse(), repel), repel),
        ("b1 R meets b3^-1 R", push_set(b1m, repel), push_set(b3m.inverse(), repel)),
    )
    for label, left, right in hyps:
        if set_disjoint(left, right, place).kind != "disjoint":
            raise ValueError(f"hypothesis not certified: {label}")
    g_inv = gm.inverse()
    for k in range(0, k_max + 1):
        a = gm @ b1m @ g_inv.power(1 + k) @ b2m @ gm.power(k + 1) @ b3m @ g_inv
        mover_a = gm @ b1m @ g_inv.power(k)
        mover_r = gm @ b3m.inverse() @ g_inv.power(k)
        new_attract = push_set(mover_a, repel)
        new_repel = push_set(mover_r, repel)
        if any(c.radius_sq >= 1 for c in new_attract.components + new_repel.components):
            continue
        if set_disjoint(new_attract, new_repel, place).kind != "disjoint":
            continue
        if not (set_contains(attract, new_attract, place) and set_contains(attract, new_repel, place)):
            continue
        cert = _declared_contraction(a, new_attract, new_repel)
        if cert is not None:
            word = concat(
                g, b1, word_power(g, -(1 + k)), b2, word_power(g, k + 1), b3, word_inverse(g)
            )
            return BBBResult(k, word, new_attract, new_repel, cert, True)
    return None


def _declared_contraction(a: ProjMat, attract: ProjSet, repel: ProjSet) -> ContractionCert | None:
    """Certify a(X - repel) inside attract through a's canonical certificate:
    the canonical repelling neighborhood must sit inside the declared repel
    and the canonical image ball inside the declared attract."""
    place = a.place
    gap = contraction_gap_sq(a).hi
    start = _pow4_at_least(4 * sqrt_upper(gap))
    if start is None:
        return None
    eps_sq = start
    for _ in range(40):
        v = certify_contracting(a, eps_sq)
        if v.kind != "yes":
            return None
        c = v.cert
        image = ProjSet((Ball(c.attract, c.image_radius_sq),))
        canonical_repel = ProjSet((c.repel_set,))
        if set_contains(attract, image, place, closed_inner=True) and set_contains(repel, canonical_repel, place):
            return c
        eps_sq /= 4
        if eps_sq < Fraction(1, 4**40):
            return None
    return None


def very_proximal_search(
    group: MarkedGroup,
    g: Word,
    word_len: int,
    r_sq: Rat,
    epsilon_sq: Rat,
) -> tuple[Word, Word, Word, ProximalCert] | None:
    """Shortlex search for f1, f2 with w = g f1 g^-1 f2 certifiably
    (r, eps)-very proximal; g itself must certify eps-contracting."""
    gm = group.eval(g)
    if certify_contracting(gm, epsilon_sq).kind != "yes":
        raise ValueError("g is not certified contracting at the given epsilon")
    candidates = [()] + list(group.words_upto(word_len))
    gi = word_inverse(g)
    for f1 in candidates:
        for f2 in candidates:
            w = concat(g, f1, gi, f2)
            if not w:
                continue
            wm = group.eval(w)
            verdict = certify_very_proximal(wm, r_sq, epsilon_sq)
            if verdict.kind == "yes":
                return f1, f2, w, verdict.cert
    return None


# ---------------------------------------------------------------------------
# Step 1: proximal elements inside normal subgroups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HostRegion:
    """Where a synthesized element must live: all four canonical sets
    inside `region`(s) and certifiably clear of every `avoid` set (the
    host's fixed-point enclosures, so the host power can later shrink
    its own neighborhoods in between)."""

    region: ProjSet
    region_inv: ProjSet | None = None
    avoid: tuple[ProjSet, ...] = ()

    def contains_cert_sets(self, cert: ProximalCert, place) -> bool:
        a_p, r_p, a_m, r_m = proximal_sets(cert)
        reg_inv = self.region_inv or self.region
        if not (
            set_contains(self.region, a_p, place)
            and set_contains(self.region, r_p, place)
            and set_contains(reg_inv, a_m, place)
            and set_contains(reg_inv, r_m, place)
        ):
            return False
        return all(
            set_disjoint(s, blocked, place).kind == "disjoint"
            for s in (a_p, r_p, a_m, r_m)
            for blocked in self.avoid
        )


@dataclass(frozen=True)
class NormalProximalResult:
    label: str
    proof: NormalWord
    word: Word
    cert: ProximalCert
    nest_exponent: int


def _normal_pool(group: MarkedGroup, data: NormalData, budgets: Budgets):
    """Deterministic pool of NormalWords: single conjugate factors first,
    then products of two, conjugators shortlex up to the budget."""
    conjugators = [()] + list(group.words_upto(budgets.conj_len))
    singles = []
    for t in conjugators:
        for i in range(len(data.class_reps)):
            for e in (1, -1):
                singles.append(NormalWord((ConjugateFactor(t, i, e),)))
    pool = list(singles)
    if budgets.num_factors >= 2:
        for f1, f2 in itertools.product(singles, repeat=2):
            pool.append(f1.times(f2))
    return pool


def normal_proximal(
    group: MarkedGroup,
    data: NormalData,
    host: HostRegion | None,
    budgets: Budgets,
    nest_element: Word | None = None,
) -> NormalProximalResult | None:
    """A very-proximal element of the normal closure, built syntactically
    from conjugates of the class representatives, with certificate sets
    certified inside the host region (nesting achieved by conjugating with
    powers of the fixed host element)."""
    validate_normal_data(group, data)
    class_reps = list(data.class_reps)
    nest_m = group.eval(nest_element) if nest_element else None
    for cand in _normal_pool(group, data, budgets):
        base_word = cand.to_word(class_reps)
        if not base_word:
            continue
        base = group.eval(base_word)
        if base.is_identity():
            continue
        for q in range(1, budgets.power_max + 1):
            m = base.power(q)
            proof = cand.power(q)
            cert = auto_very_proximal(m)
            if cert is None:
                continue
            if host is None:
                return NormalProximalResult(data.label, proof, proof.to_word(class_reps), cert, 0)
            if host.contains_cert_sets(cert, group.place):
                return NormalProximalResult(data.label, proof, proof.to_word(class_reps), cert, 0)
            if nest_m is None:
                continue
            acc = nest_m
            for l in range(1, budgets.nest_max + 1):
                conj = acc @ m @ acc.inverse()
                conj_cert = auto_very_proximal(conj)
                if conj_cert is not None and host.contains_cert_sets(conj_cert, group.place):
                    nest_word = word_power(nest_element, l)
                    nested_proof = proof.conjugated_by(nest_word)
                    return NormalProximalResult(
                        data.label, nested_proof, nested_proof.to_word(class_reps), conj_cert, l
                    )
                if l < budgets.nest_max:
                    acc = acc @ nest_m
    return None


# ---------------------------------------------------------------------------
# Step 2: coset representatives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CosetResult:
    coset_rep: Word
    left: NormalWord
    right: NormalWord
    power: int
    word: Word
    cert: ProximalCert
    membership: NormalWord  # factorization of delta * rep^-1


def _general_position_ok(group: MarkedGroup, x: ProjMat, cert: ProximalCert) -> bool:
    fwd_fp = cert.fixed_point.ball
    fwd_plane = ProjSet((cert.fixed_plane_nbhd,))
    bwd_fp = cert.very.fixed_point.ball
    bwd_plane = ProjSet((cert.very.fixed_plane_nbhd,))
    moved_f = push_set(x, ProjSet((fwd_fp,)))
    moved_b = push_set(x.inverse(), ProjSet((bwd_fp,)))
    return (
        set_disjoint(moved_f, fwd_plane, group.place).kind == "disjoint"
        and set_disjoint(moved_b, bwd_plane, group.place).kind == "disjoint"
    )


def coset_pingpong(
    group: MarkedGroup,
    data: NormalData,
    a_n: NormalProximalResult,
    budgets: Budgets,
) -> tuple[list[CosetResult], list[Word]]:
    """For each coset representative x, produce delta = beta^l x' beta^l
    with x' = n1 x n2 adjusted into general position by elements of the
    normal closure, certified very-proximal with all four sets nested in
    a_n's, and pairwise ping-pong across the produced list.

    Returns (results, failed coset reps)."""
    class_reps = list(data.class_reps)
    beta_word = a_n.word
    beta = group.eval(beta_word)
    host = HostRegion(
        ProjSet((a_n.cert.contraction.attract_set, a_n.cert.contraction.repel_set)),
        ProjSet((a_n.cert.very.contraction.attract_set, a_n.cert.very.contraction.repel_set)),
    )
    adjusters: list[NormalWord] = [NormalWord(())]
    adjusters += _normal_pool(group, data, budgets.updated(num_factors=1))[: budgets.general_position]
    results: list[CosetResult] = []
    failed: list[Word] = []
    taken_sets: list[ProjSet] = []
    for rep in data.coset_reps:
        found = None
        rep_m = group.eval(rep)
        for n1, n2 in itertools.product(adjusters, repeat=2):
            n1w, n2w = n1.to_word(class_reps), n2.to_word(class_reps)
            x_word = concat(n1w, rep, n2w)
            x_m = group.eval(x_word)
            if not _general_position_ok(group, x_m, a_n.cert):
                continue
            acc = beta
            for l in range(1, budgets.nest_max + 1):
                delta = acc @ x_m @ acc
                cert = auto_very_proximal(delta)
                ok = (
                    cert is not None
                    and _remark_nesting_ok(cert, a_n.cert, group.place)
                    and all(
                        set_disjoint(s, t, group.place).kind == "disjoint"
                        for s in _all_sets(cert)
                        for t in taken_sets
                    )
                )
                if ok:
                    delta_word = concat(word_power(beta_word, l), x_word, word_power(beta_word, l))
                    membership = (
                        a_n.proof.power(l)
                        .times(n1)
                        .times(n2.times(a_n.proof.power(l)).conjugated_by(rep))
                    )
                    _check_membership(group, delta_word, rep, membership, class_reps)
                    found = CosetResult(rep, n1, n2, l, delta_word, cert, membership)
                    break
                if l < budgets.nest_max:
                    acc = acc @ beta
            if found:
                break
        if found:
            results.append(found)
            taken_sets.extend(_all_sets(found.cert))
        else:
            failed.append(rep)
    return results, failed


def _all_sets(cert: ProximalCert) -> list[ProjSet]:
    return list(proximal_sets(cert))


def _remark_nesting_ok(cert: ProximalCert, outer: ProximalCert, place) -> bool:
    a_p, r_p, a_m, r_m = proximal_sets(cert)
    o_a, o_r, o_ai, o_ri = proximal_sets(outer)
    return (
        set_contains(o_a, a_p, place)
        and set_contains(o_r, r_p, place)
        and set_contains(o_ai, a_m, place)
        and set_contains(o_ri, r_m, place)
    )


def _check_membership(group: MarkedGroup, delta_word: Word, rep: Word, proof: NormalWord, class_reps) -> None:
    """Word-level coset correctness: delta rep^-1 equals the product of
    conjugates encoded by `proof`, checked by exact evaluation."""
    lhs = group.eval(concat(delta_word, word_inverse(rep)))
    rhs = group.eval(proof.to_word(class_reps))
    if not lhs.proportional_to(rhs):
        raise AssertionError("coset-correctness factorization failed to verify")


# ---------------------------------------------------------------------------
# Double cosets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DoubleCosetResult:
    original: Word
    shifted: Word  # after premultiplying by a power of h1
    m: int
    n: int
    word: Word
    cert: ContractionCert
    skipped: str = ""


def double_coset_wrap(
    group: MarkedGroup,
    h1: Word,
    h2: Word,
    h1_cert: ProximalCert,
    h2_cert: ProximalCert,
    coset_reps: list[Word],
    budgets: Budgets,
) -> list[DoubleCosetResult]:
    """Wrap each representative c into h1^m h2^n c h2^n h1^-m, certified
    d-contracting with sets near h1's attracting point, pairwise disjoint
    across the produced list; identity representatives are skipped."""
    place = group.place
    h1m, h2m = group.eval(h1), group.eval(h2)
    out: list[DoubleCosetResult] = []
    taken: list[ProjSet] = []
    h2_plus = ProjSet((h2_cert.fixed_point.ball,))
    h2_minus = ProjSet((h2_cert.very.fixed_point.ball,))
    h1_attract = ProjSet((h1_cert.contraction.attract_set,))
    for c in coset_reps:
        cm = group.eval(c)
        if cm.is_identity():
            out.append(DoubleCosetResult(c, c, 0, 0, (), None, skipped="trivial double coset"))
            continue
        shifted = c
        shifted_m = cm
        ok_shift = False
        for shift in range(0, budgets.m_max + 1):
            moved = push_set(shifted_m, h2_plus)
            if set_disjoint(moved, h2_minus, place).kind == "disjoint":
                ok_shift = True
                break
            shifted = concat(h1, shifted)
            shifted_m = h1m @ shifted_m
        if not ok_shift:
            continue
        found = None
        for n in range(1, budgets.n_max + 1):
            w_n = h2m.power(n) @ shifted_m @ h2m.power(n)
            for m in range(1, budgets.m_max + 1):
                cand = h1m.power(m) @ w_n @ h1m.power(-m)
                cert = auto_contracting(cand)
                if cert is None:
                    continue
                sets = ProjSet((cert.attract_set, cert.repel_set))
                if not set_contains(h1_attract, sets, place):
                    continue
                if any(set_disjoint(sets, t, place).kind != "disjoint" for t in taken):
                    continue
                word = concat(
                    word_power(h1, m), word_power(h2, n), shifted, word_power(h2, n), word_power(h1, -m)
                )
                found = DoubleCosetResult(c, shifted, m, n, word, cert)
                break
            if found:
                break
        if found:
            out.append(found)
            taken.append(ProjSet((found.cert.attract_set, found.cert.repel_set)))
    return out


# ---------------------------------------------------------------------------
# The truncated prodense builder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SynthesisReport:
    host_word: Word
    host_power: int
    host_cert: ProximalCert | None
    step1: tuple[NormalProximalResult, ...]
    step1_tuple: PingPongTuple | None
    step2: dict[str, tuple[CosetResult, ...]]
    step2_failed: dict[str, tuple[Word, ...]]
    wrap: tuple[DoubleCosetResult, ...] | None
    combined: PingPongTuple | None
    oracle: OracleResult | None
    verdict: str  # "certified" | "unknown"
    notes: tuple[str, ...] = field(default_factory=tuple)


def find_host(group: MarkedGroup, budgets: Budgets) -> tuple[Word, int, ProximalCert] | None:
    """Fixed very-proximal element used throughout Step 1: the shortlex
    first short word with a certifiable power."""
    for w in group.words_upto(budgets.host_word_len):
        m = group.eval(w)
        acc = m
        for n in range(1, budgets.host_power_max + 1):
            cert = auto_very_proximal(acc)
            if cert is not None:
                return w, n, cert
            if n < budgets.host_power_max:
                acc = acc @ m
    return None


def _shrunken_host(cert: ProximalCert, used: list[ProjSet], place) -> HostRegion | None:
    """Host region inside the certificate's forward attracting ball,
    certified disjoint from every already-used set.  Conjugation by host
    powers pushes all four canonical sets of a candidate toward the
    forward fixed point, so one forward region serves both directions;
    the fixed-point enclosures are blocked out so the host power can
    later shrink its own neighborhoods in between."""
    fwd = cert.contraction.attract_set
    avoid = (
        ProjSet((cert.fixed_point.ball,)),
        ProjSet((cert.very.fixed_point.ball,)),
    )
    for j in range(0, 30):
        shrink = Fraction(1, 4**j)
        reg = ProjSet((Ball(fwd.center, fwd.radius_sq * shrink),))
        if all(set_disjoint(reg, t, place).kind == "disjoint" for t in used):
            return HostRegion(reg, None, avoid)
    return None


def _host_power_avoiding(
    group: MarkedGroup, host_word: Word, start_power: int, budgets: Budgets, used: list[ProjSet]
) -> tuple[int, ProximalCert] | None:
    """Host power whose canonical sets are certifiably disjoint from every
    used set (the paper's shrinking A(g^l), R(g^l))."""
    base = group.eval(host_word)
    acc = base.power(start_power)
    for extra in range(0, budgets.host_power_max + 1):
        power = start_power + extra
        cert = auto_very_proximal(acc)
        if cert is not None and all(
            set_disjoint(s, t, group.place).kind == "disjoint" for s in _all_sets(cert) for t in used
        ):
            return power, cert
        acc = acc @ base
    return None


def truncated_prodense(
    group: MarkedGroup,
    normals: list[NormalData],
    wrap: tuple[Word, Word, list[Word]] | None = None,
    budgets: Budgets | None = None,
) -> SynthesisReport:
    """Desk-scale embodiment of the two-step construction: a very-proximal
    element in every listed normal closure (nested along a fixed host), a
    certified coset element for every listed coset, optionally the
    double-coset wrap, and one combined certified tuple cross-checked by
    the freeness oracle."""
    if not normals:
        raise ValueError("nothing to intersect")
    budgets = budgets or Budgets()
    notes: list[str] = []
    host = find_host(group, budgets)
    if host is None:
        return SynthesisReport((), 0, None, (), None, {}, {}, None, None, None, "unknown", ("no host element",))
    host_word, host_power, host_cert = host
    host_full_word = word_power(host_word, host_power)
    place = group.place

    step1: list[NormalProximalResult] = []
    used_sets: list[ProjSet] = []
    region = _shrunken_host(host_cert, [], place)
    for data in normals:
        res = normal_proximal(group, data, region, budgets, nest_element=host_full_word)
        if res is None:
            notes.append(f"step 1 not found for {data.label}")
            continue
        step1.append(res)
        used_sets.extend(_all_sets(res.cert))
        region = _shrunken_host(host_cert, used_sets, place)
        if region is None:
            notes.append("host region exhausted")
            break

    final_host = None
    if step1:
        final_host = _host_power_avoiding(group, host_word, host_power, budgets, used_sets)
        if final_host is None:
            notes.append("no host power clears the synthesized sets")

    step1_tuple = None
    if step1 and final_host is not None:
        fin_power, fin_cert = final_host
        players = [player_from_cert(r.label, group.eval(r.word), r.cert) for r in step1]
        players.append(player_from_cert("host", group.eval(word_power(host_word, fin_power)), fin_cert))
        step1_tuple = certify_tuple(players)

    step2: dict[str, tuple[CosetResult, ...]] = {}
    step2_failed: dict[str, tuple[Word, ...]] = {}
    for res in step1:
        data = next(d for d in normals if d.label == res.label)
        if not data.coset_reps:
            step2[data.label] = ()
            continue
        got, failed = coset_pingpong(group, data, res, budgets)
        step2[data.label] = tuple(got)
        if failed:
            step2_failed[data.label] = tuple(failed)
            notes.append(f"step 2 incomplete for {data.label}")

    wrap_out = None
    if wrap is not None:
        h1w, h2w, cs = wrap
        c1 = auto_very_proximal(group.eval(h1w))
        c2 = auto_very_proximal(group.eval(h2w))
        if c1 is None or c2 is None:
            notes.append("wrap elements not certified very-proximal")
        else:
            wrap_out = tuple(double_coset_wrap(group, h1w, h2w, c1, c2, cs, budgets))

    combined = None
    oracle = None
    elements: list[ProjMat] = []
    names: list[str] = []
    players = []
    for res in step1:
        for cr in step2.get(res.label, ()):  # the delta's
            m = group.eval(cr.word)
            players.append(player_from_cert(f"d[{group.word_str(cr.coset_rep)}]", m, cr.cert))
            elements.append(m)
            names.append(f"d{len(names)}")
    if players and final_host is not None:
        fin_power, fin_cert = final_host
        hm = group.eval(word_power(host_word, fin_power))
        players.append(player_from_cert("host", hm, fin_cert))
        elements.append(hm)
        names.append("host")
        combined = certify_tuple(players)
        oracle = freeness_oracle(elements, 6, names=names)

    complete = (
        bool(step1)
        and len(step1) == len(normals)
        and not step2_failed
        and combined is not None
        and combined.verdict == "certified"
        and oracle is not None
        and oracle.kind == "no-relation"
        and (wrap is None or wrap_out is not None)
    )
    return SynthesisReport(
        host_word,
        host_power,
        host_cert,
        tuple(step1),
        step1_tuple,
        step2,
        step2_failed,
        wrap_out,
        combined,
        oracle,
        "certified" if complete else "unknown",
        tuple(notes),
    )
