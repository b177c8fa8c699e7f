"""Certified contraction and proximality of projective matrices.

The central sufficient test: if kappa = sigma_2/sigma_1 satisfies
kappa <= eps^2, the matrix maps the complement of the eps-neighborhood of
its (candidate) repelling hyperplane into the closed eps-ball around its
(candidate) attracting point.  Candidates are exact at p-adic places
(Smith form over the localization, whose transforms are sup-norm
isometries) and rational enclosures at the archimedean place (power
iteration with a residual bound against the certified second eigenvalue).

Fixed points are certified by a self-mapping ball: a region on which the
map is certifiably L-Lipschitz with L < 1 and which it maps strictly into
itself contains exactly one fixed point.  No constants are taken on
faith; every verdict re-derives its claim from these inequalities, and
Unknown is a legal outcome of the sufficient tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .projective import (
    Ball,
    HNbhd,
    ProjHyperplane,
    ProjMat,
    ProjPoint,
    apply,
    apply_hyperplane,
    dist_sq,
    dist_to_hyperplane_sq,
    dot,
    dual_ball_of_hnbhd,
    is_zero_vec,
)
from .rootiso import Interval, isolate_positive_roots, point
from .scalar import Rat, cmp_sqrt_sum, padic_valuation, sqrt_lower, sqrt_upper

#: Iteration budget for enclosure and direction refinement.
ITER_BUDGET = 64


@dataclass(frozen=True)
class SingularProfile:
    """Certified squared singular values, descending; exact at p-adic places."""

    values_sq: tuple[Interval, ...]
    exact: bool

    @property
    def dim(self) -> int:
        return len(self.values_sq)


# ---------------------------------------------------------------------------
# p-adic singular data: elementary divisors over the localization at p
# ---------------------------------------------------------------------------


def padic_exponents(rows, p: int) -> list[int]:
    """Ascending elementary-divisor exponents of an invertible matrix over
    the localization of Z at p, via valuations of determinantal divisors.

    Accepts integer or Fraction entries; |sigma_i| = p^(-e_i) with the
    e_i ascending.  The 3x3 integer case is the workhorse of the bulk
    acceptance sweep and takes a dedicated tight path.
    """
    n = len(rows)
    if n == 3 and all(isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1) for r in rows for x in r):
        return _padic_exponents_3x3_int(rows, p)
    scale = 1
    for r in rows:
        for x in r:
            if isinstance(x, Fraction) and x.denominator != 1:
                scale = scale * x.denominator // _igcd(scale, x.denominator)
    if scale != 1:
        mat = [[int(x * scale) for x in r] for r in rows]
        shift = padic_valuation(scale, p)
    else:
        mat = [[int(x) for x in r] for r in rows]
        shift = 0
    dets_val = [0]  # v_p(gcd of k x k minors), k = 0 .. n
    for k in range(1, n + 1):
        best: int | None = None
        for rsel in itertools.combinations(range(n), k):
            for csel in itertools.combinations(range(n), k):
                m = _int_minor(mat, rsel, csel)
                if m:
                    v = _int_vp(m, p)
                    if best is None or v < best:
                        best = v
                        if best == 0:
                            break
            if best == 0:
                break
        if best is None:
            raise ValueError("singular matrix has no p-adic profile")
        dets_val.append(best)
    return [dets_val[k] - dets_val[k - 1] - shift for k in range(1, n + 1)]


def _igcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _padic_exponents_3x3_int(rows, p: int) -> list[int]:
    (a, b, c), (d, e, f), (g, h, i) = ((int(x) for x in r) for r in rows)
    d1 = None
    for x in (a, b, c, d, e, f, g, h, i):
        if x:
            if x % p:
                d1 = 0
                break
            v = _int_vp(x, p)
            if d1 is None or v < d1:
                d1 = v
    m1 = e * i - f * h
    m2 = d * i - f * g
    m3 = d * h - e * g
    d2 = None
    for x in (m1, m2, m3, b * i - c * h, a * i - c * g, a * h - b * g, b * f - c * e, a * f - c * d, a * e - b * d):
        if x:
            if x % p:
                d2 = 0
                break
            v = _int_vp(x, p)
            if d2 is None or v < d2:
                d2 = v
    det = a * m1 - b * m2 + c * m3
    if det == 0 or d1 is None or d2 is None:
        raise ValueError("singular matrix has no p-adic profile")
    d3 = _int_vp(det, p)
    return [d1, d2 - d1, d3 - d2]


def _int_vp(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _int_minor(mat, rsel, csel) -> int:
    k = len(rsel)
    if k == 1:
        return mat[rsel[0]][csel[0]]
    if k == 2:
        a, b = rsel
        c, d = csel
        return mat[a][c] * mat[b][d] - mat[a][d] * mat[b][c]
    total = 0
    sign = 1
    for idx, col in enumerate(csel):
        sub = _int_minor(mat, rsel[1:], csel[:idx] + csel[idx + 1 :])
        if sub:
            total += sign * mat[rsel[0]][col] * sub
        sign = -sign
    return total


def _padic_snf_transforms(g: ProjMat) -> tuple[list[int], tuple, tuple]:
    """Smith form over the localization at p with accumulated transforms.

    Returns (exponents ascending, Uinv, Vinv) with g = Uinv . D . Vinv,
    both transforms p-integral with p-unit determinant, hence sup-norm
    isometries of Q_p^n.  Column 1 of Uinv is the exact top singular
    direction; row 1 of Vinv is the exact top dual direction.
    """
    p = g.place.prime
    n = g.dim
    d = [list(r) for r in g.entries]
    uinv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    vinv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    exps: list[int] = []
    for k in range(n):
        piv_v: int | None = None
        pi = pj = -1
        for i in range(k, n):
            for j in range(k, n):
                x = d[i][j]
                if x:
                    v = padic_valuation(x, p)
                    if piv_v is None or v < piv_v:
                        piv_v, pi, pj = v, i, j
        if piv_v is None:
            raise ValueError("singular matrix")
        if pi != k:
            d[k], d[pi] = d[pi], d[k]
            for row in uinv:
                row[k], row[pi] = row[pi], row[k]
        if pj != k:
            for row in d:
                row[k], row[pj] = row[pj], row[k]
            vinv[k], vinv[pj] = vinv[pj], vinv[k]
        piv = d[k][k]
        for i in range(k + 1, n):
            x = d[i][k]
            if x:
                c = x / piv  # valuation >= 0 by pivot minimality
                for j in range(k, n):
                    d[i][j] -= c * d[k][j]
                for t in range(n):
                    uinv[t][k] += c * uinv[t][i]
        for j in range(k + 1, n):
            x = d[k][j]
            if x:
                c = x / piv
                for i in range(k, n):
                    d[i][j] -= c * d[i][k]
                for t in range(n):
                    vinv[k][t] += c * vinv[j][t]
        exps.append(piv_v)
    return exps, tuple(tuple(r) for r in uinv), tuple(tuple(r) for r in vinv)


# ---------------------------------------------------------------------------
# Profiles and gaps
# ---------------------------------------------------------------------------


def _charpoly_gram(g: ProjMat) -> list[Fraction]:
    """Characteristic polynomial of g^T g (Faddeev-LeVerrier), lowest first."""
    n = g.dim
    s = [[dot(g.col(i), g.col(j)) for j in range(n)] for i in range(n)]
    m = [[Fraction(0)] * n for _ in range(n)]
    coeffs = [Fraction(1)]  # leading
    for k in range(1, n + 1):
        # M <- S (M + c_{k-1} I)
        c_prev = coeffs[-1]
        t = [[m[i][j] + (c_prev if i == j else 0) for j in range(n)] for i in range(n)]
        m = [[sum((s[i][x] * t[x][j] for x in range(n)), Fraction(0)) for j in range(n)] for i in range(n)]
        tr = sum((m[i][i] for i in range(n)), Fraction(0))
        coeffs.append(-tr / k)
    # coeffs[k] multiplies lambda^(n-k)
    return list(reversed(coeffs))


def singular_profile(g: ProjMat) -> SingularProfile:
    """Certified squared singular values of g, descending.

    p-adic: exact powers p^(-2e) from the elementary divisors over the
    localization.  Archimedean: enclosures of the roots of charpoly(g^T g)
    refined to relative width 2^-30 (degenerate intervals for rational
    roots, which are split off exactly).

    Results are memoized; the searches upstream revisit matrices often.
    """
    return _singular_profile_cached(g)


@lru_cache(maxsize=4096)
def _singular_profile_cached(g: ProjMat) -> SingularProfile:
    if g.place.is_padic:
        exps = padic_exponents(g.entries, g.place.prime)
        p = g.place.prime
        vals = [point(Fraction(1, p ** (2 * e)) if e >= 0 else Fraction(p ** (-2 * e))) for e in exps]
        return SingularProfile(tuple(vals), exact=True)
    roots = isolate_positive_roots(_charpoly_gram(g))
    vals: list[Interval] = []
    for iv, mult in roots:
        vals.extend([iv] * mult)
    if len(vals) != g.dim:
        raise AssertionError("gram matrix must have a full set of positive eigenvalues")
    vals.sort(key=lambda i: (i.hi, i.lo), reverse=True)
    return SingularProfile(tuple(vals), exact=all(v.exact for v in vals))


def contraction_gap_sq(g: ProjMat) -> Interval:
    """Enclosure of kappa^2 = (sigma_2/sigma_1)^2; exact at p-adic places."""
    prof = singular_profile(g)
    top, second = prof.values_sq[0], prof.values_sq[1]
    return second.divide(top)


# ---------------------------------------------------------------------------
# Direction candidates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DirectionData:
    """Rational candidates for the singular directions with certified errors.

    attract approximates the top left-singular direction within
    sqrt(attract_err_sq); repel's dual point approximates the top
    right-singular direction within sqrt(repel_err_sq).  None means no
    certified bound was achieved (degenerate or budget exhausted).
    """

    attract: ProjPoint
    attract_err_sq: Rat | None
    repel: ProjHyperplane
    repel_err_sq: Rat | None


def _power_direction(s_rows: list[list[Fraction]], lam2_hi: Rat) -> tuple[ProjPoint, Rat | None]:
    """Candidate top eigendirection of the symmetric matrix S with a
    certified residual bound sin^2(angle) <= |Su - ru|^2 / (|u|^2 (r - lam2_hi)^2)."""
    n = len(s_rows)

    def mul(v: tuple) -> tuple:
        return tuple(sum((s_rows[i][j] * v[j] for j in range(n)), Fraction(0)) for i in range(n))

    best: tuple[ProjPoint, Rat | None] = (ProjPoint(tuple(Fraction(1 if i == 0 else 0) for i in range(n))), None)
    starts = []
    for j in range(n):
        col = tuple(s_rows[i][j] for i in range(n))
        if not is_zero_vec(col):
            starts.append(col)
    for start in starts:
        v = canonical_scale(start)
        for _ in range(ITER_BUDGET):
            sv = mul(v)
            if is_zero_vec(sv):
                break
            vv = sum((c * c for c in v), Fraction(0))
            rho = sum((a * b for a, b in zip(sv, v)), Fraction(0)) / vv
            if rho > lam2_hi:
                res = tuple(a - rho * b for a, b in zip(sv, v))
                res2 = sum((c * c for c in res), Fraction(0))
                err = res2 / (vv * (rho - lam2_hi) ** 2)
                if best[1] is None or err < best[1]:
                    best = (ProjPoint(v), err)
                if err <= Fraction(1, 2**80):
                    return best
            nxt = canonical_scale(sv)
            if nxt == v:
                break  # stalled on an eigenvector; bound won't improve
            v = nxt
    return best


def canonical_scale(v: tuple) -> tuple:
    for c in v:
        if c != 0:
            return tuple(x / c for x in v)
    return v


def direction_candidates(g: ProjMat, profile: SingularProfile | None = None) -> DirectionData:
    """Attracting/repelling candidates with certified enclosure errors."""
    if profile is None or profile == singular_profile(g):
        return _direction_candidates_cached(g)
    return _direction_candidates_impl(g, profile)


@lru_cache(maxsize=4096)
def _direction_candidates_cached(g: ProjMat) -> DirectionData:
    return _direction_candidates_impl(g, singular_profile(g))


def _direction_candidates_impl(g: ProjMat, profile: SingularProfile) -> DirectionData:
    n = g.dim
    if g.place.is_padic:
        _, uinv, vinv = _padic_snf_transforms(g)
        attract = ProjPoint(tuple(uinv[i][0] for i in range(n)))
        repel = ProjHyperplane(vinv[0])
        return DirectionData(attract, Fraction(0), repel, Fraction(0))
    lam2_hi = profile.values_sq[1].hi
    ggt = [[dot(g.row(i), g.row(j)) for j in range(n)] for i in range(n)]
    gtg = [[dot(g.col(i), g.col(j)) for j in range(n)] for i in range(n)]
    attract, a_err = _power_direction(ggt, lam2_hi)
    dual, r_err = _power_direction(gtg, lam2_hi)
    return DirectionData(attract, a_err, ProjHyperplane(dual.rep), r_err)


# ---------------------------------------------------------------------------
# Contraction certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContractionCert:
    """Evidence that g maps {d(., repel) >= eps} into {d(., attract) <= B}
    with B = sqrt(image_radius_sq) <= eps = sqrt(epsilon_sq).

    attract_err_sq / repel_err_sq bound the distance from the rational
    candidates to the true singular directions (exactly 0 at p-adic
    places); gap_sq_hi is the certified upper bound on kappa^2 feeding
    the estimate B = kappa/(eps - beta) + alpha.
    """

    epsilon_sq: Rat
    attract: ProjPoint
    repel: ProjHyperplane
    method: str
    place: Place
    attract_err_sq: Rat
    repel_err_sq: Rat
    gap_sq_hi: Rat
    image_radius_sq: Rat

    @property
    def attract_set(self) -> Ball:
        return Ball(self.attract, self.epsilon_sq)

    @property
    def repel_set(self) -> HNbhd:
        return HNbhd(self.repel, self.epsilon_sq)


@dataclass(frozen=True)
class ContractionVerdict:
    kind: str  # "yes" | "no" | "unknown"
    cert: ContractionCert | None = None
    counterexample: ProjPoint | None = None


def image_radius_bound(
    gap_sq_hi: Rat, epsilon_sq: Rat, attract_err_sq: Rat | None, repel_err_sq: Rat | None
) -> Rat | None:
    """Certified upper bound for the attained image radius
    kappa/(eps - beta) + alpha, or None when undefined."""
    if attract_err_sq is None or repel_err_sq is None:
        return None
    u_kappa = sqrt_upper(gap_sq_hi)
    l_eps = sqrt_lower(epsilon_sq)
    u_beta = sqrt_upper(repel_err_sq)
    u_alpha = sqrt_upper(attract_err_sq)
    denom = l_eps - u_beta
    if denom <= 0:
        return None
    return u_kappa / denom + u_alpha


def _witness_pool(n: int) -> list[ProjPoint]:
    pool = []
    seen = set()
    for coords in itertools.product((0, 1, -1), repeat=n):
        if all(c == 0 for c in coords):
            continue
        p = ProjPoint(tuple(Fraction(c) for c in coords))
        if p.rep not in seen:
            seen.add(p.rep)
            pool.append(p)
    pool.sort(key=lambda p: (sum(1 for c in p.rep if c != 0), p.rep))
    return pool


def certify_contracting(g: ProjMat, epsilon_sq: Rat) -> ContractionVerdict:
    """Three-valued eps-contraction test.

    Yes: the singular-gap criterion kappa <= eps^2 holds with certified
    bounds and the candidate pair witnesses the contraction.  No: an
    explicit point x has d(x, repel) > eps and d(gx, attract) > eps,
    refuting the candidate pair (strict exact comparisons).  Unknown
    otherwise; the gap test is sufficient, not necessary.
    """
    epsilon_sq = Fraction(epsilon_sq)
    if not 0 < epsilon_sq < 1:
        raise ValueError("epsilon_sq must lie in (0, 1)")
    profile = singular_profile(g)
    gap = profile.values_sq[1].divide(profile.values_sq[0])
    dirs = direction_candidates(g, profile)
    bound = image_radius_bound(gap.hi, epsilon_sq, dirs.attract_err_sq, dirs.repel_err_sq)
    if bound is not None:
        l_eps = sqrt_lower(epsilon_sq)
        if bound <= l_eps:
            cert = ContractionCert(
                epsilon_sq=epsilon_sq,
                attract=dirs.attract,
                repel=dirs.repel,
                method="singular-gap",
                place=g.place,
                attract_err_sq=dirs.attract_err_sq,
                repel_err_sq=dirs.repel_err_sq,
                gap_sq_hi=gap.hi,
                image_radius_sq=bound * bound,
            )
            return ContractionVerdict("yes", cert=cert)
    for x in _witness_pool(g.dim):
        if dist_to_hyperplane_sq(x, dirs.repel, g.place) > epsilon_sq:
            if dist_sq(apply(g, x), dirs.attract, g.place) > epsilon_sq:
                return ContractionVerdict("no", counterexample=x)
    return ContractionVerdict("unknown")


# ---------------------------------------------------------------------------
# Fixed-point enclosures and proximality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Enclosure:
    """Ball certified to contain exactly one fixed point of the map.

    Checked facts: the map is lipschitz_sq^(1/2)-Lipschitz (< 1) on the
    closed ball, maps it strictly into itself, and the ball sits inside
    the attracting set; region_low_sq is the certified squared lower
    bound on distances from the ball to the true repelling hyperplane.
    """

    ball: Ball
    lipschitz_sq: Rat
    region_low_sq: Rat
    move_sq: Rat  # d(g.center, center)^2, re-checkable


def selfmap_enclosure(
    g: ProjMat,
    attract: ProjPoint,
    repel: ProjHyperplane,
    repel_err_sq: Rat,
    gap_sq_hi: Rat,
    epsilon_sq: Rat,
) -> Enclosure | None:
    """Iterate g on the attracting candidate until a ball certifiably maps
    strictly into itself with a certified Lipschitz constant < 1."""
    place = g.place
    u_kappa = sqrt_upper(gap_sq_hi)
    u_beta = sqrt_upper(repel_err_sq)
    c = attract
    for _ in range(ITER_BUDGET):
        gc = apply(g, c)
        move2 = dist_sq(gc, c, place)
        l_d = sqrt_lower(dist_to_hyperplane_sq(c, repel, place))
        for j in range(45, 0, -1):
            t_sq = epsilon_sq / Fraction(4**j)
            u_t = sqrt_upper(t_sq)
            d_low = l_d - u_t - u_beta
            if d_low <= 0:
                break  # larger radii only make it worse
            lip = u_kappa / (d_low * d_low)
            if lip >= 1:
                continue
            if move2 < (1 - lip) ** 2 * t_sq:
                if cmp_sqrt_sum(dist_sq(c, attract, place), t_sq, epsilon_sq) <= 0:
                    return Enclosure(Ball(c, t_sq), lip * lip, d_low * d_low, move2)
        c = gc
    return None


@dataclass(frozen=True)
class ProximalCert:
    """(r, eps)-proximality: the contraction certificate's candidate pair
    satisfies d(attract, repel) >= r, and both the fixed point and the
    fixed hyperplane are pinned inside self-mapping enclosures."""

    r_sq: Rat
    epsilon_sq: Rat
    contraction: ContractionCert
    fixed_point: Enclosure
    fixed_plane_dual: Enclosure  # enclosure in the dual space (of the hyperplane's dual point)
    very: "ProximalCert | None" = None

    @property
    def fixed_plane_nbhd(self) -> HNbhd:
        b = self.fixed_plane_dual.ball
        return HNbhd(ProjHyperplane(b.center.rep), b.radius_sq)

    @property
    def attract_set(self) -> Ball:
        return self.contraction.attract_set

    @property
    def repel_set(self) -> HNbhd:
        return self.contraction.repel_set


@dataclass(frozen=True)
class ProximalVerdict:
    kind: str  # "yes" | "no" | "unknown"
    cert: ProximalCert | None = None
    counterexample: ProjPoint | None = None


def _dual_enclosure(g: ProjMat, cert: ContractionCert) -> Enclosure | None:
    """Enclosure of the invariant hyperplane, computed as the fixed point
    of the transpose acting on dual points."""
    gt = g.transpose()
    dual_attract = cert.repel.dual_point()
    dual_repel = ProjHyperplane(cert.attract.rep)
    return selfmap_enclosure(gt, dual_attract, dual_repel, cert.attract_err_sq, cert.gap_sq_hi, cert.epsilon_sq)


def certify_proximal(g: ProjMat, r_sq: Rat, epsilon_sq: Rat) -> ProximalVerdict:
    """(r, eps)-proximality with r > 2 eps enforced.

    Yes needs (a) certified eps-contraction, (b) d(attract, repel) >= r
    for the certificate's own witness pair (exact), (c) self-mapping
    enclosures for the fixed point and the fixed hyperplane.
    """
    r_sq = Fraction(r_sq)
    epsilon_sq = Fraction(epsilon_sq)
    if r_sq <= 4 * epsilon_sq:
        raise ValueError("r <= 2eps")
    cv = certify_contracting(g, epsilon_sq)
    if cv.kind == "no":
        return ProximalVerdict("no", counterexample=cv.counterexample)
    if cv.kind == "unknown":
        return ProximalVerdict("unknown")
    cert = cv.cert
    if dist_to_hyperplane_sq(cert.attract, cert.repel, g.place) < r_sq:
        return ProximalVerdict("unknown")
    fp = selfmap_enclosure(g, cert.attract, cert.repel, cert.repel_err_sq, cert.gap_sq_hi, epsilon_sq)
    if fp is None:
        return ProximalVerdict("unknown")
    fh = _dual_enclosure(g, cert)
    if fh is None:
        return ProximalVerdict("unknown")
    return ProximalVerdict("yes", cert=ProximalCert(r_sq, epsilon_sq, cert, fp, fh))


def certify_very_proximal(g: ProjMat, r_sq: Rat, epsilon_sq: Rat) -> ProximalVerdict:
    """Both g and g^-1 (r, eps)-proximal, plus the four cross-disjointness
    conditions on the eps-sets of the pair."""
    from .projective import set_disjoint  # local import to keep module load light

    fwd = certify_proximal(g, r_sq, epsilon_sq)
    if fwd.kind != "yes":
        return fwd
    bwd = certify_proximal(g.inverse(), r_sq, epsilon_sq)
    if bwd.kind != "yes":
        return bwd
    a_p = _as_set(fwd.cert.attract_set)
    r_p = _as_set(fwd.cert.repel_set)
    a_m = _as_set(bwd.cert.attract_set)
    r_m = _as_set(bwd.cert.repel_set)
    for left, right in ((a_p, r_p), (a_p, a_m), (a_m, r_m)):
        v = set_disjoint(left, right, g.place)
        if v.kind != "disjoint":
            return ProximalVerdict("unknown") if v.kind == "unknown" else ProximalVerdict("no", counterexample=v.witness)
    paired = ProximalCert(
        fwd.cert.r_sq,
        fwd.cert.epsilon_sq,
        fwd.cert.contraction,
        fwd.cert.fixed_point,
        fwd.cert.fixed_plane_dual,
        very=bwd.cert,
    )
    return ProximalVerdict("yes", cert=paired)


def _as_set(component):
    from .projective import ProjSet

    return ProjSet((component,))


def power_to_proximal(g: ProjMat, r_sq: Rat, epsilon_sq: Rat, max_n: int) -> tuple[int, ProximalCert] | None:
    """Smallest n <= max_n with certify_proximal(g^n) = Yes, else None."""
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    acc = g
    for n in range(1, max_n + 1):
        verdict = certify_proximal(acc, r_sq, epsilon_sq)
        if verdict.kind == "yes":
            return n, verdict.cert
        if n < max_n:
            acc = acc @ g
    return None


def power_to_very_proximal(g: ProjMat, r_sq: Rat, epsilon_sq: Rat, max_n: int) -> tuple[int, ProximalCert] | None:
    acc = g
    for n in range(1, max_n + 1):
        verdict = certify_very_proximal(acc, r_sq, epsilon_sq)
        if verdict.kind == "yes":
            return n, verdict.cert
        if n < max_n:
            acc = acc @ g
    return None


# ---------------------------------------------------------------------------
# Certified set transport: sound supersets of images of balls/neighborhoods
# ---------------------------------------------------------------------------


def push_ball(m: ProjMat, b: Ball) -> Ball:
    """Ball certifiably containing m(b).

    Radius bounds are computed in squared form, so they are exact whenever
    the profile is (p-adic places, rational eigenvalues).  The local
    contraction bound kappa/D^2 applies when the ball is certifiably far
    from m's repelling data; else the global bound sigma1*sigma2/sigma_n^2.
    The radius saturates at the space diameter.
    """
    place = m.place
    profile = singular_profile(m)
    center = apply(m, b.center)
    candidates: list[Rat] = []
    lam_n_lo = profile.values_sq[-1].lo
    if lam_n_lo > 0:
        # (sigma1 sigma2 / sigma_n^2)^2 = lam1 lam2 / lam_n^2
        glob_sq = profile.values_sq[0].hi * profile.values_sq[1].hi / (lam_n_lo * lam_n_lo)
        candidates.append(glob_sq * b.radius_sq)
    dirs = direction_candidates(m, profile)
    if dirs.repel_err_sq is not None:
        l_d = sqrt_lower(dist_to_hyperplane_sq(b.center, dirs.repel, place))
        d_low = l_d - sqrt_upper(b.radius_sq) - sqrt_upper(dirs.repel_err_sq)
        if d_low > 0:
            gap_hi = profile.values_sq[1].divide(profile.values_sq[0]).hi
            candidates.append(gap_hi * b.radius_sq / d_low**4)
    radius_sq = min(candidates) if candidates else Fraction(1)
    if radius_sq > 1:
        radius_sq = Fraction(1)
    return Ball(center, radius_sq)


def push_hnbhd(m: ProjMat, h: HNbhd) -> HNbhd:
    """Hyperplane neighborhood certifiably containing m(h): the image
    plane with radius grown by the global bi-Lipschitz bound sigma1/sigma_n."""
    profile = singular_profile(m)
    lam_n_lo = profile.values_sq[-1].lo
    if lam_n_lo <= 0:
        return HNbhd(apply_hyperplane(m, h.plane), Fraction(1))
    radius_sq = profile.values_sq[0].hi / lam_n_lo * h.radius_sq
    if radius_sq > 1:
        radius_sq = Fraction(1)
    return HNbhd(apply_hyperplane(m, h.plane), radius_sq)


def push_component(m: ProjMat, comp):
    if isinstance(comp, Ball):
        return push_ball(m, comp)
    if comp.dim == 2:
        # in P^1 the neighborhood is, as a point set, the ball around the
        # kernel point, and m carries kernel points to kernel points
        return _hnbhd_of_ball(push_ball(m, dual_ball_of_hnbhd(comp)))
    return push_hnbhd(m, comp)


def _hnbhd_of_ball(b: Ball) -> HNbhd:
    if b.dim != 2:
        raise ValueError("only P^1 balls dualize to hyperplane neighborhoods")
    f = b.center.rep
    return HNbhd(ProjHyperplane((-f[1], f[0])), b.radius_sq)


def push_set(m: ProjMat, s) -> "object":
    from .projective import ProjSet

    return ProjSet(tuple(push_component(m, c) for c in s.components))
