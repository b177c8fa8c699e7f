import random
from fractions import Fraction as F

import pytest

from freecert.projective import (
    Ball,
    HNbhd,
    ProjHyperplane,
    ProjMat,
    ProjPoint,
    apply,
    apply_hyperplane,
    ball,
    dist_sq,
    dist_to_hyperplane_sq,
    hnbhd,
    norm_sq,
    set_contains,
    set_disjoint,
    set_member,
    wedge,
)
from freecert.scalar import ARCH, cmp_sqrt_sum, padic, sqrt_lower

P5 = padic(5)

E1 = ProjPoint((1, 0))
E2 = ProjPoint((0, 1))
KER_X1 = ProjHyperplane((1, 0))
KER_X2 = ProjHyperplane((0, 1))


def rand_point(rng, n=3):
    while True:
        coords = tuple(F(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(n))
        if any(coords):
            return ProjPoint(coords)


def test_norm_sq_oracle_values():
    assert norm_sq((F(1), F(1)), ARCH) == 2
    assert norm_sq((F(1), F(5)), P5) == 1  # max(1, 1/5) squared
    assert norm_sq((F(0), F(0)), ARCH) == 0


def test_wedge_oracle_values():
    assert wedge((F(1), F(0)), (F(0), F(1))) == (F(1),)
    assert wedge((F(1), F(0)), (F(1), F(1))) == (F(1),)
    assert wedge((F(1), F(2)), (F(2), F(4))) == (F(0),)
    with pytest.raises(ValueError):
        wedge((F(1), F(0)), (F(1), F(0), F(0)))


def test_dist_sq_oracle_values():
    assert dist_sq(E1, E2, ARCH) == 1
    assert dist_sq(E1, ProjPoint((1, 1)), ARCH) == F(1, 2)
    assert dist_sq(E1, ProjPoint((1, 5)), P5) == F(1, 25)


def test_dist_to_hyperplane_oracle_values():
    assert dist_to_hyperplane_sq(E2, KER_X2, ARCH) == 1
    assert dist_to_hyperplane_sq(ProjPoint((1, 1)), KER_X2, ARCH) == F(1, 2)
    # incidence: the point lies on the hyperplane
    assert dist_to_hyperplane_sq(E2, KER_X1, ARCH) == 0
    assert dist_to_hyperplane_sq(E2, KER_X1, P5) == 0


def test_apply_oracle_values():
    g = ProjMat(((2, 1), (1, 1)), ARCH)
    ident = ProjMat(((1, 0), (0, 1)), ARCH)
    p = ProjPoint((3, 7))
    assert apply(ident, p) == p
    assert apply(g, E2) == ProjPoint((1, 1))
    assert apply(g, ProjPoint((1, 1))) == ProjPoint((3, 2))


def test_apply_respects_projective_equivalence():
    rng = random.Random(5)
    g = ProjMat(((2, 1, 0), (1, 1, 3), (0, 2, 1)), ARCH)
    for _ in range(50):
        p = rand_point(rng)
        lam = F(rng.choice([1, 2, 3, -1, -5]), rng.choice([1, 2, 7]))
        scaled = ProjPoint(tuple(lam * c for c in p.rep))
        assert apply(g, p) == apply(g, scaled)


def test_canonical_representatives():
    assert ProjPoint((0, 3, 6)).rep == (0, 1, 2)
    assert ProjPoint((-2, 4)).rep == (1, -2)
    assert ProjPoint((2, 4)) == ProjPoint((1, 2))
    assert hash(ProjPoint((2, 4))) == hash(ProjPoint((1, 2)))
    with pytest.raises(ValueError):
        ProjPoint((0, 0))


def test_matrix_invariants():
    with pytest.raises(ValueError):
        ProjMat(((1, 2), (2, 4)), ARCH)  # singular
    g = ProjMat(((2, 1), (1, 1)), ARCH)
    assert (g @ g.inverse()).is_identity()
    assert g.power(3).proportional_to(g @ g @ g)
    assert g.power(-1).proportional_to(g.inverse())


def test_apply_hyperplane_preserves_incidence():
    g = ProjMat(((2, 1), (1, 1)), ARCH)
    h = KER_X1
    p = ProjPoint((0, 5))  # on ker(x1)
    assert dist_to_hyperplane_sq(apply(g, p), apply_hyperplane(g, h), ARCH) == 0


def test_metric_symmetry_and_identity():
    rng = random.Random(1)
    for place in (ARCH, P5):
        for _ in range(200):
            p, q = rand_point(rng), rand_point(rng)
            d1 = dist_sq(p, q, place)
            assert d1 == dist_sq(q, p, place)
            assert 0 <= d1 <= 1
            assert (d1 == 0) == (p == q)
            assert dist_sq(p, p, place) == 0


def test_triangle_inequality_sampled():
    # sqrt(dist) is a metric: checked through the square-root-free criterion
    rng = random.Random(2)
    for place in (ARCH, P5):
        for _ in range(200):
            a, b, c = (rand_point(rng) for _ in range(3))
            ab, bc, ac = dist_sq(a, b, place), dist_sq(b, c, place), dist_sq(c, a, place)
            # d(a,c) <= d(a,b) + d(b,c), via bounded sqrt of the cross term
            assert ac <= ab + bc + 2 * sqrt_lower(ab * bc) or cmp_sqrt_sum(ab, bc, ac) >= 0


def test_point_to_plane_lipschitz_sampled():
    # justifies set_disjoint's margin rule; 10^4 triples per place
    rng = random.Random(3)
    for place in (ARCH, P5):
        for _ in range(10_000):
            p, q = rand_point(rng), rand_point(rng)
            h = ProjHyperplane(rand_point(rng).rep)
            dp = dist_to_hyperplane_sq(p, h, place)
            dq = dist_to_hyperplane_sq(q, h, place)
            d = dist_sq(p, q, place)
            hi, lo = max(dp, dq), min(dp, dq)
            # |sqrt(dp) - sqrt(dq)| <= sqrt(d)
            assert cmp_sqrt_sum(lo, d, hi) >= 0


def test_set_member_oracle_values():
    assert set_member(E1, ball(E1, F(1, 100)), ARCH)
    assert not set_member(E2, ball(E1, F(1, 4)), ARCH)
    # boundary: distance^2 equals radius^2, open set excludes it
    assert not set_member(ProjPoint((1, 1)), hnbhd(KER_X2, F(1, 2)), ARCH)


def test_set_disjoint_oracle_values():
    v = set_disjoint(ball(E1, F(1, 100)), ball(E2, F(1, 100)), ARCH)
    assert v.kind == "disjoint"
    same = ball(E1, F(1, 9))
    v = set_disjoint(same, same, ARCH)
    assert v.kind == "overlap" and v.witness == E1
    # boundary case: d = 1, radii sum exactly 1; open sets are disjoint
    v = set_disjoint(ball(E1, F(1, 4)), hnbhd(KER_X1, F(1, 4)), ARCH)
    assert v.kind == "disjoint"


def test_set_disjoint_overlap_witness_is_checkable():
    s = ball(E1, F(1, 2))
    t = ball(ProjPoint((1, 1)), F(1, 2))
    v = set_disjoint(s, t, ARCH)
    assert v.kind == "overlap"
    assert set_member(v.witness, s, ARCH) and set_member(v.witness, t, ARCH)


def test_hyperplane_neighborhoods_always_meet_in_higher_dim():
    h1 = ProjHyperplane((1, 0, 0))
    h2 = ProjHyperplane((0, 1, 0))
    v = set_disjoint(hnbhd(h1, F(1, 100)), hnbhd(h2, F(1, 100)), ARCH)
    assert v.kind == "overlap"
    assert dist_to_hyperplane_sq(v.witness, h1, ARCH) == 0
    assert dist_to_hyperplane_sq(v.witness, h2, ARCH) == 0


def test_set_disjoint_padic():
    v = set_disjoint(ball(E1, F(1, 25)), ball(E2, F(1, 25)), P5)
    assert v.kind == "disjoint"


def test_set_contains():
    inner = ball(E1, F(1, 100))
    outer = ball(E1, F(1, 4))
    assert set_contains(outer, inner, ARCH)
    assert not set_contains(inner, outer, ARCH)
    assert set_contains(hnbhd(KER_X1, F(1, 4)), hnbhd(KER_X1, F(1, 100)), ARCH)
    # closed variant is strictly stronger on the boundary
    half = ball(E1, F(1, 4))
    assert set_contains(half, half, ARCH)
    assert not set_contains(half, half, ARCH, closed_inner=True)


def test_unions():
    u = ball(E1, F(1, 100)).components + ball(E2, F(1, 100)).components
    from freecert.projective import ProjSet

    union = ProjSet(u)
    assert set_member(E1, union, ARCH) and set_member(E2, union, ARCH)
    far = ball(ProjPoint((1, 1)), F(1, 100))
    assert set_disjoint(union, far, ARCH).kind == "disjoint"


def test_component_validation():
    with pytest.raises(ValueError):
        Ball(E1, F(0))
    with pytest.raises(ValueError):
        HNbhd(KER_X1, F(2))
