import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cat0fix.analysis import (
    ConvexSubtree,
    IsometryClass,
    Kind,
    NotConvexError,
    Polytope,
    circumcenter,
    classify_symplectic,
    comparison_distance,
    displacement,
    helly_check_euclidean,
    helly_check_tree,
    translation_length_estimate,
    tree_hull,
)
from cat0fix.model_spaces import (
    Euclid,
    EuclidIsometry,
    EuclidPoint,
    MetricTree,
    Product,
    ProductIsometry,
    Siegel,
    SiegelPoint,
    SpaceMismatchError,
    TreeIsometry,
    apply_isometry,
    distance,
    random_point,
)
from cat0fix.symplectic import NotSymplecticError, SymplecticMatrix
from instances import planar_hull_family, tree_family, triangle_family, triples_meet
from oracles import (
    block_sum,
    brute_force_meb,
    expected_length,
    half_plane_distance,
    half_plane_meb,
    polygons_meet,
    random_of_class,
    tree_hull_contains,
)

TRANSVECTION = SymplecticMatrix.from_rows([[1, 1], [0, 1]])
DIAG = SymplecticMatrix.from_rows([[2, 0], [0, "1/2"]])
LOG4 = math.log(4)


def S1(z):
    return SiegelPoint.from_matrix([[z]])


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


# -- classification ---------------------------------------------------------


def test_classify_examples():
    ident = classify_symplectic([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert (ident.kind, ident.translation_length, ident.attained) == (Kind.ELLIPTIC, 0.0, True)
    assert classify_symplectic(TRANSVECTION).kind is Kind.NEUTRAL_PARABOLIC
    h = classify_symplectic(DIAG)
    assert h.kind is Kind.HYPERBOLIC and h.attained
    # [DERIVED] d(i, 4i) = log 4 from the half-plane closed form
    assert h.translation_length == pytest.approx(half_plane_distance(1j, 4j), abs=1e-12)


def test_classify_rejects_non_symplectic():
    with pytest.raises(NotSymplecticError):
        classify_symplectic([[1, 2], [3, 4]])


def test_isometry_class_invariants():
    with pytest.raises(ValueError):
        IsometryClass(Kind.ELLIPTIC, 1.0, True)
    with pytest.raises(ValueError):
        IsometryClass(Kind.NEUTRAL_PARABOLIC, 0.0, True)
    assert IsometryClass(Kind.HYPERBOLIC, 2.0, True).to_dict()["kind"] == "Hyperbolic"


@pytest.mark.parametrize("kind", ["Elliptic", "Hyperbolic", "NeutralParabolic", "NonNeutralParabolic"])
def test_classify_random_conjugates(kind):
    rng = np.random.default_rng(sum(map(ord, kind)))
    for _ in range(40):
        g = int(rng.integers(2 if kind == "NonNeutralParabolic" else 1, 4))
        M = random_of_class(kind, g, rng)
        c = classify_symplectic(M)
        assert c.kind.value == kind
        assert c.translation_length == pytest.approx(expected_length(M), abs=1e-9)


def test_classify_nonneutral_block():
    M = block_sum(((1, 1), (0, 1)), ((3, 0), (0, Fraction(1, 3))))
    c = classify_symplectic(M)
    assert c.kind is Kind.NON_NEUTRAL_PARABOLIC and not c.attained
    assert c.translation_length == pytest.approx(2 * math.log(3), abs=1e-12)


# -- displacement and translation length -----------------------------------


def test_displacement_examples():
    p = S1(0.3 + 2j)
    assert displacement(Siegel(1), np.eye(2), p) == 0.0
    assert displacement(Euclid(2), EuclidIsometry.translation([3, 4]), EuclidPoint.of(7, -1)) == pytest.approx(5.0)
    d = displacement(Siegel(1), TRANSVECTION, S1(1000j))
    # [DERIVED] half-plane closed form for d(it, it + 1)
    assert d == pytest.approx(half_plane_distance(1000j, 1 + 1000j), rel=1e-9)
    assert 0.9e-3 < d < 1.1e-3
    heights = [10.0, 100.0, 1000.0]
    ds = [displacement(Siegel(1), TRANSVECTION, S1(1j * t)) for t in heights]
    assert ds[0] > ds[1] > ds[2]


def test_displacement_mismatch():
    with pytest.raises(SpaceMismatchError):
        displacement(Euclid(2), TRANSVECTION, EuclidPoint.of(0, 0))


def test_estimate_examples():
    est = translation_length_estimate(Euclid(2), EuclidIsometry.of(rotation(1.0), [0, 0]))
    assert est.estimate == pytest.approx(0, abs=1e-12) and est.attained_hint
    est = translation_length_estimate(Siegel(1), DIAG)
    assert est.estimate == pytest.approx(2 * math.log(2), abs=1e-4)
    assert est.attained_hint
    assert abs(est.witness.Z[0, 0].real) < 1e-4  # on the imaginary axis
    est = translation_length_estimate(Siegel(1), TRANSVECTION)
    assert est.estimate < 1e-2 and not est.attained_hint


def test_estimate_is_achieved_displacement(rng):
    for kind in ("Elliptic", "Hyperbolic", "NeutralParabolic"):
        M = random_of_class(kind, 2, rng)
        est = translation_length_estimate(Siegel(2), M, budget=2)
        assert displacement(Siegel(2), M, est.witness) == pytest.approx(est.estimate, abs=1e-12)


def test_estimate_monotone_in_budget(rng):
    for kind in ("Hyperbolic", "NeutralParabolic"):
        M = random_of_class(kind, 2, rng)
        vals = [translation_length_estimate(Siegel(2), M, budget=b, seed=3).estimate for b in (1, 2, 4, 8)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        translation_length_estimate(Siegel(1), DIAG, budget=0)


def test_estimate_tree_and_product():
    T = MetricTree.from_edges([(0, 1, 1.0), (1, 2, 1.0)])
    swap = TreeIsometry({0: 2, 1: 1, 2: 0})
    est = translation_length_estimate(T, swap)
    assert est.estimate == 0.0 and est.attained_hint
    P = Product((Euclid(1), Siegel(1)))
    iso = ProductIsometry((EuclidIsometry.translation([3.0]), DIAG))
    est = translation_length_estimate(P, iso)
    assert est.estimate == pytest.approx(math.hypot(3.0, LOG4), abs=1e-4)


@pytest.mark.parametrize("kind", ["Elliptic", "Hyperbolic", "NeutralParabolic"])
def test_estimate_against_algebra(kind):
    rng = np.random.default_rng(sum(map(ord, kind)))
    worst = 0.0
    for k in range(50):
        g = 1 + k % 2
        M = random_of_class(kind, g, rng)
        algebraic = classify_symplectic(M).translation_length
        est = translation_length_estimate(Siegel(g), M)
        assert est.estimate >= algebraic - 1e-9
        worst = max(worst, est.estimate - algebraic)
        if kind == "NeutralParabolic":
            assert not est.attained_hint
    if kind == "NeutralParabolic":
        assert worst <= 1e-2
    else:
        assert worst <= 1e-4


def test_estimate_nonneutral_parabolic():
    rng = np.random.default_rng(11)
    for _ in range(5):
        M = random_of_class("NonNeutralParabolic", 2, rng)
        algebraic = classify_symplectic(M).translation_length
        est = translation_length_estimate(Siegel(2), M)
        assert algebraic - 1e-9 <= est.estimate <= algebraic + 1e-3


# -- circumcenters ----------------------------------------------------------


def test_circumcenter_examples():
    ball = circumcenter(Euclid(2), [EuclidPoint.of(0, 0), EuclidPoint.of(2, 0)])
    assert np.allclose(ball.center.array, [1, 0], atol=1e-12) and ball.radius == pytest.approx(1, abs=1e-12)
    tri = [EuclidPoint.of(0, 0), EuclidPoint.of(1, 0), EuclidPoint.of(0.5, math.sqrt(3) / 2)]
    assert circumcenter(Euclid(2), tri).radius == pytest.approx(1 / math.sqrt(3), abs=1e-9)
    T = MetricTree.from_edges([("a", "m", 4.0), ("m", "b", 6.0), ("m", "c", 1.0)])
    ball = circumcenter(T, [T.vertex_point(v) for v in ("a", "b", "c")])
    assert ball.radius == 5.0
    assert distance(T, ball.center, T.vertex_point("a")) == pytest.approx(5.0, abs=1e-12)
    with pytest.raises(ValueError):
        circumcenter(Euclid(2), [])


def test_equilateral_grid_cross_check():
    # [DERIVED] dense grid search for the minimax centre of the unit equilateral triangle
    P = np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]])
    xs = np.linspace(0.4, 0.6, 2001)
    X, Y = np.meshgrid(xs, xs - 0.2)
    R = np.max(np.stack([np.hypot(X - px, Y - py) for px, py in P]), axis=0)
    # grid step 1e-4 bounds the error of the grid minimum
    assert R.min() == pytest.approx(1 / math.sqrt(3), abs=2e-4)
    assert R.min() >= 1 / math.sqrt(3) - 1e-12


def test_euclid_matches_brute_force(rng):
    for _ in range(300):
        n = int(rng.integers(1, 4))
        k = int(rng.integers(1, 7))
        P = rng.normal(size=(k, n))
        ball = circumcenter(Euclid(n), [EuclidPoint.of(p) for p in P], seed=int(rng.integers(1000)))
        assert ball.radius == pytest.approx(brute_force_meb(P), abs=1e-6)
        assert np.all(np.linalg.norm(P - ball.center.array, axis=1) <= ball.radius + 1e-9)


def test_euclid_large_sets(rng):
    P = rng.normal(size=(200, 3))
    ball = circumcenter(Euclid(3), [EuclidPoint.of(p) for p in P])
    assert np.all(np.linalg.norm(P - ball.center.array, axis=1) <= ball.radius + 1e-9)


def test_half_plane_matches_hyperboloid_oracle(rng):
    for _ in range(15):
        pts = [random_point(Siegel(1), rng) for _ in range(int(rng.integers(3, 6)))]
        ball = circumcenter(Siegel(1), pts)
        assert ball.radius == pytest.approx(half_plane_meb([p.Z[0, 0] for p in pts]), abs=1e-6)
        assert all(distance(Siegel(1), ball.center, p) <= ball.radius + 1e-9 for p in pts)


def test_siegel_pair_is_midpoint():
    p, q = S1(1j), S1(4j)
    ball = circumcenter(Siegel(1), [p, q])
    assert ball.radius == pytest.approx(LOG4 / 2, abs=1e-9)
    assert ball.center.Z[0, 0] == pytest.approx(2j, abs=1e-9)


def test_permutation_invariance(rng):
    for space, k, tol in ((Euclid(3), 6, 1e-9), (Siegel(1), 4, 1e-6), (Siegel(2), 3, 1e-6)):
        pts = [random_point(space, rng) for _ in range(k)]
        c1 = circumcenter(space, pts).center
        c2 = circumcenter(space, [pts[i] for i in rng.permutation(k)]).center
        assert distance(space, c1, c2) <= tol


def test_bounded_orbit_is_fixed(rng):
    for order in (2, 3, 5, 7):
        c = rng.normal(size=2)
        A = rotation(2 * math.pi / order)
        iso = EuclidIsometry.of(A, c - A @ c)
        p = EuclidPoint.of(rng.normal(size=2))
        orbit = [p]
        for _ in range(order - 1):
            orbit.append(apply_isometry(Euclid(2), iso, orbit[-1]))
        center = circumcenter(Euclid(2), orbit).center
        assert displacement(Euclid(2), iso, center) <= 1e-8
    # a finite-order symplectic matrix in Siegel space
    R = SymplecticMatrix.from_rows([[0, -1], [1, 1]])  # order 6
    orbit = [S1(0.7 + 0.4j)]
    for _ in range(5):
        orbit.append(apply_isometry(Siegel(1), R, orbit[-1]))
    center = circumcenter(Siegel(1), orbit).center
    assert displacement(Siegel(1), R, center) <= 1e-6


@given(st.floats(0, 10), st.floats(0, 10), st.floats(0, 1))
def test_comparison_distance_on_a_line(a, b, t):
    # collinear configuration x=0, p=a, q=a+b: the point at fraction t is at a + t b
    assert comparison_distance(a, a + b, b, t) == pytest.approx(a + t * b, abs=1e-9)


# -- Helly on trees ---------------------------------------------------------


STAR = MetricTree.from_edges([("o", "x", 1.0), ("o", "y", 1.0), ("o", "z", 1.0)])


def test_tree_helly_examples():
    T = MetricTree.from_edges([(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)])
    v = T.vertex_point(1)
    subs = [tree_hull(T, [v, T.vertex_point(k)]) for k in (0, 2, 3)]
    res = helly_check_tree(T, subs)
    assert res.holds and distance(T, res.witness, v) == 0.0

    legs = {w: STAR.vertex_point(w) for w in "xyz"}
    subs = [tree_hull(STAR, [legs[a], legs[b]]) for a, b in itertools.combinations("xyz", 2)]
    res = helly_check_tree(STAR, subs)
    assert res.holds and distance(STAR, res.witness, STAR.vertex_point("o")) == pytest.approx(0, abs=1e-12)

    path = MetricTree.from_edges([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    res = helly_check_tree(path, [[(0, 0.0, 1.0)], [(2, 0.0, 1.0)]])
    assert not res.holds and res.subset == (0, 1)


def test_tree_subtree_validation():
    path = MetricTree.from_edges([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    with pytest.raises(NotConvexError):
        ConvexSubtree.make(path, [(0, 0.0, 1.0), (2, 0.0, 1.0)])
    with pytest.raises(NotConvexError):
        ConvexSubtree.make(path, [(0, 0.2, 0.5), (0, 0.7, 0.9)])
    with pytest.raises(NotConvexError):
        ConvexSubtree.make(path, [(0, 0.5, 1.5)])
    with pytest.raises(NotConvexError):
        helly_check_tree(path, [[(5, 0.0, 1.0)]])


def test_tree_helly_random(rng):
    pos = neg = 0
    for _ in range(200):
        tree, gens, hulls, meet = tree_family(rng)
        res = helly_check_tree(tree, hulls)
        assert res.holds == meet
        if meet:
            pos += 1
            assert all(tree_hull_contains(tree, g, res.witness, distance) for g in gens)
        else:
            neg += 1
            i, j = res.subset
            assert not any(
                tree_hull_contains(tree, gens[i], x, distance) and tree_hull_contains(tree, gens[j], x, distance)
                for x in [tree.vertex_point(v) for v in tree.vertices] + gens[i] + gens[j]
            )
    assert pos > 50 and neg > 20


# -- Helly in Euclidean space -----------------------------------------------


def square(x0, y0, s=2):
    return Polytope.from_halfspaces([[1, 0], [-1, 0], [0, 1], [0, -1]], [x0 + s, -x0, y0 + s, -y0])


def test_euclid_helly_examples():
    res = helly_check_euclidean(2, [square(0, 0), square(1, 0), square(0, 1)])
    assert res.holds and res.exact
    assert all(p.contains(res.witness) for p in (square(0, 0), square(1, 0), square(0, 1)))
    res = helly_check_euclidean(1, [Polytope.from_halfspaces([[1], [-1]], [1, 0]), Polytope.from_halfspaces([[1], [-1]], [3, -2])])
    assert not res.holds and res.subset == (0, 1) and res.exact


def test_euclid_helly_errors():
    with pytest.raises(ValueError, match="unbounded"):
        helly_check_euclidean(2, [Polytope.from_halfspaces([[1, 0], [0, 1]], [1, 1])])
    with pytest.raises(ValueError, match="empty"):
        helly_check_euclidean(1, [Polytope.from_halfspaces([[1], [-1]], [0, -1])])
    with pytest.raises(ValueError):
        helly_check_euclidean(3, [square(0, 0)])


def test_exact_rational_witness():
    third = Fraction(1, 3)
    polys = [
        Polytope.from_halfspaces([[1, 0], [-1, 0], [0, 1], [0, -1]], [third, 0, third, 0]),
        Polytope.from_halfspaces([[1, 0], [-1, 0], [0, 1], [0, -1]], [1, -third, 1, 0]),
    ]
    res = helly_check_euclidean(2, polys)
    assert res.holds and res.exact
    assert Polytope.from_dict(polys[0].to_dict()).A == polys[0].A


def test_six_random_triangles(rng):
    seen = 0
    while seen < 40:
        polys, hs = triangle_family(rng)
        if not triples_meet(hs):
            continue
        seen += 1
        res = helly_check_euclidean(2, polys)
        assert res.holds
        assert all(p.contains(res.witness, tol=1e-9) for p in polys)


def test_hull_families(rng):
    for m in (4, 5, 6):
        for _ in range(10):
            polys = planar_hull_family(rng, m)
            res = helly_check_euclidean(2, polys)
            assert res.holds and all(p.contains(res.witness) for p in polys)


def test_negative_triangle_families(rng):
    found = 0
    while found < 20:
        polys, hs = triangle_family(rng, spread=0.8)
        if triples_meet(hs):
            continue
        found += 1
        res = helly_check_euclidean(2, polys)
        assert not res.holds
        assert not polygons_meet([hs[i] for i in res.subset])
