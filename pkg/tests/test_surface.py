import itertools

import numpy as np
import pytest

from cat0fix.analysis import Kind, classify_symplectic
from cat0fix.surface import (
    Copy,
    CurveError,
    SubsurfaceType,
    WitnessError,
    check_copies,
    check_relations,
    connected_masks,
    copy_type,
    disjoint_copies_witness,
    enveloping_subsurface,
    is_connected_subset,
    lickorish_system,
    neighborhood,
    neighborhood_mask,
    pairing,
    twist_matrix,
    verify_prop52,
)
from oracles import bfs_connected


# -- the curve system -------------------------------------------------------


@pytest.mark.parametrize("g", range(2, 7))
def test_system_invariants(g):
    sys = lickorish_system(g)
    assert len(sys.labels) == 3 * g - 1
    expected = {frozenset((f"a{i}", f"b{i}")) for i in range(1, g + 1)}
    expected |= {frozenset((f"b{i}", f"c{i}")) for i in range(1, g)}
    expected |= {frozenset((f"c{i}", f"b{i + 1}")) for i in range(1, g)}
    got = [frozenset(p) for p in sys.intersections]
    assert len(got) == len(set(got)) == 3 * g - 2
    assert set(got) == expected
    for x, y in itertools.combinations(sys.labels, 2):
        p = pairing(sys.homology[x], sys.homology[y])
        assert abs(p) == (1 if frozenset((x, y)) in expected else 0)


def test_genus_2_counts():
    sys = lickorish_system(2)
    assert len(sys.labels) == 5 and len(sys.intersections) == 4
    assert abs(sys.pair("a1", "b1")) == 1
    assert sys.pair("a1", "a2") == 0


def test_genus_3_has_8_curves():
    assert len(lickorish_system(3).labels) == 8


def test_genus_guard():
    with pytest.raises(ValueError):
        lickorish_system(1)


def test_json_fields():
    d = lickorish_system(2).to_dict()
    assert {"genus", "curves", "intersections", "ribbon"} <= set(d)
    nb = neighborhood(lickorish_system(2), ["a1"]).to_dict()
    assert {"chi", "boundary", "complement"} <= set(nb)


# -- connectivity -----------------------------------------------------------


def test_connectivity_examples():
    sys = lickorish_system(3)
    assert is_connected_subset(sys, ["a1"])
    assert not is_connected_subset(sys, ["a1", "a2"])
    assert is_connected_subset(sys, ["b1", "c1", "b2"])
    with pytest.raises(CurveError):
        is_connected_subset(sys, ["z9"])


@pytest.mark.parametrize("g", [2, 3, 4])
def test_connected_masks_match_bfs(g):
    sys = lickorish_system(g)
    n = len(sys.labels)
    brute = set()
    for m in range(1, 1 << n):
        if bfs_connected(sys, sys.curves_of(m)):
            brute.add(m)
    assert set(connected_masks(sys)) == brute


# -- neighbourhoods ---------------------------------------------------------


def test_neighborhood_examples():
    sys = lickorish_system(3)
    a = neighborhood(sys, ["a1"])
    assert (a.genus, a.boundary, a.separating) == (0, 2, False)
    ab = neighborhood(sys, ["a1", "b1"])
    assert (ab.chi, ab.genus, ab.boundary) == (-1, 1, 1)
    chain = neighborhood(sys, ["b1", "c1", "b2"])
    assert (chain.chi, chain.genus, chain.boundary) == (-2, 1, 2)


def test_empty_neighborhood_rejected():
    with pytest.raises(CurveError):
        neighborhood(lickorish_system(2), [])


@pytest.mark.parametrize("g", [2, 3, 4])
def test_euler_bookkeeping_and_closure(g):
    sys = lickorish_system(g)
    meets = [frozenset(p) for p in sys.intersections]
    for m in range(1, 1 << len(sys.labels)):
        S = set(sys.curves_of(m))
        nb = neighborhood_mask(sys, m)
        points = sum(1 for p in meets if p <= S)
        assert nb.chi == nb.V - nb.E == -points
        assert nb.chi == 2 * nb.n_pieces - 2 * nb.genus - nb.boundary
        assert nb.chi + sum(c.chi for c in nb.complement) == 2 - 2 * g
        assert sum(c.boundary for c in nb.complement) == nb.boundary
        # boundary walks cover each dart of S exactly once
        darts = [d for w in nb.walks for d in w]
        own = [d for d in range(len(sys.map.alpha)) if sys.labels[sys.map.curve[d]] in S]
        assert sorted(darts) == own


# -- envelopes and the classification sweep --------------------------------


def test_envelope_examples():
    sys = lickorish_system(3)
    e = enveloping_subsurface(sys, ["a1", "b1"]).type
    assert (e.genus, e.boundary) == (1, 1)
    e = enveloping_subsurface(sys, ["b1", "c1", "b2"]).type
    assert e.genus == 1 and e.boundary <= 2 and e.nonseparating
    with pytest.raises(CurveError):
        enveloping_subsurface(sys, ["a1", "a2"])


def test_whole_surface_is_degenerate():
    sys = lickorish_system(2)
    env = enveloping_subsurface(sys, sys.labels)
    assert env.degenerate


@pytest.mark.parametrize("g", [2, 3, 4, 5])
def test_prop52_sweep(g):
    report = verify_prop52(g)
    assert report.violations == []
    assert report.checked > 0


def test_prop52_bounds():
    with pytest.raises(ValueError):
        verify_prop52(7)


# -- copies -----------------------------------------------------------------


def test_copies_examples():
    sys3 = lickorish_system(3)
    t = SubsurfaceType(1, 1)
    copies = disjoint_copies_witness(3, t, 3)
    assert [set(c.curves) for c in copies] == [{f"a{i}", f"b{i}"} for i in (1, 2, 3)]
    assert check_copies(sys3, t, copies) is None

    t2 = SubsurfaceType(2, 1)
    copies = disjoint_copies_witness(4, t2, 2)
    assert len(copies) == 2
    assert set(copies[0].curves) & set(copies[1].curves) == set()
    assert check_copies(lickorish_system(4), t2, copies) is None

    t3 = SubsurfaceType(1, 2)
    (c,) = disjoint_copies_witness(3, t3, 1)
    assert copy_type(sys3, c) == (t3, True)


def test_copies_failures():
    with pytest.raises(ValueError):
        disjoint_copies_witness(3, SubsurfaceType(1, 1), 0)
    with pytest.raises(WitnessError):
        disjoint_copies_witness(3, SubsurfaceType(1, 1), 4)
    sys = lickorish_system(3)
    t = SubsurfaceType(1, 1)
    assert check_copies(sys, t, [Copy(("a1", "b1")), Copy(("a1", "b1"))]) is not None
    assert check_copies(sys, t, [Copy(("a1", "b1")), Copy(("b1", "c1"))]) is not None
    assert check_copies(sys, SubsurfaceType(1, 2), [Copy(("a1", "b1"))]) is not None


# -- homology ---------------------------------------------------------------


@pytest.mark.parametrize("g", range(2, 7))
def test_twist_matrices(g):
    sys = lickorish_system(g)
    I = np.eye(2 * g, dtype=object)
    for lab in sys.labels:
        M = twist_matrix(sys, lab).exact()
        D = M - I
        assert D.any()
        assert not D.dot(D).any()


def test_twist_examples():
    sys = lickorish_system(2)
    M = twist_matrix(sys, "a1").exact()
    e1, e3 = np.array([1, 0, 0, 0]), np.array([0, 0, 1, 0])
    assert list(M.dot(e1)) == list(e1)
    assert list(M.dot(e3) - e3) in ([1, 0, 0, 0], [-1, 0, 0, 0])
    assert classify_symplectic(twist_matrix(sys, "c1")).kind is Kind.NEUTRAL_PARABOLIC
    with pytest.raises(CurveError):
        twist_matrix(sys, "c2")


def test_relations_examples():
    rep = check_relations(lickorish_system(2))
    assert rep.ok
    # [DERIVED] 4 intersecting pairs, the other C(5,2) - 4 = 6 commute
    assert (rep.braid, rep.commuting) == (4, 6)


@pytest.mark.parametrize("g", range(2, 7))
def test_relations_all_pairs(g):
    rep = check_relations(lickorish_system(g))
    assert rep.ok, rep.failures
    n = 3 * g - 1
    assert rep.braid + rep.commuting == n * (n - 1) // 2
