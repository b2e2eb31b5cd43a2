"""Random instance generators shared by the Helly tests."""

from __future__ import annotations

import itertools

import numpy as np

from cat0fix.analysis import Polytope, tree_hull
from cat0fix.model_spaces import distance, random_point, random_tree
from oracles import hull_halfspaces, polygons_meet, random_triangle, tree_hulls_meet


def tree_family(rng, max_nodes: int = 20):
    """(tree, generator lists, hulls, pairwise_meet) for one random instance.

    Half the instances plant a common point so positive cases are frequent.
    """
    n = int(rng.integers(2, max_nodes + 1))
    tree = random_tree(rng, n)
    m = int(rng.integers(2, 6))
    planted = random_point(tree, rng) if rng.random() < 0.5 else None
    gens = []
    for _ in range(m):
        pts = [random_point(tree, rng) for _ in range(int(rng.integers(1, 4)))]
        if planted is not None:
            pts.append(planted)
        gens.append(pts)
    hulls = [tree_hull(tree, g) for g in gens]
    meet = all(tree_hulls_meet(tree, gens[i], gens[j], distance) for i, j in itertools.combinations(range(m), 2))
    return tree, gens, hulls, meet


def planar_hull_family(rng, m: int):
    """Polytope i is the hull of one point per triple containing i, so every triple meets."""
    pts = {T: rng.uniform(-3, 3, size=2) for T in itertools.combinations(range(m), 3)}
    polys = []
    for i in range(m):
        P = np.array([q for T, q in pts.items() if i in T])
        polys.append(Polytope.from_halfspaces(*hull_halfspaces(P)))
    return polys


def triangle_family(rng, m: int = 6, spread: float = 0.5):
    tris = [random_triangle(rng, spread) for _ in range(m)]
    hs = [hull_halfspaces(t) for t in tris]
    return [Polytope.from_halfspaces(*h) for h in hs], hs


def triples_meet(hs) -> bool:
    return all(polygons_meet([hs[i] for i in T]) for T in itertools.combinations(range(len(hs)), 3))
