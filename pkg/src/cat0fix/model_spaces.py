"""Concrete CAT(0) model spaces: Euclidean space, finite metric trees, the
Siegel upper half space and finite l2-products of these.

Spaces are immutable descriptors and points are immutable tagged values.
All geometry is exposed through module-level functions that dispatch on the
space type, so callers never touch a point's internals.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .symplectic import NotSymplecticError, SymplecticMatrix, is_symplectic_float

VALID_TOL = 1e-12
GEOM_TOL = 1e-9
INVARIANCE_TOL = 1e-8


class InvalidPointError(ValueError):
    """A point or descriptor violates the invariants of its space."""


class SpaceMismatchError(ValueError):
    """Point, isometry or space tags do not agree."""


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Euclid:
    dim: int

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise InvalidPointError(f"Euclidean dimension must be a positive integer, got {self.dim!r}")


@dataclass(frozen=True, eq=False)
class MetricTree:
    """A finite tree with positive edge lengths.

    Edges are ``(u, v, length)`` triples and are referred to by their index.
    A point on edge ``e = (u, v, L)`` at offset ``s`` lies at distance ``s``
    from ``u`` and ``L - s`` from ``v``.
    """

    vertices: tuple
    edges: tuple[tuple[object, object, float], ...]

    def __post_init__(self):
        verts = self.vertices
        if len(set(verts)) != len(verts) or not verts:
            raise InvalidPointError("tree vertices must be non-empty and distinct")
        idx = {v: i for i, v in enumerate(verts)}
        seen = set()
        for e in self.edges:
            if len(e) != 3:
                raise InvalidPointError(f"edge {e!r} is not (u, v, length)")
            u, v, length = e
            if u not in idx or v not in idx:
                raise InvalidPointError(f"edge {e!r} names an unknown vertex")
            if u == v:
                raise InvalidPointError(f"edge {e!r} is a loop")
            if not (float(length) > 0 and np.isfinite(length)):
                raise InvalidPointError(f"edge {e!r} has non-positive length")
            key = frozenset((u, v))
            if key in seen:
                raise InvalidPointError(f"edge {e!r} is repeated")
            seen.add(key)
        if len(self.edges) != len(verts) - 1:
            raise InvalidPointError("a tree on n vertices has n - 1 edges")
        if not np.all(np.isfinite(self._paths[0])):
            raise InvalidPointError("tree is not connected")

    @classmethod
    def from_edges(cls, edges: Sequence[Sequence], vertices: Sequence | None = None) -> "MetricTree":
        edges = tuple((u, v, float(length)) for u, v, length in edges)
        if vertices is None:
            vertices = []
            for u, v, _ in edges:
                for w in (u, v):
                    if w not in vertices:
                        vertices.append(w)
        return cls(tuple(vertices), edges)

    @cached_property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_index(self) -> dict:
        return {frozenset((u, v)): i for i, (u, v, _) in enumerate(self.edges)}

    @cached_property
    def _paths(self) -> tuple[np.ndarray, np.ndarray]:
        n = len(self.vertices)
        idx = {v: i for i, v in enumerate(self.vertices)}
        rows = [idx[u] for u, _, _ in self.edges]
        cols = [idx[v] for _, v, _ in self.edges]
        w = [float(length) for _, _, length in self.edges]
        graph = csr_matrix((w, (rows, cols)), shape=(n, n))
        return shortest_path(graph, directed=False, return_predecessors=True)

    @property
    def vertex_distances(self) -> np.ndarray:
        return self._paths[0]

    def length(self, edge: int) -> float:
        return float(self.edges[edge][2])

    def vertex_path(self, a, b) -> list:
        """Vertices on the geodesic from a to b, both included."""
        pred = self._paths[1]
        i, j = self.index[a], self.index[b]
        out = [j]
        while out[-1] != i:
            out.append(pred[i, out[-1]])
        return [self.vertices[k] for k in reversed(out)]

    def vertex_point(self, v) -> "TreePoint":
        for e, (a, b, length) in enumerate(self.edges):
            if a == v:
                return TreePoint(e, 0.0)
            if b == v:
                return TreePoint(e, float(length))
        raise InvalidPointError(f"vertex {v!r} lies on no edge")

    def incident(self, v) -> list[int]:
        return [e for e, (a, b, _) in enumerate(self.edges) if v in (a, b)]


@dataclass(frozen=True)
class Siegel:
    g: int

    def __post_init__(self):
        if not isinstance(self.g, int) or self.g < 1:
            raise InvalidPointError(f"Siegel genus must be a positive integer, got {self.g!r}")


@dataclass(frozen=True, eq=False)
class Product:
    """l2-product of finitely many model spaces."""

    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise InvalidPointError("product needs at least one factor")


Space = Union[Euclid, MetricTree, Siegel, Product]


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EuclidPoint:
    coords: tuple[float, ...]

    @classmethod
    def of(cls, *xs) -> "EuclidPoint":
        if len(xs) == 1 and np.ndim(xs[0]) == 1:
            xs = xs[0]
        return cls(tuple(float(x) for x in xs))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


@dataclass(frozen=True)
class TreePoint:
    edge: int
    offset: float


@dataclass(frozen=True)
class SiegelPoint:
    """Z = X + iY with X, Y real symmetric and Y positive definite."""

    re: tuple[tuple[float, ...], ...]
    im: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        X, Y = np.array(self.re, dtype=float), np.array(self.im, dtype=float)
        if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape != Y.shape or X.size == 0:
            raise InvalidPointError("Siegel point needs square real and imaginary parts of equal size")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise InvalidPointError("Siegel point has non-finite entries")
        for name, A in (("real", X), ("imaginary", Y)):
            if np.max(np.abs(A - A.T)) > VALID_TOL * max(1.0, np.max(np.abs(A))):
                raise InvalidPointError(f"{name} part is not symmetric")
        if np.linalg.eigvalsh(Y).min() <= VALID_TOL:
            raise InvalidPointError("imaginary part is not positive definite")

    @classmethod
    def from_matrix(cls, Z) -> "SiegelPoint":
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        Z = (Z + Z.T) / 2
        return cls(_rows(Z.real), _rows(Z.imag))

    @classmethod
    def from_parts(cls, X, Y) -> "SiegelPoint":
        return cls.from_matrix(np.asarray(X, dtype=float) + 1j * np.asarray(Y, dtype=float))

    @property
    def g(self) -> int:
        return len(self.re)

    @property
    def X(self) -> np.ndarray:
        return np.array(self.re, dtype=float)

    @property
    def Y(self) -> np.ndarray:
        return np.array(self.im, dtype=float)

    @property
    def Z(self) -> np.ndarray:
        return self.X + 1j * self.Y


@dataclass(frozen=True)
class ProductPoint:
    factors: tuple


ModelPoint = Union[EuclidPoint, TreePoint, SiegelPoint, ProductPoint]


def _rows(A: np.ndarray) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(x) for x in row) for row in A)


def check_point(space: Space, p: ModelPoint) -> None:
    """Raise unless ``p`` is a valid point of ``space``."""
    if isinstance(space, Euclid):
        if not isinstance(p, EuclidPoint):
            raise SpaceMismatchError(f"expected a Euclidean point, got {type(p).__name__}")
        if len(p.coords) != space.dim:
            raise SpaceMismatchError(f"expected {space.dim} coordinates, got {len(p.coords)}")
        if not all(np.isfinite(p.coords)):
            raise InvalidPointError("non-finite coordinate")
    elif isinstance(space, MetricTree):
        if not isinstance(p, TreePoint):
            raise SpaceMismatchError(f"expected a tree point, got {type(p).__name__}")
        if not (isinstance(p.edge, (int, np.integer)) and 0 <= p.edge < len(space.edges)):
            raise InvalidPointError(f"unknown edge {p.edge!r}")
        if not (-VALID_TOL <= p.offset <= space.length(p.edge) + VALID_TOL):
            raise InvalidPointError(f"offset {p.offset} outside [0, {space.length(p.edge)}]")
    elif isinstance(space, Siegel):
        if not isinstance(p, SiegelPoint):
            raise SpaceMismatchError(f"expected a Siegel point, got {type(p).__name__}")
        if p.g != space.g:
            raise SpaceMismatchError(f"expected genus {space.g}, got {p.g}")
    elif isinstance(space, Product):
        if not isinstance(p, ProductPoint) or len(p.factors) != len(space.factors):
            raise SpaceMismatchError("product point does not match the factor list")
        for s, q in zip(space.factors, p.factors):
            check_point(s, q)
    else:
        raise SpaceMismatchError(f"unknown space {space!r}")


# ---------------------------------------------------------------------------
# distance and geodesics
# ---------------------------------------------------------------------------


def siegel_distance(Z1: np.ndarray, Z2: np.ndarray) -> float:
    """Cross-ratio closed form, normalized so g = 1 is the curvature -1 half plane."""
    Z1 = np.atleast_2d(Z1)
    Z2 = np.atleast_2d(Z2)
    C1, C2 = Z1.conj(), Z2.conj()
    R = (Z1 - Z2) @ np.linalg.solve(Z1 - C2, (C1 - C2) @ np.linalg.inv(C1 - Z2))
    r = np.clip(np.linalg.eigvals(R).real, 0.0, None)
    s = np.sqrt(r)
    if np.any(s >= 1.0):
        return float("inf")
    return float(np.sqrt(np.sum((2.0 * np.arctanh(s)) ** 2)))


def _tree_ends(tree: MetricTree, p: TreePoint):
    u, v, length = tree.edges[p.edge]
    return ((u, p.offset), (v, float(length) - p.offset))


def _tree_route(tree: MetricTree, p: TreePoint, q: TreePoint):
    """Best (distance, exit vertex of p, entry vertex of q)."""
    D, idx = tree.vertex_distances, tree.index
    best = None
    for a, da in _tree_ends(tree, p):
        for b, db in _tree_ends(tree, q):
            total = da + D[idx[a], idx[b]] + db
            if best is None or total < best[0]:
                best = (float(total), a, da, b, db)
    return best


def distance(space: Space, p: ModelPoint, q: ModelPoint) -> float:
    check_point(space, p)
    check_point(space, q)
    return _distance(space, p, q)


def _distance(space: Space, p, q) -> float:
    if isinstance(space, Euclid):
        return float(np.linalg.norm(p.array - q.array))
    if isinstance(space, MetricTree):
        if p.edge == q.edge:
            return abs(p.offset - q.offset)
        return _tree_route(space, p, q)[0]
    if isinstance(space, Siegel):
        if p == q:
            return 0.0
        return siegel_distance(p.Z, q.Z)
    return float(np.sqrt(sum(_distance(s, a, b) ** 2 for s, a, b in zip(space.factors, p.factors, q.factors))))


def _siegel_frame(Z1: np.ndarray):
    """Return (S, Sinv, X) with Z -> S (Z - X) S sending Z1 to iI."""
    X, Y = Z1.real, Z1.imag
    w, V = np.linalg.eigh(Y)
    S = (V / np.sqrt(w)) @ V.T
    Sinv = (V * np.sqrt(w)) @ V.T
    return S, Sinv, X


def siegel_geodesic(Z1: np.ndarray, Z2: np.ndarray, t: float) -> np.ndarray:
    """Point at fraction t along the geodesic from Z1 to Z2.

    Z1 is moved to iI by the symplectic map Z -> S(Z - X)S. The image of
    Z2 is then pushed to the bounded disc model by the Cayley transform,
    where geodesics through the origin are rays; along a ray the singular
    values s follow tanh(t * artanh(s)).
    """
    S, Sinv, X = _siegel_frame(Z1)
    g = Z1.shape[0]
    eye = np.eye(g)
    W = S @ (Z2 - X) @ S
    w = (W - 1j * eye) @ np.linalg.inv(W + 1j * eye)
    lam, U = np.linalg.eigh(w @ w.conj().T)
    lam = np.clip(lam, 0.0, None)
    sq = np.sqrt(lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(sq > 1e-300, np.tanh(t * np.arctanh(np.minimum(sq, np.nextafter(1.0, 0.0)))) / sq, t)
    wt = (U * h) @ U.conj().T @ w
    Wt = 1j * (eye + wt) @ np.linalg.inv(eye - wt)
    Zt = Sinv @ Wt @ Sinv + X
    return (Zt + Zt.T) / 2


def geodesic_point(space: Space, p: ModelPoint, q: ModelPoint, t: float) -> ModelPoint:
    """Point at fraction ``t`` of the way from ``p`` to ``q``."""
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t = {t} outside [0, 1]")
    check_point(space, p)
    check_point(space, q)
    return _geodesic(space, p, q, float(t))


def _geodesic(space: Space, p, q, t: float):
    if t == 0.0:
        return p
    if t == 1.0:
        return q
    if isinstance(space, Euclid):
        return EuclidPoint.of((1 - t) * p.array + t * q.array)
    if isinstance(space, MetricTree):
        return _tree_geodesic(space, p, q, t)
    if isinstance(space, Siegel):
        if p == q:
            return p
        return SiegelPoint.from_matrix(siegel_geodesic(p.Z, q.Z, t))
    return ProductPoint(tuple(_geodesic(s, a, b, t) for s, a, b in zip(space.factors, p.factors, q.factors)))


def _tree_geodesic(tree: MetricTree, p: TreePoint, q: TreePoint, t: float) -> TreePoint:
    if p.edge == q.edge:
        return TreePoint(p.edge, (1 - t) * p.offset + t * q.offset)
    total, a, da, b, db = _tree_route(tree, p, q)
    s = t * total
    if s <= da:
        u = tree.edges[p.edge][0]
        return TreePoint(p.edge, p.offset - s if a == u else p.offset + s)
    s -= da
    path = tree.vertex_path(a, b)
    for x, y in zip(path, path[1:]):
        e = tree.edge_index[frozenset((x, y))]
        length = tree.length(e)
        if s <= length:
            return TreePoint(e, s if tree.edges[e][0] == x else length - s)
        s -= length
    s = min(s, db)
    u = tree.edges[q.edge][0]
    return TreePoint(q.edge, s if b == u else tree.length(q.edge) - s)


# ---------------------------------------------------------------------------
# isometries
# ---------------------------------------------------------------------------


def _as_symplectic_float(M) -> np.ndarray:
    if isinstance(M, SymplecticMatrix):
        return M.as_float()
    A = np.asarray(M, dtype=float)
    if not is_symplectic_float(A):
        raise NotSymplecticError("matrix does not preserve the symplectic form within 1e-10")
    return A


def siegel_act(M, Z: SiegelPoint) -> SiegelPoint:
    """(AZ + B)(CZ + D)^-1 for M = [[A, B], [C, D]]."""
    A = _as_symplectic_float(M)
    g = Z.g
    if A.shape != (2 * g, 2 * g):
        raise SpaceMismatchError(f"matrix of size {A.shape[0]} cannot act on genus {g}")
    a, b, c, d = A[:g, :g], A[:g, g:], A[g:, :g], A[g:, g:]
    z = Z.Z
    num, den = a @ z + b, c @ z + d
    try:
        W = np.linalg.solve(den.T, num.T).T
    except np.linalg.LinAlgError:
        raise InvalidPointError("CZ + D is singular") from None
    return SiegelPoint.from_matrix(W)


@dataclass(frozen=True)
class EuclidIsometry:
    """x -> A x + b with A orthogonal."""

    linear: tuple[tuple[float, ...], ...]
    shift: tuple[float, ...]

    def __post_init__(self):
        A = np.array(self.linear, dtype=float)
        n = len(self.shift)
        if A.shape != (n, n):
            raise SpaceMismatchError("linear part and shift have different sizes")
        if np.max(np.abs(A.T @ A - np.eye(n))) > 1e-10:
            raise InvalidPointError("linear part is not orthogonal")

    @classmethod
    def of(cls, A, b) -> "EuclidIsometry":
        return cls(_rows(np.atleast_2d(np.asarray(A, dtype=float))), tuple(float(x) for x in b))

    @classmethod
    def translation(cls, b) -> "EuclidIsometry":
        return cls.of(np.eye(len(b)), b)

    @property
    def A(self) -> np.ndarray:
        return np.array(self.linear, dtype=float)

    @property
    def b(self) -> np.ndarray:
        return np.array(self.shift, dtype=float)


@dataclass(frozen=True, eq=False)
class TreeIsometry:
    """Tree automorphism given by a vertex permutation that preserves edge lengths."""

    vertex_map: dict

    def check(self, tree: MetricTree) -> None:
        vm = self.vertex_map
        if set(vm) != set(tree.vertices) or set(vm.values()) != set(tree.vertices):
            raise SpaceMismatchError("vertex map is not a permutation of the tree's vertices")
        for u, v, length in tree.edges:
            e = tree.edge_index.get(frozenset((vm[u], vm[v])))
            if e is None:
                raise InvalidPointError(f"edge ({u}, {v}) is not sent to an edge")
            if abs(tree.length(e) - length) > VALID_TOL * max(1.0, length):
                raise InvalidPointError(f"edge ({u}, {v}) changes length")


@dataclass(frozen=True, eq=False)
class ProductIsometry:
    factors: tuple


def apply_isometry(space: Space, iso, p: ModelPoint) -> ModelPoint:
    check_point(space, p)
    if isinstance(space, Euclid):
        if not isinstance(iso, EuclidIsometry) or len(iso.shift) != space.dim:
            raise SpaceMismatchError("Euclidean space needs a Euclidean isometry of matching dimension")
        return EuclidPoint.of(iso.A @ p.array + iso.b)
    if isinstance(space, MetricTree):
        if not isinstance(iso, TreeIsometry):
            raise SpaceMismatchError("metric tree needs a tree isometry")
        iso.check(space)
        u, v, length = space.edges[p.edge]
        a, b = iso.vertex_map[u], iso.vertex_map[v]
        e = space.edge_index[frozenset((a, b))]
        same = space.edges[e][0] == a
        return TreePoint(e, p.offset if same else space.length(e) - p.offset)
    if isinstance(space, Siegel):
        if isinstance(iso, (EuclidIsometry, TreeIsometry, ProductIsometry)):
            raise SpaceMismatchError("Siegel space needs a symplectic matrix")
        return siegel_act(iso, p)
    if not isinstance(iso, ProductIsometry) or len(iso.factors) != len(space.factors):
        raise SpaceMismatchError("product space needs a product isometry with matching factors")
    return ProductPoint(tuple(apply_isometry(s, f, q) for s, f, q in zip(space.factors, iso.factors, p.factors)))


# ---------------------------------------------------------------------------
# random points
# ---------------------------------------------------------------------------


def random_point(space: Space, rng: np.random.Generator, scale: float = 1.0) -> ModelPoint:
    if isinstance(space, Euclid):
        return EuclidPoint.of(rng.normal(scale=scale, size=space.dim))
    if isinstance(space, MetricTree):
        e = int(rng.integers(len(space.edges)))
        return TreePoint(e, float(rng.uniform(0, space.length(e))))
    if isinstance(space, Siegel):
        g = space.g
        X = rng.normal(scale=scale, size=(g, g))
        L = rng.normal(scale=scale, size=(g, g))
        Y = L @ L.T * np.exp(rng.normal(scale=scale)) + 0.1 * np.eye(g)
        return SiegelPoint.from_parts((X + X.T) / 2, Y)
    return ProductPoint(tuple(random_point(s, rng, scale) for s in space.factors))


def random_tree(rng: np.random.Generator, n: int, max_length: float = 3.0) -> MetricTree:
    """Random recursive tree on vertices 0..n-1 with uniform edge lengths."""
    edges = [(int(rng.integers(i)), i, float(rng.uniform(0.1, max_length))) for i in range(1, n)]
    return MetricTree(tuple(range(n)), tuple(edges))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def space_to_dict(space: Space) -> dict:
    if isinstance(space, Euclid):
        return {"space": "euclid", "dim": space.dim}
    if isinstance(space, MetricTree):
        return {
            "space": "tree",
            "vertices": list(space.vertices),
            "edges": [[u, v, length] for u, v, length in space.edges],
        }
    if isinstance(space, Siegel):
        return {"space": "siegel", "g": space.g}
    return {"space": "product", "factors": [space_to_dict(s) for s in space.factors]}


def space_from_dict(d: dict) -> Space:
    tag = d.get("space")
    if tag == "euclid":
        return Euclid(d["dim"])
    if tag == "tree":
        return MetricTree.from_edges(d["edges"], d.get("vertices"))
    if tag == "siegel":
        return Siegel(d["g"])
    if tag == "product":
        return Product(tuple(space_from_dict(f) for f in d["factors"]))
    raise InvalidPointError(f"unknown space tag {tag!r}")


def point_to_dict(p: ModelPoint) -> dict:
    if isinstance(p, EuclidPoint):
        return {"kind": "euclid", "coords": list(p.coords)}
    if isinstance(p, TreePoint):
        return {"kind": "tree", "edge": int(p.edge), "offset": float(p.offset)}
    if isinstance(p, SiegelPoint):
        return {"kind": "siegel", "re": [list(r) for r in p.re], "im": [list(r) for r in p.im]}
    return {"kind": "product", "factors": [point_to_dict(q) for q in p.factors]}


def point_from_dict(d: dict) -> ModelPoint:
    kind = d.get("kind")
    if kind == "euclid":
        return EuclidPoint.of(d["coords"])
    if kind == "tree":
        if not isinstance(d["edge"], int):
            raise InvalidPointError("tree point edge must be an integer index")
        return TreePoint(d["edge"], float(d["offset"]))
    if kind == "siegel":
        return SiegelPoint.from_parts(d["re"], d["im"])
    if kind == "product":
        return ProductPoint(tuple(point_from_dict(f) for f in d["factors"]))
    raise InvalidPointError(f"unknown point kind {kind!r}")


def matrix_from_dict(d: dict):
    """Exact SymplecticMatrix when entries are rational, else a checked float array."""
    rows = d["entries"]
    try:
        return SymplecticMatrix.from_rows(rows)
    except TypeError:
        return _as_symplectic_float(np.array(rows, dtype=float))


def matrix_to_dict(M) -> dict:
    if isinstance(M, SymplecticMatrix):
        return M.to_dict()
    return {"entries": [[float(x) for x in row] for row in np.asarray(M, dtype=float)]}
