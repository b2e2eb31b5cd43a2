"""Analysis on the model spaces: circumcenters, displacement and translation
length, algebraic classification of symplectic isometries, and exhaustive
Helly verifiers for metric trees and Euclidean polytopes.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
import sympy as sp
from scipy.optimize import linprog, minimize

from .model_spaces import (
    GEOM_TOL,
    VALID_TOL,
    Euclid,
    EuclidIsometry,
    EuclidPoint,
    InvalidPointError,
    MetricTree,
    Product,
    ProductPoint,
    Siegel,
    SiegelPoint,
    SpaceMismatchError,
    TreeIsometry,
    TreePoint,
    _as_symplectic_float,
    _distance,
    _geodesic,
    _tree_route,
    apply_isometry,
    check_point,
    distance,
    siegel_distance,
)
from .symplectic import SymplecticMatrix

# ---------------------------------------------------------------------------
# isometry classes
# ---------------------------------------------------------------------------


class Kind(str, enum.Enum):
    ELLIPTIC = "Elliptic"
    HYPERBOLIC = "Hyperbolic"
    NEUTRAL_PARABOLIC = "NeutralParabolic"
    NON_NEUTRAL_PARABOLIC = "NonNeutralParabolic"


@dataclass(frozen=True)
class IsometryClass:
    kind: Kind
    translation_length: float
    attained: bool

    def __post_init__(self):
        positive = self.translation_length > 0
        semisimple = self.kind in (Kind.ELLIPTIC, Kind.HYPERBOLIC)
        if semisimple != self.attained:
            raise ValueError(f"{self.kind.value} must have attained = {semisimple}")
        if positive != (self.kind in (Kind.HYPERBOLIC, Kind.NON_NEUTRAL_PARABOLIC)):
            raise ValueError(f"translation length {self.translation_length} inconsistent with {self.kind.value}")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "translation_length": self.translation_length, "attained": self.attained}


def _sympy_matrix(M: SymplecticMatrix) -> sp.Matrix:
    return sp.Matrix([[sp.Rational(x.numerator, x.denominator) for x in map(Fraction, row)] for row in M.entries])


def _horner(poly: sp.Poly, A: sp.Matrix) -> sp.Matrix:
    n = A.shape[0]
    out = sp.zeros(n, n)
    for c in poly.all_coeffs():
        out = out * A + c * sp.eye(n)
    return out


def _trace_polynomial(p: sp.Poly, g: int, y: sp.Symbol) -> sp.Poly:
    """q with p(x) = x^g q(x + 1/x), for a palindromic p of degree 2g."""
    c = p.all_coeffs()[::-1]
    if c != c[::-1]:
        raise ValueError("characteristic polynomial is not palindromic")
    # x^k + x^-k as a polynomial in y = x + 1/x
    D = [sp.Integer(2), y]
    for _ in range(2, g + 1):
        D.append(sp.expand(y * D[-1] - D[-2]))
    q = c[g] + sum(c[g + k] * D[k] for k in range(1, g + 1))
    return sp.Poly(q, y)


def classify_symplectic(M) -> IsometryClass:
    """Classify an exact symplectic matrix as an isometry of Siegel space.

    Diagonalizability is decided by whether the square-free part of the
    characteristic polynomial annihilates M. Eigenvalues lie on the unit
    circle iff every root of the trace polynomial q(x + 1/x) = x^-g p(x) is
    real and in [-2, 2], which is counted exactly with Sturm sequences.
    """
    if not isinstance(M, SymplecticMatrix):
        M = SymplecticMatrix.from_rows(M)
    g = M.g
    A = _sympy_matrix(M)
    x, y = sp.symbols("x y")
    p = sp.Poly(A.charpoly(x).as_expr(), x)
    squarefree = sp.quo(p, sp.gcd(p, p.diff(x)))
    diagonalizable = _horner(squarefree, A).is_zero_matrix

    q = _trace_polynomial(p, g, y)
    _, factors = sp.sqf_list(q)
    on_circle = sum(m * f.count_roots(-2, 2) for f, m in factors)
    unit = on_circle == g

    length = 0.0
    if not unit:
        total = 0.0
        for f, m in factors:
            for root in sp.Poly(f, y).nroots(n=40, maxsteps=200):
                yv = complex(root)
                disc = np.sqrt(complex(yv * yv - 4))
                lam = max(abs((yv + disc) / 2), abs((yv - disc) / 2))
                total += m * (2.0 * math.log(lam)) ** 2
        length = math.sqrt(total)

    if diagonalizable:
        kind = Kind.ELLIPTIC if unit else Kind.HYPERBOLIC
    else:
        kind = Kind.NEUTRAL_PARABOLIC if unit else Kind.NON_NEUTRAL_PARABOLIC
    return IsometryClass(kind, length, diagonalizable)


# ---------------------------------------------------------------------------
# displacement and translation length
# ---------------------------------------------------------------------------


def displacement(space, isometry, p) -> float:
    """d(p, isometry . p)."""
    return distance(space, p, apply_isometry(space, isometry, p))


class LengthEstimate(NamedTuple):
    estimate: float
    attained_hint: bool
    converged: bool
    witness: object


def _chart_size(g: int) -> int:
    return g * (g + 1)


def _chart_to_Z(theta: np.ndarray, g: int) -> np.ndarray:
    iu = np.triu_indices(g)
    il = np.tril_indices(g)
    X = np.zeros((g, g))
    X[iu] = theta[: len(iu[0])]
    X = X + np.triu(X, 1).T
    L = np.zeros((g, g))
    L[il] = theta[len(iu[0]) :]
    L[np.diag_indices(g)] = np.exp(np.diag(L))
    return X + 1j * (L @ L.T)


def _Z_to_chart(Z: np.ndarray) -> np.ndarray:
    g = Z.shape[0]
    L = np.linalg.cholesky((Z.imag + Z.imag.T) / 2)
    L[np.diag_indices(g)] = np.log(np.diag(L))
    return np.concatenate([Z.real[np.triu_indices(g)], L[np.tril_indices(g)]])


def _log_diag_slots(g: int) -> np.ndarray:
    il = np.tril_indices(g)
    off = g * (g + 1) // 2
    return np.array([off + k for k, (i, j) in enumerate(zip(*il)) if i == j])


def _mobius(A: np.ndarray, Z: np.ndarray) -> np.ndarray:
    g = Z.shape[0]
    num = A[:g, :g] @ Z + A[:g, g:]
    den = A[g:, :g] @ Z + A[g:, g:]
    W = np.linalg.solve(den.T, num.T).T
    return (W + W.T) / 2


HINT_RADIUS = 10.0
HINT_TOL = 1e-6
STEP_BOUND = 12.0


def _frame(Z: np.ndarray) -> np.ndarray:
    """A real symplectic G with G . iI = Z."""
    g = Z.shape[0]
    S = np.linalg.cholesky((Z.imag + Z.imag.T) / 2)
    St = np.linalg.inv(S).T
    return np.block([[S, Z.real @ St], [np.zeros((g, g)), St]])


def _exp_p(theta: np.ndarray, g: int) -> np.ndarray:
    """exp of the symmetric Hamiltonian matrix [[A, B], [B, -A]] built from theta."""
    iu = np.triu_indices(g)
    m = len(iu[0])
    A = np.zeros((g, g))
    B = np.zeros((g, g))
    A[iu] = theta[:m]
    B[iu] = theta[m:]
    A = A + np.triu(A, 1).T
    B = B + np.triu(B, 1).T
    H = np.block([[A, B], [B, -A]])
    w, V = np.linalg.eigh(H)
    return (V * np.exp(w)) @ V.T


def _with_gradient(f, h: float):
    """f and its central-difference gradient. Displacements are computed from
    Mobius images with round-off near 1e-10, so the default forward step of
    1e-8 gives gradients dominated by noise."""

    def fg(x):
        fx = f(x)
        grad = np.empty_like(x)
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = h
            up, down = f(x + e), f(x - e)
            grad[i] = (up - down) / (2 * h) if math.isfinite(up) and math.isfinite(down) and up < 1e299 and down < 1e299 else 0.0
        return fx, grad

    return fg


def _siegel_length(M, g: int, rounds: int, seed: int) -> LengthEstimate:
    """Descent in exponential coordinates centred at a moving base point.

    Each round minimizes log d(Z, M.Z)^2 over Z = (G exp(H)) . iI with the
    base G fixed. Odd rounds re-centre at the incumbent, so a displacement
    that only decays towards infinity keeps being chased outward; even
    rounds start from a random base point.
    """
    A = _as_symplectic_float(M)
    n = _chart_size(g)
    eye = 1j * np.eye(g)

    def point(G, theta):
        return _mobius(G @ _exp_p(theta, g), eye)

    def disp_Z(Z):
        try:
            return siegel_distance(Z, _mobius(A, Z))
        except np.linalg.LinAlgError:
            return math.inf

    rng = np.random.default_rng(seed)
    best_Z = eye.copy()
    best = disp_Z(best_Z)
    fresh = []  # results of rounds started away from the incumbent
    last_gain = math.inf
    converged = True
    for r in range(rounds):
        if r == 0:
            G = np.eye(2 * g)
        elif r % 2:
            G = _frame(best_Z)
        else:
            G = _exp_p(rng.normal(scale=0.7, size=n), g)

        def sq(theta, G=G):
            try:
                d = disp_Z(point(G, theta))
            except (np.linalg.LinAlgError, FloatingPointError):
                return math.inf
            return d * d if math.isfinite(d) else math.inf

        def log_sq(theta):
            # scale free, so a displacement decaying towards infinity keeps a usable gradient
            v = sq(theta)
            return math.log(max(v, 1e-300)) if math.isfinite(v) else 1e300

        def smooth_sq(theta):
            # quadratic at an attained minimum, where log_sq has a singularity
            v = sq(theta)
            return v if math.isfinite(v) else 1e300

        opts = {"maxiter": 400, "ftol": 1e-15, "gtol": 1e-12, "maxls": 40}
        box = [(-STEP_BOUND, STEP_BOUND)] * n
        with np.errstate(all="ignore"):
            res = minimize(_with_gradient(log_sq, 1e-5), np.zeros(n), jac=True, method="L-BFGS-B", bounds=box, options=opts)
            res = minimize(_with_gradient(smooth_sq, 1e-6), res.x, jac=True, method="L-BFGS-B", bounds=box, options=opts)
            try:
                Z = point(G, res.x)
                val = disp_Z(Z)
                SiegelPoint.from_matrix(Z)
            except (np.linalg.LinAlgError, InvalidPointError):
                val = math.inf
        gain = best - val
        if val < best:
            best, best_Z = val, Z
        if r % 2:
            last_gain = max(gain, 0.0)
            converged = bool(res.success)
        else:
            fresh.append(val)
    witness = SiegelPoint.from_matrix(best_Z)
    stalled = last_gain <= 1e-9
    # a parabolic keeps improving as the point runs off to infinity, so independent
    # rounds disagree and the best point sits far from the base point iI
    near = siegel_distance(eye, best_Z) <= HINT_RADIUS
    agree = sum(v - best <= HINT_TOL for v in fresh) >= 2
    hint = bool(stalled and near and agree)
    return LengthEstimate(float(best), hint, bool(converged and stalled), witness)


def translation_length_estimate(space, isometry, budget: int = 8, seed: int = 0) -> LengthEstimate:
    """Upper bound on the translation length, realized by an explicit point.

    ``budget`` is a number of optimization rounds. Rounds are deterministic
    given ``seed`` and a larger budget runs a superset of the rounds of a
    smaller one, so the estimate never increases with the budget.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if isinstance(space, Euclid):
        if not isinstance(isometry, EuclidIsometry):
            raise SpaceMismatchError("Euclidean space needs a Euclidean isometry")
        A, b = isometry.A, isometry.b
        x, *_ = np.linalg.lstsq(A - np.eye(space.dim), -b, rcond=None)
        p = EuclidPoint.of(x)
        return LengthEstimate(displacement(space, isometry, p), True, True, p)
    if isinstance(space, MetricTree):
        if not isinstance(isometry, TreeIsometry):
            raise SpaceMismatchError("metric tree needs a tree isometry")
        cands = [space.vertex_point(v) for v in space.vertices]
        cands += [TreePoint(e, space.length(e) / 2) for e in range(len(space.edges))]
        vals = [displacement(space, isometry, c) for c in cands]
        k = int(np.argmin(vals))
        return LengthEstimate(vals[k], True, True, cands[k])
    if isinstance(space, Siegel):
        return _siegel_length(isometry, space.g, budget, seed)
    if isinstance(space, Product):
        parts = [translation_length_estimate(s, f, budget, seed) for s, f in zip(space.factors, isometry.factors)]
        est = math.sqrt(sum(p.estimate**2 for p in parts))
        return LengthEstimate(
            est,
            all(p.attained_hint for p in parts),
            all(p.converged for p in parts),
            ProductPoint(tuple(p.witness for p in parts)),
        )
    raise SpaceMismatchError(f"unknown space {space!r}")


# ---------------------------------------------------------------------------
# circumcenters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnclosingBall:
    center: object
    radius: float


def _ball_through(R: list[np.ndarray]):
    if not R:
        return None, -1.0
    p0 = R[0]
    if len(R) == 1:
        return p0, 0.0
    V = np.array([p - p0 for p in R[1:]])
    G = V @ V.T
    rhs = 0.5 * np.diag(G)
    alpha = np.linalg.lstsq(G, rhs, rcond=None)[0]
    c = p0 + alpha @ V
    return c, float(max(np.linalg.norm(p - c) for p in R))


def _euclid_ball(P: np.ndarray, seed: int):
    """Minimal enclosing ball by randomized incremental construction."""
    P = np.unique(P, axis=0)
    rng = np.random.default_rng(seed)
    P = P[rng.permutation(len(P))]
    dim = P.shape[1]
    scale = max(1.0, float(np.max(np.abs(P))))
    tol = 1e-12 * scale

    def solve(end: int, R: list):
        c, r = _ball_through(R)
        if len(R) == dim + 1:
            return c, r
        for i in range(end):
            if c is None or np.linalg.norm(P[i] - c) > r + tol:
                c, r = solve(i, R + [P[i]])
        return c, r

    c, _ = solve(len(P), [])
    return c, float(max(np.linalg.norm(P - c, axis=1)))


def _chartable(space) -> bool:
    if isinstance(space, (Euclid, Siegel)):
        return True
    if isinstance(space, Product):
        return all(_chartable(s) for s in space.factors)
    return False


def _to_chart(space, p) -> np.ndarray:
    if isinstance(space, Euclid):
        return p.array
    if isinstance(space, Siegel):
        return _Z_to_chart(p.Z)
    return np.concatenate([_to_chart(s, q) for s, q in zip(space.factors, p.factors)])


def _chart_dim(space) -> int:
    if isinstance(space, Euclid):
        return space.dim
    if isinstance(space, Siegel):
        return _chart_size(space.g)
    return sum(_chart_dim(s) for s in space.factors)


def _from_chart(space, theta: np.ndarray):
    if isinstance(space, Euclid):
        return EuclidPoint.of(theta)
    if isinstance(space, Siegel):
        return SiegelPoint.from_matrix(_chart_to_Z(theta, space.g))
    out, k = [], 0
    for s in space.factors:
        m = _chart_dim(s)
        out.append(_from_chart(s, theta[k : k + m]))
        k += m
    return ProductPoint(tuple(out))


def _radius(space, c, points) -> float:
    return max(_distance(space, c, y) for y in points)


def _geodesic_iteration(space, points, iters: int):
    # start from the input point of least eccentricity, so the result does not depend on input order
    ecc = [_radius(space, p, points) for p in points]
    c = points[int(np.argmin(ecc))]
    best, best_r = c, min(ecc)
    for k in range(1, iters + 1):
        dists = [_distance(space, c, y) for y in points]
        far = points[int(np.argmax(dists))]
        c = _geodesic(space, c, far, 1.0 / (k + 1))
        r = _radius(space, c, points)
        if r < best_r:
            best, best_r = c, r
    return best, best_r


def _raw(space, theta: np.ndarray) -> list:
    """Chart coordinates to bare arrays, one per Euclid or Siegel factor."""
    if isinstance(space, Euclid):
        return [theta]
    if isinstance(space, Siegel):
        return [_chart_to_Z(theta, space.g)]
    out, k = [], 0
    for s in space.factors:
        m = _chart_dim(s)
        out += _raw(s, theta[k : k + m])
        k += m
    return out


def _flat_factors(space) -> list:
    if isinstance(space, Product):
        return [f for s in space.factors for f in _flat_factors(s)]
    return [space]


def _raw_sq_distance(kinds: list, a: list, b: list) -> float:
    total = 0.0
    for s, x, y in zip(kinds, a, b):
        if isinstance(s, Euclid):
            total += float(np.sum((x - y) ** 2))
        else:
            total += siegel_distance(x, y) ** 2
    return total


def _refine(space, points, c0):
    """Epigraph form of min max d^2, solved by SLSQP in chart coordinates."""
    theta0 = _to_chart(space, c0)
    n = len(theta0)
    kinds = _flat_factors(space)
    targets = [_raw(space, _to_chart(space, y)) for y in points]

    def cons(z):
        try:
            c = _raw(space, z[:n])
            return np.array([z[n] - _raw_sq_distance(kinds, c, t) for t in targets])
        except np.linalg.LinAlgError:
            return np.full(len(targets), -1e300)

    z0 = np.append(theta0, _radius(space, c0, points) ** 2)
    res = minimize(
        lambda z: z[n],
        z0,
        jac=lambda z: np.eye(n + 1)[n],
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": cons}],
        options={"maxiter": 500, "ftol": 1e-16},
    )
    try:
        return _from_chart(space, res.x[:n])
    except (InvalidPointError, np.linalg.LinAlgError):
        return c0


def circumcenter(space, points: Sequence, seed: int = 0) -> EnclosingBall:
    """Center and radius of the smallest closed ball containing ``points``.

    Euclidean inputs use an exact randomized incremental algorithm and trees
    use the midpoint of a diametral pair. Other spaces run geodesic
    farthest-point iterations followed by a constrained refinement in
    chart coordinates.
    """
    points = list(points)
    if not points:
        raise ValueError("circumcenter of an empty set")
    for p in points:
        check_point(space, p)
    if isinstance(space, Euclid):
        c, r = _euclid_ball(np.array([p.array for p in points]), seed)
        return EnclosingBall(EuclidPoint.of(c), r)
    if isinstance(space, MetricTree):
        a = max(points, key=lambda y: _distance(space, points[0], y))
        b = max(points, key=lambda y: _distance(space, a, y))
        c = _geodesic(space, a, b, 0.5)
        return EnclosingBall(c, _radius(space, c, points))
    if len(set(points)) == 1:
        return EnclosingBall(points[0], 0.0)
    if len(set(points)) == 2:
        a, b = sorted(set(points), key=repr)
        c = _geodesic(space, a, b, 0.5)
        return EnclosingBall(c, _radius(space, c, points))
    c, r = _geodesic_iteration(space, points, 60)
    if _chartable(space):
        for _ in range(3):
            c2 = _refine(space, points, c)
            r2 = _radius(space, c2, points)
            if r2 >= r - 1e-14:
                break
            c, r = c2, r2
    return EnclosingBall(c, r)


# ---------------------------------------------------------------------------
# CAT(0) comparison
# ---------------------------------------------------------------------------


def comparison_distance(dxp: float, dxq: float, dpq: float, t: float) -> float:
    """Distance from x to the point at fraction t along [p, q] in the Euclidean comparison triangle."""
    val = (1 - t) * dxp**2 + t * dxq**2 - t * (1 - t) * dpq**2
    return math.sqrt(max(val, 0.0))


def comparison_gap(space, x, p, q, t: float) -> float:
    """d(x, m_t) minus its comparison bound; non-positive in a CAT(0) space."""
    m = _geodesic(space, p, q, t)
    bound = comparison_distance(_distance(space, x, p), _distance(space, x, q), _distance(space, p, q), t)
    return _distance(space, x, m) - bound


# ---------------------------------------------------------------------------
# Helly on trees
# ---------------------------------------------------------------------------


class NotConvexError(ValueError):
    pass


@dataclass(frozen=True)
class ConvexSubtree:
    """Closed connected subset of a metric tree, one closed interval per edge.

    Vertices that belong to the subtree carry a (possibly degenerate)
    interval on every incident edge, so edge-wise intersection is exact.
    """

    pieces: tuple[tuple[int, float, float], ...]

    @classmethod
    def make(cls, tree: MetricTree, pieces) -> "ConvexSubtree":
        by_edge: dict[int, tuple[float, float]] = {}
        for e, lo, hi in pieces:
            if not (isinstance(e, (int, np.integer)) and 0 <= e < len(tree.edges)):
                raise NotConvexError(f"unknown edge {e!r}")
            length = tree.length(e)
            lo, hi = float(lo), float(hi)
            if lo > hi + VALID_TOL or lo < -VALID_TOL or hi > length + VALID_TOL:
                raise NotConvexError(f"bad interval [{lo}, {hi}] on edge {e} of length {length}")
            lo, hi = min(max(lo, 0.0), length), min(max(hi, 0.0), length)
            lo, hi = (0.0 if lo <= VALID_TOL else lo), (length if hi >= length - VALID_TOL else hi)
            if e in by_edge:
                a, b = by_edge[e]
                if lo > b + VALID_TOL or a > hi + VALID_TOL:
                    raise NotConvexError(f"two disjoint pieces on edge {e}")
                lo, hi = min(a, lo), max(b, hi)
            by_edge[e] = (lo, min(max(hi, lo), length))
        if not by_edge:
            raise NotConvexError("empty subtree")
        # close up at vertices
        verts = set()
        for e, (lo, hi) in by_edge.items():
            u, v, length = tree.edges[e]
            if lo == 0.0:
                verts.add(u)
            if hi == tree.length(e):
                verts.add(v)
        for w in verts:
            for e in tree.incident(w):
                u, v, length = tree.edges[e]
                at = 0.0 if u == w else tree.length(e)
                if e in by_edge:
                    lo, hi = by_edge[e]
                    if not (lo <= at <= hi):
                        raise NotConvexError(f"vertex {w!r} and the piece on edge {e} are not joined")
                else:
                    by_edge[e] = (at, at)
        # connectivity through shared vertices
        parent = {e: e for e in by_edge}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for w in verts:
            inc = tree.incident(w)
            for e in inc[1:]:
                parent[find(e)] = find(inc[0])
        if len({find(e) for e in by_edge}) != 1:
            raise NotConvexError("subtree is not connected")
        return cls(tuple((e, *by_edge[e]) for e in sorted(by_edge)))

    def as_dict(self) -> dict[int, tuple[float, float]]:
        return {e: (lo, hi) for e, lo, hi in self.pieces}

    def contains(self, p: TreePoint, tol: float = GEOM_TOL) -> bool:
        iv = self.as_dict().get(p.edge)
        return iv is not None and iv[0] - tol <= p.offset <= iv[1] + tol

    def intersect(self, other: "ConvexSubtree") -> dict[int, tuple[float, float]]:
        mine, theirs = self.as_dict(), other.as_dict()
        out = {}
        for e in mine.keys() & theirs.keys():
            lo, hi = max(mine[e][0], theirs[e][0]), min(mine[e][1], theirs[e][1])
            if lo <= hi + VALID_TOL:
                out[e] = (lo, max(lo, hi))
        return out

    def some_point(self) -> TreePoint:
        e, lo, _ = self.pieces[0]
        return TreePoint(e, lo)

    def to_dict(self) -> list:
        return [[e, lo, hi] for e, lo, hi in self.pieces]


def _geodesic_pieces(tree: MetricTree, p: TreePoint, q: TreePoint) -> list[tuple[int, float, float]]:
    if p.edge == q.edge:
        return [(p.edge, min(p.offset, q.offset), max(p.offset, q.offset))]
    _, a, _, b, _ = _tree_route(tree, p, q)
    out = []
    for pt, end in ((p, a), (q, b)):
        u = tree.edges[pt.edge][0]
        out.append((pt.edge, 0.0, pt.offset) if end == u else (pt.edge, pt.offset, tree.length(pt.edge)))
    path = tree.vertex_path(a, b)
    for x, y in zip(path, path[1:]):
        e = tree.edge_index[frozenset((x, y))]
        out.append((e, 0.0, tree.length(e)))
    return out


def tree_hull(tree: MetricTree, points: Sequence[TreePoint]) -> ConvexSubtree:
    """Convex hull of finitely many points: the union of geodesics from the first one."""
    points = list(points)
    if not points:
        raise ValueError("hull of no points")
    for p in points:
        check_point(tree, p)
    pieces = [(points[0].edge, points[0].offset, points[0].offset)]
    for q in points[1:]:
        pieces += _geodesic_pieces(tree, points[0], q)
    merged: dict[int, tuple[float, float]] = {}
    for e, lo, hi in pieces:
        a, b = merged.get(e, (lo, hi))
        merged[e] = (min(a, lo), max(b, hi))
    return ConvexSubtree.make(tree, [(e, lo, hi) for e, (lo, hi) in merged.items()])


@dataclass(frozen=True)
class HellyResult:
    holds: bool
    witness: object = None
    subset: tuple[int, ...] | None = None
    exact: bool = True

    def to_dict(self, point_to_dict=None) -> dict:
        w = self.witness
        if w is not None and point_to_dict is not None:
            w = point_to_dict(w)
        elif isinstance(w, np.ndarray):
            w = [float(x) for x in w]
        return {"holds": self.holds, "witness": w, "subset": list(self.subset) if self.subset else None, "exact": self.exact}


def helly_check_tree(tree: MetricTree, subtrees: Sequence) -> HellyResult:
    """Exhaustive Helly check in a tree: pairwise intersection forces a common point."""
    subs = [s if isinstance(s, ConvexSubtree) else ConvexSubtree.make(tree, s) for s in subtrees]
    if not subs:
        raise ValueError("empty family")
    for i, j in itertools.combinations(range(len(subs)), 2):
        if not subs[i].intersect(subs[j]):
            return HellyResult(False, None, (i, j))
    common = subs[0].as_dict()
    for s in subs[1:]:
        common = s.intersect(ConvexSubtree(tuple((e, lo, hi) for e, (lo, hi) in sorted(common.items()))))
        if not common:
            raise RuntimeError("pairwise intersecting subtrees with empty intersection")
    e = min(common)
    point = TreePoint(e, common[e][0])
    if not all(s.contains(point) for s in subs):
        raise RuntimeError("witness failed re-validation")
    return HellyResult(True, point)


# ---------------------------------------------------------------------------
# Helly in Euclidean space
# ---------------------------------------------------------------------------


LP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Polytope:
    """{x : A x <= b}, non-empty and bounded."""

    A: tuple[tuple, ...]
    b: tuple

    @classmethod
    def from_halfspaces(cls, A, b) -> "Polytope":
        A = [list(row) for row in A]
        b = list(b)
        if not A or len(A) != len(b) or len({len(r) for r in A}) != 1:
            raise ValueError("half-space list is malformed")
        return cls(tuple(tuple(r) for r in A), tuple(b))

    @property
    def dim(self) -> int:
        return len(self.A[0])

    @property
    def rational(self) -> bool:
        return all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in (*self.b, *itertools.chain(*self.A)))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        A = np.array([[float(x) for x in r] for r in self.A])
        b = np.array([float(x) for x in self.b])
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero normal in half-space list")
        return A / norms[:, None], b / norms

    def contains(self, x, tol: float = LP_TOL) -> bool:
        A, b = self.arrays()
        return bool(np.all(A @ np.asarray(x, dtype=float) <= b + tol))

    def to_dict(self) -> dict:
        conv = lambda v: v if isinstance(v, (int, float)) else str(v)  # noqa: E731
        return {"A": [[conv(x) for x in r] for r in self.A], "b": [conv(x) for x in self.b]}

    @classmethod
    def from_dict(cls, d: dict) -> "Polytope":
        def conv(v):
            if isinstance(v, str):
                return Fraction(v)
            if isinstance(v, bool):
                raise ValueError("boolean coefficient")
            return v

        return cls.from_halfspaces([[conv(x) for x in r] for r in d["A"]], [conv(x) for x in d["b"]])


def _slack_lp(A: np.ndarray, b: np.ndarray):
    """min t subject to A x - t <= b (rows normalized): t <= 0 iff feasible, -t is the inradius."""
    n = A.shape[1]
    c = np.zeros(n + 1)
    c[-1] = 1.0
    A_ub = np.hstack([A, -np.ones((len(A), 1))])
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=[(None, None)] * n + [(-1e6, None)], method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    return res.x[:n], float(res.x[-1])


def _bounded(A: np.ndarray) -> bool:
    m, n = A.shape
    if np.linalg.matrix_rank(A) < n:
        return False
    res = linprog(np.zeros(m), A_eq=A.T, b_eq=np.zeros(n), bounds=[(1, None)] * m, method="highs")
    return res.status == 0


def _stack(polys: Sequence[Polytope]) -> tuple[np.ndarray, np.ndarray]:
    parts = [p.arrays() for p in polys]
    return np.vstack([a for a, _ in parts]), np.concatenate([b for _, b in parts])


def _exact_member(polys: Sequence[Polytope], x: np.ndarray) -> bool:
    for cand in ([Fraction(float(v)).limit_denominator(10**9) for v in x], [Fraction(float(v)) for v in x]):
        if all(
            sum(Fraction(a) * xi for a, xi in zip(row, cand)) <= Fraction(bi) for p in polys for row, bi in zip(p.A, p.b)
        ):
            return True
    return False


def _exact_infeasible(polys: Sequence[Polytope], A: np.ndarray, b: np.ndarray) -> bool:
    """Farkas certificate y >= 0, y A = 0, y b < 0, made exact on its support."""
    m = len(A)
    res = linprog(
        np.zeros(m), A_eq=np.vstack([A.T, b[None, :]]), b_eq=np.append(np.zeros(A.shape[1]), -1.0),
        bounds=[(0, None)] * m, method="highs",
    )
    if res.status != 0:
        return False
    rows = [(row, bi) for p in polys for row, bi in zip(p.A, p.b)]
    support = [i for i in range(m) if res.x[i] > 1e-12]
    E = sp.Matrix([[sp.Rational(Fraction(rows[i][0][j])) for i in support] for j in range(A.shape[1])])
    E = E.col_join(sp.Matrix([[sp.Rational(Fraction(rows[i][1])) for i in support]]))
    rhs = sp.Matrix([0] * A.shape[1] + [-1])
    try:
        sol, params = E.gauss_jordan_solve(rhs)
    except ValueError:
        return False
    sol = sol.subs({t: 0 for t in params})
    return all(v >= 0 for v in sol)


def helly_check_euclidean(n: int, polytopes: Sequence) -> HellyResult:
    """Check every (n+1)-subfamily for a common point and, if all pass, return a point of the whole intersection."""
    polys = [p if isinstance(p, Polytope) else Polytope.from_halfspaces(*p) for p in polytopes]
    if not polys:
        raise ValueError("empty family")
    for i, p in enumerate(polys):
        if p.dim != n:
            raise ValueError(f"polytope {i} lives in dimension {p.dim}, not {n}")
        A, b = p.arrays()
        if not _bounded(A):
            raise ValueError(f"polytope {i} is unbounded")
        if _slack_lp(A, b)[1] > LP_TOL:
            raise ValueError(f"polytope {i} is empty")
    rational = all(p.rational for p in polys)
    size = min(n + 1, len(polys))
    for subset in itertools.combinations(range(len(polys)), size):
        A, b = _stack([polys[i] for i in subset])
        _, t = _slack_lp(A, b)
        if t > LP_TOL:
            exact = rational and _exact_infeasible([polys[i] for i in subset], A, b)
            return HellyResult(False, None, subset, exact)
    A, b = _stack(polys)
    x, t = _slack_lp(A, b)
    if t > LP_TOL:
        raise RuntimeError("all subfamilies intersect but the whole family does not")
    if not all(p.contains(x) for p in polys):
        raise RuntimeError("witness failed re-validation")
    exact = rational and _exact_member(polys, x)
    return HellyResult(True, x, None, exact)
