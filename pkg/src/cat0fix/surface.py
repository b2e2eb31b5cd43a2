"""Combinatorial surface topology for the Lickorish curves on a closed surface.

The closed genus-g surface is modelled by a single combinatorial map: the
union of all 3g-1 Lickorish curves is a 4-valent graph whose vertices are
the intersection points, and a rotation system at each vertex fixes the
embedding. Its faces are the g discs of the complement. Every subsurface
question asked here (regular neighbourhoods of curve subsets, complement
components, separation) is answered by walking this map.

Curve layout (surface drawn as a row of g handles)::

    a_i   meridian of handle i                 meets b_i
    b_i   longitude around hole i              meets a_i, c_{i-1}, c_i
    c_i   meridian of the tube joining holes   meets b_i, b_{i+1}

Along b_i the crossings occur in the cyclic order a_i, c_{i-1}, c_i.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .symplectic import SymplecticMatrix, transvection


class CurveError(ValueError):
    """Unknown curve label or unusable curve subset."""


class WitnessError(ValueError):
    """No disjoint-copies witness could be constructed."""


def curve_labels(g: int) -> tuple[str, ...]:
    return (
        tuple(f"a{i}" for i in range(1, g + 1))
        + tuple(f"b{i}" for i in range(1, g + 1))
        + tuple(f"c{i}" for i in range(1, g))
    )


def _homology_class(label: str, g: int) -> tuple[int, ...]:
    v = [0] * (2 * g)
    kind, i = label[0], int(label[1:])
    if kind == "a":
        v[i - 1] = 1
    elif kind == "b":
        v[g + i - 1] = 1
    else:
        # c_i is homologous to a_i - a_{i+1}; pairs to +1 with b_i, -1 with b_{i+1}
        v[i - 1] = 1
        v[i] = -1
    return tuple(v)


def _crossings_along(label: str, g: int) -> tuple[str, ...]:
    kind, i = label[0], int(label[1:])
    if kind == "a":
        return (f"b{i}",)
    if kind == "c":
        return (f"b{i}", f"b{i + 1}")
    pts = [f"a{i}"]
    if i > 1:
        pts.append(f"c{i - 1}")
    if i < g:
        pts.append(f"c{i}")
    return tuple(pts)


def pairing(x: Sequence[int], y: Sequence[int]) -> int:
    """Standard symplectic pairing x^T J y with J = [[0, I], [-I, 0]]."""
    g = len(x) // 2
    return sum(x[i] * y[g + i] - x[g + i] * y[i] for i in range(g))


@dataclass(frozen=True)
class _Map:
    """Dart-level combinatorial map of the full curve union."""

    curve: np.ndarray  # curve index of each dart
    alpha: tuple[int, ...]  # edge reversal
    sigma: tuple[int, ...]  # counterclockwise successor at the dart's vertex
    vertex: tuple[int, ...]  # vertex (intersection point) of each dart's tail
    edge: tuple[int, ...]  # arc carrying each dart
    face: tuple[int, ...]  # face on the left of each dart
    vertex_curves: tuple[tuple[int, int], ...]
    edge_curve: tuple[int, ...]
    edge_ends: tuple[tuple[int, int], ...]
    n_faces: int


@dataclass(frozen=True, eq=False)
class LickorishSystem:
    genus: int
    labels: tuple[str, ...]
    along: dict[str, tuple[str, ...]]
    homology: dict[str, tuple[int, ...]]
    intersections: tuple[tuple[str, str], ...]

    @cached_property
    def index(self) -> dict[str, int]:
        return {lab: k for k, lab in enumerate(self.labels)}

    @cached_property
    def adjacency(self) -> tuple[int, ...]:
        """Bitmask of curves meeting each curve."""
        adj = [0] * len(self.labels)
        for x, y in self.intersections:
            i, j = self.index[x], self.index[y]
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return tuple(adj)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.labels)) - 1

    def mask(self, curves: Iterable[str]) -> int:
        m = 0
        for c in curves:
            try:
                m |= 1 << self.index[c]
            except KeyError:
                raise CurveError(f"unknown curve label {c!r} for genus {self.genus}") from None
        return m

    def curves_of(self, mask: int) -> tuple[str, ...]:
        return tuple(lab for k, lab in enumerate(self.labels) if mask >> k & 1)

    def pair(self, x: str, y: str) -> int:
        return pairing(self.homology[x], self.homology[y])

    @cached_property
    def map(self) -> _Map:
        return _build_map(self)

    def to_dict(self) -> dict:
        return {
            "genus": self.genus,
            "curves": [
                {"label": lab, "homology": list(self.homology[lab])} for lab in self.labels
            ],
            "intersections": [list(p) for p in self.intersections],
            "ribbon": {lab: list(self.along[lab]) for lab in self.labels},
        }


def _build_map(sys: LickorishSystem) -> _Map:
    index = sys.index
    dart_of: dict[tuple[int, int, int], int] = {}
    darts = []
    for lab in sys.labels:
        x = index[lab]
        for j in range(len(sys.along[lab])):
            for s in (1, -1):
                dart_of[(x, j, s)] = len(darts)
                darts.append((x, j, s))

    vertex_ids: dict[frozenset, int] = {}
    vertex_curves = []
    for x, y in sys.intersections:
        vertex_ids[frozenset((x, y))] = len(vertex_curves)
        vertex_curves.append((index[x], index[y]))

    edge_ids: dict[tuple[int, int], int] = {}
    edge_curve, edge_ends = [], []
    n = len(darts)
    alpha, sigma, vertex, edge = [0] * n, [0] * n, [0] * n, [0] * n
    for d, (x, j, s) in enumerate(darts):
        lab = sys.labels[x]
        pts = sys.along[lab]
        m = len(pts)
        if s == 1:
            alpha[d] = dart_of[(x, (j + 1) % m, -1)]
            key = (x, j)
        else:
            alpha[d] = dart_of[(x, (j - 1) % m, 1)]
            key = (x, (j - 1) % m)
        if key not in edge_ids:
            edge_ids[key] = len(edge_curve)
            edge_curve.append(x)
            kx = key[1]
            edge_ends.append(
                (vertex_ids[frozenset((lab, pts[kx]))], vertex_ids[frozenset((lab, pts[(kx + 1) % m]))])
            )
        edge[d] = edge_ids[key]
        other = pts[j]
        vertex[d] = vertex_ids[frozenset((lab, other))]
        y = index[other]
        k = sys.along[other].index(lab)
        if sys.pair(lab, other) == 1:
            rot = [(x, j, 1), (y, k, 1), (x, j, -1), (y, k, -1)]
        else:
            rot = [(x, j, 1), (y, k, -1), (x, j, -1), (y, k, 1)]
        sigma[d] = dart_of[rot[(rot.index((x, j, s)) + 1) % 4]]

    face = [-1] * n
    n_faces = 0
    for d in range(n):
        if face[d] >= 0:
            continue
        e = d
        while face[e] < 0:
            face[e] = n_faces
            e = sigma[alpha[e]]
        n_faces += 1

    return _Map(
        curve=np.array([x for x, _, _ in darts]),
        alpha=tuple(alpha),
        sigma=tuple(sigma),
        vertex=tuple(vertex),
        edge=tuple(edge),
        face=tuple(face),
        vertex_curves=tuple(vertex_curves),
        edge_curve=tuple(edge_curve),
        edge_ends=tuple(edge_ends),
        n_faces=n_faces,
    )


def lickorish_system(g: int) -> LickorishSystem:
    """The 3g-1 Lickorish curves on the closed genus-g surface."""
    if g < 2:
        raise ValueError(f"Lickorish system needs genus >= 2, got {g}")
    labels = curve_labels(g)
    along = {lab: _crossings_along(lab, g) for lab in labels}
    homology = {lab: _homology_class(lab, g) for lab in labels}
    order = {lab: k for k, lab in enumerate(labels)}
    pairs = set()
    for lab, pts in along.items():
        for other in pts:
            pairs.add(tuple(sorted((lab, other), key=order.__getitem__)))
    intersections = tuple(sorted(pairs, key=lambda p: (order[p[0]], order[p[1]])))
    return LickorishSystem(g, labels, along, homology, intersections)


# ---------------------------------------------------------------------------
# connectivity
# ---------------------------------------------------------------------------


def components_of_mask(sys: LickorishSystem, mask: int) -> list[int]:
    """Connected components (as masks) of the intersection graph on ``mask``."""
    adj = sys.adjacency
    comps = []
    rest = mask
    while rest:
        low = rest & -rest
        comp, frontier = low, low
        while frontier:
            nxt = 0
            f = frontier
            while f:
                b = f & -f
                nxt |= adj[b.bit_length() - 1]
                f ^= b
            nxt &= mask & ~comp
            comp |= nxt
            frontier = nxt
        comps.append(comp)
        rest &= ~comp
    return comps


def is_connected_mask(sys: LickorishSystem, mask: int) -> bool:
    return mask != 0 and len(components_of_mask(sys, mask)) == 1


def is_connected_subset(sys: LickorishSystem, curves: Iterable[str]) -> bool:
    """True iff the union of the given curves is connected.

    Distinct Lickorish curves meet at most once, so this is connectivity of
    the intersection graph restricted to the subset.
    """
    return is_connected_mask(sys, sys.mask(curves))


# ---------------------------------------------------------------------------
# regular neighbourhoods
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplementComponent:
    chi: int
    boundary: int
    curves: tuple[str, ...]
    faces: tuple[int, ...]

    @property
    def genus(self) -> int:
        return (2 - self.chi - self.boundary) // 2

    @property
    def is_disk(self) -> bool:
        return self.chi == 1 and self.boundary == 1

    def to_dict(self) -> dict:
        return {
            "chi": self.chi,
            "boundary": self.boundary,
            "genus": self.genus,
            "curves": list(self.curves),
        }


@dataclass(frozen=True)
class RibbonNeighborhood:
    curves: tuple[str, ...]
    V: int
    E: int
    chi: int
    boundary: int
    genus: int
    separating: bool
    complement: tuple[ComplementComponent, ...]
    walks: tuple[tuple[int, ...], ...] = field(repr=False)
    walk_component: tuple[int, ...] = field(repr=False)
    n_pieces: int = 1

    @property
    def connected(self) -> bool:
        return self.n_pieces == 1

    def to_dict(self) -> dict:
        return {
            "curves": list(self.curves),
            "V": self.V,
            "E": self.E,
            "chi": self.chi,
            "boundary": self.boundary,
            "genus": self.genus,
            "separating": self.separating,
            "complement": [c.to_dict() for c in self.complement],
        }


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def neighborhood_mask(sys: LickorishSystem, mask: int) -> RibbonNeighborhood:
    if mask == 0:
        raise CurveError("neighbourhood of an empty curve set")
    if mask & ~sys.full_mask:
        raise CurveError("curve mask out of range")
    mp = sys.map
    alpha, sigma, face = mp.alpha, mp.sigma, mp.face
    in_s = [bool(mask >> int(x) & 1) for x in mp.curve]

    def sigma_k(d: int) -> int:
        e = sigma[d]
        while not in_s[e]:
            e = sigma[e]
        return e

    # boundary walks of the ribbon structure restricted to S
    visited: set[int] = set()
    walks = []
    for d in range(len(alpha)):
        if not in_s[d] or d in visited:
            continue
        walk = []
        e = d
        while e not in visited:
            visited.add(e)
            walk.append(e)
            e = sigma_k(alpha[e])
        walks.append(tuple(walk))

    # complement cells: vertices/edges off S, all faces
    vcurves, ecurve = mp.vertex_curves, mp.edge_curve
    nv, ne, nf = len(vcurves), len(ecurve), mp.n_faces
    v_out = [not (mask >> x & 1 or mask >> y & 1) for x, y in vcurves]
    e_out = [not (mask >> x & 1) for x in ecurve]
    uf = _UnionFind(nv + ne + nf)
    for d in range(len(alpha)):
        ed = mp.edge[d]
        if not e_out[ed]:
            continue
        uf.union(nv + ed, nv + ne + face[d])
        if v_out[mp.vertex[d]]:
            uf.union(nv + ed, mp.vertex[d])

    roots: dict[int, int] = {}
    comp_chi: list[int] = []
    comp_curves: list[set] = []
    comp_faces: list[list[int]] = []

    def comp_id(cell: int) -> int:
        r = uf.find(cell)
        if r not in roots:
            roots[r] = len(comp_chi)
            comp_chi.append(0)
            comp_curves.append(set())
            comp_faces.append([])
        return roots[r]

    for f in range(nf):
        c = comp_id(nv + ne + f)
        comp_chi[c] += 1
        comp_faces[c].append(f)
    for ed in range(ne):
        if e_out[ed]:
            c = comp_id(nv + ed)
            comp_chi[c] -= 1
            comp_curves[c].add(ecurve[ed])
    for v in range(nv):
        if v_out[v]:
            comp_chi[comp_id(v)] += 1

    comp_boundary = [0] * len(comp_chi)
    walk_component = []
    for w in walks:
        c = roots[uf.find(nv + ne + face[w[0]])]
        comp_boundary[c] += 1
        walk_component.append(c)

    complement = tuple(
        ComplementComponent(
            chi=comp_chi[c],
            boundary=comp_boundary[c],
            curves=tuple(sys.labels[x] for x in sorted(comp_curves[c])),
            faces=tuple(comp_faces[c]),
        )
        for c in range(len(comp_chi))
    )

    V = sum(1 for x, y in vcurves if mask >> x & 1 and mask >> y & 1)
    E = 2 * V
    chi = V - E
    b = len(walks)
    pieces = len(components_of_mask(sys, mask))
    genus2 = 2 * pieces - chi - b
    return RibbonNeighborhood(
        curves=sys.curves_of(mask),
        V=V,
        E=E,
        chi=chi,
        boundary=b,
        genus=genus2 // 2,
        separating=len(complement) != 1,
        complement=complement,
        walks=tuple(walks),
        walk_component=tuple(walk_component),
        n_pieces=pieces,
    )


def neighborhood(sys: LickorishSystem, curves: Iterable[str]) -> RibbonNeighborhood:
    """Regular neighbourhood of the union of ``curves``.

    For a disconnected union the reported genus is the total over pieces.
    """
    return neighborhood_mask(sys, sys.mask(curves))


# ---------------------------------------------------------------------------
# enveloping subsurfaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class SubsurfaceType:
    genus: int
    boundary: int
    nonseparating: bool = True

    @property
    def chi(self) -> int:
        return 2 - 2 * self.genus - self.boundary

    def __str__(self) -> str:
        side = "non-separating" if self.nonseparating else "separating"
        return f"{side} genus-{self.genus} subsurface with {self.boundary} boundary component(s)"

    def to_dict(self) -> dict:
        return {"genus": self.genus, "boundary": self.boundary, "nonseparating": self.nonseparating}

    @classmethod
    def from_dict(cls, d: dict) -> "SubsurfaceType":
        return cls(int(d["genus"]), int(d["boundary"]), bool(d.get("nonseparating", True)))


@dataclass(frozen=True)
class Envelope:
    type: SubsurfaceType
    remaining: int  # index of the complement component left outside
    absorbed: tuple[int, ...]
    degenerate: bool  # only the whole surface minus a disc contains U(S)
    neighborhood: RibbonNeighborhood = field(repr=False)

    def to_dict(self) -> dict:
        nb = self.neighborhood
        return {
            "type": self.type.to_dict(),
            "remaining": nb.complement[self.remaining].to_dict(),
            "absorbed": [nb.complement[i].to_dict() for i in self.absorbed],
            "degenerate": self.degenerate,
        }


def envelope_candidates(sys: LickorishSystem, mask: int) -> list[Envelope]:
    """Every subsurface N(S) + (all but one complement component).

    These are exactly the unions of N(S) with complement components whose
    own complement is connected.
    """
    if not is_connected_mask(sys, mask):
        raise CurveError(f"curve set {sys.curves_of(mask)} is not connected")
    nb = neighborhood_mask(sys, mask)
    total_chi = 2 - 2 * sys.genus
    out = []
    for r, comp in enumerate(nb.complement):
        chi_t = total_chi - comp.chi
        b_t = comp.boundary
        h_t = (2 - chi_t - b_t) // 2
        out.append(
            Envelope(
                type=SubsurfaceType(h_t, b_t, True),
                remaining=r,
                absorbed=tuple(i for i in range(len(nb.complement)) if i != r),
                degenerate=comp.is_disk,
                neighborhood=nb,
            )
        )
    return out


def enveloping_subsurface_mask(sys: LickorishSystem, mask: int) -> Envelope:
    cands = envelope_candidates(sys, mask)
    # non-degenerate first, then smallest (genus, boundary)
    return min(cands, key=lambda e: (e.degenerate, e.type.genus, e.type.boundary, e.remaining))


def enveloping_subsurface(sys: LickorishSystem, curves: Iterable[str]) -> Envelope:
    """Smallest subsurface with connected complement containing U(S)."""
    return enveloping_subsurface_mask(sys, sys.mask(curves))


def connected_masks(sys: LickorishSystem, max_size: int | None = None) -> list[int]:
    """All connected curve subsets of size <= max_size, grown one curve at a time."""
    n = len(sys.labels)
    max_size = n if max_size is None else min(max_size, n)
    adj = sys.adjacency
    layer = {1 << i for i in range(n)}
    out = sorted(layer)
    for _ in range(max_size - 1):
        nxt = set()
        for m in layer:
            reach = 0
            mm = m
            while mm:
                b = mm & -mm
                reach |= adj[b.bit_length() - 1]
                mm ^= b
            reach &= ~m
            while reach:
                b = reach & -reach
                nxt.add(m | b)
                reach ^= b
        out.extend(sorted(nxt))
        layer = nxt
    return out


# ---------------------------------------------------------------------------
# the connected-subset classification sweep
# ---------------------------------------------------------------------------


def prop52_alternatives(size: int, t: SubsurfaceType) -> list[str]:
    """Which containment alternatives a subsurface type satisfies for |S| = size.

    even |S| = 2l:   "A" genus l, one boundary;   "B" non-separating, genus <= l-1, <= 3 boundaries
    odd  |S| = 2l+1: "A" non-separating, genus l, <= 2 boundaries;
                     "B" non-separating, genus <= l-1, <= 3 boundaries
    """
    ell = size // 2
    alts = []
    if size % 2 == 0:
        if t.genus <= ell and t.boundary == 1:
            alts.append("A")
        if t.nonseparating and t.genus <= ell - 1 and t.boundary <= 3:
            alts.append("B")
    else:
        if t.nonseparating and t.genus <= ell and t.boundary <= 2:
            alts.append("A")
        if t.nonseparating and t.genus <= ell - 1 and t.boundary <= 3:
            alts.append("B")
    return alts


@dataclass
class Prop52Report:
    genus: int
    checked: int = 0
    degenerate: list[dict] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)
    alternatives: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "genus": self.genus,
            "checked": self.checked,
            "alternatives": dict(sorted(self.alternatives.items())),
            "degenerate": self.degenerate,
            "violations": self.violations,
        }


def verify_prop52(g: int) -> Prop52Report:
    """Exhaustively classify every connected subset of the Lickorish curves.

    Each connected S gets its smallest enveloping subsurface, which must
    satisfy the containment alternative for the parity of |S|. Subsets that
    are only contained in the whole surface minus a disc are listed apart.
    """
    if not 2 <= g <= 6:
        raise ValueError(f"enumeration bound is 2 <= g <= 6, got {g}")
    sys = lickorish_system(g)
    report = Prop52Report(g)
    for mask in connected_masks(sys):
        size = bin(mask).count("1")
        if size == 1:
            continue
        env = enveloping_subsurface_mask(sys, mask)
        alts = prop52_alternatives(size, env.type)
        entry = {"subset": list(sys.curves_of(mask)), "size": size, **env.to_dict(), "alternatives": alts}
        if env.degenerate:
            report.degenerate.append(entry)
            continue
        report.checked += 1
        key = f"{'even' if size % 2 == 0 else 'odd'}:{'+'.join(alts) or 'none'}"
        report.alternatives[key] = report.alternatives.get(key, 0) + 1
        if not alts:
            report.violations.append(entry)
    return report


# ---------------------------------------------------------------------------
# disjoint copies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Copy:
    """A subsurface given as N(curves) or as the closure of its complement."""

    curves: tuple[str, ...]
    side: str = "neighborhood"

    def to_dict(self) -> dict:
        return {"curves": list(self.curves), "side": self.side}

    @classmethod
    def from_dict(cls, d: dict) -> "Copy":
        return cls(tuple(d["curves"]), d.get("side", "neighborhood"))


def copy_type(sys: LickorishSystem, copy: Copy) -> tuple[SubsurfaceType, bool]:
    """(type, complement connected) of a copy."""
    mask = sys.mask(copy.curves)
    nb = neighborhood_mask(sys, mask)
    if copy.side == "neighborhood":
        conn = nb.n_pieces == 1
        return SubsurfaceType(nb.genus, nb.boundary, len(nb.complement) == 1), conn and len(nb.complement) == 1
    if copy.side == "complement":
        if len(nb.complement) != 1 or nb.n_pieces != 1:
            return SubsurfaceType(-1, 0, False), False
        c = nb.complement[0]
        return SubsurfaceType(c.genus, c.boundary, True), True
    raise CurveError(f"unknown copy side {copy.side!r}")


def check_copies(sys: LickorishSystem, t: SubsurfaceType, copies: Sequence[Copy]) -> str | None:
    """Return None if the copies are pairwise disjoint, each of type t with connected
    complement; otherwise a diagnostic."""
    adj = sys.adjacency
    nbhd_masks = []
    comp_masks = []
    for i, cp in enumerate(copies):
        try:
            mask = sys.mask(cp.curves)
        except CurveError as exc:
            return f"copy {i}: {exc}"
        if mask == 0 or len(set(cp.curves)) != len(cp.curves):
            return f"copy {i}: empty or repeated curves"
        if cp.side not in ("neighborhood", "complement"):
            return f"copy {i}: unknown side {cp.side!r}"
        ct, conn = copy_type(sys, cp)
        if ct != t:
            return f"copy {i}: type {ct} differs from {t}"
        if not conn:
            return f"copy {i}: complement is not connected"
        (nbhd_masks if cp.side == "neighborhood" else comp_masks).append(mask)
    if len(comp_masks) > 1:
        return "two complement copies cannot be disjoint"
    for i, m in enumerate(nbhd_masks):
        reach = m
        mm = m
        while mm:
            b = mm & -mm
            reach |= adj[b.bit_length() - 1]
            mm ^= b
        for m2 in nbhd_masks[i + 1:]:
            if reach & m2:
                return f"neighbourhood copies {sys.curves_of(m)} and {sys.curves_of(m2)} meet"
    for cm in comp_masks:
        for m in nbhd_masks:
            if m & ~cm:
                return f"neighbourhood copy {sys.curves_of(m)} is not inside the complemented block"
    return None


def _spine_span(label: str) -> int:
    i = int(label[1:])
    return 2 * i if label[0] == "c" else 2 * i - 1


def _pack(sys: LickorishSystem, cands: list[int], count: int, within: int | None = None) -> list[int] | None:
    adj = sys.adjacency
    if within is not None:
        cands = [c for c in cands if not c & ~within]
    cands = sorted(cands, key=lambda m: (max(map(_spine_span, sys.curves_of(m))), m))
    reach = {}
    for c in cands:
        r, mm = c, c
        while mm:
            b = mm & -mm
            r |= adj[b.bit_length() - 1]
            mm ^= b
        reach[c] = r
    chosen: list[int] = []

    def dfs(i: int, used: int) -> bool:
        if len(chosen) == count:
            return True
        for j in range(i, len(cands)):
            c = cands[j]
            if reach[c] & used:
                continue
            chosen.append(c)
            if dfs(j + 1, used | c):
                return True
            chosen.pop()
        return False

    return list(chosen) if dfs(0, 0) else None


def disjoint_copies_witness(g: int, t: SubsurfaceType, count: int) -> list[Copy]:
    """``count`` pairwise-disjoint subsurfaces of type t, each with connected complement.

    Copies are neighbourhoods of blocks of Lickorish curves, packed left to
    right along the handle chain. When the blocks alone do not fit, one copy
    may instead be the complement of a block neighbourhood that contains
    all the others.
    """
    if count <= 0:
        raise ValueError(f"count must be positive, got {count}")
    return _witness_cached(g, t, count)


_WITNESS_CACHE: dict[tuple[int, SubsurfaceType, int], list[Copy]] = {}


def _witness_cached(g: int, t: SubsurfaceType, count: int) -> list[Copy]:
    key = (g, t, count)
    if key in _WITNESS_CACHE:
        return list(_WITNESS_CACHE[key])
    sys = lickorish_system(g)
    size = 2 * t.genus + t.boundary - 1
    if size < 1 or not t.nonseparating:
        raise WitnessError(f"no block realizes {t}")
    all_conn = connected_masks(sys)
    blocks = []
    for m in all_conn:
        if bin(m).count("1") != size:
            continue
        nb = neighborhood_mask(sys, m)
        if len(nb.complement) == 1 and (nb.genus, nb.boundary) == (t.genus, t.boundary):
            blocks.append(m)
    packed = _pack(sys, blocks, count)
    if packed is not None:
        out = [Copy(sys.curves_of(m)) for m in packed]
    else:
        out = None
        for outer in all_conn:
            nb = neighborhood_mask(sys, outer)
            if len(nb.complement) != 1:
                continue
            c = nb.complement[0]
            if (c.genus, c.boundary) != (t.genus, t.boundary):
                continue
            inner = _pack(sys, blocks, count - 1, within=outer)
            if inner is not None:
                out = [Copy(sys.curves_of(m)) for m in inner] + [Copy(sys.curves_of(outer), "complement")]
                break
        if out is None:
            raise WitnessError(f"cannot fit {count} disjoint copies of {t} in genus {g}")
    assert check_copies(sys, t, out) is None
    _WITNESS_CACHE[key] = out
    return list(out)


# ---------------------------------------------------------------------------
# homology representation
# ---------------------------------------------------------------------------


def twist_matrix(sys: LickorishSystem, curve: str) -> SymplecticMatrix:
    """Action of the Dehn twist about ``curve`` on H_1: x -> x + <x, c> c."""
    if curve not in sys.homology:
        raise CurveError(f"unknown curve label {curve!r}")
    return transvection(sys.homology[curve], 1)


@dataclass
class RelationReport:
    genus: int
    commuting: int = 0
    braid: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "genus": self.genus,
            "commuting_pairs": self.commuting,
            "braid_pairs": self.braid,
            "failures": self.failures,
        }


def check_relations(sys: LickorishSystem) -> RelationReport:
    """Disjoint curves give commuting twists; curves meeting once satisfy the braid relation."""
    mats = {lab: twist_matrix(sys, lab).exact() for lab in sys.labels}
    meets = {frozenset(p) for p in sys.intersections}
    report = RelationReport(sys.genus)
    for x, y in itertools.combinations(sys.labels, 2):
        A, B = mats[x], mats[y]
        p = sys.pair(x, y)
        if frozenset((x, y)) in meets:
            ok = abs(p) == 1 and np.array_equal(A.dot(B).dot(A), B.dot(A).dot(B))
            report.braid += 1
            kind = "braid"
        else:
            ok = p == 0 and np.array_equal(A.dot(B), B.dot(A))
            report.commuting += 1
            kind = "commute"
        if not ok:
            report.failures.append({"pair": [x, y], "relation": kind, "pairing": p})
    return report
