"""Rule-based derivation of a global fixed point for the Lickorish generators.

Facts have the form fix(S): the twists in the curve subset S have a common
fixed point in X, where X is a complete CAT(0) space of covering dimension
at most d. The engine derives fix(S) for every |S| <= d+1 by induction on
|S| and closes with the Helly rule, producing a certificate whose every
node can be re-checked by :func:`verify_certificate` without re-running
the search.

The space X itself is never modelled; it enters only through d.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .surface import (
    Copy,
    LickorishSystem,
    SubsurfaceType,
    WitnessError,
    check_copies,
    components_of_mask,
    disjoint_copies_witness,
    enveloping_subsurface_mask,
    is_connected_mask,
    lickorish_system,
)

SCHEMA_VERSION = 1

BASE_ELLIPTIC = "BASE_ELLIPTIC"
SPLIT_DISCONNECTED = "SPLIT_DISCONNECTED"
CONJ_BOOTSTRAP = "CONJ_BOOTSTRAP"
BOOTSTRAP = "BOOTSTRAP"
HELLY_FINISH = "HELLY_FINISH"

RULES = {
    BASE_ELLIPTIC: "each Dehn twist is elliptic: under the action hypothesis a twist in genus >= 3 "
    "is elliptic or a neutral parabolic, and the hypothesis excludes the latter",
    SPLIT_DISCONNECTED: "commuting subgroups with non-empty fixed sets have a common fixed point "
    "(the centre of a bounded orbit inside a convex fixed set)",
    CONJ_BOOTSTRAP: "n mutually commuting conjugates of <S> in a space of dimension < n*k, every "
    "k-subset of S fixing a point, force every finite subset of S to fix a point",
    BOOTSTRAP: "commuting families S_1..S_n whose k_i-subsets fix points, in dimension < sum k_i: "
    "some S_i has all finite subsets fixing a point",
    HELLY_FINISH: "in dimension <= d, a finite generating set all of whose (d+1)-subsets fix a point "
    "has a global fixed point",
}

HYPOTHESES = {
    "semisimple": "Mod acts by semisimple isometries",
    "no-neutral-parabolics": "no Dehn twist acts as a neutral parabolic",
}


class RuleError(ValueError):
    """A rule was applied with a failing side condition."""


class DerivationFailure(Exception):
    """The engine could not build a certificate. Never a counterexample."""

    def __init__(self, g: int, d: int, reason: str, subset: Sequence[str] | None = None, rule: str | None = None):
        super().__init__(reason)
        self.g, self.d, self.reason = g, d, reason
        self.subset = list(subset) if subset is not None else None
        self.rule = rule

    def to_dict(self) -> dict:
        return {
            "error": "derivation-failure",
            "g": self.g,
            "d": self.d,
            "reason": self.reason,
            "subset": self.subset,
            "rule": self.rule,
        }


@dataclass(frozen=True, eq=False)
class GeneratorContext:
    g: int
    d: int
    system: LickorishSystem
    hypothesis: str = "semisimple"

    @classmethod
    def create(cls, g: int, d: int, hypothesis: str = "semisimple") -> "GeneratorContext":
        if hypothesis not in HYPOTHESES:
            raise ValueError(f"unknown hypothesis {hypothesis!r}")
        if d < 0:
            raise ValueError("dimension bound must be >= 0")
        return cls(g, d, lickorish_system(g), hypothesis)

    def commutes(self, x: str, y: str) -> bool:
        """Twists in disjoint curves commute."""
        sys = self.system
        return x != y and not (sys.adjacency[sys.index[x]] >> sys.index[y] & 1)

    def reach(self, mask: int) -> int:
        adj = self.system.adjacency
        r, mm = mask, mask
        while mm:
            b = mm & -mm
            r |= adj[b.bit_length() - 1]
            mm ^= b
        return r


@dataclass(slots=True)
class FixFact:
    id: int
    mask: int
    subset: tuple[str, ...]
    rule: str
    premises: tuple[int, ...] = ()
    side_conditions: dict = field(default_factory=dict)
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "subset": list(self.subset),
            "rule": self.rule,
            "premises": list(self.premises),
            "side_conditions": self.side_conditions,
            "witness": self.witness,
        }


@dataclass
class DisjunctiveFact:
    """Conclusion of the plain bootstrap rule: some candidate has all finite subsets fixing."""

    candidates: list[tuple[str, ...]]

    def resolved(self) -> tuple[str, ...] | None:
        return self.candidates[0] if len(self.candidates) == 1 else None


class FactTable:
    """Append-only table of derived facts, keyed by subset mask."""

    def __init__(self, ctx: GeneratorContext):
        self.ctx = ctx
        self.facts: list[FixFact] = []
        self.by_mask: dict[int, int] = {}

    def __contains__(self, mask: int) -> bool:
        return mask in self.by_mask

    def get(self, mask: int) -> FixFact:
        try:
            return self.facts[self.by_mask[mask]]
        except KeyError:
            raise RuleError(f"missing premise fix({{{', '.join(self.ctx.system.curves_of(mask))}}})") from None

    def add(self, fact: FixFact) -> FixFact:
        fact.id = len(self.facts)
        self.facts.append(fact)
        self.by_mask.setdefault(fact.mask, fact.id)
        return fact


def _mask(ctx: GeneratorContext, curves: Iterable[str] | int) -> int:
    return curves if isinstance(curves, int) else ctx.system.mask(curves)


def _subsets_of_size(mask: int, k: int) -> list[int]:
    bits = [1 << i for i in range(mask.bit_length()) if mask >> i & 1]
    return [sum(c) for c in itertools.combinations(bits, k)]


# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------


def rule_base_elliptic(ctx: GeneratorContext, s, facts: FactTable | None = None) -> FixFact:
    mask = _mask(ctx, [s] if isinstance(s, str) else s)
    if bin(mask).count("1") != 1:
        raise RuleError(f"base rule needs a single generator, got {ctx.system.curves_of(mask)}")
    fact = FixFact(-1, mask, ctx.system.curves_of(mask), BASE_ELLIPTIC, (), {"size": 1})
    return facts.add(fact) if facts is not None else fact


def rule_split_disconnected(ctx: GeneratorContext, S, partition, facts: FactTable) -> FixFact:
    mask = _mask(ctx, S)
    m1, m2 = (_mask(ctx, p) for p in partition)
    if not m1 or not m2 or m1 & m2 or m1 | m2 != mask:
        raise RuleError("partition does not split S into two non-empty parts")
    if ctx.reach(m1) & m2:
        sys = ctx.system
        bad = next(
            (x, y) for x in sys.curves_of(m1) for y in sys.curves_of(m2) if not ctx.commutes(x, y)
        )
        raise RuleError(f"{bad[0]} and {bad[1]} intersect, so their twists do not commute")
    p1, p2 = facts.get(m1), facts.get(m2)
    cross = bin(m1).count("1") * bin(m2).count("1")
    fact = FixFact(-1, mask, ctx.system.curves_of(mask), SPLIT_DISCONNECTED, (p1.id, p2.id), {"cross_pairs": cross})
    return facts.add(fact)


def copies_needed(d: int, k: int) -> int:
    """Smallest n with d <= n*k - 1."""
    return -(-(d + 1) // k)


def rule_conjugate_bootstrap(
    ctx: GeneratorContext, S, k: int, copies: Sequence[Copy], facts: FactTable, envelope: SubsurfaceType | None = None
) -> FixFact:
    sys = ctx.system
    mask = _mask(ctx, S)
    size = bin(mask).count("1")
    if not is_connected_mask(sys, mask):
        raise RuleError(f"{sys.curves_of(mask)} is not connected")
    if k != size - 1 or k < 1:
        raise RuleError(f"k must be |S|-1 = {size - 1}, got {k}")
    t = envelope if envelope is not None else enveloping_subsurface_mask(sys, mask).type
    n = len(copies)
    bound = n * k - 1
    if ctx.d > bound:
        raise RuleError(f"dimension arithmetic fails: d = {ctx.d} > n*k - 1 = {n}*{k} - 1 = {bound}")
    problem = check_copies(sys, t, copies)
    if problem:
        raise RuleError(f"invalid copies witness: {problem}")
    premises = tuple(facts.get(sub).id for sub in _subsets_of_size(mask, k))
    fact = FixFact(
        -1,
        mask,
        sys.curves_of(mask),
        CONJ_BOOTSTRAP,
        premises,
        {"k": k, "n": n, "d": ctx.d, "bound": bound, "envelope": t.to_dict()},
        {"copies": [c.to_dict() for c in copies]},
    )
    return facts.add(fact)


def rule_bootstrap(
    ctx: GeneratorContext,
    sets: Sequence,
    ks: Sequence[int],
    facts: FactTable,
    *,
    conjugate_of=None,
    copies: Sequence[Copy] | None = None,
):
    """Plain bootstrap. With ``conjugate_of`` and a copies witness the sets are
    conjugates of one subset and the conclusion sharpens to fix(S)."""
    if conjugate_of is not None:
        if copies is None or len(set(ks)) != 1:
            raise RuleError("conjugate bootstrap needs a copies witness and a common k")
        return rule_conjugate_bootstrap(ctx, conjugate_of, ks[0], copies, facts)
    if len(sets) != len(ks) or not sets:
        raise RuleError("need one k per set")
    masks = [_mask(ctx, s) for s in sets]
    for i, j in itertools.combinations(range(len(masks)), 2):
        if masks[i] & masks[j] or ctx.reach(masks[i]) & masks[j]:
            raise RuleError(f"sets {i} and {j} contain non-commuting twists")
    for m, k in zip(masks, ks):
        if not 1 <= k <= bin(m).count("1"):
            raise RuleError(f"k = {k} out of range for a set of size {bin(m).count('1')}")
        for sub in _subsets_of_size(m, k):
            facts.get(sub)
    if ctx.d > sum(ks) - 1:
        raise RuleError(f"dimension arithmetic fails: d = {ctx.d} > {sum(ks) - 1}")
    return DisjunctiveFact([ctx.system.curves_of(m) for m in masks])


def rule_helly_finish(ctx: GeneratorContext, facts: FactTable) -> FixFact:
    sys = ctx.system
    size = ctx.d + 1
    n = len(sys.labels)
    if size > n:
        raise RuleError("d + 1 exceeds the number of generators")
    premises = []
    for combo in itertools.combinations(range(n), size):
        m = sum(1 << i for i in combo)
        if m not in facts:
            raise RuleError(f"missing fix({{{', '.join(sys.curves_of(m))}}})")
        premises.append(facts.by_mask[m])
    fact = FixFact(
        -1,
        sys.full_mask,
        sys.labels,
        HELLY_FINISH,
        tuple(premises),
        {"d": ctx.d, "subset_size": size, "count": math.comb(n, size)},
    )
    return facts.add(fact)


# ---------------------------------------------------------------------------
# derivation
# ---------------------------------------------------------------------------


@dataclass
class Certificate:
    context: GeneratorContext
    facts: list[FixFact]

    @property
    def conclusion(self) -> FixFact:
        return self.facts[-1]

    def to_dict(self) -> dict:
        ctx = self.context
        return {
            "v": SCHEMA_VERSION,
            "context": {
                "g": ctx.g,
                "d": ctx.d,
                "hypothesis": ctx.hypothesis,
                "generators": list(ctx.system.labels),
                "rules": dict(RULES),
            },
            "facts": [f.to_dict() for f in self.facts],
            "conclusion": {"fact": self.conclusion.id, "subset": list(self.conclusion.subset)},
        }


def derive_theorem_d(g: int, d: int, hypothesis: str = "semisimple") -> Certificate:
    """Derive a global fixed point for the Lickorish twists in dimension <= d.

    Raises DerivationFailure for g < 3, or when some rule is inapplicable
    (always the case once d >= g).
    """
    if g == 1:
        raise DerivationFailure(g, d, "genus 1 is trivial and handled outside the engine")
    if g == 2:
        raise DerivationFailure(
            g, d, "genus 2 rests on property FR for the genus-2 mapping class group, an external result"
        )
    if g < 1:
        raise DerivationFailure(g, d, "genus must be positive")
    ctx = GeneratorContext.create(g, d, hypothesis)
    sys = ctx.system
    facts = FactTable(ctx)
    n = len(sys.labels)
    outside = "" if d < g else " (d >= g lies outside the dimension hypothesis)"
    for size in range(1, min(d + 1, n) + 1):
        for combo in itertools.combinations(range(n), size):
            mask = sum(1 << i for i in combo)
            if size == 1:
                rule_base_elliptic(ctx, mask, facts)
                continue
            comps = components_of_mask(sys, mask)
            if len(comps) > 1:
                rule_split_disconnected(ctx, mask, (comps[0], mask & ~comps[0]), facts)
                continue
            k = size - 1
            env = _envelope(sys, mask)
            need = copies_needed(d, k)
            try:
                copies = disjoint_copies_witness(g, env, need)
                rule_conjugate_bootstrap(ctx, mask, k, copies, facts, envelope=env)
            except (WitnessError, RuleError) as exc:
                raise DerivationFailure(
                    g, d, f"{CONJ_BOOTSTRAP} inapplicable: {exc}{outside}", sys.curves_of(mask), CONJ_BOOTSTRAP
                ) from None
    try:
        rule_helly_finish(ctx, facts)
    except RuleError as exc:
        raise DerivationFailure(g, d, f"{HELLY_FINISH} inapplicable: {exc}{outside}", None, HELLY_FINISH) from None
    return Certificate(ctx, facts.facts)


_ENVELOPES: dict[tuple[int, int], SubsurfaceType] = {}


def _envelope(sys: LickorishSystem, mask: int) -> SubsurfaceType:
    key = (sys.genus, mask)
    t = _ENVELOPES.get(key)
    if t is None:
        t = _ENVELOPES[key] = enveloping_subsurface_mask(sys, mask).type
    return t


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass
class Verdict:
    valid: bool
    diagnostic: str | None = None
    fact: int | None = None

    def __bool__(self) -> bool:
        return self.valid

    def to_dict(self) -> dict:
        out: dict = {"valid": self.valid}
        if not self.valid:
            out["diagnostic"] = self.diagnostic
            out["fact"] = self.fact
        return out


class _Invalid(Exception):
    def __init__(self, msg: str, fact: int | None = None):
        super().__init__(msg)
        self.fact = fact


def verify_certificate(cert, order: Sequence[int] | None = None) -> Verdict:
    """Re-check every node of a certificate (dict or Certificate).

    Commutation, envelopes and copies are recomputed from the curve model;
    premises must be exactly the sets each rule demands and must precede
    the node that uses them. Each node is checked from its own data and its
    premises only, so ``order`` may permute the node checks freely.
    """
    data = cert.to_dict() if isinstance(cert, Certificate) else cert
    try:
        _verify(data, order)
    except _Invalid as exc:
        where = f"fact {exc.fact}: " if exc.fact is not None else ""
        return Verdict(False, where + str(exc), exc.fact)
    except (KeyError, TypeError, ValueError, AttributeError, IndexError) as exc:
        return Verdict(False, f"malformed certificate: {type(exc).__name__}: {exc}")
    return Verdict(True)


def _expect(cond: bool, msg: str, fact: int | None = None) -> None:
    if not cond:
        raise _Invalid(msg, fact)


class _Checker:
    def __init__(self, data: dict):
        _expect(isinstance(data, dict), "certificate must be an object")
        _expect(data.get("v") == SCHEMA_VERSION, f"schema version must be {SCHEMA_VERSION}")
        _expect(set(data) == {"v", "context", "facts", "conclusion"}, "unexpected top-level fields")
        ctx = data["context"]
        _expect(set(ctx) == {"g", "d", "hypothesis", "generators", "rules"}, "context has unexpected fields")
        g, d = ctx["g"], ctx["d"]
        _expect(type(g) is int and g >= 3, "context.g must be an integer >= 3")
        _expect(type(d) is int and d >= 0, "context.d must be a non-negative integer")
        _expect(ctx["hypothesis"] in HYPOTHESES, "context.hypothesis is unknown")
        _expect(ctx["rules"] == RULES, "context.rules: justification table altered")
        self.sys = sys = lickorish_system(g)
        _expect(ctx["generators"] == list(sys.labels), f"context.generators do not match genus {g}")
        self.g, self.d = g, d
        self.facts = facts = data["facts"]
        _expect(isinstance(facts, list) and facts, "no facts")
        self.envelopes: dict[int, dict] = {}
        self.copies_ok: dict[str, str | None] = {}
        # parse pass: subsets to masks
        index = sys.index
        self.masks = masks = []
        for pos, f in enumerate(facts):
            _expect(isinstance(f, dict), "fact is not an object", pos)
            _expect(
                set(f) == {"id", "subset", "rule", "premises", "side_conditions", "witness"},
                "unexpected fact fields",
                pos,
            )
            sub = f["subset"]
            _expect(isinstance(sub, list) and sub, "empty subset", pos)
            idx = []
            for lab in sub:
                _expect(isinstance(lab, str) and lab in index, f"unknown curve {lab!r}", pos)
                idx.append(index[lab])
            _expect(idx == sorted(set(idx)), "subset not in canonical order or repeated", pos)
            masks.append(sum(1 << i for i in idx))
        concl = data["conclusion"]
        last = len(facts) - 1
        _expect(facts[last]["rule"] == HELLY_FINISH, "last fact is not a Helly finish", last)
        _expect(concl == {"fact": last, "subset": list(sys.labels)}, "conclusion does not name the final fact with all generators")

    def reach(self, m: int) -> int:
        adj = self.sys.adjacency
        r, mm = m, m
        while mm:
            b = mm & -mm
            r |= adj[b.bit_length() - 1]
            mm ^= b
        return r

    def check(self, pos: int) -> None:
        f = self.facts[pos]
        sys, d, masks = self.sys, self.d, self.masks
        _expect(type(f["id"]) is int and f["id"] == pos, f"id {f['id']!r} does not match position", pos)
        mask = masks[pos]
        size = bin(mask).count("1")
        prem = f["premises"]
        _expect(isinstance(prem, list), "premises must be a list", pos)
        for p in prem:
            _expect(type(p) is int and 0 <= p < pos, f"premise {p!r} is not an earlier fact", pos)
        pm = [masks[p] for p in prem]
        rule, side, wit = f["rule"], f["side_conditions"], f["witness"]

        if rule == BASE_ELLIPTIC:
            _expect(size == 1, "base rule on more than one generator", pos)
            _expect(not prem and side == {"size": 1} and wit is None, "base rule carries extra data", pos)
        elif rule == SPLIT_DISCONNECTED:
            _expect(len(pm) == 2, "split needs exactly two premises", pos)
            a, b = pm
            _expect(a and b and not a & b and a | b == mask, "premises do not partition the subset", pos)
            _expect(not self.reach(a) & b, "split parts contain intersecting curves", pos)
            cross = bin(a).count("1") * bin(b).count("1")
            _expect(side == {"cross_pairs": cross}, "split side conditions wrong", pos)
            _expect(wit is None, "split carries a witness", pos)
        elif rule == CONJ_BOOTSTRAP:
            _expect(size >= 2, "conjugate bootstrap on a single generator", pos)
            _expect(len(_components(mask, sys.adjacency)) == 1, "subset is not connected", pos)
            _expect(
                isinstance(side, dict) and set(side) == {"k", "n", "d", "bound", "envelope"},
                "bad side conditions",
                pos,
            )
            k, nn = side["k"], side["n"]
            _expect(type(k) is int and k == size - 1, f"k = {k!r} but |S| - 1 = {size - 1}", pos)
            _expect(
                isinstance(wit, dict) and set(wit) == {"copies"} and isinstance(wit["copies"], list),
                "bad witness",
                pos,
            )
            _expect(type(nn) is int and nn == len(wit["copies"]), f"n = {nn!r} but witness has {len(wit['copies'])} copies", pos)
            _expect(d <= nn * k - 1, f"dimension arithmetic fails: d = {d} > n*k - 1 = {nn * k - 1}", pos)
            _expect(side["bound"] == nn * k - 1, "recorded bound is not n*k - 1", pos)
            _expect(side["d"] == d, "recorded d differs from context", pos)
            env = self.envelopes.get(mask)
            if env is None:
                env = self.envelopes[mask] = enveloping_subsurface_mask(sys, mask).type.to_dict()
            _expect(side["envelope"] == env, f"envelope {side['envelope']} differs from recomputed {env}", pos)
            key = repr((env, wit["copies"]))
            if key not in self.copies_ok:
                self.copies_ok[key] = _check_copies_json(sys, env, wit["copies"])
            _expect(self.copies_ok[key] is None, f"copies witness rejected: {self.copies_ok[key]}", pos)
            want = sorted(_subsets_of_size(mask, k))
            _expect(len(pm) == len(want) and sorted(pm) == want, "premises are not exactly the k-subsets", pos)
        elif rule == HELLY_FINISH:
            _expect(mask == sys.full_mask, "Helly finish must cover all generators", pos)
            _expect(pos == len(self.facts) - 1, "Helly finish must be the last fact", pos)
            size_h = d + 1
            count = math.comb(len(sys.labels), size_h)
            _expect(side == {"d": d, "subset_size": size_h, "count": count}, "Helly side conditions wrong", pos)
            _expect(wit is None, "Helly finish carries a witness", pos)
            _expect(len(pm) == count and len(set(pm)) == count, f"need all {count} subsets of size {size_h}", pos)
            _expect(all(bin(m).count("1") == size_h for m in pm), f"a premise is not of size {size_h}", pos)
        else:
            _expect(False, f"unknown or non-terminal rule {rule!r}", pos)


def _check_copies_json(sys: LickorishSystem, env: dict, raw: list) -> str | None:
    copies = []
    for i, c in enumerate(raw):
        if not isinstance(c, dict) or set(c) != {"curves", "side"} or not isinstance(c["curves"], list):
            return f"copy {i} is malformed"
        if not all(isinstance(x, str) for x in c["curves"]) or not isinstance(c["side"], str):
            return f"copy {i} is malformed"
        copies.append(Copy.from_dict(c))
    return check_copies(sys, SubsurfaceType.from_dict(env), copies)


def _verify(data: dict, order: Sequence[int] | None = None) -> None:
    checker = _Checker(data)
    positions = range(len(checker.facts)) if order is None else order
    seen = set()
    for pos in positions:
        checker.check(pos)
        seen.add(pos)
    _expect(len(seen) == len(checker.facts), "not every fact was checked")


def _components(mask: int, adj: Sequence[int]) -> list[int]:
    comps, rest = [], mask
    while rest:
        comp = frontier = rest & -rest
        while frontier:
            nxt, f = 0, frontier
            while f:
                b = f & -f
                nxt |= adj[b.bit_length() - 1]
                f ^= b
            frontier = nxt & mask & ~comp
            comp |= frontier
        comps.append(comp)
        rest &= ~comp
    return comps
