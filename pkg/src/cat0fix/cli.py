"""Command-line interface. Every subcommand prints one JSON document.

Exit status is 0 on success, 1 on a domain error (the JSON is then an
error object) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analysis, engine, model_spaces, surface

SEED_ENV = "CAT0FIX_SEED"


class DomainError(Exception):
    def __init__(self, kind: str, message: str, **extra):
        super().__init__(message)
        self.kind, self.message, self.extra = kind, message, extra

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": self.message, **self.extra}


def _round(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_round(obj), separators=(",", ":"), allow_nan=False)


def _load(text: str):
    """Inline JSON, or a path to a JSON file."""
    if text.lstrip()[:1] in ("{", "["):
        source = text
    else:
        try:
            source = Path(text).read_text()
        except OSError as exc:
            raise DomainError("io", f"cannot read {text}: {exc.strerror}") from None
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise DomainError("malformed-json", str(exc)) from None


def _curves(text: str) -> list[str]:
    return [c.strip() for c in text.split(",") if c.strip()]


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------


def cmd_classify(args) -> dict:
    raw = _load(args.matrix)
    rows = raw["entries"] if isinstance(raw, dict) else raw
    return analysis.classify_symplectic(rows).to_dict()


def cmd_distance(args) -> dict:
    space = model_spaces.space_from_dict(_load(args.space))
    p = model_spaces.point_from_dict(_load(args.p))
    q = model_spaces.point_from_dict(_load(args.q))
    return {"distance": model_spaces.distance(space, p, q)}


def cmd_circumcenter(args) -> dict:
    space = model_spaces.space_from_dict(_load(args.space))
    pts = [model_spaces.point_from_dict(d) for d in _load(args.points)]
    ball = analysis.circumcenter(space, pts, seed=args.seed)
    return {"center": model_spaces.point_to_dict(ball.center), "radius": ball.radius}


def cmd_lickorish(args) -> dict:
    return surface.lickorish_system(args.genus).to_dict()


def cmd_neighborhood(args) -> dict:
    sys_ = surface.lickorish_system(args.genus)
    curves = _curves(args.curves)
    out = surface.neighborhood(sys_, curves).to_dict()
    if surface.is_connected_subset(sys_, curves):
        out["envelope"] = surface.enveloping_subsurface(sys_, curves).to_dict()
    return out


def cmd_verify_prop52(args) -> dict:
    return surface.verify_prop52(args.genus).to_dict()


def cmd_witness_copies(args) -> dict:
    t = surface.SubsurfaceType(args.type_genus, args.boundary, not args.separating)
    copies = surface.disjoint_copies_witness(args.genus, t, args.count)
    return {"type": t.to_dict(), "copies": [c.to_dict() for c in copies]}


def cmd_twist_matrix(args) -> dict:
    sys_ = surface.lickorish_system(args.genus)
    return {"curve": args.curve, **surface.twist_matrix(sys_, args.curve).to_dict()}


def cmd_check_relations(args) -> dict:
    return surface.check_relations(surface.lickorish_system(args.genus)).to_dict()


def cmd_derive(args) -> dict:
    try:
        cert = engine.derive_theorem_d(args.genus, args.dim, args.hypothesis)
    except engine.DerivationFailure as exc:
        raise DomainError("derivation-failure", exc.reason, **{k: v for k, v in exc.to_dict().items() if k not in ("error", "reason")}) from None
    return cert.to_dict()


def cmd_verify(args) -> dict:
    data = _load(args.certificate)
    if not isinstance(data, dict) or data.get("v") != engine.SCHEMA_VERSION:
        got = data.get("v") if isinstance(data, dict) else None
        raise DomainError("schema-version", f"expected certificate schema v={engine.SCHEMA_VERSION}, got {got!r}")
    verdict = engine.verify_certificate(data)
    if not verdict.valid:
        raise DomainError("invalid-certificate", verdict.diagnostic, valid=False, fact=verdict.fact)
    return {"valid": True}


def cmd_helly_tree(args) -> dict:
    data = _load(args.input)
    tree = model_spaces.space_from_dict(data["tree"])
    if not isinstance(tree, model_spaces.MetricTree):
        raise DomainError("invalid-input", "helly-tree needs a tree space")
    if "hulls" in data:
        subs = [analysis.tree_hull(tree, [model_spaces.point_from_dict(p) for p in h]) for h in data["hulls"]]
    else:
        subs = [analysis.ConvexSubtree.make(tree, s) for s in data["subtrees"]]
    return analysis.helly_check_tree(tree, subs).to_dict(model_spaces.point_to_dict)


def cmd_helly_euclid(args) -> dict:
    data = _load(args.input)
    polys = [analysis.Polytope.from_dict(p) for p in data["polytopes"]]
    return analysis.helly_check_euclidean(int(data["dim"]), polys).to_dict()


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_default_seed(), help=f"random seed (default ${SEED_ENV} or 0)")
    common.add_argument("--out", help="write the JSON result to this file instead of standard output")

    parser = argparse.ArgumentParser(prog="cat0fix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("classify", cmd_classify, "classify a symplectic matrix as an isometry of Siegel space")
    p.add_argument("matrix", help='JSON {"entries": [[...]]} or a bare row list, inline or as a path')

    p = add("distance", cmd_distance, "distance between two points of a model space")
    p.add_argument("--space", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)

    p = add("circumcenter", cmd_circumcenter, "smallest enclosing ball of a finite point set")
    p.add_argument("--space", required=True)
    p.add_argument("--points", required=True, help="JSON list of points")

    p = add("lickorish", cmd_lickorish, "the Lickorish curve system of a closed surface")
    p.add_argument("--genus", type=int, required=True)

    p = add("neighborhood", cmd_neighborhood, "regular neighbourhood of a curve subset")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--curves", required=True, help="comma separated labels, e.g. a1,b1")

    p = add("verify-prop52", cmd_verify_prop52, "exhaustive envelope check over connected curve subsets")
    p.add_argument("--genus", type=int, required=True)

    p = add("witness-copies", cmd_witness_copies, "disjoint copies of a subsurface type")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--type-genus", type=int, required=True)
    p.add_argument("--boundary", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--separating", action="store_true", help="request a separating type")

    p = add("twist-matrix", cmd_twist_matrix, "action of a Dehn twist on first homology")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--curve", required=True)

    p = add("check-relations", cmd_check_relations, "commutation and braid relations of twist matrices")
    p.add_argument("--genus", type=int, required=True)

    p = add("derive", cmd_derive, "derive a global fixed-point certificate")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--hypothesis", choices=sorted(engine.HYPOTHESES), default="semisimple")

    p = add("verify", cmd_verify, "re-check a certificate")
    p.add_argument("certificate")

    p = add("helly-tree", cmd_helly_tree, "Helly check for convex subtrees of a metric tree")
    p.add_argument("input", help='JSON {"tree": ..., "subtrees": [...]} or {"tree": ..., "hulls": [...]}')

    p = add("helly-euclid", cmd_helly_euclid, "Helly check for Euclidean polytopes")
    p.add_argument("input", help='JSON {"dim": n, "polytopes": [{"A": ..., "b": ...}, ...]}')
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result = args.func(args)
        code = 0
    except DomainError as exc:
        result, code = exc.to_dict(), 1
    except (ValueError, KeyError, TypeError, IndexError, RuntimeError, engine.DerivationFailure) as exc:
        kind = "invalid-input" if isinstance(exc, (KeyError, TypeError, IndexError)) else "domain-error"
        result, code = {"error": kind, "message": str(exc) or type(exc).__name__}, 1
    text = dumps(result)
    if args.out and code == 0:
        Path(args.out).write_text(text + "\n")
        stdout.write(dumps({"written": args.out}) + "\n")
    else:
        stdout.write(text + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
