"""Command line entry point ``conecert``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional


from ..coxeter import RACG, ball, normal_form, recheck_modulus, reduce, separating_modulus, unreduced_witness
from .certify import _plain, certify, emit_report, exit_code
from .params import ConstructionParams, ParamError, validate_params

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--q", type=int, default=None)
    sp.add_argument("--level", type=int, default=None)
    sp.add_argument("--b-fraction", type=float, default=None)
    sp.add_argument("--r-margin", type=float, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--d-radius", type=int, default=None, help="tile radius for the mirror-distance search")
    sp.add_argument("--structural", action="store_true", default=None, help="relax the arithmetic conditions (toy runs)")
    sp.add_argument("--tolerance", action="append", default=[], metavar="NAME=VALUE")
    sp.add_argument("--config", help="JSON file with the same keys as the flags")
    sp.add_argument("--out", help="write the output here instead of stdout")
    sp.add_argument("--format", choices=("json", "text"), default="text")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conecert", description="Cone-off cover construction and certificate checks.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("prism", "realize the angled prism and report its Gram data"),
        ("constants", "geometric constants C, L, mu, D and the derived radii"),
        ("lps", "quaternion voltages on the theta graph"),
        ("girth", "girth of the theta cover"),
        ("spectrum", "normalized Laplacian gap and adjacency spectrum of the theta cover"),
        ("cover", "build the coned cover and report its cell counts"),
        ("cone-links", "compare every cone link with the theta cover"),
        ("certify", "run everything and evaluate the ledger"),
    ):
        sp = sub.add_parser(name, help=help_)
        _common(sp)
        if name == "certify":
            sp.add_argument("--timing", action="store_true", help="include wall-clock timings (breaks bit-identical output)")
    rp = sub.add_parser("racg", help="right-angled Coxeter group tools")
    rp.add_argument("verb", choices=("reduce", "ball", "modulus"))
    rp.add_argument("--generators", type=int, required=True)
    rp.add_argument("--commuting", default="", help="pairs like 0-1,2-3")
    rp.add_argument("--word", default="", help="letters like 0,1,0")
    rp.add_argument("--radius", type=int, default=2)
    rp.add_argument("--max-modulus", type=int, default=10_000)
    rp.add_argument("--out")
    rp.add_argument("--format", choices=("json", "text"), default="text")
    return ap


def params_from_args(args) -> ConstructionParams:
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config: {exc}")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        if "r_margin" in data:
            data["R_margin"] = data.pop("r_margin")
    flags = {
        "k": args.k,
        "q": args.q,
        "level": args.level,
        "b_fraction": args.b_fraction,
        "R_margin": args.r_margin,
        "seed": args.seed,
        "d_radius": args.d_radius,
        "structural": args.structural,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    tol = dict(data.get("tolerance", {}))
    for item in args.tolerance:
        name, _, value = item.partition("=")
        try:
            tol[name] = float(value)
        except ValueError:
            raise InputError(f"bad tolerance {item!r}")
    data["tolerance"] = tol
    try:
        p = ConstructionParams(**data)
    except TypeError as exc:
        raise InputError(str(exc))
    return p


def _emit(obj, fmt: str, out: Optional[str], text_lines) -> None:
    if fmt == "json":
        text = json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"
    else:
        text = "\n".join(text_lines(obj)) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _kv_lines(obj, prefix=""):
    for key, val in obj.items():
        if isinstance(val, dict):
            yield from _kv_lines(val, prefix + key + ".")
        else:
            yield f"{prefix}{key}: {val}"


def cmd_prism(p: ConstructionParams) -> dict:
    from ..hyperbolic.polyhedron import prism_combinatorics, realize_polyhedron, validate_realization

    rp = realize_polyhedron(prism_combinatorics(p.k), seed=p.seed, tol=p.tol("realize"))
    return {
        "faces": rp.ap.faces,
        "normals": rp.normals.tolist(),
        "gram": rp.gram.tolist(),
        "restart": rp.restart,
        "iterations": rp.iterations,
        "checks": validate_realization(rp),
    }


def cmd_constants(p: ConstructionParams) -> dict:
    from ..hyperbolic.constants import prism_constants

    _, _, gc = prism_constants(p.k, p.seed, p.b_fraction, p.R_margin, radius=p.d_radius, tol=p.tol("realize"))
    return gc.to_json()


def _theta(p: ConstructionParams):
    from .construct import theta_voltages

    return theta_voltages(p)


def cmd_lps(p: ConstructionParams) -> dict:
    va, kind = _theta(p)
    src = getattr(va, "source", va.group)
    labels = getattr(va.group, "labels", None)
    volt = {str(e): src.element_to_json(labels[g] if labels else g) for e, g in va.voltage.items()}
    return {"group": kind, "order": va.group.order(), "voltages": volt}


def cmd_graph(p: ConstructionParams, keys) -> dict:
    from .construct import theta_cover_stats

    va, kind = _theta(p)
    _, stats = theta_cover_stats(va)
    return {"group": kind, **{k: stats[k] for k in keys}}


def cmd_cover(p: ConstructionParams, links: bool) -> dict:
    from .construct import build_coned_cover, check_links, plan_cover, theta_cover_stats

    va, _ = _theta(p)
    cva, spot, note = plan_cover(p, va)
    cc = build_coned_cover(cva, p.k, spot, note)
    out = {
        "plan": note,
        "spot_check": spot,
        "sheets": cc.sheets,
        "cover_counts": list(cc.cover.cover.counts()),
        "coned_counts": list(cc.coned.counts()),
        "chi_base": cc.chi_base,
        "chi_cover": cc.chi_cover,
        "chi_matches": cc.chi_cover == cc.sheets * cc.chi_base,
        "cone_vertices": len(cc.coned.labels["cone"]),
    }
    if links:
        ref = theta_cover_stats(cva)[0]
        out.update(check_links(cc, ref))
    return out


def _parse_racg(args) -> tuple[RACG, list[int]]:
    pairs = []
    for item in filter(None, args.commuting.split(",")):
        try:
            a, b = item.split("-")
            pairs.append(frozenset((int(a), int(b))))
        except ValueError:
            raise InputError(f"bad commuting pair {item!r}")
    try:
        word = [int(x) for x in filter(None, args.word.split(","))]
        W = RACG(args.generators, frozenset(pairs))
    except ValueError as exc:
        raise InputError(str(exc))
    for x in word:
        if not 0 <= x < W.p:
            raise InputError(f"letter {x} out of range")
    return W, word


def cmd_racg(args) -> dict:
    W, word = _parse_racg(args)
    if args.verb == "reduce":
        wit = unreduced_witness(W, word)
        return {
            "word": word,
            "reduced": reduce(W, word),
            "normal_form": normal_form(W, word),
            "witness": None if wit is None else {"start": wit.start, "end": wit.end, "omega": list(wit.omega)},
        }
    if args.verb == "ball":
        words = ball(W, args.radius)
        return {"radius": args.radius, "size": len(words), "words": words}
    rec = separating_modulus(W, args.radius, args.max_modulus)
    return {**rec.to_json(), "recheck": recheck_modulus(W, rec)}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "racg":
            res = cmd_racg(args)
            _emit(res, args.format, args.out, _kv_lines)
            return EXIT_PASS
        p = params_from_args(args)
        if args.command == "certify":
            report = certify(p, timing=args.timing)
            text = emit_report(report, args.format, args.out)
            if not args.out:
                sys.stdout.write(text)
            return exit_code(report)
        validate_params(p)
        if args.command == "prism":
            res = cmd_prism(p)
        elif args.command == "constants":
            res = cmd_constants(p)
        elif args.command == "lps":
            res = cmd_lps(p)
        elif args.command == "girth":
            res = cmd_graph(p, ("vertices", "girth", "girth_method"))
        elif args.command == "spectrum":
            res = cmd_graph(p, ("vertices", "lambda1", "adjacency_top", "adjacency_second", "method"))
        elif args.command == "cover":
            res = cmd_cover(p, links=False)
        else:
            res = cmd_cover(p, links=True)
        _emit(res, args.format, args.out, _kv_lines)
        return EXIT_PASS
    except (ParamError, InputError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
