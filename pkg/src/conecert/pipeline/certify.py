"""Certificate assembly: run the construction and evaluate the inequality ledger."""

from __future__ import annotations

import json
import math
import platform
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy

from .. import __version__
from ..hyperbolic.constants import GeometricConstants, choose_b_R, compute_constants, sigma_margin
from ..hyperbolic.plane import develop_3kgon, face_polygon
from ..hyperbolic.polyhedron import prism_combinatorics, realize_polyhedron, validate_realization
from .construct import build_coned_cover, check_links, plan_cover, theta_cover_stats, theta_voltages
from .params import ConstructionParams, required_level, validate_params

SCHEMA = 1

DESCRIPTIONS = {
    "i": "b < mu",
    "ii": "R > 2 pi / sinh(b)",
    "iii": "pi / sinh(b) < c < R / 2",
    "iv": "lambda_1(Lambda) > 1/2",
    "v": "girth(Lambda) >= 6",
    "vi": "C * girth(Lambda) > R + L",
    "vii": "d(F_Sigma, F_B) > b",
    "viii": "every cone link is isomorphic to Lambda",
    "ix": "chi(T_n) = sheets * chi(T_0)",
}


@dataclass
class CertificateReport:
    params: dict
    constants: Optional[dict]
    graph: dict
    links: dict
    ledger: list
    required_level: Optional[dict]
    verdict: str
    warnings: list = field(default_factory=list)
    checker: dict = field(default_factory=dict)
    versions: dict = field(default_factory=dict)
    timing: Optional[dict] = None
    schema: int = SCHEMA

    def to_json(self) -> dict:
        out = {
            "schema": self.schema,
            "params": self.params,
            "constants": self.constants,
            "graph": self.graph,
            "links": self.links,
            "ledger": self.ledger,
            "required_level": self.required_level,
            "verdict": self.verdict,
            "warnings": self.warnings,
            "checker": self.checker,
            "versions": self.versions,
        }
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    @classmethod
    def from_json(cls, data: dict) -> "CertificateReport":
        return cls(
            params=data["params"],
            constants=data["constants"],
            graph=data["graph"],
            links=data["links"],
            ledger=data["ledger"],
            required_level=data["required_level"],
            verdict=data["verdict"],
            warnings=data.get("warnings", []),
            checker=data.get("checker", {}),
            versions=data.get("versions", {}),
            timing=data.get("timing"),
            schema=data.get("schema", SCHEMA),
        )

    def entry(self, eid: str) -> dict:
        return next(e for e in self.ledger if e["id"] == eid)

    @property
    def failing(self) -> list[str]:
        return [e["id"] for e in self.ledger if e["pass"] is False]


def _plain(x):
    """JSON-native copy (tuples become lists, numpy scalars become Python numbers)."""
    return json.loads(json.dumps(x, default=_default))


def _default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    raise TypeError(f"not serializable: {type(x)}")


def _entry(eid, lhs, rhs, ok, status="evaluated", note=None) -> dict:
    out = {"id": eid, "description": DESCRIPTIONS[eid], "lhs": lhs, "rhs": rhs, "pass": ok, "status": status}
    if note:
        out["note"] = note
    return out


def _skipped(eid, why) -> dict:
    return _entry(eid, None, None, None, status="skipped", note=why)


def _failed(eid, why) -> dict:
    return _entry(eid, None, None, False, status="error", note=why)


def geometry(p: ConstructionParams) -> tuple[Optional[GeometricConstants], dict, Optional[str]]:
    """Realize the prism and compute the constants; errors are returned, not raised."""
    try:
        rp = realize_polyhedron(prism_combinatorics(p.k), seed=p.seed, tol=p.tol("realize"))
        dev = develop_3kgon(face_polygon(rp, rp.ap.boundary_face), p.k, rp.ap.extra["unfold"])
        gc = choose_b_R(compute_constants(rp, p.k, dev, radius=p.d_radius), p.b_fraction, p.R_margin)
        dist, _ = sigma_margin(rp, gc)
        gc.details["sigma_distance"] = dist
        gc.details["realization_checks"] = validate_realization(rp)
        return gc, {"sigma_distance": dist}, None
    except Exception as exc:  # recorded as failed ledger entries
        return None, {}, f"{type(exc).__name__}: {exc}"


def evaluate_ledger(gc: Optional[dict], graph: dict, links: dict, structural: bool, geo_error: Optional[str]) -> list:
    """Ledger entries computed from serialized report fields."""
    out = []
    tag = "structural mode"
    if structural:
        for eid in ("i", "ii", "iii"):
            out.append(_skipped(eid, tag))
    elif gc is None:
        for eid in ("i", "ii", "iii"):
            out.append(_failed(eid, geo_error or "constants unavailable"))
    else:
        b, mu, R, c = gc["b"], gc["mu"], gc["R"], gc["c"]
        s = math.sinh(b)
        out.append(_entry("i", b, mu, b < mu))
        out.append(_entry("ii", R, 2 * math.pi / s, R > 2 * math.pi / s))
        out.append(_entry("iii", c, [math.pi / s, R / 2], math.pi / s < c < R / 2))

    lam1 = graph.get("lambda1")
    if structural:
        out.append(_skipped("iv", tag))
    elif lam1 is None:
        out.append(_failed("iv", graph.get("error", "spectrum unavailable")))
    else:
        out.append(_entry("iv", lam1, 0.5, lam1 > 0.5))

    g = graph.get("girth")
    if structural:
        out.append(_skipped("v", tag))
    elif "error" in graph:
        out.append(_failed("v", graph["error"]))
    else:
        gv = math.inf if g is None else g
        out.append(_entry("v", g, 6, gv >= 6))

    if structural:
        out.append(_skipped("vi", tag))
        out.append(_skipped("vii", tag))
    elif gc is None or "error" in graph:
        out.append(_failed("vi", geo_error or graph.get("error", "unavailable")))
        out.append(_failed("vii", geo_error or "constants unavailable"))
    else:
        gv = math.inf if g is None else g
        lhs = gc["C"] * gv
        out.append(_entry("vi", lhs, gc["R"] + gc["L"], lhs > gc["R"] + gc["L"]))
        d = gc["details"]["sigma_distance"]
        out.append(_entry("vii", d, gc["b"], d > gc["b"]))

    if "error" in links:
        out.append(_failed("viii", links["error"]))
        out.append(_failed("ix", links["error"]))
    else:
        note = "spot check" if links.get("spot_check") else "full check"
        out.append(_entry("viii", links["isomorphic"], links["links"], bool(links["all_isomorphic"]), note=note))
        lhs, rhs = links["chi_cover"], links["sheets"] * links["chi_base"]
        out.append(_entry("ix", lhs, rhs, lhs == rhs, note=note))
    return out


def verdict_of(ledger: list) -> str:
    evaluated = [e for e in ledger if e["pass"] is not None]
    return "pass" if evaluated and all(e["pass"] for e in evaluated) else "fail"


def check_report(report: CertificateReport) -> dict:
    """Independent pass: recompute each evaluated entry from the serialized fields.

    Written separately from :func:`evaluate_ledger` so that a slip in one
    shows up as a disagreement.
    """
    c, g, lk = report.constants or {}, report.graph, report.links
    inf = float("inf")
    girth = g.get("girth")
    girth = inf if girth is None else girth
    formulas = {
        "i": lambda: c["b"] < c["mu"],
        "ii": lambda: c["R"] * math.sinh(c["b"]) > 2 * math.pi,
        "iii": lambda: c["R"] / 2 > c["c"] and c["c"] * math.sinh(c["b"]) > math.pi,
        "iv": lambda: g["lambda1"] > 0.5,
        "v": lambda: not girth < 6,
        "vi": lambda: c["C"] * girth - c["R"] - c["L"] > 0,
        "vii": lambda: c["details"]["sigma_distance"] > c["b"],
        "viii": lambda: lk["links"] > 0 and lk["isomorphic"] == lk["links"],
        "ix": lambda: lk["chi_cover"] == lk["sheets"] * lk["chi_base"],
    }
    mismatches = []
    for e in report.ledger:
        if e["status"] != "evaluated":
            continue
        try:
            ok = bool(formulas[e["id"]]())
        except (KeyError, TypeError):
            ok = None
        if ok != e["pass"]:
            mismatches.append(e["id"])
    if sorted(formulas) != sorted(e["id"] for e in report.ledger):
        mismatches.append("entries")
    evaluated = [e["pass"] for e in report.ledger if e["pass"] is not None]
    expected = "pass" if evaluated and all(evaluated) else "fail"
    if expected != report.verdict:
        mismatches.append("verdict")
    return {"agree": not mismatches, "mismatches": mismatches}


def certify(p: ConstructionParams, timing: bool = False) -> CertificateReport:
    """Run the construction for ``p`` and build the certificate."""
    p, warnings = validate_params(p)
    clock = {}
    t = time.perf_counter()

    gc_json, geo_error = None, None
    if not p.structural:
        gc, _, geo_error = geometry(p)
        gc_json = _plain(gc.to_json()) if gc is not None else None
    clock["geometry"] = time.perf_counter() - t

    t = time.perf_counter()
    graph: dict = {}
    lam = None
    try:
        va, kind = theta_voltages(p)
        lam, stats = theta_cover_stats(va)
        graph = {"group": kind, **stats}
    except Exception as exc:
        graph = {"error": f"{type(exc).__name__}: {exc}"}
    clock["graph"] = time.perf_counter() - t

    t = time.perf_counter()
    links: dict = {}
    if lam is None:
        links = {"error": "theta cover unavailable"}
    else:
        try:
            cva, spot, note = plan_cover(p, va)
            ref = lam if not spot else theta_cover_stats(cva)[0]
            cc = build_coned_cover(cva, p.k, spot, note)
            res = check_links(cc, ref)
            links = {
                "spot_check": spot,
                "plan": note,
                "sheets": cc.sheets,
                "chi_base": cc.chi_base,
                "chi_cover": cc.chi_cover,
                "cover_counts": list(cc.cover.cover.counts()),
                **res,
            }
        except Exception as exc:
            links = {"error": f"{type(exc).__name__}: {exc}"}
    clock["cover"] = time.perf_counter() - t

    ledger = evaluate_ledger(gc_json, graph, links, p.structural, geo_error)
    req = None
    vi = next(e for e in ledger if e["id"] == "vi")
    if vi["pass"] is False and gc_json is not None:
        target = gc_json["girth_target"]
        req = {
            "girth_target": target,
            "level": required_level(p.k - 1, p.q, target),
            "note": "literature bound, not verified here",
        }
    report = CertificateReport(
        params=_plain(p.to_json()),
        constants=gc_json,
        graph=_plain(graph),
        links=_plain(links),
        ledger=_plain(ledger),
        required_level=req,
        verdict=verdict_of(ledger),
        warnings=warnings,
        versions={"conecert": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()},
        timing={k: round(v, 3) for k, v in clock.items()} if timing else None,
    )
    report.checker = check_report(report)
    return report


def render_text(report: CertificateReport) -> str:
    p = report.params
    lines = [f"certificate  k={p['k']} q={p['q']} level={p['level']} structural={p['structural']}"]
    if report.constants:
        c = report.constants
        lines.append(
            f"constants    C={c['C']:.6g} L={c['L']:.6g} mu={c['mu']:.6g} D={c['D']:.6g} "
            f"b={c['b']:.6g} c={c['c']:.6g} R={c['R']:.6g} girth_target={c['girth_target']} A={c['A_threshold']:.6g}"
        )
    g = report.graph
    if "error" in g:
        lines.append(f"graph        error: {g['error']}")
    else:
        lines.append(f"graph        {g['group']} vertices={g['vertices']} girth={g['girth']} lambda1={g['lambda1']:.6g}")
    for e in report.ledger:
        mark = {True: "PASS", False: "FAIL", None: "SKIP"}[e["pass"]]
        extra = f"  ({e['note']})" if e.get("note") else ""
        lines.append(f"[{e['id']:>4}] {mark}  {e['description']}: lhs={_fmt(e['lhs'])} rhs={_fmt(e['rhs'])}{extra}")
    if report.required_level:
        r = report.required_level
        lines.append(f"required_level {r['level']} for girth target {r['girth_target']} ({r['note']})")
    for w in report.warnings:
        lines.append(f"warning      {w}")
    lines.append(f"checker      {'agrees' if report.checker.get('agree') else 'DISAGREES: ' + ', '.join(report.checker.get('mismatches', []))}")
    lines.append(f"verdict      {report.verdict.upper()}")
    return "\n".join(lines) + "\n"


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, list):
        return "[" + ", ".join(_fmt(y) for y in x) + "]"
    return str(x)


def emit_report(report: CertificateReport, fmt: str = "json", path: Optional[str] = None) -> str:
    """Serialize as canonical JSON or a text table; write to ``path`` when given."""
    if fmt == "json":
        text = json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
    elif fmt == "text":
        text = render_text(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def exit_code(report: CertificateReport) -> int:
    return 0 if report.verdict == "pass" else 1
