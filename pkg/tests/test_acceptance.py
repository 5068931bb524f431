"""One test per acceptance criterion, each printing a PASS/FAIL line with its runtime."""

import math
import operator
import time
from functools import partial

import networkx as nx
import numpy as np
import pytest

from conecert.complexes import (
    boundary_surface,
    check_complex_covering,
    euler_characteristic,
    graphs_isomorphic,
    surface_dual_graph,
    vertex_link,
)
from conecert.coxeter import (
    RACG,
    infinite_dihedral,
    normal_form,
    recheck_modulus,
    reduce,
    separating_modulus,
    tits_generators,
)
from conecert.graphs import lps_voltages, normalized_laplacian_eigs, theta_graph, voltage_cover
from conecert.hyperbolic.constants import GeometricConstants, choose_b_R
from conecert.hyperbolic.polyhedron import prism_combinatorics, realize_polyhedron, validate_realization
from conecert.pipeline.certify import certify
from conecert.pipeline.construct import build_coned_cover, check_links, plan_cover, theta_cover_stats, theta_voltages
from conecert.pipeline.params import ConstructionParams

from conftest import ACCEPTANCE_LINES
from oracles import commutation_graph_classes, rewriting_oracle, tits_faithfulness_scan, tits_reflections, word_corpus


def record(number: int, ok: bool, detail: str, elapsed: float, limit) -> bool:
    within = limit is None or elapsed < limit
    verdict = "PASS" if ok and within else "FAIL"
    budget = f" / {limit:g} s" if limit is not None else ""
    line = f"criterion {number}: {verdict}  {detail}  [{elapsed:.2f} s{budget}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok and within


@pytest.fixture(scope="module")
def full_run():
    t = time.perf_counter()
    report = certify(ConstructionParams(k=18, q=5, level=1))
    return report, time.perf_counter() - t


def nx_multigraph(g) -> nx.MultiGraph:
    h = nx.MultiGraph()
    h.add_nodes_from(g.vertices)
    h.add_edges_from((e.u, e.v) for e in g.edges)
    return h


def test_criterion_01_prism_constants(full_run):
    report, elapsed = full_run
    c = report.constants
    ok = (
        math.isclose(c["C"], 1.4133, rel_tol=1e-3)
        and math.isclose(c["L"], 2.3619, rel_tol=1e-3)
        and abs(c["mu"] - 0.069503) <= 1e-4
    )
    detail = f"C={c['C']:.6f} L={c['L']:.6f} mu={c['mu']:.6f} (certify k=18 q=5 level 1)"
    assert record(1, ok, detail, elapsed, 10)


def test_criterion_02_realization_quality():
    t = time.perf_counter()
    rp = realize_polyhedron(prism_combinatorics(18))
    E, ap = rp.normals, rp.ap
    J = np.diag([1.0, 1.0, 1.0, -1.0])
    G = E @ J @ E.T
    n = len(ap.faces)
    # residual recomputed from the raw normals
    target = np.array([[1.0 if i == j else np.nan for j in range(n)] for i in range(n)])
    for a, b in ap.edges:
        i, j = ap.faces.index(a), ap.faces.index(b)
        target[i, j] = target[j, i] = -math.cos(ap.angle(a, b))
    known = ~np.isnan(target)
    residual = float(np.max(np.abs(G[known] - target[known])))
    ev = np.sort(np.linalg.eigvalsh(G))
    pos, neg = int(np.sum(ev > 1e-8)), int(np.sum(ev < -1e-8))
    zeros = np.sort(np.abs(ev))[:3]
    nonadj = [G[i, j] for i in range(n) for j in range(i + 1, n) if not known[i, j]]
    elapsed = time.perf_counter() - t
    ok = residual < 1e-12 and (pos, neg) == (3, 1) and bool(np.all(zeros < 1e-8)) and max(nonadj) < -1
    ok = ok and validate_realization(rp)["ok"]
    detail = f"residual={residual:.2e} signature=({pos}+,{neg}-) zeros<= {zeros.max():.1e} max non-adjacent={max(nonadj):.6f}"
    assert record(2, ok, detail, elapsed, 10)


def test_criterion_03_spectral_gap():
    t = time.perf_counter()
    lam, _ = voltage_cover(lps_voltages(17, 5))
    ev = normalized_laplacian_eigs(lam)
    adj = np.sort(np.linalg.eigvalsh(lam.adjacency_matrix()))[::-1]
    elapsed = time.perf_counter() - t
    bound = 2 * math.sqrt(17)
    ok = len(lam.vertices) == 120 and ev[1] > 0.5 and adj[1] <= bound + 1e-9
    detail = f"|V|={len(lam.vertices)} lambda_1={ev[1]:.6f} second adjacency={adj[1]:.6f} <= {bound:.6f}"
    assert record(3, ok, detail, elapsed, 5)


TOYS = [(4, 3, 1), (5, 7, 1), (6, 3, 1), (6, 5, 1), (8, 3, 2), (6, 7, 2)]


def test_criterion_04_cover_and_links():
    t = time.perf_counter()
    lines, ok = [], True
    for k, q, level in TOYS:
        p = ConstructionParams(k=k, q=q, level=level, structural=True)
        va, _ = theta_voltages(p)
        assert va.group.order() <= 60
        cva, spot, _ = plan_cover(p, va)
        cc = build_coned_cover(cva, k, spot)
        ref = theta_cover_stats(cva)[0]
        res = check_links(cc, ref)
        # second route: generic links against networkx isomorphism
        ref_nx = nx_multigraph(ref)
        cones = cc.coned.labels["cone"]
        nx_ok = all(nx.is_isomorphic(nx_multigraph(vertex_link(cc.coned, v)), ref_nx) for v in cones)
        chi_ok = euler_characteristic(cc.cover.cover) == cc.sheets * euler_characteristic(cc.cover.base)
        this = res["all_isomorphic"] and nx_ok and chi_ok and check_complex_covering(cc.cover) and not spot
        ok = ok and this
        lines.append(f"k={k} |Q|={va.group.order()}: {res['isomorphic']}/{res['links']} links, chi {cc.chi_cover}={cc.sheets}*{cc.chi_base}")
    elapsed = time.perf_counter() - t
    assert record(4, ok, "; ".join(lines), elapsed, 60)


def test_criterion_05_word_problem_oracle():
    t = time.perf_counter()
    checked = disagreements = groups = 0
    for p in range(1, 6):
        words, _ = word_corpus(p, 8)
        for comm in commutation_graph_classes(p):
            groups += 1
            states, state = rewriting_oracle(p, comm, 8)
            W = RACG(p, comm)
            expected = list(map(states.__getitem__, state.tolist()))
            got_nf = map(tuple, map(partial(normal_form, W), words))
            nf_ok = sum(map(operator.eq, got_nf, expected))
            got_len = np.fromiter(map(len, map(partial(reduce, W), words)), dtype=np.int64, count=len(words))
            want_len = np.fromiter(map(len, states), dtype=np.int64)[state]
            len_ok = int(np.sum(got_len == want_len))
            checked += 2 * len(words)
            disagreements += 2 * len(words) - nf_ok - len_ok
    elapsed = time.perf_counter() - t
    detail = f"{groups} groups (one per isomorphism class, p<=5), {checked} reduce/normal_form results, {disagreements} disagreements"
    assert record(5, disagreements == 0, detail, elapsed, 120)


def test_criterion_06_tits_faithfulness():
    t = time.perf_counter()
    words = hits = groups = 0
    gens_ok = True
    for p in range(1, 6):
        for comm in commutation_graph_classes(p):
            W = RACG(p, comm)
            gens = [g.astype(np.int64) for g in tits_generators(W)]
            gens_ok = gens_ok and all((a == b).all() for a, b in zip(gens, tits_reflections(p, comm)))
            res = tits_faithfulness_scan(p, comm, 10, gens=gens)
            words += res["reduced_words"]
            hits += res["identity_images"]
            groups += 1
    elapsed = time.perf_counter() - t
    detail = f"{groups} groups, {words} nontrivial reduced words of length <= 10, {hits} identity images"
    assert record(6, hits == 0 and gens_ok, detail, elapsed, 120)


def test_criterion_07_separating_modulus():
    t = time.perf_counter()
    W = infinite_dihedral()
    rec = separating_modulus(W, 3)
    rechecked = recheck_modulus(W, rec)
    # third route: int64 matrices from the oracle reflections
    gens = tits_reflections(2, frozenset())
    alternating = [[(s + i) % 2 for i in range(n)] for n in range(1, 4) for s in (0, 1)]
    covered = sorted(map(tuple, (e[0] for e in rec.entries))) == sorted(map(tuple, alternating))
    independent = True
    for w, (i, j), r in rec.entries:
        M = np.identity(2, dtype=np.int64)
        for x in w:
            M = M @ gens[x]
        independent = independent and M[i, j] % rec.modulus == r and r != (1 if i == j else 0)
    elapsed = time.perf_counter() - t
    ok = rechecked and covered and independent
    detail = f"m={rec.modulus} tried={rec.tried} entries={len(rec.entries)} recheck={rechecked} independent={independent}"
    assert record(7, ok, detail, elapsed, 1)


def test_criterion_08_boundary_surface():
    t = time.perf_counter()
    bad = []
    for k in range(3, 21):
        s = boundary_surface(k)
        dual = surface_dual_graph(s)
        if euler_characteristic(s) != 2 - k or not graphs_isomorphic(dual, theta_graph(k)):
            bad.append(k)
        elif not nx.is_isomorphic(nx_multigraph(dual), nx_multigraph(theta_graph(k))):
            bad.append(k)
    elapsed = time.perf_counter() - t
    detail = f"chi = 2 - k and dual graph = Theta_k for k = 3..20; failures: {bad or 'none'}"
    assert record(8, not bad, detail, elapsed, 5)


def test_criterion_09_derived_constants(full_run):
    report, _ = full_run
    t = time.perf_counter()
    c = report.constants
    gc = choose_b_R(GeometricConstants(C=c["C"], L=c["L"], mu=c["mu"], D=c["D"]))
    elapsed = time.perf_counter() - t
    ok = (
        math.isclose(gc.b, 0.06255, rel_tol=1e-2)
        and math.isclose(gc.R, 101.4, rel_tol=1e-2)
        and gc.girth_target == 74
        and gc.invariant_failures() == []
    )
    detail = f"b={gc.b:.6f} R={gc.R:.4f} c={gc.c:.4f} girth_target={gc.girth_target} invariants hold={gc.invariant_failures() == []}"
    assert record(9, ok, detail, elapsed, None)


def test_criterion_10_full_scale_honesty(full_run):
    report, elapsed = full_run
    req = report.required_level["level"] if report.required_level else None
    level_ok = req is not None and abs(req - 33) <= 1
    exactly_girth = report.failing == ["vi"]
    ok = report.verdict == "fail" and exactly_girth and level_ok
    girth = report.graph["girth"]
    detail = (
        f"verdict={report.verdict} failing={report.failing} (expected exactly ['vi']) "
        f"girth(Lambda)={girth} required_level={req}"
    )
    if not exactly_girth:
        detail += f"; girth {girth} < 6 also fails [v], so the single-entry failure is not attainable"
    assert record(10, ok, detail, elapsed, None)
