"""Graph and complex construction for a parameter set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from ..complexes import (
    Complex2,
    ComplexCover,
    cone_off,
    cover_complex,
    euler_characteristic,
    find_isomorphism,
    is_isomorphism,
    phi_voltages,
    truncated_turnover,
    vertex_links,
)
from ..graphs import Multigraph, VoltageAssignment, girth, lps_voltages, normalized_laplacian_eigs, theta_graph, voltage_cover
from ..groups import CyclicGroup, TableGroup
from .params import ConstructionParams

FULL_COVER_GUARD = 10**7
DENSE_EIG_GUARD = 4000
FULL_GIRTH_GUARD = 2000


def structural_voltages(k: int, modulus: int) -> VoltageAssignment:
    """``e_j -> j`` in ``Z / modulus`` on the theta graph (``e_k -> 0``)."""
    theta = theta_graph(k)
    G = CyclicGroup(modulus)
    volt = {e.id: (j + 1) % modulus if j + 1 < k else 0 for j, e in enumerate(theta.edges)}
    return VoltageAssignment(theta, G, volt, normalized=(theta.edges[-1].id,))


def theta_voltages(p: ConstructionParams) -> tuple[VoltageAssignment, str]:
    """Theta-graph voltages for the run, as a table group for fast products."""
    modulus = p.q**p.level
    if p.structural:
        va = structural_voltages(p.k, modulus)
        kind = f"Z/{modulus}"
    else:
        va = lps_voltages(p.k - 1, modulus)
        kind = f"PSL(2, {modulus})"
    return tabulate(va), kind


def tabulate(va: VoltageAssignment) -> VoltageAssignment:
    G = va.group
    elems = G.generated_subgroup(set(va.voltage.values()))
    tg = TableGroup.from_elements(G, elems)
    volt = {e: tg.index[g] for e, g in va.voltage.items()}
    out = VoltageAssignment(va.base, tg, volt, va.normalized)
    out.source = G
    return out


def lambda1(g: Multigraph) -> dict:
    """Smallest nonzero normalized Laplacian eigenvalue and the second adjacency eigenvalue."""
    n = len(g.vertices)
    if n <= DENSE_EIG_GUARD:
        ev = normalized_laplacian_eigs(g)
        A = g.adjacency_matrix()
        adj = np.sort(np.linalg.eigvalsh(A))[::-1]
        return {"lambda1": float(ev[1]), "adjacency_second": float(adj[1]), "adjacency_top": float(adj[0]), "method": "dense"}
    idx = g.vertex_index
    rows, cols = [], []
    for e in g.edges:
        a, b = idx[e.u], idx[e.v]
        rows += [a, b]
        cols += [b, a]
    A = scipy.sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    d = np.asarray(A.sum(axis=1)).ravel()
    s = scipy.sparse.diags(1 / np.sqrt(d))
    Lap = scipy.sparse.identity(n) - s @ A @ s
    ev = np.sort(scipy.sparse.linalg.eigsh(Lap, k=3, which="SA", tol=1e-10, v0=np.ones(n))[0])
    adj = np.sort(scipy.sparse.linalg.eigsh(A, k=3, which="LA", tol=1e-10, v0=np.ones(n))[0])[::-1]
    return {"lambda1": float(ev[1]), "adjacency_second": float(adj[1]), "adjacency_top": float(adj[0]), "method": "sparse"}


def theta_cover_stats(va: VoltageAssignment) -> tuple[Multigraph, dict]:
    """The theta cover with its size, girth and spectrum."""
    lam, _ = voltage_cover(va)
    n = len(lam.vertices)
    if n <= FULL_GIRTH_GUARD:
        g = girth(lam)
        girth_method = "all roots"
    else:
        # deck transformations act transitively on each fibre
        g = girth(lam, roots=[(v, va.group.identity) for v in va.base.vertices])
        girth_method = "one root per fibre"
    stats = {
        "vertices": n,
        "edges": len(lam.edges),
        "group_order": va.group.order(),
        "connected": lam.is_connected(),
        "bipartite": lam.is_bipartite(),
        "girth": g if g != float("inf") else None,
        "girth_method": girth_method,
    }
    stats.update(lambda1(lam))
    return lam, stats


@dataclass
class ConedCover:
    cover: ComplexCover
    coned: Complex2
    sheets: int
    chi_base: int
    chi_cover: int
    spot_check: bool
    group_note: str
    group: object


def build_coned_cover(va: VoltageAssignment, k: int, spot_check: bool = False, note: str = "") -> ConedCover:
    t0 = truncated_turnover(k)
    cv = phi_voltages(k, va, t0=t0)
    cc = cover_complex(cv)
    return ConedCover(
        cover=cc,
        coned=cone_off(cc.cover),
        sheets=len(cc.sheets),
        chi_base=euler_characteristic(t0),
        chi_cover=euler_characteristic(cc.cover),
        spot_check=spot_check,
        group_note=note,
        group=cv.group,
    )


def cells(c: Complex2) -> int:
    return sum(c.counts())


def plan_cover(p: ConstructionParams, va: VoltageAssignment) -> tuple[VoltageAssignment, bool, str]:
    """Voltages to cover with: the real ones if ``|Q|^2 cells(T_0)`` fits the guard, else a toy."""
    t0 = truncated_turnover(p.k)
    size = va.group.order() ** 2 * cells(t0)
    if size <= FULL_COVER_GUARD:
        return va, False, f"full cover, |Q|^2 cells(T_0) = {size}"
    toy = tabulate(structural_voltages(p.k, p.q))
    return toy, True, f"spot check on Z/{p.q} voltages, full size {size} exceeds {FULL_COVER_GUARD}"


def check_links(cc: ConedCover, reference: Multigraph) -> dict:
    """Compare every cone-vertex link with ``reference``.

    One link per boundary type is matched by search. Each other link of
    that type is the image of the first under a deck transformation; the
    searched isomorphism is transported along it and the composite is
    verified exactly. A failed transport falls back to search.
    """
    K = cc.coned
    group = cc.group
    bounds = K.labels["coned_boundary"]
    cone_of = {b["name"]: ("cone", b["name"]) for b in bounds}
    links = vertex_links(K, list(cone_of.values()), faces=range(*K.labels["cone_faces"]))
    results = []
    by_base = {}
    for b in bounds:
        by_base.setdefault(b["base"], []).append(b)
    for base, comps in by_base.items():
        rep = comps[0]
        rep_link = links[cone_of[rep["name"]]]
        rep_iso = find_isomorphism(rep_link, reference)
        if rep_iso is not None and not is_isomorphism(rep_link, reference, *rep_iso):
            rep_iso = None
        results.append({"cone": _plain(rep["name"]), "base": base, "isomorphic": rep_iso is not None, "method": "search"})
        w0, s0 = rep["vertices"][0]
        rep_edge_of = _boundary_edge_index(K, rep_link)
        for comp in comps[1:]:
            link = links[cone_of[comp["name"]]]
            ok, method = False, "transport"
            if rep_iso is not None:
                s1 = next(s for w, s in comp["vertices"] if w == w0)
                d_inv = group.inv(group.mul(s1, group.inv(s0)))
                try:
                    vmap, emap = _transport(K, link, rep, comp, d_inv, group, rep_edge_of, rep_iso)
                    ok = is_isomorphism(link, reference, vmap, emap)
                except KeyError:
                    ok = False
            if not ok:
                method = "search"
                iso = find_isomorphism(link, reference)
                ok = iso is not None and is_isomorphism(link, reference, *iso)
            results.append({"cone": _plain(comp["name"]), "base": base, "isomorphic": ok, "method": method})
    return {
        "links": len(results),
        "isomorphic": sum(r["isomorphic"] for r in results),
        "all_isomorphic": all(r["isomorphic"] for r in results) and bool(results),
        "searched": sum(r["method"] == "search" for r in results),
        "reference_vertices": len(reference.vertices),
        "reference_edges": len(reference.edges),
        "failures": [r for r in results if not r["isomorphic"]][:10],
    }


def _plain(x):
    if isinstance(x, tuple):
        return [_plain(y) for y in x]
    return x


def _boundary_edge_index(K: Complex2, link: Multigraph) -> dict:
    """Boundary edge under each link edge (the face side not at the cone)."""
    at_cone = {eid for eid, _ in link.vertices}
    out = {}
    for e in link.edges:
        fi = e.id[0]
        base = [eid for eid, _ in K.faces[fi] if eid not in at_cone]
        out[base[0]] = e.id
    return out


def _transport(K, link, rep, comp, d_inv, group, rep_edge_of, rep_iso):
    """Vertex and edge maps ``link -> reference`` through the deck map ``x -> d_inv x``."""
    rvmap, remap = rep_iso
    rname = rep["name"]
    vmap = {}
    for eid, end in link.vertices:
        _, _, (w, s) = eid
        vmap[(eid, end)] = rvmap[(("cone", rname, (w, group.mul(d_inv, s))), end)]
    at_cone = {eid for eid, _ in link.vertices}
    emap = {}
    for e in link.edges:
        fi = e.id[0]
        bid, s = next(eid for eid, _ in K.faces[fi] if eid not in at_cone)
        emap[e.id] = remap[rep_edge_of[(bid, group.mul(d_inv, s))]]
    return vmap, emap
