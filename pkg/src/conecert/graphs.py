"""Finite multigraphs, voltage covers, girth and normalized Laplacian spectra.

Includes the quaternion recipe for Ramanujan-type voltage assignments on the
theta graph and the reduction maps between successive congruence levels.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Optional

import numpy as np

from ._util import gc_paused
from .groups import (
    CyclicGroup,
    FiniteGroup,
    FiniteMatrixGroup,
    factor_prime_power,
    group_from_json,
    is_prime,
    legendre,
)


class GraphError(ValueError):
    """Structural problem with a graph or map."""


@dataclass(frozen=True)
class Edge:
    id: Hashable
    u: Hashable
    v: Hashable
    label: Optional[Hashable] = None


@dataclass(frozen=True)
class Multigraph:
    """Undirected multigraph; loops and parallel edges allowed.

    Each edge carries a canonical orientation ``u -> v``.
    """

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise GraphError("duplicate vertex ids")
        ids = set()
        for e in self.edges:
            if e.u not in vs or e.v not in vs:
                raise GraphError(f"edge {e.id!r} references a missing vertex")
            if e.id in ids:
                raise GraphError(f"duplicate edge id {e.id!r}")
            ids.add(e.id)

    @cached_property
    def vertex_index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_by_id(self) -> dict:
        return {e.id: e for e in self.edges}

    @cached_property
    def incidence(self) -> list:
        """Per vertex index, a list of ``(edge index, end)``; loops appear twice."""
        inc = [[] for _ in self.vertices]
        idx = self.vertex_index
        for j, e in enumerate(self.edges):
            inc[idx[e.u]].append((j, 0))
            inc[idx[e.v]].append((j, 1))
        return inc

    @cached_property
    def neighbors(self) -> list:
        """Per vertex index, a list of ``(neighbor index, edge index)``."""
        idx = self.vertex_index
        out = [[] for _ in self.vertices]
        for j, e in enumerate(self.edges):
            a, b = idx[e.u], idx[e.v]
            out[a].append((b, j))
            out[b].append((a, j))
        return out

    def degree(self, v) -> int:
        return len(self.incidence[self.vertex_index[v]])

    def degrees(self) -> list:
        return [len(x) for x in self.incidence]

    def adjacency_matrix(self) -> np.ndarray:
        n = len(self.vertices)
        A = np.zeros((n, n))
        idx = self.vertex_index
        for e in self.edges:
            a, b = idx[e.u], idx[e.v]
            A[a, b] += 1
            A[b, a] += 1
        return A

    def connected_components(self) -> list:
        seen = [False] * len(self.vertices)
        comps = []
        for s in range(len(self.vertices)):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                x = stack.pop()
                comp.append(x)
                for y, _ in self.neighbors[x]:
                    if not seen[y]:
                        seen[y] = True
                        stack.append(y)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.vertices) == 0 or len(self.connected_components()) == 1

    def is_bipartite(self) -> bool:
        color = [-1] * len(self.vertices)
        for s in range(len(self.vertices)):
            if color[s] >= 0:
                continue
            color[s] = 0
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y, _ in self.neighbors[x]:
                    if color[y] < 0:
                        color[y] = 1 - color[x]
                        queue.append(y)
                    elif color[y] == color[x]:
                        return False
        return True

    def relabel(self, vmap: dict, emap: Optional[dict] = None) -> "Multigraph":
        emap = emap or {}
        return Multigraph(
            [vmap[v] for v in self.vertices],
            [Edge(emap.get(e.id, e.id), vmap[e.u], vmap[e.v], e.label) for e in self.edges],
        )

    def to_json(self) -> dict:
        return {
            "vertices": [_jsonable(v) for v in self.vertices],
            "edges": [
                {"id": _jsonable(e.id), "u": _jsonable(e.u), "v": _jsonable(e.v), "label": _jsonable(e.label)}
                for e in self.edges
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Multigraph":
        vs = [_hashable(v) for v in data["vertices"]]
        es = [Edge(_hashable(e["id"]), _hashable(e["u"]), _hashable(e["v"]), _hashable(e.get("label"))) for e in data["edges"]]
        return cls(vs, es)


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    return x


def _hashable(x):
    if isinstance(x, list):
        return tuple(_hashable(y) for y in x)
    return x


def theta_graph(k: int) -> Multigraph:
    """Two vertices ``v0``, ``v1`` joined by edges ``e1..ek`` oriented ``v0 -> v1``."""
    if k < 2:
        raise ValueError("theta graph needs k >= 2")
    return Multigraph(["v0", "v1"], [Edge(f"e{j}", "v0", "v1", f"e{j}") for j in range(1, k + 1)])


def cycle_graph(n: int) -> Multigraph:
    return Multigraph(list(range(n)), [Edge(i, i, (i + 1) % n) for i in range(n)])


# ---------------------------------------------------------------- voltages


@dataclass
class VoltageAssignment:
    """Group-valued labels on the canonically oriented edges of ``base``.

    Traversing an edge against its orientation multiplies by the inverse.
    """

    base: Multigraph
    group: FiniteGroup
    voltage: dict
    normalized: tuple = ()

    def __post_init__(self):
        missing = [e.id for e in self.base.edges if e.id not in self.voltage]
        if missing:
            raise GraphError(f"edges without voltage: {missing[:5]}")
        extra = set(self.voltage) - {e.id for e in self.base.edges}
        if extra:
            raise GraphError(f"voltages on unknown edges: {sorted(map(str, extra))[:5]}")
        for eid in self.normalized:
            if self.voltage[eid] != self.group.identity:
                raise GraphError(f"normalized edge {eid!r} carries a nontrivial voltage")

    def path_voltage(self, steps: Iterable[tuple]) -> Hashable:
        """Ordered product along ``(edge id, +1 | -1)`` steps."""
        g = self.group.identity
        for eid, s in steps:
            h = self.voltage[eid]
            g = self.group.mul(g, h if s > 0 else self.group.inv(h))
        return g

    def to_json(self) -> dict:
        out = self.base.to_json()
        out["group"] = self.group.to_json()
        out["voltages"] = {str(e.id): self.group.element_to_json(self.voltage[e.id]) for e in self.base.edges}
        return out

    @classmethod
    def from_json(cls, data: dict) -> "VoltageAssignment":
        base = Multigraph.from_json(data)
        group = group_from_json(data["group"])
        by_name = {str(e.id): e.id for e in base.edges}
        volt = {by_name[k]: group.element_from_json(v) for k, v in data["voltages"].items()}
        return cls(base, group, volt)


@dataclass
class CoveringMap:
    """Cell-wise map from ``cover`` to ``base`` (vertex and edge dictionaries)."""

    cover: Multigraph
    base: Multigraph
    vertex_map: dict
    edge_map: dict
    sheets: list = field(default_factory=list)


@gc_paused
def voltage_cover(va: VoltageAssignment, elements: Optional[list] = None) -> tuple[Multigraph, CoveringMap]:
    """Regular cover with vertex set ``base vertices x group``.

    The base edge ``u -> v`` with voltage ``g`` lifts to ``(u, x) -- (v, x g)``.
    ``elements`` overrides the sheet set (it must be closed under right
    multiplication by the voltages, e.g. a subgroup containing them).
    """
    G = va.group
    sheets = list(G.elements() if elements is None else elements)
    vs = [(u, x) for u in va.base.vertices for x in sheets]
    es = []
    vmap = {v: v[0] for v in vs}
    emap = {}
    for e in va.base.edges:
        g = va.voltage[e.id]
        for x in sheets:
            ce = Edge((e.id, x), (e.u, x), (e.v, G.mul(x, g)), e.id)
            es.append(ce)
            emap[ce.id] = e.id
    cover = Multigraph(vs, es)
    return cover, CoveringMap(cover, va.base, vmap, emap, sheets)


def check_covering(cmap: CoveringMap) -> bool:
    """True iff ``cmap`` is a local bijection on edge-ends at every cover vertex."""
    cov, base = cmap.cover, cmap.base
    for v in cov.vertices:
        if v not in cmap.vertex_map or cmap.vertex_map[v] not in base.vertex_index:
            raise GraphError(f"vertex {v!r} has no valid image")
    for e in cov.edges:
        if e.id not in cmap.edge_map or cmap.edge_map[e.id] not in base.edge_by_id:
            raise GraphError(f"edge {e.id!r} has no valid image")

    # image of each cover edge-end as a base edge-end
    end_image = {}
    for e in cov.edges:
        be = base.edge_by_id[cmap.edge_map[e.id]]
        a, b = cmap.vertex_map[e.u], cmap.vertex_map[e.v]
        if (a, b) == (be.u, be.v):
            end_image[(e.id, 0)], end_image[(e.id, 1)] = (be.id, 0), (be.id, 1)
        elif (a, b) == (be.v, be.u):
            end_image[(e.id, 0)], end_image[(e.id, 1)] = (be.id, 1), (be.id, 0)
        else:
            return False

    base_ends = {}
    for i, v in enumerate(base.vertices):
        base_ends[v] = sorted((base.edges[j].id, end) for j, end in base.incidence[i])
    for i, v in enumerate(cov.vertices):
        images = sorted(end_image[(cov.edges[j].id, end)] for j, end in cov.incidence[i])
        if images != base_ends[cmap.vertex_map[v]]:
            return False
    return True


# ---------------------------------------------------------------- girth and spectra


def girth(g: Multigraph, roots: Optional[Iterable] = None) -> float:
    """Length of a shortest cycle, ``math.inf`` for forests.

    Breadth-first search from every root, never re-using the edge that
    reached the current vertex, so a loop counts 1 and a parallel pair 2.
    For a regular cover it suffices to pass one root per base vertex.
    """
    nbrs = g.neighbors
    idx = g.vertex_index
    roots = range(len(g.vertices)) if roots is None else [idx[r] for r in roots]
    best = math.inf
    for r in roots:
        dist = {r: 0}
        parent = {r: -1}
        queue = deque([r])
        while queue:
            x = queue.popleft()
            dx = dist[x]
            if 2 * dx >= best:
                break
            for y, e in nbrs[x]:
                if e == parent[x]:
                    continue
                if y in dist:
                    c = dx + dist[y] + 1
                    if c < best:
                        best = c
                else:
                    dist[y] = dx + 1
                    parent[y] = e
                    queue.append(y)
    return best


def normalized_laplacian_eigs(g: Multigraph) -> np.ndarray:
    """Sorted eigenvalues of ``I - D^{-1/2} A D^{-1/2}`` (dense solver)."""
    A = g.adjacency_matrix()
    deg = A.sum(axis=1)
    if np.any(deg == 0):
        raise GraphError("isolated vertex: normalized Laplacian undefined")
    s = 1.0 / np.sqrt(deg)
    L = np.eye(len(deg)) - s[:, None] * A * s[None, :]
    return np.sort(np.linalg.eigvalsh(L))


def spectral_gap(g: Multigraph) -> float:
    ev = normalized_laplacian_eigs(g)
    return float(ev[1]) if len(ev) > 1 else math.inf


def zuk_gap_check(g: Multigraph) -> bool:
    """True iff the second-smallest normalized Laplacian eigenvalue exceeds 1/2."""
    return spectral_gap(g) > 0.5


# ---------------------------------------------------------------- quaternion voltages


def sqrt_minus_one(modulus: int) -> int:
    """A square root of -1 modulo an odd prime power, lifted from mod q."""
    q, n = factor_prime_power(modulus)
    if q % 4 != 1:
        raise ValueError(f"-1 has no square root modulo {modulus} (q = {q} is not 1 mod 4)")
    x = next(t for t in range(2, q) if (t * t + 1) % q == 0)
    m = q
    for _ in range(1, n):
        m *= q
        x = (x - (x * x + 1) * pow(2 * x, -1, m)) % m
    assert (x * x + 1) % modulus == 0
    return x


def quaternion_solutions(p: int) -> list[tuple[int, int, int, int]]:
    """Integer ``(a, b, c, d)`` with ``a^2+b^2+c^2+d^2 = p``, ``a > 0`` odd, rest even."""
    r = math.isqrt(p)
    evens = [x for x in range(-r, r + 1) if x % 2 == 0]
    out = []
    for a in range(1, r + 1, 2):
        for b in evens:
            for c in evens:
                for d in evens:
                    if a * a + b * b + c * c + d * d == p:
                        out.append((a, b, c, d))
    return sorted(out)


def lps_generators(p: int, modulus: int) -> list[tuple]:
    """Projective classes of the ``p + 1`` quaternion matrices mod ``modulus``."""
    if not is_prime(p) or p % 4 != 1:
        raise ValueError(f"p = {p} must be a prime congruent to 1 mod 4")
    q, _ = factor_prime_power(modulus)
    if q == p or q == 2:
        raise ValueError(f"modulus base q = {q} must be an odd prime different from p")
    if legendre(p, q) != -1:
        raise ValueError(f"p = {p} is a square modulo q = {q}")
    i = sqrt_minus_one(modulus)
    pgl = FiniteMatrixGroup(modulus, "PGL")
    sols = quaternion_solutions(p)
    if len(sols) != p + 1:
        raise ValueError(f"expected {p + 1} quaternion solutions, found {len(sols)}")
    return [pgl.canonical((a + b * i, c + d * i, -c + d * i, a - b * i)) for a, b, c, d in sols]


def lps_voltages(p: int, modulus: int) -> VoltageAssignment:
    """Voltages ``e_j -> s_j s_{p+1}^{-1}`` on the theta graph with ``p + 1`` edges.

    The products land in the index-two subgroup (determinant a square), so
    the values live in the PSL-type group and ``e_{p+1}`` is the identity.
    """
    gens = lps_generators(p, modulus)
    psl = FiniteMatrixGroup(modulus, "PSL")
    last_inv = psl.inv(gens[-1])
    theta = theta_graph(p + 1)
    volt = {}
    for e, s in zip(theta.edges, gens):
        g = psl.mul(s, last_inv)
        assert psl.contains(g)
        volt[e.id] = g
    return VoltageAssignment(theta, psl, volt, normalized=(theta.edges[-1].id,))


def tower_projection(va: VoltageAssignment, target_modulus: Optional[int] = None) -> VoltageAssignment:
    """Reduce every voltage to a smaller modulus ``q^j`` (default one step down).

    A target equal to the current modulus returns an equal assignment.
    """
    G = va.group
    if not hasattr(G, "with_modulus"):
        raise ValueError("voltage group has no modulus to reduce")
    m = G.modulus
    q, n = factor_prime_power(m)
    if target_modulus is None:
        if n < 2:
            raise ValueError(f"modulus {m} has no proper power step below it")
        target_modulus = m // q
    if target_modulus == m:
        return VoltageAssignment(va.base, G, dict(va.voltage), va.normalized)
    tq, _ = factor_prime_power(target_modulus)
    if tq != q or m % target_modulus:
        raise ValueError(f"{target_modulus} is not a power of {q} dividing {m}")
    low = G.with_modulus(target_modulus)
    volt = {e: G.reduce(g, target_modulus) for e, g in va.voltage.items()}
    return VoltageAssignment(va.base, low, volt, va.normalized)


def induced_cover_map(high: Multigraph, low: Multigraph, group_low: FiniteGroup) -> CoveringMap:
    """Cell map between voltage covers ``(u, x) -> (u, x mod q^j)``."""
    red = group_low.modulus

    def r(x):
        return group_low.reduce(x, red)

    vmap = {v: (v[0], r(v[1])) for v in high.vertices}
    emap = {e.id: (e.id[0], r(e.id[1])) for e in high.edges}
    return CoveringMap(high, low, vmap, emap)


__all__ = [
    "CoveringMap",
    "CyclicGroup",
    "Edge",
    "FiniteMatrixGroup",
    "GraphError",
    "Multigraph",
    "VoltageAssignment",
    "check_covering",
    "cycle_graph",
    "girth",
    "induced_cover_map",
    "lps_generators",
    "lps_voltages",
    "normalized_laplacian_eigs",
    "quaternion_solutions",
    "spectral_gap",
    "sqrt_minus_one",
    "theta_graph",
    "tower_projection",
    "voltage_cover",
    "zuk_gap_check",
]
