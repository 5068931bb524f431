"""Slow independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np


def girth_by_edge_removal(edges: list[tuple], n_vertices: int) -> float:
    """Shortest cycle via "delete edge uv, then BFS distance u -> v, plus one".

    Works on multigraphs: a loop is a 1-cycle and a parallel pair a 2-cycle.
    """
    best = math.inf
    for i, (u, v) in enumerate(edges):
        if u == v:
            return 1
        adj = [[] for _ in range(n_vertices)]
        for j, (a, b) in enumerate(edges):
            if j != i:
                adj[a].append(b)
                adj[b].append(a)
        dist = {u: 0}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        if v in dist:
            best = min(best, dist[v] + 1)
    return best


def girth_by_hashimoto(edges: list[tuple], max_length: int = 30) -> float:
    """Shortest cycle from traces of the non-backtracking (Hashimoto) matrix.

    ``tr(B^l)`` counts closed non-backtracking walks of length ``l``; the first
    ``l`` with a nonzero trace is the girth when every vertex has degree >= 2.
    """
    e = np.asarray(edges, dtype=np.int64)
    m = len(e)
    tail = np.concatenate([e[:, 0], e[:, 1]])
    head = np.concatenate([e[:, 1], e[:, 0]])
    reverse = np.concatenate([np.arange(m, 2 * m), np.arange(m)])
    B = (head[:, None] == tail[None, :]).astype(float)
    B[np.arange(2 * m), reverse] = 0.0
    P = np.identity(2 * m)
    for length in range(1, max_length + 1):
        # only positivity matters, so cap the walk counts
        P = np.minimum(P @ B, 1.0)
        if np.trace(P) > 0:
            return length
    return math.inf


def legendre_euler(a: int, q: int) -> int:
    """Legendre symbol by Euler's criterion."""
    r = pow(a % q, (q - 1) // 2, q)
    return -1 if r == q - 1 else r


def legendre_by_squares(a: int, q: int) -> int:
    """Legendre symbol by listing the squares."""
    a %= q
    if a == 0:
        return 0
    return 1 if a in {x * x % q for x in range(1, q)} else -1


def racg_rewrite_closure(word: tuple, commuting: frozenset) -> tuple[int, tuple]:
    """Shortest length and lexicographically smallest word equal to ``word``.

    Exhaustive search over the moves ``xy <-> yx`` for commuting ``x, y`` and
    ``xx -> ()``. Length never increases, so the search space is finite.
    """
    seen = {word}
    stack = [word]
    while stack:
        w = stack.pop()
        for i in range(len(w) - 1):
            a, b = w[i], w[i + 1]
            if a == b:
                nxt = w[:i] + w[i + 2 :]
            elif frozenset((a, b)) in commuting:
                nxt = w[:i] + (b, a) + w[i + 2 :]
            else:
                continue
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    shortest = min(len(w) for w in seen)
    return shortest, min(w for w in seen if len(w) == shortest)


def all_commutation_graphs(p: int):
    """Every simple graph on ``p`` labelled vertices, as frozensets of pairs."""
    pairs = [frozenset(c) for c in itertools.combinations(range(p), 2)]
    for mask in range(1 << len(pairs)):
        yield frozenset(pr for i, pr in enumerate(pairs) if mask >> i & 1)


def commutation_graph_classes(p: int):
    """One representative per isomorphism class of simple graphs on ``p`` vertices."""
    reps = []
    keys = set()
    perms = list(itertools.permutations(range(p)))
    for g in all_commutation_graphs(p):
        key = min(tuple(sorted(tuple(sorted((s[a], s[b]))) for a, b in map(tuple, g))) for s in perms)
        if key not in keys:
            keys.add(key)
            reps.append(g)
    return reps


def hyperbolic_distance_klein(x, y) -> float:
    """Distance from Klein-model coordinates, ``x = X[:-1] / X[-1]``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    kx = x[:-1] / x[-1]
    ky = y[:-1] / y[-1]
    num = 1 - kx @ ky
    den = math.sqrt((1 - kx @ kx) * (1 - ky @ ky))
    return math.acosh(max(1.0, num / den))


def word_corpus(p: int, max_length: int) -> tuple[list, list]:
    """All words over ``p`` letters up to ``max_length`` in shortlex order.

    Also returns the offset of each length block, so word ``i`` of length
    ``l >= 1`` has parent ``offset[l - 1] + (i - offset[l]) // p`` and last
    letter ``(i - offset[l]) % p``.
    """
    words = [w for n in range(max_length + 1) for w in itertools.product(range(p), repeat=n)]
    offset = [0]
    for n in range(max_length + 1):
        offset.append(offset[-1] + p**n)
    return words, offset


def rewriting_oracle(p: int, commuting: frozenset, max_length: int) -> tuple[list, np.ndarray]:
    """Lexmin geodesic of every word in :func:`word_corpus` order.

    States are the lexmin geodesics themselves; the transition ``state, t``
    is found by exhaustive rewriting of ``state + (t,)``, so only one closure
    per element and letter is needed. Returns the states and the state index
    of every corpus word.
    """
    index = {(): 0}
    states = [()]
    trans = []
    i = 0
    while i < len(states):
        s = states[i]
        row = [0] * p
        if len(s) < max_length:
            for t in range(p):
                _, nf = racg_rewrite_closure(s + (t,), commuting)
                if nf not in index:
                    index[nf] = len(states)
                    states.append(nf)
                row[t] = index[nf]
        trans.append(row)
        i += 1
    table = np.array(trans, dtype=np.int64)
    n_words = sum(p**n for n in range(max_length + 1))
    state = np.zeros(n_words, dtype=np.int64)
    start = [0]
    for n in range(max_length + 1):
        start.append(start[-1] + p**n)
    for n in range(1, max_length + 1):
        idx = np.arange(p**n)
        parent = start[n - 1] + idx // p
        state[start[n] : start[n + 1]] = table[state[parent], idx % p]
    return states, state


def tits_reflections(p: int, commuting: frozenset) -> list[np.ndarray]:
    """Integer reflections ``e_j -> e_j - 2 B(e_i, e_j) e_i`` acting on row vectors."""
    gens = []
    for i in range(p):
        M = np.identity(p, dtype=np.int64)
        for j in range(p):
            b = 1 if i == j else (0 if frozenset((i, j)) in commuting else -1)
            M[i, j] -= 2 * b
        gens.append(M)
    return gens


def tits_faithfulness_scan(p: int, commuting: frozenset, max_length: int, gens=None) -> dict:
    """Tits images of every reduced word up to ``max_length``, layer by layer.

    Reduced words are grown letter by letter, tracking the set of letters that
    would create a ``t w t`` pattern. Matrices are exact int64: each generator
    has row-sum norm at most ``2p - 1``, so entries stay below
    ``(2p - 1) ** max_length``. ``gens`` overrides the generator matrices.
    """
    if (2 * p - 1) ** max_length >= 2**62:
        raise OverflowError("int64 too small for this scan")
    comm = np.zeros(p, dtype=np.int64)
    for pair in commuting:
        i, j = tuple(pair)
        comm[i] |= 1 << j
        comm[j] |= 1 << i
    if gens is None:
        gens = tits_reflections(p, commuting)
    gens = [np.asarray(g, dtype=np.int64) for g in gens]
    eye = np.identity(p, dtype=np.int64)
    mats = eye[None].copy()
    blocked = np.zeros(1, dtype=np.int64)
    counted = 0
    identity_hits = 0
    for _ in range(max_length):
        new_m, new_b = [], []
        for t in range(p):
            ok = (blocked >> t & 1) == 0
            if not ok.any():
                continue
            m = mats[ok] @ gens[t]
            # letters still cancellable after t: t itself and those commuting with t
            b = (blocked[ok] & comm[t]) | (1 << t)
            new_m.append(m)
            new_b.append(b)
        if not new_m:
            break
        mats = np.concatenate(new_m)
        blocked = np.concatenate(new_b)
        counted += len(mats)
        identity_hits += int(np.all(mats == eye, axis=(1, 2)).sum())
    return {"reduced_words": counted, "identity_images": identity_hits}
