"""Right-angled Coxeter groups: word reduction, lexicographic normal forms,
the integral Tits representation and congruence quotients separating a
word-length ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .graphs import Edge, Multigraph

BALL_GUARD = 10**6


class BallTooLarge(ValueError):
    """The requested ball exceeds the enumeration guard."""


class InvalidCrossing(ValueError):
    """A simultaneous crossing set is not a commuting clique."""


@dataclass(frozen=True)
class RACG:
    """Right-angled Coxeter group on generators ``0..p-1``.

    ``commuting`` holds unordered pairs of distinct generators that commute.
    """

    p: int
    commuting: frozenset = frozenset()

    def __post_init__(self):
        pairs = set()
        for pair in self.commuting:
            i, j = sorted(pair)
            if i == j:
                raise ValueError("a generator cannot be listed as commuting with itself")
            if not (0 <= i < self.p and 0 <= j < self.p):
                raise ValueError(f"pair {pair} out of range")
            pairs.add(frozenset((i, j)))
        object.__setattr__(self, "commuting", frozenset(pairs))
        masks = [0] * self.p
        for pair in pairs:
            i, j = tuple(pair)
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        object.__setattr__(self, "_masks", tuple(masks))
        object.__setattr__(self, "_mask_of", dict(enumerate(masks)))
        # lazily explored Cayley graph: element ids, their normal forms, and edges by letter
        object.__setattr__(self, "_nf_states", [()])
        object.__setattr__(self, "_nf_index", {(): 0})
        object.__setattr__(self, "_nf_trans", [{}])

    def commute(self, i: int, j: int) -> bool:
        return bool(self._masks[i] >> j & 1)

    def to_json(self) -> dict:
        return {"generators": self.p, "commuting_pairs": sorted(sorted(p) for p in self.commuting)}

    @classmethod
    def from_json(cls, data: dict) -> "RACG":
        return cls(int(data["generators"]), frozenset(frozenset(p) for p in data["commuting_pairs"]))


def racg_from_mirrors(adjacency: Multigraph) -> tuple[RACG, list]:
    """RACG whose generators are the vertices (mirrors) of a simple graph.

    Returns the group and the vertex order used for generator indices.
    """
    seen = set()
    for e in adjacency.edges:
        if e.u == e.v:
            raise ValueError("mirror adjacency has a loop")
        key = frozenset((e.u, e.v))
        if key in seen:
            raise ValueError("mirror adjacency has parallel edges")
        seen.add(key)
    idx = adjacency.vertex_index
    pairs = frozenset(frozenset((idx[e.u], idx[e.v])) for e in adjacency.edges)
    return RACG(len(adjacency.vertices), pairs), list(adjacency.vertices)


def _check_word(W: RACG, w: Sequence[int]) -> list[int]:
    w = list(map(int, w))
    if w and (min(w) < 0 or max(w) >= W.p):
        bad = next(x for x in w if not 0 <= x < W.p)
        raise ValueError(f"letter {bad} out of range for {W.p} generators")
    return w


def reduce(W: RACG, w: Sequence[int]) -> list[int]:
    """Geodesic word for the same element.

    Letters are appended one at a time; a new letter cancels the nearest
    equal letter if everything after that letter commutes with it.
    """
    mask_of = W._mask_of
    out: list[int] = []
    for t in w:
        try:
            m = mask_of[t]
        except (KeyError, TypeError):
            raise ValueError(f"letter {t!r} out of range for {W.p} generators") from None
        t = int(t)
        i = len(out) - 1
        while i >= 0:
            s = out[i]
            if s == t:
                del out[i]
                break
            if not m >> s & 1:
                out.append(t)
                break
            i -= 1
        else:
            out.append(t)
    return out


@dataclass(frozen=True)
class Witness:
    """Pattern ``t w t`` at 0-based positions ``start`` and ``end``."""

    start: int
    end: int
    omega: tuple


def unreduced_witness(W: RACG, w: Sequence[int]) -> Optional[Witness]:
    """First ``t w t`` subword with every letter of ``w`` commuting with ``t``."""
    w = _check_word(W, w)
    masks = W._masks
    for j, t in enumerate(w):
        for i in range(j - 1, -1, -1):
            s = w[i]
            if s == t:
                return Witness(i, j, tuple(w[i + 1 : j]))
            if not masks[t] >> s & 1:
                break
    return None


def is_reduced(W: RACG, w: Sequence[int]) -> bool:
    return unreduced_witness(W, w) is None


NF_CACHE_LIMIT = 1 << 18


def normal_form(W: RACG, w: Sequence[int]) -> list[int]:
    """Lexicographically smallest geodesic word for the element of ``w``.

    Each step ``element * letter`` is resolved once from the stored normal
    form (see :func:`_step`) and kept as an edge of a per-group Cayley
    graph, so later words walk it by lookups. Exploration stops growing at
    ``NF_CACHE_LIMIT`` elements; past that, the remaining letters are
    reduced and sorted into lexicographic order directly.
    """
    states, trans = W._nf_states, W._nf_trans
    s = 0
    try:
        for pos, t in enumerate(w):
            nxt = trans[s].get(t)
            if nxt is None:
                nxt = _step(W, s, t)
                if nxt is None:
                    # table full: finish directly from the current element
                    return list(_lexmin(W._masks, tuple(reduce(W, list(states[s]) + list(w[pos:])))))
            s = nxt
    except TypeError:
        raise ValueError(f"word {w!r} has a letter that is not a generator index") from None
    return list(states[s])


def _step(W: RACG, s: int, t) -> Optional[int]:
    """Id of ``element s * t``, adding it to the table if new.

    In the heap of a geodesic, ``t`` either cancels the last ``t`` that
    commutes with everything after it, or becomes a new maximal element.
    Greedy extraction of the smallest minimal letter then places it just
    before the first larger letter of the ``t``-commuting suffix, so the
    normal form of the product is read off without rewriting.
    """
    if t not in W._mask_of:
        raise ValueError(f"letter {t!r} out of range for {W.p} generators")
    t = int(t)
    states, index, trans = W._nf_states, W._nf_index, W._nf_trans
    nf = states[s]
    mask = W._masks[t]
    pos = len(nf)
    i = pos - 1
    while i >= 0:
        c = nf[i]
        if c == t:
            new = nf[:i] + nf[i + 1 :]
            break
        if not mask >> c & 1:
            new = None
            break
        if c > t:
            pos = i
        i -= 1
    else:
        new = None
    if new is None:
        new = nf[:pos] + (t,) + nf[pos:]
    j = index.get(new)
    if j is None:
        if len(states) >= NF_CACHE_LIMIT:
            return None
        j = len(states)
        index[new] = j
        states.append(new)
        trans.append({})
    trans[s][t] = j
    return j


def _lexmin(masks: tuple, reduced: tuple) -> tuple:
    rest = list(reduced)
    out = []
    while rest:
        best, pos, seen = None, -1, 0
        for i, s in enumerate(rest):
            # movable iff it commutes with every earlier letter
            if not seen & ~masks[s] and (best is None or s < best):
                best, pos = s, i
            seen |= 1 << s
        out.append(best)
        del rest[pos]
    return tuple(out)


def tits_generators(W: RACG) -> list[np.ndarray]:
    """Integer reflection matrices ``x -> x - 2 B(x, e_i) e_i`` (object dtype)."""
    p = W.p
    B = bilinear_form(W)
    gens = []
    for i in range(p):
        M = np.identity(p, dtype=object)
        for j in range(p):
            M[i, j] -= 2 * B[i, j]
        gens.append(M)
    return gens


def bilinear_form(W: RACG) -> np.ndarray:
    """``B(e_i, e_i) = 1``, ``0`` for commuting pairs, ``-1`` otherwise."""
    p = W.p
    B = np.full((p, p), -1, dtype=object)
    for i in range(p):
        B[i, i] = 1
        for j in range(p):
            if i != j and W.commute(i, j):
                B[i, j] = 0
    return B


def tits_matrix(W: RACG, w: Sequence[int]) -> np.ndarray:
    """Exact integer image of ``w`` under the Tits representation."""
    gens = tits_generators(W)
    M = np.identity(W.p, dtype=object)
    for t in _check_word(W, w):
        M = M.dot(gens[t])
    return M


def is_identity(M) -> bool:
    p = M.shape[0]
    return all(M[i, j] == (1 if i == j else 0) for i in range(p) for j in range(p))


def ball(W: RACG, N: int, guard: int = BALL_GUARD) -> list[list[int]]:
    """Normal forms of every element of length at most ``N``, by length then lex."""
    if N < 0:
        raise ValueError("radius must be nonnegative")
    layer = [[]]
    out = [[]]
    for _ in range(N):
        seen = set()
        nxt = []
        for w in layer:
            for t in range(W.p):
                nf = normal_form(W, w + [t])
                if len(nf) == len(w) + 1:
                    key = tuple(nf)
                    if key not in seen:
                        seen.add(key)
                        nxt.append(nf)
        if len(out) + len(nxt) > guard:
            raise BallTooLarge(f"ball of radius {N} exceeds {guard} elements")
        nxt.sort()
        out += nxt
        layer = nxt
        if not layer:
            break
    return out


@dataclass
class ModulusRecord:
    modulus: int
    radius: int
    entries: list = field(default_factory=list)  # (normal form, witness index, residue)
    tried: list = field(default_factory=list)

    def to_json(self):
        return {
            "modulus": self.modulus,
            "radius": self.radius,
            "tried": self.tried,
            "entries": [{"word": w, "entry": list(ij), "residue": r} for w, ij, r in self.entries],
            # only injectivity on the ball is checked, not torsion-freeness of the kernel
            "torsion_free": "unverified",
        }


def _witness_entry(M, m: int):
    """First entry where ``M mod m`` differs from the identity, else ``None``."""
    p = M.shape[0]
    for i in range(p):
        for j in range(p):
            r = int(M[i, j]) % m
            if r != (1 if i == j else 0):
                return (i, j), r
    return None


def separating_modulus(W: RACG, N: int, max_modulus: int = 10_000) -> ModulusRecord:
    """Smallest ``m >= 2`` whose congruence quotient is injective on the ball.

    Each nontrivial element of length at most ``N`` gets a witness entry where
    its Tits matrix differs from the identity modulo ``m``.
    """
    words = ball(W, N)[1:]
    gens = tits_generators(W)
    mats = []
    for w in words:
        M = np.identity(W.p, dtype=object)
        for t in w:
            M = M.dot(gens[t])
        mats.append(M)
    tried = []
    for m in range(2, max_modulus + 1):
        entries = []
        for w, M in zip(words, mats):
            wit = _witness_entry(M, m)
            if wit is None:
                break
            entries.append((list(w), wit[0], wit[1]))
        else:
            return ModulusRecord(m, N, entries, tried)
        tried.append(m)
    raise RuntimeError(f"no separating modulus up to {max_modulus}")


def recheck_modulus(W: RACG, record: ModulusRecord) -> bool:
    """Independent pass: multiply generator matrices reduced mod ``m`` entrywise."""
    m = record.modulus
    p = W.p
    B = [[1 if i == j else (0 if W.commute(i, j) else -1) for j in range(p)] for i in range(p)]
    gens = []
    for i in range(p):
        rows = [[(1 if r == c else 0) for c in range(p)] for r in range(p)]
        rows[i] = [(rows[i][c] - 2 * B[i][c]) % m for c in range(p)]
        gens.append(rows)
    for w, (i, j), r in record.entries:
        M = [[(1 if a == b else 0) for b in range(p)] for a in range(p)]
        for t in w:
            G = gens[t]
            M = [[sum(M[a][c] * G[c][b] for c in range(p)) % m for b in range(p)] for a in range(p)]
        if M[i][j] != r or r == (1 if i == j else 0):
            return False
        if all(M[a][b] == (1 if a == b else 0) for a in range(p) for b in range(p)):
            return False
    return len(record.entries) == len(ball(W, record.radius)) - 1


def coxeter_word_of_path(W: RACG, crossings: Iterable[Iterable[int]]) -> list[int]:
    """Flatten crossing events (commuting cliques) into a word, each set in index order."""
    out = []
    for event in crossings:
        ev = sorted(set(int(t) for t in event))
        for a in range(len(ev)):
            for b in range(a + 1, len(ev)):
                if not W.commute(ev[a], ev[b]):
                    raise InvalidCrossing(f"generators {ev[a]} and {ev[b]} do not commute")
        out += ev
    return _check_word(W, out)


@dataclass(frozen=True)
class LengthBound:
    bound: float
    rule: str


def lemma_bounds(W: RACG, w: Sequence[int], D: float, sysLB: float, L: float) -> LengthBound:
    """Lower bound on the length of a path whose Coxeter word is ``w``.

    Unreduced words give ``sysLB - L``; reduced words of length at least 3
    give ``floor(|w| / 3) * D``; anything else gives 0.
    """
    if D <= 0 or sysLB <= 0 or L <= 0:
        raise ValueError("D, sysLB and L must be positive")
    if unreduced_witness(W, w) is not None:
        return LengthBound(sysLB - L, "unreduced")
    if len(w) >= 3:
        return LengthBound(math.floor(len(w) / 3) * D, "reduced")
    return LengthBound(0.0, "inapplicable")


def infinite_dihedral() -> RACG:
    return RACG(2)


def pentagon_group() -> RACG:
    return RACG(5, frozenset(frozenset((i, (i + 1) % 5)) for i in range(5)))


def _dihedral_factors(data: dict, k: int) -> tuple[list, dict]:
    """Split the symmetry faces into commuting dihedral pairs.

    Returns the factor orders and, for each symmetry face, ``(factor, shift)``
    so that its reflection acts on ``Z / order`` as ``x -> shift - x``.
    """
    sym = list(data["roles"]["symmetry"])
    sub = {}
    for e in data["edges"]:
        n = e["angle_sub"]
        sub[frozenset((e["f1"], e["f2"]))] = k if n == "k" else int(n)
    orders, action = [], {}
    for a in sym:
        for b in sym:
            n = sub.get(frozenset((a, b)), 2)
            if a < b and n != 2:
                if a in action or b in action:
                    raise ValueError("symmetry faces do not split into dihedral pairs")
                action[a] = (len(orders), 0)
                action[b] = (len(orders), 1)
                orders.append(n)
    if set(action) != set(sym):
        raise ValueError("every symmetry face must belong to one dihedral pair")
    return orders, action


def h0_mirror_adjacency(k: int, data: Optional[dict] = None) -> Multigraph:
    """Mirror adjacency of the handlebody orbifold covering the prism.

    The handlebody is the orbifold cover of the prism for the reflection group
    of its symmetry faces. A mirror face ``F`` lifts to tiles ``g S_F``, where
    ``S_F`` is generated by the symmetry faces meeting ``F`` at right angles.
    Two tiles meet when they share a lifted side: mirror faces meeting each
    other give ``g S_F ~ g S_F'`` and a symmetry face ``r`` meeting ``F`` at
    angle ``pi/4`` gives ``g S_F ~ g r S_F``. Vertices are ``(face, tile
    index)``; each edge label is the number of lifted sides the two tiles
    share (the commutation graph only records whether they meet).
    """
    if k < 3:
        raise ValueError("k must be at least 3")
    if data is None:
        from .hyperbolic.polyhedron import load_prism_data

        data = load_prism_data()
    orders, action = _dihedral_factors(data, k)
    mirrors = list(data["roles"]["mirror"])
    sub = {}
    for e in data["edges"]:
        n = e["angle_sub"]
        sub[frozenset((e["f1"], e["f2"]))] = k if n == "k" else int(n)

    # group elements: per factor an affine map x -> sign * x + shift on Z / order
    identity = tuple((1, 0) for _ in orders)

    def reflect(face, g):
        f, shift = action[face]
        out = list(g)
        sign, t = g[f]
        out[f] = (-sign, (shift - t) % orders[f])
        return tuple(out)

    def mul_right(g, face):
        # g * r: apply r first, so x -> sign * (shift - x) + t
        f, shift = action[face]
        out = list(g)
        sign, t = g[f]
        out[f] = (-sign, (sign * shift + t) % orders[f])
        return tuple(out)

    elements = [identity]
    seen = {identity}
    for g in elements:
        for face in action:
            h = reflect(face, g)
            if h not in seen:
                seen.add(h)
                elements.append(h)

    tiles = {}
    tile_of = {}
    for F in mirrors:
        gens = [r for r in action if sub.get(frozenset((F, r))) == 2]
        for g in elements:
            if (F, g) in tile_of:
                continue
            coset, stack = {g}, [g]
            while stack:
                h = stack.pop()
                for r in gens:
                    x = mul_right(h, r)
                    if x not in coset:
                        coset.add(x)
                        stack.append(x)
            t = (F, len([key for key in tiles if key[0] == F]))
            tiles[t] = coset
            for h in coset:
                tile_of[(F, h)] = t

    shared = {}

    def touch(a, b, weight):
        if a == b:
            raise ValueError(f"tile {a} meets itself")
        key = tuple(sorted((a, b), key=repr))
        shared[key] = shared.get(key, 0) + weight

    for g in elements:
        for i, F in enumerate(mirrors):
            for Fp in mirrors[i + 1 :]:
                if sub.get(frozenset((F, Fp))) == 2:
                    touch(tile_of[(F, g)], tile_of[(Fp, g)], 1)
            for r in action:
                n = sub.get(frozenset((F, r)))
                if n == 4:
                    # seen once from each of the two tiles
                    touch(tile_of[(F, g)], tile_of[(F, mul_right(g, r))], 0.5)
                elif n not in (None, 2):
                    raise ValueError(f"angle pi/{n} between {F} and {r} does not lift to right-angled mirrors")
    edges = []
    for (a, b), count in sorted(shared.items(), key=repr):
        edges.append(Edge(("m", a, b), a, b, label=int(count)))
    return Multigraph(tuple(tiles), tuple(edges))
