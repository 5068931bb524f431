"""Small finite groups used as voltage groups.

Every group exposes the same duck-typed interface: ``identity``,
``mul``, ``inv``, ``elements()``, ``order()`` and JSON helpers for its
elements. Elements are plain hashable Python values.
"""

from __future__ import annotations

from functools import cached_property
from typing import Any, Hashable, Iterable


def factor_prime_power(m: int) -> tuple[int, int]:
    """Return ``(q, n)`` with ``m == q**n`` and ``q`` prime.

    Raises ``ValueError`` when ``m`` is not a prime power.
    """
    if m < 2:
        raise ValueError(f"{m} is not a prime power")
    q = next(d for d in range(2, m + 1) if m % d == 0)
    n, r = 0, m
    while r % q == 0:
        r //= q
        n += 1
    if r != 1:
        raise ValueError(f"{m} is not a prime power")
    return q, n


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def legendre(a: int, q: int) -> int:
    """Euler criterion for an odd prime ``q``: 1, -1 or 0."""
    a %= q
    if a == 0:
        return 0
    return 1 if pow(a, (q - 1) // 2, q) == 1 else -1


class FiniteGroup:
    """Interface shared by the voltage groups."""

    identity: Hashable

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def elements(self) -> list:
        raise NotImplementedError

    def order(self) -> int:
        return len(self.elements())

    def to_json(self) -> dict:
        raise NotImplementedError

    def element_to_json(self, a) -> Any:
        return a

    def element_from_json(self, data) -> Hashable:
        return data

    def prod(self, items: Iterable):
        out = self.identity
        for a in items:
            out = self.mul(out, a)
        return out

    def generated_subgroup(self, gens: Iterable) -> list:
        """Elements of the subgroup generated by ``gens`` (breadth first)."""
        gens = list(gens)
        seen = {self.identity}
        order = [self.identity]
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        order.append(y)
                        nxt.append(y)
            frontier = nxt
        return order


class CyclicGroup(FiniteGroup):
    """Additive group Z/m."""

    def __init__(self, modulus: int):
        if modulus < 1:
            raise ValueError("modulus must be positive")
        self.modulus = modulus
        self.identity = 0

    def mul(self, a, b):
        return (a + b) % self.modulus

    def inv(self, a):
        return (-a) % self.modulus

    def elements(self):
        return list(range(self.modulus))

    def order(self):
        return self.modulus

    def reduce(self, a, modulus: int):
        return a % modulus

    def with_modulus(self, modulus: int) -> "CyclicGroup":
        return CyclicGroup(modulus)

    def to_json(self):
        return {"type": "Z", "modulus": self.modulus}

    def __repr__(self):
        return f"CyclicGroup({self.modulus})"


class FiniteMatrixGroup(FiniteGroup):
    """Projective 2x2 matrix groups over Z/m.

    Elements are tuples ``(a, b, c, d)`` for ``[[a, b], [c, d]]`` scaled so
    that the first unit entry in row-major order equals 1. For a prime
    modulus this is the first nonzero entry.

    Parameters
    ----------
    modulus : int
        An odd prime power.
    kind : {"PSL", "PGL"}
        ``PGL`` holds every invertible class; ``PSL`` keeps the classes whose
        determinant is a square unit.
    """

    def __init__(self, modulus: int, kind: str = "PSL"):
        if kind not in ("PSL", "PGL"):
            raise ValueError(f"unknown matrix group kind {kind!r}")
        q, n = factor_prime_power(modulus)
        if q == 2:
            raise ValueError("modulus must be odd")
        self.modulus = modulus
        self.prime = q
        self.exponent = n
        self.kind = kind
        self.identity = (1, 0, 0, 1)

    def _unit(self, x: int) -> bool:
        return x % self.prime != 0

    def canonical(self, mat) -> tuple:
        m = self.modulus
        a, b, c, d = (int(x) % m for x in mat)
        for x in (a, b, c, d):
            if self._unit(x):
                s = pow(x, -1, m)
                return (a * s % m, b * s % m, c * s % m, d * s % m)
        raise ValueError(f"matrix {mat} is not invertible mod {m}")

    def det(self, a) -> int:
        return (a[0] * a[3] - a[1] * a[2]) % self.modulus

    def contains(self, a) -> bool:
        dt = self.det(a)
        if not self._unit(dt):
            return False
        if self.kind == "PGL":
            return True
        return legendre(dt, self.prime) == 1

    def mul(self, x, y):
        a, b, c, d = x
        e, f, g, h = y
        return self.canonical((a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h))

    def inv(self, x):
        a, b, c, d = x
        return self.canonical((d, -b, -c, a))

    def expected_order(self) -> int:
        q, n = self.prime, self.exponent
        pgl = q ** (3 * (n - 1)) * q * (q * q - 1)
        return pgl if self.kind == "PGL" else pgl // 2

    @cached_property
    def _elements(self) -> list:
        m, q = self.modulus, self.prime
        if m > 60:
            raise ValueError(f"explicit enumeration of the group mod {m} is too large")
        out = []
        # the first row always holds a unit; scale it to 1
        for b in range(m):
            for c in range(m):
                for d in range(m):
                    x = (1, b, c, d)
                    if self.contains(x):
                        out.append(x)
        for a in range(0, m, q):
            for c in range(m):
                for d in range(m):
                    x = (a, 1, c, d)
                    if self.contains(x):
                        out.append(x)
        return out

    def elements(self):
        return self._elements

    def order(self):
        return self.expected_order()

    def reduce(self, a, modulus: int):
        return FiniteMatrixGroup(modulus, self.kind).canonical(a)

    def with_modulus(self, modulus: int) -> "FiniteMatrixGroup":
        return FiniteMatrixGroup(modulus, self.kind)

    def to_json(self):
        return {"type": self.kind, "modulus": self.modulus}

    def element_to_json(self, a):
        return [[a[0], a[1]], [a[2], a[3]]]

    def element_from_json(self, data):
        (a, b), (c, d) = data
        return self.canonical((a, b, c, d))

    def __repr__(self):
        return f"FiniteMatrixGroup({self.modulus}, {self.kind!r})"


class TableGroup(FiniteGroup):
    """A finite group relabelled as ``0..n-1`` with a multiplication table.

    Useful for speed when many products are needed; ``labels[i]`` keeps the
    original element.
    """

    def __init__(self, labels: list, table, inverse: list):
        self.labels = list(labels)
        self.table = table
        self.inverse = list(inverse)
        self.identity = 0
        self.index = {x: i for i, x in enumerate(self.labels)}

    @classmethod
    def from_elements(cls, group: FiniteGroup, elements: list) -> "TableGroup":
        elements = list(elements)
        if elements[0] != group.identity:
            elements.remove(group.identity)
            elements.insert(0, group.identity)
        index = {x: i for i, x in enumerate(elements)}
        table = [[index[group.mul(x, y)] for y in elements] for x in elements]
        inverse = [index[group.inv(x)] for x in elements]
        return cls(elements, table, inverse)

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self.inverse[a]

    def elements(self):
        return list(range(len(self.labels)))

    def order(self):
        return len(self.labels)

    def to_json(self):
        return {"type": "table", "order": len(self.labels)}


class ProductGroup(FiniteGroup):
    """Direct product of two groups; elements are pairs."""

    def __init__(self, left: FiniteGroup, right: FiniteGroup):
        self.left = left
        self.right = right
        self.identity = (left.identity, right.identity)

    def mul(self, a, b):
        return (self.left.mul(a[0], b[0]), self.right.mul(a[1], b[1]))

    def inv(self, a):
        return (self.left.inv(a[0]), self.right.inv(a[1]))

    def elements(self):
        return [(x, y) for x in self.left.elements() for y in self.right.elements()]

    def order(self):
        return self.left.order() * self.right.order()

    def to_json(self):
        return {"type": "product", "factors": [self.left.to_json(), self.right.to_json()]}

    def element_to_json(self, a):
        return [self.left.element_to_json(a[0]), self.right.element_to_json(a[1])]

    def element_from_json(self, data):
        return (self.left.element_from_json(data[0]), self.right.element_from_json(data[1]))


def group_from_json(data: dict) -> FiniteGroup:
    kind = data["type"]
    if kind == "Z":
        return CyclicGroup(int(data["modulus"]))
    if kind in ("PSL", "PGL"):
        return FiniteMatrixGroup(int(data["modulus"]), kind)
    if kind == "product":
        a, b = data["factors"]
        return ProductGroup(group_from_json(a), group_from_json(b))
    raise ValueError(f"unknown group type {kind!r}")
