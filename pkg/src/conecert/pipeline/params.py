"""Construction parameters and their arithmetic validation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from ..groups import is_prime, legendre


# overridable numerical tolerances and their defaults
TOLERANCES = {"realize": 1e-12}


class ParamError(ValueError):
    """Parameters violate the arithmetic conditions of certification mode."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class ConstructionParams:
    k: int = 18
    q: int = 5
    level: int = 1
    b_fraction: float = 0.9
    R_margin: float = 1.01
    seed: int = 0
    structural: bool = False
    tolerance: dict = field(default_factory=dict)
    d_radius: int = 2

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "ConstructionParams":
        return cls(**data)

    def tol(self, name: str) -> float:
        return float(self.tolerance.get(name, TOLERANCES[name]))


def arithmetic_problems(p: ConstructionParams) -> list[str]:
    """Every violated arithmetic condition, each named individually."""
    out = []
    k, q = p.k, p.q
    if k < 18:
        out.append(f"k = {k} is below 18")
    if not is_prime(k - 1):
        out.append(f"k - 1 = {k - 1} is not prime")
    elif (k - 1) % 4 != 1:
        out.append(f"k - 1 = {k - 1} is not 1 mod 4")
    if not is_prime(q) or q == 2:
        out.append(f"q = {q} is not an odd prime")
    elif q == k - 1:
        out.append("q must differ from k - 1")
    elif is_prime(k - 1) and legendre(k - 1, q) != -1:
        out.append(f"k - 1 = {k - 1} is a square modulo q = {q}")
    return out


def validate_params(p: ConstructionParams) -> tuple[ConstructionParams, list[str]]:
    """Check the parameters; returns them with a list of warnings.

    In certification mode any arithmetic violation raises :class:`ParamError`.
    Structural mode only needs ``k >= 3``, ``q >= 2`` and ``level >= 1`` and
    reports the rest as warnings.
    """
    basic = []
    if p.level < 1:
        basic.append(f"level = {p.level} must be at least 1")
    if not 0 < p.b_fraction < 1:
        basic.append("b_fraction must lie in (0, 1)")
    if not p.R_margin > 1:
        basic.append("R_margin must exceed 1")
    if p.d_radius < 1:
        basic.append("d_radius must be at least 1")
    for name, value in p.tolerance.items():
        if name not in TOLERANCES:
            basic.append(f"unknown tolerance {name!r} (known: {', '.join(sorted(TOLERANCES))})")
        elif not (isinstance(value, (int, float)) and 0 < value < 1):
            basic.append(f"tolerance {name} = {value} must lie in (0, 1)")
    if p.structural:
        if p.k < 3:
            basic.append(f"k = {p.k} must be at least 3")
        if p.q < 2:
            basic.append(f"q = {p.q} must be at least 2")
    if basic:
        raise ParamError(basic)
    problems = arithmetic_problems(p)
    if problems and not p.structural:
        raise ParamError(problems)
    return p, [f"structural mode: {w}" for w in problems]


def required_level(p_prime: int, q: int, girth_target: float) -> int:
    """Smallest ``n >= 1`` with ``4 n log_p(q) - log_p(4) >= girth_target``.

    This is the bipartite girth lower bound quoted for these Ramanujan
    graphs; it is a literature bound and is not verified here.
    """
    if p_prime < 2 or q < 2:
        raise ValueError("p and q must be at least 2")
    lq = math.log(q) / math.log(p_prime)
    l4 = math.log(4) / math.log(p_prime)
    n = math.ceil((girth_target + l4) / (4 * lq) - 1e-12)
    return max(1, n)
