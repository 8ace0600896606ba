"""Named problem instances with the generator lists used throughout the package."""
from __future__ import annotations

from fractions import Fraction

from .polyring import Polynomial
from .qmodule import PREORDERING, QM, QuadraticModuleSpec


def xs(n: int) -> tuple:
    return tuple(f"x{i}" for i in range(1, n + 1))


def _vars(names):
    return [Polynomial.var(v, names) for v in names]


def ball(n: int) -> QuadraticModuleSpec:
    """QM(1 - sum x_i^2)."""
    names = xs(n)
    g = Polynomial.constant(1, names)
    for x in _vars(names):
        g = g - x * x
    return QuadraticModuleSpec(names, (g,), QM, f"ball({n})")


def example_3_3(n: int = 2, c=1) -> QuadraticModuleSpec:
    """x_1 - 1, ..., x_n - 1, c - x_1 ... x_n  (compact, not archimedean)."""
    if n < 2:
        raise ValueError("n >= 2")
    names = xs(n)
    X = _vars(names)
    c = Fraction(c)
    prod = Polynomial.constant(1, names)
    for x in X:
        prod = prod * x
    gens = [x - 1 for x in X] + [prod.scale(-1) + c]
    return QuadraticModuleSpec(names, tuple(gens), QM, f"example_3_3({n},{c})")


def example_3_4(n: int = 2, c=Fraction(1, 4)) -> QuadraticModuleSpec:
    """1 - x_1, ..., 1 - x_n, x_1...x_n - c, x_1 x_n^2, x_1 x_2 x_n^2, ...,
    x_1 ... x_{n-1} x_n^2."""
    if n < 2:
        raise ValueError("n >= 2")
    names = xs(n)
    X = _vars(names)
    c = Fraction(c)
    gens = [1 - x for x in X]
    prod = Polynomial.constant(1, names)
    for x in X:
        prod = prod * x
    gens.append(prod - c)
    head = X[0]
    for k in range(1, n):
        gens.append(head * X[-1] * X[-1])
        if k < n - 1:
            head = head * X[k]
    return QuadraticModuleSpec(names, tuple(gens), QM, f"example_3_4({n},{c})")


def example_4_2(part: str = "M") -> QuadraticModuleSpec:
    """Preordering of R[x, y] generated by (1-x)x y^2 (``M``) or (1-x)x (``N``)."""
    names = ("x", "y")
    x, y = _vars(names)
    g = (1 - x) * x
    if part == "M":
        g = g * y * y
    elif part != "N":
        raise ValueError("part must be 'M' or 'N'")
    return QuadraticModuleSpec(names, (g,), PREORDERING, f"example_4_2_{part}")


def example_couex(part: str = "M") -> QuadraticModuleSpec:
    """Preordering generated by (1-x)x^3 y^2 (``M``) or (1-x)x^3 (``N``)."""
    names = ("x", "y")
    x, y = _vars(names)
    g = (1 - x) * x ** 3
    if part == "M":
        g = g * y * y
    elif part != "N":
        raise ValueError("part must be 'M' or 'N'")
    return QuadraticModuleSpec(names, (g,), PREORDERING, f"couex_{part}")


_REGISTRY = {
    "ball": lambda *a: ball(int(a[0]) if a else 2),
    "example_3_3": lambda *a: example_3_3(*(_num(v) for v in a)),
    "example_3_4": lambda *a: example_3_4(*(_num(v) for v in a)),
    "example_4_2": lambda *a: example_4_2("M"),
    "example_4_2_N": lambda *a: example_4_2("N"),
    "couex": lambda *a: example_couex("M"),
    "couex_N": lambda *a: example_couex("N"),
}
_ALIASES = {"3_3": "example_3_3", "3_4": "example_3_4", "4_2": "example_4_2",
            "4_2_N": "example_4_2_N", "example_couex": "couex",
            "example_couex_N": "couex_N"}


def _num(s):
    s = str(s)
    return int(s) if s.lstrip("-").isdigit() else Fraction(s)


class UnknownInstance(KeyError):
    pass


def instance(spec: str) -> QuadraticModuleSpec:
    """Resolve ``name[:arg,arg...]``, e.g. ``ball:2`` or ``example_3_4:3,1/4``."""
    name, _, args = spec.partition(":")
    name = _ALIASES.get(name, name)
    if name not in _REGISTRY:
        raise UnknownInstance(f"unknown instance {name!r}; known: {sorted(_REGISTRY)}")
    parts = [a for a in args.replace(":", ",").split(",") if a]
    return _REGISTRY[name](*parts)


def instance_names() -> list:
    return sorted(_REGISTRY)
