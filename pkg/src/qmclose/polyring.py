"""Sparse multivariate polynomials with exact rational coefficients.

Polynomials are immutable.  Terms are stored as a mapping from exponent
tuples to :class:`fractions.Fraction` coefficients; zero coefficients are
never stored.  Monomials are ordered graded-lexicographically everywhere
(total degree first, then larger leading exponents first), which fixes the
indexing of every Gram matrix built on top of this module.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb
from numbers import Number, Rational
from typing import Iterable, Mapping, Sequence

Monomial = tuple  # tuple[int, ...]


class VariableMismatch(ValueError):
    pass


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def grlex_key(exps: Sequence[int]):
    """Sort key: graded lex, x before y before 1-less monomials of equal degree."""
    return (sum(exps), tuple(-e for e in exps))


class Polynomial:
    __slots__ = ("_terms", "_vars", "_hash")

    def __init__(self, terms: Mapping[Sequence[int], object] | None = None,
                 varnames: Sequence[str] = ("x",)):
        self._vars = tuple(varnames)
        nv = len(self._vars)
        clean: dict[Monomial, Fraction] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nv:
                raise VariableMismatch(
                    f"exponent vector {exps} does not match {nv} variables")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            c = _as_fraction(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self._terms = clean
        self._hash = None

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, c, varnames: Sequence[str]) -> "Polynomial":
        return cls({(0,) * len(varnames): c}, varnames)

    @classmethod
    def var(cls, name: str, varnames: Sequence[str]) -> "Polynomial":
        varnames = tuple(varnames)
        if name not in varnames:
            raise VariableMismatch(f"unknown variable {name!r}")
        e = [0] * len(varnames)
        e[varnames.index(name)] = 1
        return cls({tuple(e): 1}, varnames)

    @classmethod
    def monomial(cls, exps: Sequence[int], varnames: Sequence[str], c=1):
        return cls({tuple(exps): c}, varnames)

    # basic accessors -------------------------------------------------------
    @property
    def varnames(self) -> tuple:
        return self._vars

    @property
    def nvars(self) -> int:
        return len(self._vars)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def coeff(self, exps: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def monomials(self) -> list:
        return sorted(self._terms, key=grlex_key)

    def items(self):
        for m in self.monomials():
            yield m, self._terms[m]

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self._terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(m) for m in self._terms), default=-1)

    def constant_term(self) -> Fraction:
        return self.coeff((0,) * self.nvars)

    def l1_norm(self) -> Fraction:
        return sum((abs(c) for c in self._terms.values()), Fraction(0))

    # arithmetic ------------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other._vars != self._vars:
                raise VariableMismatch(
                    f"variable sets differ: {self._vars} vs {other._vars}")
            return other
        if isinstance(other, (Number, str)):
            return Polynomial.constant(_as_fraction(other), self._vars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Polynomial(out, self._vars)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self._terms.items()}, self._vars)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (Number, str)) and not isinstance(other, Polynomial):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Polynomial(out, self._vars)

    __rmul__ = __mul__

    def scale(self, s) -> "Polynomial":
        s = _as_fraction(s)
        return Polynomial({m: c * s for m, c in self._terms.items()}, self._vars)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        result = Polynomial.constant(1, self._vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._vars == other._vars and self._terms == other._terms
        if isinstance(other, Number):
            return self.is_constant() and self.constant_term() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._vars, frozenset(self._terms.items())))
        return self._hash

    # evaluation and substitution ------------------------------------------
    def evaluate(self, point, exact: bool | None = None):
        """Evaluate at ``point`` (mapping name -> value, or a sequence).

        With ``exact`` unset, rational inputs give an exact Fraction and any
        float input switches to float arithmetic.
        """
        vals = self._point_values(point)
        if exact is None:
            exact = all(isinstance(v, (int, Rational)) for v in vals)
        if exact:
            vals = [_as_fraction(v) for v in vals]
            total = Fraction(0)
            for m, c in self._terms.items():
                t = c
                for v, e in zip(vals, m):
                    if e:
                        t *= v ** e
                total += t
            return total
        vals = [float(v) for v in vals]
        total = 0.0
        for m, c in self._terms.items():
            t = float(c)
            for v, e in zip(vals, m):
                if e:
                    t *= v ** e
            total += t
        return total

    def _point_values(self, point):
        if isinstance(point, Mapping):
            missing = [v for v in self._vars if v not in point]
            if missing:
                raise VariableMismatch(f"assignment misses variables {missing}")
            return [point[v] for v in self._vars]
        point = list(point)
        if len(point) != self.nvars:
            raise VariableMismatch(
                f"point has {len(point)} entries, expected {self.nvars}")
        return point

    def substitute(self, var: str, value) -> "Polynomial":
        """Set ``var := value``; the result lives over the remaining variables."""
        if var not in self._vars:
            raise VariableMismatch(f"unknown variable {var!r}")
        k = self._vars.index(var)
        value = _as_fraction(value)
        rest = self._vars[:k] + self._vars[k + 1:]
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            nm = m[:k] + m[k + 1:]
            out[nm] = out.get(nm, Fraction(0)) + c * value ** m[k]
        return Polynomial(out, rest)

    def truncate(self, maxdeg: int) -> "Polynomial":
        return Polynomial({m: c for m, c in self._terms.items()
                           if sum(m) <= maxdeg}, self._vars)

    def with_varnames(self, varnames: Sequence[str]) -> "Polynomial":
        """Re-embed into a (super)set of variables, matching by name."""
        varnames = tuple(varnames)
        missing = [v for v in self._vars if v not in varnames]
        if missing:
            raise VariableMismatch(f"variables {missing} not in target set")
        idx = [self._vars.index(v) if v in self._vars else None for v in varnames]
        out = {}
        for m, c in self._terms.items():
            out[tuple(m[i] if i is not None else 0 for i in idx)] = c
        return Polynomial(out, varnames)

    # printing / serialization ---------------------------------------------
    def __repr__(self):
        return f"Polynomial({str(self)!r}, vars={list(self._vars)})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for m in sorted(self._terms, key=grlex_key, reverse=True):
            c = self._terms[m]
            mono = "*".join(
                (v if e == 1 else f"{v}^{e}") for v, e in zip(self._vars, m) if e)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            parts.append((sign, body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def to_json(self) -> dict:
        return {
            "vars": list(self._vars),
            "terms": [{"exps": list(m), "num": c.numerator, "den": c.denominator}
                      for m, c in self.items()],
        }

    @classmethod
    def from_json(cls, obj) -> "Polynomial":
        if isinstance(obj, str):
            obj = json.loads(obj)
        terms = {}
        for t in obj["terms"]:
            terms[tuple(t["exps"])] = Fraction(int(t["num"]), int(t.get("den", 1)))
        return cls(terms, obj["vars"])


# ---------------------------------------------------------------------------
def monomial_basis(nvars: int, maxdeg: int) -> list:
    """All exponent tuples of total degree <= maxdeg in graded-lex order."""
    if nvars < 0 or maxdeg < 0:
        raise ValueError("nvars and maxdeg must be nonnegative")
    out = []
    for deg in range(maxdeg + 1):
        block = []
        for combo in combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            block.append(tuple(e))
        block.sort(key=grlex_key)
        out.extend(block)
    assert len(out) == comb(nvars + maxdeg, maxdeg)
    return out


def perturber(varnames: Sequence[str] | int, e: int) -> Polynomial:
    """(1 + sum of squared variables) ** e."""
    if isinstance(varnames, int):
        varnames = default_varnames(varnames)
    if e < 1:
        raise ValueError("e must be >= 1")
    g = Polynomial.constant(1, varnames)
    for v in varnames:
        x = Polynomial.var(v, varnames)
        g = g + x * x
    return g ** e


def default_varnames(n: int) -> tuple:
    if n == 1:
        return ("x",)
    if n == 2:
        return ("x", "y")
    return tuple(f"x{i}" for i in range(1, n + 1))


def sum_of_squares_of_vars(varnames: Sequence[str]) -> Polynomial:
    out = Polynomial({}, varnames)
    for v in varnames:
        x = Polynomial.var(v, varnames)
        out = out + x * x
    return out


# ---------------------------------------------------------------------------
# Infix parser: + - * ^ / ( ), integer / decimal / rational literals, names.

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


class ParseError(ValueError):
    pass


def _tokenize(text: str):
    pos, toks = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        num, name, op = m.groups()
        if num is not None:
            toks.append(("num", Fraction(num)))
        elif name is not None:
            toks.append(("name", name))
        else:
            toks.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return toks


def parse_names(text: str) -> list:
    names = [v for kind, v in _tokenize(text) if kind == "name"]
    return sorted(set(names), key=_natural_key)


def _natural_key(s):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", s)]


def parse_polynomial(text: str, varnames: Sequence[str] | None = None) -> Polynomial:
    """Parse ``text`` such as ``'1 - x1^2 - 3/4*x2'`` into a Polynomial.

    Division is only allowed by a constant.  When ``varnames`` is omitted
    the variables are the names occurring in the text, naturally sorted.
    """
    toks = _tokenize(text)
    if varnames is None:
        varnames = parse_names(text)
    varnames = tuple(varnames)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def take(expected=None):
        nonlocal pos
        if pos >= len(toks):
            raise ParseError("unexpected end of input")
        tok = toks[pos]
        if expected is not None and tok != ("op", expected):
            raise ParseError(f"expected {expected!r}, got {tok[1]!r}")
        pos += 1
        return tok

    def expr():
        node = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            rhs = term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term():
        node = unary()
        while peek() in (("op", "*"), ("op", "/")):
            op = take()[1]
            rhs = unary()
            if op == "*":
                node = node * rhs
            else:
                if not rhs.is_constant() or rhs.is_zero():
                    raise ParseError("division only by a nonzero constant")
                node = node.scale(1 / rhs.constant_term())
        return node

    def unary():
        if peek() == ("op", "-"):
            take()
            return -unary()
        if peek() == ("op", "+"):
            take()
            return unary()
        return power()

    def power():
        base = atom()
        if peek() == ("op", "^"):
            take()
            kind, val = take()
            if kind != "num" or val.denominator != 1:
                raise ParseError("exponent must be a nonnegative integer literal")
            return base ** int(val)
        return base

    def atom():
        kind, val = take()
        if kind == "num":
            return Polynomial.constant(val, varnames)
        if kind == "name":
            if val not in varnames:
                raise ParseError(f"unknown variable {val!r}")
            return Polynomial.var(val, varnames)
        if val == "(":
            node = expr()
            take(")")
            return node
        raise ParseError(f"unexpected token {val!r}")

    if not toks:
        raise ParseError("empty polynomial")
    result = expr()
    if pos != len(toks):
        raise ParseError(f"trailing input at token {toks[pos][1]!r}")
    return result


def polys_from_strings(texts: Iterable[str], varnames: Sequence[str]) -> list:
    return [parse_polynomial(t, varnames) for t in texts]
