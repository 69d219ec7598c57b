"""Clifford algebra Cl(n) over :class:`ScalarPoly`, with c(e_i)^2 = -1.

Elements are stored on canonical monomials: strictly increasing index
tuples.  The spinor trace is ``d * (scalar part)`` with ``d = 2**(n//2)``;
no matrix representation is used here.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping

from .ring import DomainError, ScalarPoly, const
from .ring import _mul_monomials as _raw_mul_monomials

__all__ = [
    "Multivector",
    "cliff_mul",
    "spinor_trace",
    "spinor_dim",
    "grade_project",
    "gen",
    "scalar_mv",
    "blade",
]


def spinor_dim(n: int) -> int:
    if n % 2:
        raise DomainError(f"spinor trace needs even dimension, got n={n}")
    return 2 ** (n // 2)


@lru_cache(maxsize=None)
def _blade_mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    # insertion sort of a+b with sign tracking; equal neighbours contract to -1
    out = list(a)
    sign = 1
    for x in b:
        pos = len(out)
        while pos > 0 and out[pos - 1] > x:
            pos -= 1
        sign *= (-1) ** (len(out) - pos)
        if pos > 0 and out[pos - 1] == x:
            # move x next to its twin, then c(e_x)^2 = -1
            del out[pos - 1]
            sign = -sign
        else:
            out.insert(pos, x)
    return sign, tuple(out)


_mul_monomials = lru_cache(maxsize=1 << 18)(_raw_mul_monomials)


class Multivector:
    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[tuple[int, ...], ScalarPoly | int | Fraction] | None = None):
        self.n = n
        self.terms: dict[tuple[int, ...], ScalarPoly] = {}
        for b, c in (terms or {}).items():
            b = tuple(b)
            if list(b) != sorted(set(b)) or any(not 1 <= i <= n for i in b):
                raise DomainError(f"monomial {b} is not strictly increasing within [1, {n}]")
            c = ScalarPoly.coerce(c)
            if c:
                self.terms[b] = c

    @classmethod
    def _raw(cls, n, terms):
        m = cls.__new__(cls)
        m.n = n
        m.terms = terms
        return m

    def _check(self, other: "Multivector"):
        if self.n != other.n:
            raise DomainError(f"dimension mismatch {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, Multivector):
            other = scalar_mv(self.n, other)
        self._check(other)
        out = dict(self.terms)
        for b, c in other.terms.items():
            v = out[b] + c if b in out else c
            if v:
                out[b] = v
            else:
                out.pop(b, None)
        return Multivector._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Multivector._raw(self.n, {b: -c for b, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Multivector):
            other = scalar_mv(self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return scalar_mv(self.n, other) - self

    def scale(self, k) -> "Multivector":
        k = ScalarPoly.coerce(k)
        out = {}
        for b, c in self.terms.items():
            v = c * k
            if v:
                out[b] = v
        return Multivector._raw(self.n, out)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return cliff_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            other = scalar_mv(self.n, other)
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def scalar_part(self) -> ScalarPoly:
        return self.terms.get((), ScalarPoly())

    def grades(self) -> set[int]:
        return {len(b) for b in self.terms}

    def map_coefficients(self, fn: Callable[[ScalarPoly], ScalarPoly]) -> "Multivector":
        out = {}
        for b, c in self.terms.items():
            v = fn(c)
            if v:
                out[b] = v
        return Multivector._raw(self.n, out)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for b in sorted(self.terms, key=lambda t: (len(t), t)):
            name = "".join(f"c{i}" for i in b) or "1"
            parts.append(f"({self.terms[b]})*{name}" if b else f"({self.terms[b]})")
        return " + ".join(parts)

    def __repr__(self):
        return f"Multivector(n={self.n}, {self})"


def cliff_mul(a: Multivector, b: Multivector) -> Multivector:
    a._check(b)
    # accumulate raw monomial dicts per blade; building ScalarPolys term by term is quadratic
    acc: dict = {}
    for ba, ca in a.terms.items():
        for bb, cb in b.terms.items():
            sign, bc = _blade_mul(ba, bb)
            slot = acc.setdefault(bc, {})
            get = slot.get
            for m1, c1 in ca.terms.items():
                for m2, c2 in cb.terms.items():
                    s2, m = _mul_monomials(m1, m2)
                    v = c1 * c2
                    slot[m] = get(m, 0) + (v if sign == s2 else -v)
    out = {}
    for bc, slot in acc.items():
        terms = {m: c for m, c in slot.items() if c}
        if terms:
            out[bc] = ScalarPoly._raw(terms)
    return Multivector._raw(a.n, out)


def spinor_trace(a: Multivector) -> ScalarPoly:
    """Trace in the spinor module: ``d`` times the grade-0 coefficient."""
    return a.scalar_part() * spinor_dim(a.n)


def grade_project(a: Multivector, k: int) -> Multivector:
    if not 0 <= k <= a.n:
        raise DomainError(f"grade {k} outside [0, {a.n}]")
    return Multivector._raw(a.n, {b: c for b, c in a.terms.items() if len(b) == k})


def gen(n: int, i: int) -> Multivector:
    """The generator c(e_i)."""
    return Multivector(n, {(i,): 1})


def blade(n: int, idx: Iterable[int], coeff=1) -> Multivector:
    """Product c(e_i1)...c(e_ik) in the given (arbitrary) order."""
    out = scalar_mv(n, coeff)
    for i in idx:
        out = out * gen(n, i)
    return out


def scalar_mv(n: int, c) -> Multivector:
    return Multivector(n, {(): ScalarPoly.coerce(c) if not isinstance(c, ScalarPoly) else c})


def mv_sum(n: int, items: Iterable[Multivector]) -> Multivector:
    out = Multivector(n)
    for x in items:
        out = out + x
    return out


ONE = const(1)
