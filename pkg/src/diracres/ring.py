"""Exact commutative polynomials over indexed indeterminates.

Coefficients are :class:`fractions.Fraction`.  A handful of families are
treated as invertible (Laurent exponents allowed), the imaginary unit ``I``
is a central generator with ``I**2 == -1``, and a formal spatial derivative
``formal_derive`` acts on every family that depends on the base point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Mapping

__all__ = [
    "DomainError",
    "UnsupportedOrderError",
    "IndexedSymbol",
    "ScalarPoly",
    "canonicalize",
    "symbol",
    "const",
    "formal_derive",
    "laplacian",
    "expand_laplacians",
    "diff",
    "substitute",
    "evaluate",
    "I",
    "PI",
]


class DomainError(ValueError):
    """Raised when an argument lies outside the domain an operation accepts."""


class UnsupportedOrderError(DomainError):
    """Raised when a derivative beyond second order is requested."""


# families whose value is fixed at the base point (spatial derivative is 0)
CONSTANT_FAMILIES = frozenset(
    {"I", "pi", "Omega3", "hprime0", "F0", "F2", "F4", "xi", "n", "d", "Lambda"}
)
# families allowed to carry negative exponents
INVERTIBLE_FAMILIES = frozenset({"pi", "g", "f", "Omega3", "expm2h", "Lambda"})
ANTISYMMETRIC_PAIR = frozenset({"a", "dsig"})
MAX_DERIVATIVE_ORDER = 2


@dataclass(frozen=True, order=True)
class IndexedSymbol:
    """An indeterminate ``family[indices]`` with formal derivative directions.

    ``derivs`` is the sorted tuple of derivative directions: ``(j,)`` stands
    for ``D1[j] x`` and ``(j, k)`` for ``D2[j,k] x``.  ``label`` is only used
    by formal Laplacian atoms.
    """

    family: str
    indices: tuple[int, ...] = ()
    derivs: tuple[int, ...] = ()
    label: str = ""

    def __post_init__(self):
        # symbols are hashed constantly inside monomials
        object.__setattr__(self, "_hash", hash((self.family, self.indices, self.derivs, self.label)))

    def __hash__(self):
        return self._hash

    def base(self) -> "IndexedSymbol":
        return IndexedSymbol(self.family, self.indices)

    def __str__(self) -> str:
        if self.family == "Lap":
            return f"Lap({self.label})"
        name = self.family
        if self.indices:
            name += "[" + ",".join(map(str, self.indices)) + "]"
        if self.derivs:
            name = "D[" + ",".join(map(str, self.derivs)) + "]" + name
        return name


def _riemann_orbit(idx: tuple[int, ...]):
    i, j, s, t = idx
    for (p, q, sign_pq), (u, v, sign_uv) in itertools.product(
        [(i, j, 1), (j, i, -1)], [(s, t, 1), (t, s, -1)]
    ):
        yield (p, q, u, v), sign_pq * sign_uv
        yield (u, v, p, q), sign_pq * sign_uv


def canonicalize(sym: IndexedSymbol, n: int | None = None) -> tuple[int, IndexedSymbol | None]:
    """Return ``(sign, representative)`` of the symmetry orbit of ``sym``.

    ``sign`` is 0 (and the representative ``None``) when the symbol vanishes
    identically.  With ``n`` given, every index and derivative direction must
    lie in ``[1, n]``.
    """
    if n is not None:
        for k in sym.indices + sym.derivs:
            if not 1 <= k <= n:
                raise DomainError(f"index {k} of {sym} outside [1, {n}]")
    derivs = tuple(sorted(sym.derivs))
    fam, idx = sym.family, sym.indices
    if fam in ANTISYMMETRIC_PAIR:
        k, l = idx
        if k == l:
            return 0, None
        if k > l:
            return -1, IndexedSymbol(fam, (l, k), derivs, sym.label)
        return 1, IndexedSymbol(fam, idx, derivs, sym.label)
    if fam == "R":
        i, j, s, t = idx
        if i == j or s == t:
            return 0, None
        rep, sign = min(_riemann_orbit(idx))
        return sign, IndexedSymbol(fam, rep, derivs, sym.label)
    return 1, IndexedSymbol(fam, idx, derivs, sym.label)


# A monomial is a sorted tuple of (IndexedSymbol, nonzero int exponent).
Monomial = tuple


def _normalize_monomial(factors: Mapping[IndexedSymbol, int]) -> tuple[int, Monomial]:
    sign = 1
    out = []
    for sym in sorted(factors):
        e = factors[sym]
        if sym.family == "I":
            if e % 4 in (2, 3):
                sign = -sign
            e %= 2
        if e == 0:
            continue
        if e < 0 and (sym.family not in INVERTIBLE_FAMILIES or sym.derivs):
            raise DomainError(f"{sym} is not invertible")
        out.append((sym, e))
    return sign, tuple(out)


def _mul_monomials(m1: Monomial, m2: Monomial) -> tuple[int, Monomial]:
    if not m1:
        return 1, m2
    if not m2:
        return 1, m1
    acc = dict(m1)
    for sym, e in m2:
        acc[sym] = acc.get(sym, 0) + e
    return _normalize_monomial(acc)


Number = int | Fraction


class ScalarPoly:
    """Sparse Laurent polynomial with rational coefficients.

    Immutable by convention: no public method mutates ``terms``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        self.terms: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if c != 0:
                    self.terms[m] = Fraction(c)

    @classmethod
    def _raw(cls, terms: dict) -> "ScalarPoly":
        p = cls.__new__(cls)
        p.terms = terms
        return p

    @staticmethod
    def coerce(x) -> "ScalarPoly":
        if isinstance(x, ScalarPoly):
            return x
        if isinstance(x, (int, Fraction, Rational)):
            return ScalarPoly({(): Fraction(x)})
        return NotImplemented

    def __add__(self, other):
        other = ScalarPoly.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return ScalarPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return ScalarPoly._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = ScalarPoly.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return ScalarPoly.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return ScalarPoly()
            return ScalarPoly._raw({m: c * other for m, c in self.terms.items()})
        other = ScalarPoly.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                sign, m = _mul_monomials(m1, m2)
                v = out.get(m, 0) + sign * c1 * c2
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return ScalarPoly._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        other = ScalarPoly.coerce(other)
        if len(other.terms) != 1:
            raise DomainError("division only by a single invertible term")
        return self * other.inverse()

    def __rtruediv__(self, other):
        return ScalarPoly.coerce(other) * self.inverse()

    def inverse(self) -> "ScalarPoly":
        if len(self.terms) != 1:
            raise DomainError(f"cannot invert {self}")
        (m, c), = self.terms.items()
        sign, inv = _normalize_monomial({s: -e for s, e in m})
        # I**-1 == -I
        return ScalarPoly({inv: sign / c})

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ScalarPoly(ONE_TERMS)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        other = ScalarPoly.coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def coefficient(self, monomial: Monomial) -> Fraction:
        return self.terms.get(monomial, Fraction(0))

    def symbols(self) -> set[IndexedSymbol]:
        return {s for m in self.terms for s, _ in m}

    def map_monomials(self, fn: Callable[[Monomial], "ScalarPoly"]) -> "ScalarPoly":
        out = ScalarPoly()
        for m, c in self.terms.items():
            out = out + fn(m) * c
        return out

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=_monomial_sort_key):
            c = self.terms[m]
            body = "*".join(str(s) if e == 1 else f"{s}^{e}" for s, e in m)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"ScalarPoly({self})"


ONE_TERMS = {(): Fraction(1)}


def _monomial_sort_key(m: Monomial):
    return (sum(abs(e) for _, e in m), m)


def const(c: Number) -> ScalarPoly:
    return ScalarPoly({(): Fraction(c)})


def _atom(sym: IndexedSymbol, n: int | None = None) -> ScalarPoly:
    sign, rep = canonicalize(sym, n)
    if sign == 0:
        return ScalarPoly()
    return ScalarPoly({((rep, 1),): sign})


def symbol(family: str, *indices: int, derivs: Iterable[int] = (), n: int | None = None) -> ScalarPoly:
    """Canonical polynomial for one indeterminate, e.g. ``symbol('a', 2, 1)``."""
    derivs = tuple(derivs)
    if len(derivs) > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(f"derivative order {len(derivs)} > {MAX_DERIVATIVE_ORDER}")
    return _atom(IndexedSymbol(family, tuple(indices), tuple(sorted(derivs))), n)


I = symbol("I")
PI = symbol("pi")


def _derive_symbol(sym: IndexedSymbol, j: int) -> ScalarPoly:
    if sym.family in CONSTANT_FAMILIES:
        return ScalarPoly()
    if sym.family == "expm2h":
        # d e^{-2h} = -2 e^{-2h} dh
        return -2 * _atom(sym) * symbol("h", derivs=(j,))
    if sym.family == "Lap":
        raise DomainError("formal Laplacian atoms are not differentiable; expand first")
    if len(sym.derivs) >= MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(f"third derivative of {sym.base()} requested")
    return _atom(IndexedSymbol(sym.family, sym.indices, tuple(sorted(sym.derivs + (j,))), sym.label))


def formal_derive(p: ScalarPoly, j: int) -> ScalarPoly:
    """Spatial derivative ``e_j(p)`` at the base point, by the Leibniz rule."""
    out: dict = {}
    for m, c in p.terms.items():
        for pos, (sym, e) in enumerate(m):
            dsym = _derive_symbol(sym, j)
            if dsym.is_zero():
                continue
            rest = dict(m)
            if e == 1:
                del rest[sym]
            else:
                rest[sym] = e - 1
            sign, rest_m = _normalize_monomial(rest)
            for dm, dc in dsym.terms.items():
                s2, full = _mul_monomials(rest_m, dm)
                v = out.get(full, 0) + sign * s2 * c * e * dc
                if v:
                    out[full] = v
                else:
                    out.pop(full, None)
    return ScalarPoly._raw(out)


def diff(p: ScalarPoly, var: IndexedSymbol) -> ScalarPoly:
    """Ordinary partial derivative with respect to one indeterminate."""
    out = ScalarPoly()
    for m, c in p.terms.items():
        d = dict(m)
        e = d.get(var, 0)
        if e == 0:
            continue
        if e == 1:
            del d[var]
        else:
            d[var] = e - 1
        sign, mm = _normalize_monomial(d)
        out = out + ScalarPoly({mm: sign * c * e})
    return out


_LAP_ARGS: dict[str, ScalarPoly] = {}


def laplacian(p: ScalarPoly, n: int, formal: bool = True) -> ScalarPoly:
    """Positive Laplacian ``-sum_k e_k e_k (p)`` at the base point.

    With ``formal`` the result is kept as a linear combination of opaque
    ``Lap(monomial)`` atoms; :func:`expand_laplacians` undoes this.
    """
    if not formal:
        out = ScalarPoly()
        for k in range(1, n + 1):
            out = out - formal_derive(formal_derive(p, k), k)
        return out
    out = ScalarPoly()
    for m, c in p.terms.items():
        if m == ():
            continue
        arg = ScalarPoly({m: 1})
        label = str(arg)
        _LAP_ARGS[label] = arg
        out = out + ScalarPoly({((IndexedSymbol("Lap", (n,), (), label), 1),): c})
    return out


def expand_laplacians(p: ScalarPoly) -> ScalarPoly:
    def repl(sym: IndexedSymbol):
        if sym.family != "Lap":
            return None
        return laplacian(_LAP_ARGS[sym.label], sym.indices[0], formal=False)

    return substitute(p, repl)


def substitute(p: ScalarPoly, mapping: Callable[[IndexedSymbol], ScalarPoly | None]) -> ScalarPoly:
    """Replace indeterminates.

    ``mapping`` is called on the underived base symbol and returns a
    replacement or ``None``; derived symbols receive the formal derivatives
    of the replacement.
    """
    cache: dict[IndexedSymbol, ScalarPoly | None] = {}

    def image(sym: IndexedSymbol):
        if sym in cache:
            return cache[sym]
        base = IndexedSymbol(sym.family, sym.indices, (), sym.label)
        r = mapping(base)
        if r is not None:
            for j in sym.derivs:
                r = formal_derive(r, j)
        cache[sym] = r
        return r

    out = ScalarPoly()
    for m, c in p.terms.items():
        term = ScalarPoly({(): c})
        keep = {}
        for sym, e in m:
            r = image(sym)
            if r is None:
                keep[sym] = e
            else:
                term = term * (r ** e)
        sign, km = _normalize_monomial(keep)
        out = out + term * ScalarPoly({km: sign})
    return out


def evaluate(p: ScalarPoly, values: Mapping[IndexedSymbol | str, complex] | None = None) -> complex:
    """Numerical value; ``I`` and ``pi`` are built in, everything else via ``values``."""
    import math

    values = dict(values or {})
    lookup = {}
    for k, v in values.items():
        if isinstance(k, str):
            k = IndexedSymbol(k)
        sign, rep = canonicalize(k)
        if sign:
            lookup[rep] = sign * v
    total = 0j
    for m, c in p.terms.items():
        v = complex(c)
        for sym, e in m:
            if sym.family == "I":
                x = 1j
            elif sym.family == "pi":
                x = math.pi
            elif sym in lookup:
                x = lookup[sym]
            elif sym.derivs:
                x = 0.0  # constant fields: derivatives vanish
            else:
                raise KeyError(f"no value for {sym}")
            v *= x ** e
        total += v
    return total
