"""Rational symbols in xi_n, the pi^+ splitting, and the boundary term Phi.

A :class:`RationalSymbol` is ``N(xi_n) / ((xi_n - i)^p (xi_n + i)^q)`` with
a Clifford-valued numerator.  Everything is evaluated on the unit cosphere
|xi'| = 1 of a four-manifold, so ``|xi|^2 = 1 + xi_n^2``; the tangential
covector enters through the symbols ``xi[1..3]`` and c(dx_n) is c(e_4).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from math import comb
from pathlib import Path

from .clifford import Multivector, gen, mv_sum, scalar_mv, spinor_trace
from .perturbations import GaugeContext, PerturbationSpec, build_psi
from .ring import I, PI, DomainError, IndexedSymbol, ScalarPoly, symbol

__all__ = [
    "RationalSymbol",
    "ConfigurationError",
    "BoundaryFixture",
    "load_fixtures",
    "parse_fixture_value",
    "pi_plus",
    "pi_minus",
    "dxi_derivative",
    "integrate_xi_n",
    "sphere_moment",
    "sphere_moments",
    "integrate_sphere",
    "reduce_unit_sphere",
    "c_xi_prime",
    "q_minus1",
    "dxi_prime_q_minus1",
    "psi_correction",
    "boundary_terms",
    "boundary_phi",
    "BOUNDARY_CASES",
]

N_DIM = 4
TANGENTIAL = (1, 2, 3)
BOUNDARY_CASES = ("thm-2.10", "prop-2.15", "thm-3.2")


class ConfigurationError(RuntimeError):
    """A required boundary constant is missing or malformed."""



def _poly_trim(num: list[Multivector]) -> list[Multivector]:
    while num and num[-1].is_zero():
        num.pop()
    return num


def _poly_mul(a: list[Multivector], b: list[Multivector], n: int) -> list[Multivector]:
    if not a or not b:
        return []
    out = [Multivector(n) for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return _poly_trim(out)


def _linear(root: ScalarPoly, n: int) -> list[Multivector]:
    """The factor (xi_n - root)."""
    return [scalar_mv(n, -root), scalar_mv(n, 1)]


def _poly_pow_linear(root: ScalarPoly, k: int, n: int) -> list[Multivector]:
    # (xi_n - root)^k by the binomial theorem
    return [scalar_mv(n, (-root) ** (k - r) * comb(k, r)) for r in range(k + 1)]


def _poly_eval(num: list[Multivector], x: ScalarPoly, n: int) -> Multivector:
    acc = Multivector(n)
    for c in reversed(num):
        acc = acc * x + c
    return acc


def _divide_linear(num: list[Multivector], root: ScalarPoly) -> list[Multivector]:
    """Quotient of N by (xi_n - root); the caller checks N(root) == 0."""
    n = num[0].n
    out = [Multivector(n)] * (len(num) - 1)
    carry = Multivector(n)
    for k in range(len(num) - 1, 0, -1):
        carry = num[k] + carry * root
        out[k - 1] = carry
    return out


class RationalSymbol:
    """``sum_k num[k] xi_n^k / ((xi_n - i)^p (xi_n + i)^q)``, kept in lowest terms."""

    __slots__ = ("num", "p", "q", "n")

    def __init__(self, num, p: int = 0, q: int = 0, n: int = N_DIM):
        if p < 0 or q < 0:
            raise DomainError("pole orders must be non-negative")
        coeffs = []
        for c in num:
            coeffs.append(c if isinstance(c, Multivector) else scalar_mv(n, ScalarPoly.coerce(c)))
        self.n = n
        self.num = _poly_trim(coeffs)
        self.p, self.q = p, q
        self._cancel()

    def _cancel(self):
        for attr, root in (("p", I), ("q", -I)):
            while getattr(self, attr) > 0 and self.num and _poly_eval(self.num, root, self.n).is_zero():
                self.num = _divide_linear(self.num, root)
                setattr(self, attr, getattr(self, attr) - 1)
        if not self.num:
            self.p = self.q = 0

    @classmethod
    def constant(cls, c, n: int = N_DIM) -> "RationalSymbol":
        return cls([c], 0, 0, n)

    def degree(self) -> int:
        return len(self.num) - 1

    def decay(self) -> int:
        """Order of vanishing at xi_n = infinity (negative means growth)."""
        if not self.num:
            return 10**9
        return self.p + self.q - self.degree()

    def is_zero(self) -> bool:
        return not self.num

    def _lifted(self, p: int, q: int) -> list[Multivector]:
        out = self.num
        if p > self.p:
            out = _poly_mul(out, _poly_pow_linear(I, p - self.p, self.n), self.n)
        if q > self.q:
            out = _poly_mul(out, _poly_pow_linear(-I, q - self.q, self.n), self.n)
        return out

    def __add__(self, other):
        if not isinstance(other, RationalSymbol):
            other = RationalSymbol.constant(other, self.n)
        p, q = max(self.p, other.p), max(self.q, other.q)
        a, b = self._lifted(p, q), other._lifted(p, q)
        m = max(len(a), len(b))
        zero = Multivector(self.n)
        num = [(a[k] if k < len(a) else zero) + (b[k] if k < len(b) else zero) for k in range(m)]
        return RationalSymbol(num, p, q, self.n)

    __radd__ = __add__

    def __neg__(self):
        return RationalSymbol([-c for c in self.num], self.p, self.q, self.n)

    def __sub__(self, other):
        if not isinstance(other, RationalSymbol):
            other = RationalSymbol.constant(other, self.n)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, RationalSymbol):
            return RationalSymbol(_poly_mul(self.num, other.num, self.n), self.p + other.p, self.q + other.q, self.n)
        if isinstance(other, Multivector):
            return RationalSymbol([c * other for c in self.num], self.p, self.q, self.n)
        return RationalSymbol([c.scale(other) for c in self.num], self.p, self.q, self.n)

    def __rmul__(self, other):
        if isinstance(other, Multivector):
            return RationalSymbol([other * c for c in self.num], self.p, self.q, self.n)
        return self * other

    def __eq__(self, other):
        if not isinstance(other, RationalSymbol):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def map_coefficients(self, fn) -> "RationalSymbol":
        return RationalSymbol([c.map_coefficients(fn) for c in self.num], self.p, self.q, self.n)

    def trace(self) -> "RationalSymbol":
        """Spinor trace applied to every numerator coefficient."""
        return RationalSymbol([scalar_mv(self.n, spinor_trace(c)) for c in self.num], self.p, self.q, self.n)

    def evaluate(self, xi_n: complex, values=None) -> dict[tuple[int, ...], complex]:
        """Numerical value at a real or complex xi_n, monomial by monomial."""
        from .ring import evaluate

        den = (xi_n - 1j) ** self.p * (xi_n + 1j) ** self.q
        out: dict[tuple[int, ...], complex] = {}
        for k, c in enumerate(self.num):
            for b, coeff in c.terms.items():
                out[b] = out.get(b, 0j) + evaluate(coeff, values) * xi_n**k
        return {b: v / den for b, v in out.items()}

    def __str__(self):
        if not self.num:
            return "0"
        terms = []
        for k, c in enumerate(self.num):
            if c.is_zero():
                continue
            x = "" if k == 0 else ("*xi_n" if k == 1 else f"*xi_n^{k}")
            terms.append(f"[{c}]{x}")
        return f"({' + '.join(terms)}) / ((xi_n-i)^{self.p} (xi_n+i)^{self.q})"

    __repr__ = __str__


def _taylor_at_i(sym: RationalSymbol, order: int) -> list[Multivector]:
    """Taylor coefficients (in u = xi_n - i) of N(xi_n)/(xi_n + i)^q up to u^(order-1)."""
    n = sym.n
    # N(i + u)
    shifted = [Multivector(n) for _ in range(max(len(sym.num), order))]
    for k, c in enumerate(sym.num):
        for m in range(k + 1):
            shifted[m] = shifted[m] + c.scale(I ** (k - m) * comb(k, m))
    # (2i + u)^(-q) = sum_m binom(-q, m) (2i)^(-q-m) u^m,   (2i)^(-1) = -i/2
    half_inv = I * Fraction(-1, 2)
    series = [
        (-1) ** m * comb(sym.q + m - 1, m) * half_inv ** (sym.q + m) if sym.q else ScalarPoly.coerce(int(m == 0))
        for m in range(order)
    ]
    out = []
    for m in range(order):
        acc = Multivector(n)
        for r in range(m + 1):
            if r < len(shifted) and series[m - r]:
                acc = acc + shifted[r].scale(series[m - r])
        out.append(acc)
    return out


def pi_plus(sym: RationalSymbol) -> RationalSymbol:
    """The part of ``sym`` with poles only at xi_n = +i.

    Equals (1/2 pi i) times the contour integral of sym(eta)/(xi_n - eta)
    around eta = i, i.e. the principal part at +i.
    """
    if sym.is_zero():
        return sym
    if sym.decay() < 1:
        raise DomainError("pi^+ needs a symbol vanishing at infinity")
    if sym.p == 0:
        return RationalSymbol([], 0, 0, sym.n)
    g = _taylor_at_i(sym, sym.p)
    # sum_m g_m (xi_n - i)^m over (xi_n - i)^p
    num: list[Multivector] = []
    for m, c in enumerate(g):
        num = _add_polys(num, [x * c for x in _poly_pow_linear(I, m, sym.n)], sym.n)
    return RationalSymbol(num, sym.p, 0, sym.n)


def _add_polys(a, b, n):
    m = max(len(a), len(b))
    zero = Multivector(n)
    return [(a[k] if k < len(a) else zero) + (b[k] if k < len(b) else zero) for k in range(m)]


def pi_minus(sym: RationalSymbol) -> RationalSymbol:
    """The part of ``sym`` with poles only at xi_n = -i."""
    return sym - pi_plus(sym)


def dxi_derivative(sym: RationalSymbol, order: int = 1) -> RationalSymbol:
    """Formal d/dxi_n applied ``order`` times."""
    if order < 0:
        raise DomainError("derivative order must be non-negative")
    out = sym
    for _ in range(order):
        if out.is_zero():
            return out
        n, p, q = out.n, out.p, out.q
        deriv = [c.scale(k) for k, c in enumerate(out.num)][1:]
        # d/dx N (x-i)^-p (x+i)^-q over the raised denominator
        term1 = _poly_mul(deriv, _poly_mul(_linear(I, n), _linear(-I, n), n), n)
        term2 = [c.scale(-p) for c in _poly_mul(out.num, _linear(-I, n), n)]
        term3 = [c.scale(-q) for c in _poly_mul(out.num, _linear(I, n), n)]
        out = RationalSymbol(_add_polys(_add_polys(term1, term2, n), term3, n), p + 1, q + 1, n)
    return out


def integrate_xi_n(sym: RationalSymbol) -> Multivector:
    """Integral over the real xi_n line: 2 pi i times the residue at +i."""
    if sym.is_zero():
        return Multivector(sym.n)
    if sym.decay() < 2:
        raise DomainError("integral over xi_n needs decay of order >= 2")
    if sym.p == 0:
        return Multivector(sym.n)
    residue = _taylor_at_i(sym, sym.p)[sym.p - 1]
    return residue.scale(PI * I * 2)


# ---- integration over the unit sphere |xi'| = 1 in R^3 ----


def _double_factorial_odd(m: int) -> int:
    # (m)!! for odd m >= -1
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def sphere_moment(exps: tuple[int, int, int]) -> Fraction:
    """Mean of xi_1^a xi_2^b xi_3^c over the unit 2-sphere (total measure 1)."""
    if any(e < 0 for e in exps):
        raise DomainError("moment exponents must be non-negative")
    if any(e % 2 for e in exps):
        return Fraction(0)
    num = 1
    for e in exps:
        num *= _double_factorial_odd(e - 1)
    return Fraction(num, _double_factorial_odd(sum(exps) + 1))


def sphere_moments(exps: tuple[int, int, int]) -> ScalarPoly:
    """Integral of the monomial against sigma(xi'), in units of Omega3."""
    return symbol("Omega3") * sphere_moment(tuple(exps))


def _xi_split(m):
    exps = [0, 0, 0]
    rest = []
    for sym, e in m:
        if sym.family == "xi":
            exps[sym.indices[0] - 1] += e
        else:
            rest.append((sym, e))
    return tuple(exps), tuple(rest)


def integrate_sphere(p: ScalarPoly) -> ScalarPoly:
    """Integrate a polynomial in xi[1..3] over |xi'| = 1; returns a multiple of Omega3."""
    out = ScalarPoly()
    for m, c in p.terms.items():
        exps, rest = _xi_split(m)
        w = sphere_moment(exps)
        if w:
            out = out + ScalarPoly({rest: c * w}) * symbol("Omega3")
    return out


def reduce_unit_sphere(p: ScalarPoly) -> ScalarPoly:
    """Eliminate xi[3]^2 using xi_1^2 + xi_2^2 + xi_3^2 = 1."""
    xi3 = IndexedSymbol("xi", (3,))
    rule = 1 - symbol("xi", 1) ** 2 - symbol("xi", 2) ** 2

    def fn(m):
        e3 = dict(m).get(xi3, 0)
        if e3 < 2:
            return ScalarPoly({m: 1})
        rest = tuple((s, e) for s, e in m if s != xi3)
        return ScalarPoly({rest: 1}) * symbol("xi", 3) ** (e3 % 2) * rule ** (e3 // 2)

    return p.map_monomials(fn)


# ---- the symbols that feed the boundary term ----


def c_xi_prime(n: int = N_DIM) -> Multivector:
    return mv_sum(n, (gen(n, i) * symbol("xi", i) for i in TANGENTIAL))


def q_minus1(n: int = N_DIM) -> RationalSymbol:
    """Leading symbol i c(xi)/|xi|^2 of D^(-1) on |xi'| = 1."""
    return RationalSymbol([c_xi_prime(n) * I, gen(n, n) * I], 1, 1, n)


def dxi_prime_q_minus1(j: int, n: int = N_DIM) -> RationalSymbol:
    """d/dxi_j of i c(xi)/|xi|^2 (j tangential), then |xi'| = 1."""
    if j not in TANGENTIAL:
        raise DomainError("tangential index expected")
    first = RationalSymbol([gen(n, j) * I], 1, 1, n)
    second = RationalSymbol([c_xi_prime(n) * I, gen(n, n) * I], 2, 2, n) * (symbol("xi", j) * -2)
    return first + second


def psi_correction(psi: Multivector) -> RationalSymbol:
    """c(xi) Psi c(xi) / |xi|^4 on |xi'| = 1."""
    n = psi.n
    cp, cn = c_xi_prime(n), gen(n, n)
    return RationalSymbol([cp * psi * cp, cn * psi * cp + cp * psi * cn, cn * psi * cn], 2, 2, n)


def _reduce(sym: RationalSymbol) -> RationalSymbol:
    return sym.map_coefficients(reduce_unit_sphere)


def _full_integral(sym: RationalSymbol) -> ScalarPoly:
    """trace, then dxi_n over R, then sigma(xi') over the unit sphere."""
    return integrate_sphere(integrate_xi_n(sym.trace()).scalar_part())


# ---- imported constants ----

_FACTOR_RE = re.compile(r"^(pi|π|h'\(0\)|hprime0|Ω₃|Ω3|Omega3)(?:\^(-?\d+))?$")
_NAMES = {"pi": "pi", "π": "pi", "h'(0)": "hprime0", "hprime0": "hprime0", "Ω₃": "Omega3", "Ω3": "Omega3", "Omega3": "Omega3"}


def parse_fixture_value(text: str) -> ScalarPoly:
    """Parse ``rational·π^a·h'(0)^b·Ω₃^c`` (``*`` and ASCII names also accepted)."""
    parts = [t.strip() for t in re.split(r"[·*]", text.strip()) if t.strip()]
    if not parts:
        raise ConfigurationError(f"empty value {text!r}")
    try:
        value = ScalarPoly.coerce(Fraction(parts[0].replace(" ", "")))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"bad rational factor in {text!r}") from exc
    for tok in parts[1:]:
        m = _FACTOR_RE.match(tok)
        if not m:
            raise ConfigurationError(f"unknown factor {tok!r} in {text!r}")
        value = value * symbol(_NAMES[m.group(1)]) ** int(m.group(2) or 1)
    return value


@dataclass(frozen=True)
class BoundaryFixture:
    name: str
    value: ScalarPoly
    source: str


def load_fixtures(path: str | Path | None = None) -> dict[str, BoundaryFixture]:
    """Read ``name = value  # source`` lines; blank lines and full-line comments are skipped."""
    if path is None:
        text = resources.files("diracres").joinpath("data/boundary_constants.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        body, _, note = line.partition("#")
        if "=" not in body:
            raise ConfigurationError(f"line {lineno}: expected 'name = value'")
        name, _, val = body.partition("=")
        name = name.strip()
        if name in out:
            raise ConfigurationError(f"line {lineno}: duplicate constant {name!r}")
        out[name] = BoundaryFixture(name, parse_fixture_value(val), note.strip())
    return out


REQUIRED_FIXTURES = ("term_a_II", "term_a_III", "term_b_q2", "term_c_q2")


def _fixture(fixtures, name) -> ScalarPoly:
    try:
        return fixtures[name].value
    except KeyError:
        raise ConfigurationError(f"boundary constant {name!r} missing from fixture file") from None


# ---- assembly of Phi ----


def boundary_terms(case: str, spec: PerturbationSpec | None = None, fixtures=None) -> dict[str, ScalarPoly]:
    """Named pieces of Phi for one of the supported cases.

    Metric-derivative pieces proportional to h'(0) come from the fixtures;
    everything built only from q_-1 and the Psi correction is computed here.
    """
    if case not in BOUNDARY_CASES:
        raise DomainError(f"unknown boundary case {case!r}")
    if fixtures is None:
        fixtures = load_fixtures()
    n = N_DIM
    q1 = q_minus1(n)
    pq1 = pi_plus(q1)
    dq1 = dxi_derivative(q1, 1)
    minus_half = Fraction(-1, 2)
    terms: dict[str, ScalarPoly] = {}

    if case == "thm-3.2":
        f, g = symbol("f"), symbol("g")
        fg = f * g
        # (a) I: x'-derivatives of the metric vanish at x0; the dg part integrates to zero
        a1 = ScalarPoly()
        for j in TANGENTIAL:
            k = _full_integral(pi_plus(dxi_prime_q_minus1(j, n)) * dq1)
            a1 = a1 - f * symbol("g", derivs=(j,)) * k
        terms["a_I"] = a1
        terms["a_II"] = fg * _fixture(fixtures, "term_a_II") + g * symbol("f", derivs=(n,)) * minus_half * _full_integral(
            pq1 * dxi_derivative(q1, 2)
        )
        terms["a_III"] = fg * _fixture(fixtures, "term_a_III") + f * symbol("g", derivs=(n,)) * minus_half * _full_integral(
            dxi_derivative(pq1, 1) * dq1
        )
        terms["b"] = fg * _fixture(fixtures, "term_b_q2")
        terms["c"] = fg * _fixture(fixtures, "term_c_q2")
        return terms

    if spec is None:
        raise DomainError(f"case {case} needs a perturbation")
    psi = build_psi(spec, GaugeContext(n))
    corr = psi_correction(psi)
    # (a) I: q_-1 has no x'-dependence at x0 in boundary normal coordinates
    terms["a_I"] = ScalarPoly()
    terms["a_II"] = _fixture(fixtures, "term_a_II")
    terms["a_III"] = _fixture(fixtures, "term_a_III")
    psi_b = _full_integral(_reduce(pi_plus(corr) * dq1)) * (-I)
    terms["b"] = _fixture(fixtures, "term_b_q2") + psi_b
    c_q2 = _fixture(fixtures, "term_c_q2")
    if case == "thm-2.10":
        terms["c"] = c_q2 + _full_integral(_reduce(pq1 * dxi_derivative(corr, 1))) * (-I)
    else:
        # the second factor is the unperturbed inverse, so only the imported part remains
        terms["c"] = c_q2
    return terms


def boundary_phi(case: str, spec: PerturbationSpec | None = None, fixtures=None) -> ScalarPoly:
    """Sum of the five boundary pieces (the integrand of the boundary integral)."""
    total = ScalarPoly()
    for v in boundary_terms(case, spec, fixtures).values():
        total = total + v
    return total
