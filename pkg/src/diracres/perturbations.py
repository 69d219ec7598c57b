"""Perturbations of the Dirac operator at a base point in normal coordinates.

Every pointwise quantity (connection, endomorphism, curvature) is computed
at x0 where the Christoffel symbols and the spin connection vanish.  The
first derivatives of those gauge fields do not vanish; they are carried as
opaque symbols (``dsig[s,t]`` for sum_i d_i sigma_i and ``dGamma`` for
sum_i d_i Gamma^i) until the normal-form extraction cancels them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .clifford import Multivector, gen, grade_project, mv_sum, scalar_mv, spinor_dim, spinor_trace
from .ring import I, DomainError, ScalarPoly, const, formal_derive, substitute, symbol

__all__ = [
    "KINDS",
    "PerturbationSpec",
    "GaugeContext",
    "build_psi",
    "nabla_psi",
    "twisted_connection",
    "normal_form_endomorphism",
    "endomorphism_E",
    "endomorphism_E_product",
    "endomorphism_E_conformal",
    "conformal_E",
    "curvature_Omega",
    "trace_Omega_sq",
    "spin_curvature",
    "psi_norm_sq",
    "delta_psi_sq",
    "two_form_quartic",
    "riemann_sq",
    "ricci_contraction",
    "scalar_from_riemann",
    "c_d_eta",
]

KINDS = (
    "scalar-f",
    "one-form",
    "one-form-i-c-eta",
    "two-form",
    "general-multivector",
)


@dataclass(frozen=True)
class PerturbationSpec:
    """Which form perturbs D, and how its coefficients are given.

    ``blades`` lists the monomials of a general multivector; its coefficient
    on blade ``b`` is the symbol ``p[b]``.  In numeric mode ``values`` maps
    ``'f'``, ``('b', k)`` or ``('a', k, l)`` to constant rationals.
    ``imaginary`` multiplies the whole form by the imaginary unit.
    """

    kind: str
    mode: str = "symbolic"
    values: Mapping = field(default_factory=dict)
    blades: tuple[tuple[int, ...], ...] = ()
    imaginary: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown perturbation kind {self.kind!r}")
        if self.mode not in ("symbolic", "numeric"):
            raise DomainError(f"unknown coefficient mode {self.mode!r}")
        if self.kind == "two-form" and self.mode == "numeric":
            for key, v in self.values.items():
                _, k, l = key
                other = self.values.get(("a", l, k))
                if other is not None and other != -v:
                    raise DomainError("two-form coefficients must be antisymmetric")


@dataclass(frozen=True)
class GaugeContext:
    """Dimension and the normal-coordinate gauge at the base point."""

    n: int = 4
    normal_coordinates: bool = True

    def __post_init__(self):
        if self.n % 2 or not 2 <= self.n <= 8:
            raise DomainError(f"dimension must be even in [2, 8], got {self.n}")
        if not self.normal_coordinates:
            raise DomainError("only the normal-coordinate gauge at x0 is supported")

    @property
    def d(self) -> int:
        return spinor_dim(self.n)

    def c(self, i: int) -> Multivector:
        return gen(self.n, i)

    def one(self) -> Multivector:
        return scalar_mv(self.n, 1)


S = symbol("s")


def _numeric_substitution(spec: PerturbationSpec):
    vals = {}
    for key, v in spec.values.items():
        if isinstance(key, str):
            vals[(key, ())] = Fraction(v)
        else:
            vals[(key[0], tuple(key[1:]))] = Fraction(v)

    def repl(sym):
        key = (sym.family, sym.indices)
        if key in vals:
            return const(vals[key])
        if sym.family == "a" and (sym.family, sym.indices[::-1]) in vals:
            return const(-vals[(sym.family, sym.indices[::-1])])
        if sym.family in ("f", "b", "a", "p"):
            return const(0)
        return None

    return repl


def build_psi(spec: PerturbationSpec, ctx: GaugeContext) -> Multivector:
    """Clifford representative of the perturbing form."""
    n, c = ctx.n, ctx.c
    if spec.kind == "scalar-f":
        psi = scalar_mv(n, symbol("f"))
    elif spec.kind in ("one-form", "one-form-i-c-eta"):
        psi = mv_sum(n, (c(k) * symbol("b", k) for k in range(1, n + 1)))
        if spec.kind == "one-form-i-c-eta":
            psi = psi * I
    elif spec.kind == "two-form":
        psi = mv_sum(
            n,
            (c(k) * c(l) * symbol("a", k, l) for k in range(1, n + 1) for l in range(1, n + 1) if k != l),
        )
    else:
        terms = {}
        for b in spec.blades:
            b = tuple(b)
            if len(b) > n or any(not 1 <= i <= n for i in b) or list(b) != sorted(set(b)):
                raise DomainError(f"blade {b} not a grade-{len(b)} monomial of Cl({n})")
            terms[b] = symbol("p", *b)
        psi = Multivector(n, terms)
    if spec.imaginary:
        psi = psi * I
    if spec.mode == "numeric":
        repl = _numeric_substitution(spec)
        psi = psi.map_coefficients(lambda p: substitute(p, repl))
    return psi


def nabla_psi(psi: Multivector, j: int) -> Multivector:
    """Spin covariant derivative of the form at x0: derivative of coefficients."""
    return psi.map_coefficients(lambda p: formal_derive(p, j))


def twisted_connection(psi: Multivector, ctx: GaugeContext, i: int) -> Multivector:
    """The form-dependent part -(c_i Psi + Psi c_i)/2 of the connection."""
    ci = ctx.c(i)
    return (ci * psi + psi * ci) * Fraction(-1, 2)


def _gauge_symbols(ctx: GaugeContext) -> tuple[Multivector, Multivector]:
    n = ctx.n
    dsig = mv_sum(
        n,
        (ctx.c(s) * ctx.c(t) * symbol("dsig", s, t) for s in range(1, n + 1) for t in range(1, n + 1) if s != t),
    )
    dgam = scalar_mv(n, symbol("dGamma"))
    return dsig, dgam


def normal_form_endomorphism(
    first_order: Sequence[Multivector],
    first_order_div: Multivector,
    zeroth_order: Multivector,
    ctx: GaugeContext,
) -> Multivector:
    """E of P = -(g^ij d_i d_j + A^i d_i + B) at x0.

    ``first_order`` holds A^i(x0), ``first_order_div`` is sum_i d_i A^i at x0
    and ``zeroth_order`` is B(x0).  With g = delta and Gamma = 0 at x0,
    omega_i = (A^i + Gamma^i)/2 and E = B - sum_i (d_i omega_i + omega_i^2).
    """
    _, dgam = _gauge_symbols(ctx)
    div_omega = (first_order_div + dgam) * Fraction(1, 2)
    quad = mv_sum(ctx.n, (a * a for a in first_order)) * Fraction(1, 4)
    E = zeroth_order - div_omega - quad
    leftover = {s.family for p in E.terms.values() for s in p.symbols()} & {"dsig", "dGamma"}
    if leftover:
        raise DomainError(f"gauge terms {sorted(leftover)} survived the normal-form extraction")
    return E


def endomorphism_E(spec: PerturbationSpec, ctx: GaugeContext) -> Multivector:
    """E for D_Psi^2 = (D + Psi)^2."""
    n, c = ctx.n, ctx.c
    psi = build_psi(spec, ctx)
    dsig, dgam = _gauge_symbols(ctx)
    anti = [c(j) * psi + psi * c(j) for j in range(1, n + 1)]
    first = [-a for a in anti]
    nab = [nabla_psi(psi, j) for j in range(1, n + 1)]
    div = dsig * 2 - dgam - mv_sum(n, (c(j) * nab[j - 1] + nab[j - 1] * c(j) for j in range(1, n + 1)))
    zeroth = dsig - mv_sum(n, (c(j) * nab[j - 1] for j in range(1, n + 1))) - scalar_mv(n, S / 4) - psi * psi
    return normal_form_endomorphism(first, div, zeroth, ctx)


def endomorphism_E_product(spec: PerturbationSpec, ctx: GaugeContext) -> Multivector:
    """E for the product operator D_Psi D."""
    n, c = ctx.n, ctx.c
    psi = build_psi(spec, ctx)
    dsig, dgam = _gauge_symbols(ctx)
    first = [-(psi * c(j)) for j in range(1, n + 1)]
    div = dsig * 2 - dgam - mv_sum(n, (nabla_psi(psi, j) * c(j) for j in range(1, n + 1)))
    zeroth = dsig - scalar_mv(n, S / 4)
    return normal_form_endomorphism(first, div, zeroth, ctx)


def _conformal_pieces(ctx: GaugeContext):
    n, c = ctx.n, ctx.c
    ginv = symbol("g") ** -1
    cdg = mv_sum(n, (c(k) * symbol("g", derivs=(k,)) for k in range(1, n + 1)))
    w = cdg * ginv  # g^{-1} c(dg)
    return w


def conformal_E(ctx: GaugeContext) -> Multivector:
    """E for D^2 - g^{-1} c(dg) D with g an invertible function."""
    n, c = ctx.n, ctx.c
    w = _conformal_pieces(ctx)
    dsig, dgam = _gauge_symbols(ctx)
    first = [w * c(j) for j in range(1, n + 1)]
    div = dsig * 2 - dgam + mv_sum(n, (nabla_psi(w, j) * c(j) for j in range(1, n + 1)))
    zeroth = dsig - scalar_mv(n, S / 4)
    return normal_form_endomorphism(first, div, zeroth, ctx)


def endomorphism_E_conformal(ctx: GaugeContext) -> ScalarPoly:
    """Tr[s/6 + E] for D^2 - g^{-1} c(dg) D."""
    E = conformal_E(ctx)
    return spinor_trace(E + scalar_mv(ctx.n, S / 6))


def c_d_eta(ctx: GaugeContext) -> Multivector:
    """c(d eta) for eta = b_k e^k, i.e. sum_{j != k} e_j(b_k) c(e_j) c(e_k)."""
    n, c = ctx.n, ctx.c
    return mv_sum(
        n,
        (c(j) * c(k) * symbol("b", k, derivs=(j,)) for j in range(1, n + 1) for k in range(1, n + 1) if j != k),
    )


def spin_curvature(ctx: GaugeContext, i: int, j: int) -> Multivector:
    n, c = ctx.n, ctx.c
    return mv_sum(
        n,
        (c(s) * c(t) * symbol("R", i, j, s, t) for s in range(1, n + 1) for t in range(1, n + 1) if s != t),
    ) * Fraction(-1, 4)


def curvature_Omega(
    spec: PerturbationSpec, ctx: GaugeContext, form: str | None = None
) -> dict[tuple[int, int], Multivector]:
    """Curvature of the twisted connection on every frame pair (i, j).

    ``form='derived'`` differentiates the connection of D_Psi^2:
    R^S + e_i(w_j) - e_j(w_i) + [w_i, w_j].  ``form='printed'`` is the
    two-form expression with quarter-weighted derivative terms and no
    quadratic part; it is the default for two-forms.
    """
    if spec.kind not in ("scalar-f", "two-form"):
        raise DomainError(f"curvature not implemented for {spec.kind}")
    if form is None:
        form = "printed" if spec.kind == "two-form" else "derived"
    n, c = ctx.n, ctx.c
    psi = build_psi(spec, ctx)
    nab = {j: nabla_psi(psi, j) for j in range(1, n + 1)}
    out = {}
    if form == "derived":
        w = {i: twisted_connection(psi, ctx, i) for i in range(1, n + 1)}
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                dwj = (c(j) * nab[i] + nab[i] * c(j)) * Fraction(-1, 2)
                dwi = (c(i) * nab[j] + nab[j] * c(i)) * Fraction(-1, 2)
                out[i, j] = spin_curvature(ctx, i, j) + dwj - dwi + w[i] * w[j] - w[j] * w[i]
    elif form == "printed":
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                out[i, j] = spin_curvature(ctx, i, j) + (
                    -(nab[i] * c(j)) - c(j) * nab[i] + nab[j] * c(i) + c(i) * nab[j]
                ) * Fraction(1, 4)
    else:
        raise DomainError(f"unknown curvature form {form!r}")
    return out


def trace_Omega_sq(spec: PerturbationSpec, ctx: GaugeContext, form: str | None = None) -> ScalarPoly:
    omega = curvature_Omega(spec, ctx, form)
    total = ScalarPoly()
    for w in omega.values():
        total = total + spinor_trace(w * w)
    return total


# invariants of the two-form a_kl e^k ^ e^l (full double sums)


def psi_norm_sq(n: int) -> ScalarPoly:
    return sum((symbol("a", k, l) ** 2 for k in range(1, n + 1) for l in range(1, n + 1)), ScalarPoly())


def delta_psi_sq(n: int) -> ScalarPoly:
    """|delta Psi|^2 = 4 sum_l (sum_k e_k(a_kl))^2."""
    out = ScalarPoly()
    for l in range(1, n + 1):
        div = sum((symbol("a", k, l, derivs=(k,)) for k in range(1, n + 1)), ScalarPoly())
        out = out + div * div
    return out * 4


def two_form_quartic(n: int) -> ScalarPoly:
    """sum a_kl a_{k1 l1} a_{k k1} a_{l l1}."""
    rng = range(1, n + 1)
    a = {(k, l): symbol("a", k, l) for k in rng for l in rng}
    out = ScalarPoly()
    for k in rng:
        for l in rng:
            for k1 in rng:
                for l1 in rng:
                    out = out + a[k, l] * a[k1, l1] * a[k, k1] * a[l, l1]
    return out


def riemann_sq(n: int) -> ScalarPoly:
    rng = range(1, n + 1)
    return sum(
        (symbol("R", i, j, s, t) ** 2 for i in rng for j in rng for s in rng for t in rng),
        ScalarPoly(),
    )


def ricci_contraction(n: int) -> ScalarPoly:
    """sum_{i,j,k,l} R_ijik R_ljlk, i.e. the squared Ricci contraction."""
    rng = range(1, n + 1)
    ric = {(j, k): sum((symbol("R", i, j, i, k) for i in rng), ScalarPoly()) for j in rng for k in rng}
    return sum((ric[j, k] * ric[j, k] for j in rng for k in rng), ScalarPoly())


def scalar_from_riemann(n: int) -> ScalarPoly:
    rng = range(1, n + 1)
    return sum((symbol("R", i, j, i, j) for i in rng for j in rng), ScalarPoly())
