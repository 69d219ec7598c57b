"""Seeley-deWitt densities, residue densities and the spectral-action expansion.

Densities are :class:`ScalarPoly` values in which ``pi`` is a formal symbol,
so normalisations such as (4 pi)^(-n/2) stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .clifford import Multivector, mv_sum, scalar_mv, spinor_trace
from .perturbations import (
    GaugeContext,
    PerturbationSpec,
    conformal_E,
    curvature_Omega,
    endomorphism_E,
    endomorphism_E_product,
    ricci_contraction,
    riemann_sq,
    scalar_from_riemann,
)
from .ring import PI, DomainError, IndexedSymbol, ScalarPoly, laplacian, substitute, symbol

__all__ = [
    "HeatCoefficients",
    "CutoffMoments",
    "heat_normalization",
    "wres_normalization",
    "assemble_heat_coefficients",
    "a4_bracket",
    "wres_interior",
    "wres_bracket",
    "wres_product_interior",
    "wres_conformal",
    "spectral_action_expansion",
    "apply_curvature_dictionary",
    "CapabilityError",
    "fit_half_dimension_linear",
]

S = symbol("s")


class CapabilityError(DomainError):
    """Raised for perturbation kinds the a4 assembly does not cover."""


def heat_normalization(n: int) -> ScalarPoly:
    """(4 pi)^(-n/2)."""
    return PI ** (-(n // 2)) * Fraction(1, 4 ** (n // 2))


def wres_normalization(n: int) -> ScalarPoly:
    """(2 pi)^(n/2) / (n/2 - 2)!."""
    if n // 2 - 2 < 0:
        raise DomainError(f"residue formula needs n >= 4, got n={n}")
    return PI ** (n // 2) * Fraction(2 ** (n // 2), math.factorial(n // 2 - 2))


def apply_curvature_dictionary(p: ScalarPoly, n: int, sign: int) -> ScalarPoly:
    """Rewrite the scalar curvature as ``sign * sum_ij R_ijij``."""
    scal = scalar_from_riemann(n) * sign

    def repl(sym: IndexedSymbol):
        return scal if sym.family == "s" else None

    return substitute(p, repl)


@dataclass(frozen=True)
class CutoffMoments:
    F4: ScalarPoly = field(default_factory=lambda: symbol("F4"))
    F2: ScalarPoly = field(default_factory=lambda: symbol("F2"))
    F0: ScalarPoly = field(default_factory=lambda: symbol("F0"))


@dataclass
class HeatCoefficients:
    """Pointwise densities of a0, a2 and a4 for D_Psi^2.

    ``a4`` is ``None`` when only a0/a2 were requested.  The scalar curvature
    in ``a4`` has been rewritten through the curvature dictionary recorded
    in ``curvature_sign``.
    """

    n: int
    a0: ScalarPoly
    a2: ScalarPoly
    a4: ScalarPoly | None = None
    curvature_sign: int = -1


def _sum_second(p: ScalarPoly, n: int, formal: bool) -> ScalarPoly:
    # sum_k e_k e_k (p) == -Laplacian(p)
    return -laplacian(p, n, formal=formal)


def a4_bracket(
    spec: PerturbationSpec,
    ctx: GaugeContext,
    curvature_sign: int = -1,
    formal_laplacians: bool = False,
    omega_form: str | None = None,
) -> ScalarPoly:
    """Tr of the eight-term a4 integrand (without the (4 pi)^(-n/2)/360)."""
    if spec.kind not in ("scalar-f", "two-form"):
        raise CapabilityError(f"a4 not implemented for {spec.kind}")
    n, d = ctx.n, ctx.d
    E = endomorphism_E(spec, ctx)
    E = E.map_coefficients(lambda p: apply_curvature_dictionary(p, n, curvature_sign))
    scal_R = scalar_from_riemann(n)  # sum_ij R_ijij
    trE = spinor_trace(E)
    out = _sum_second(scal_R, n, formal_laplacians) * (-12 * d)
    out = out + scal_R * scal_R * (5 * d)
    out = out - ricci_contraction(n) * (2 * d)
    out = out + riemann_sq(n) * (2 * d)
    out = out - scal_R * trE * 60
    out = out + spinor_trace(E * E) * 180
    out = out + _sum_second(trE, n, formal_laplacians) * 60
    omega = curvature_Omega(spec, ctx, omega_form)
    tr_omega = ScalarPoly()
    for w in omega.values():
        tr_omega = tr_omega + spinor_trace(w * w)
    out = out + tr_omega * 30
    return out


def assemble_heat_coefficients(
    spec: PerturbationSpec,
    ctx: GaugeContext,
    with_a4: bool = True,
    curvature_sign: int = -1,
    formal_laplacians: bool = False,
) -> HeatCoefficients:
    n = ctx.n
    norm = heat_normalization(n)
    E = endomorphism_E(spec, ctx)
    a0 = norm * ctx.d
    a2 = norm * spinor_trace(E + scalar_mv(n, S / 6))
    a4 = None
    if with_a4:
        a4 = norm * a4_bracket(spec, ctx, curvature_sign, formal_laplacians) * Fraction(1, 360)
    return HeatCoefficients(n=n, a0=a0, a2=a2, a4=a4, curvature_sign=curvature_sign)


def wres_bracket(psi: Multivector, n: int) -> Multivector:
    """-s/12 - (1/2) Psi c_i Psi c_i + (n/2 - 1) Psi^2."""
    from .clifford import gen

    ps = mv_sum(n, (psi * gen(n, i) * psi * gen(n, i) for i in range(1, n + 1)))
    return scalar_mv(n, S * Fraction(-1, 12)) - ps * Fraction(1, 2) + psi * psi * Fraction(n // 2 - 1)


def wres_interior(spec: PerturbationSpec, ctx: GaugeContext) -> tuple[ScalarPoly, str]:
    """Residue density of D_Psi^(-n+2) and a one-line statement of it."""
    n = ctx.n
    norm = wres_normalization(n)
    E = endomorphism_E(spec, ctx)
    density = norm * spinor_trace(E + scalar_mv(n, S / 6))
    statement = f"Wres(D_Psi^({2 - n})) = integral over M of [{density}] dvol   (n={n}, d={ctx.d}, {spec.kind})"
    return density, statement


def wres_product_interior(spec: PerturbationSpec, ctx: GaugeContext) -> ScalarPoly:
    """Residue density of (D_Psi D)^(-1) in dimension four."""
    if ctx.n != 4:
        raise DomainError("the product residue is stated for n = 4")
    E = endomorphism_E_product(spec, ctx)
    return wres_normalization(4) * spinor_trace(E + scalar_mv(4, S / 6))


def _integrate_by_parts(p: ScalarPoly, n: int) -> ScalarPoly:
    # f * D[j,j]g  ->  -D[j]f * D[j]g   (boundary terms dropped)
    f = IndexedSymbol("f")
    out = ScalarPoly()
    for m, c in p.terms.items():
        d = dict(m)
        hit = None
        for sym, e in m:
            if sym.family == "g" and len(sym.derivs) == 2 and sym.derivs[0] == sym.derivs[1] and e == 1:
                hit = sym
        if hit is not None and d.get(f, 0) == 1:
            j = hit.derivs[0]
            del d[hit]
            del d[f]
            rest = ScalarPoly({tuple(sorted(d.items())): c})
            out = out - rest * symbol("f", derivs=(j,)) * symbol("g", derivs=(j,))
        else:
            out = out + ScalarPoly({m: c})
    return out


def wres_conformal(ctx: GaugeContext, exponential: bool = False) -> dict[str, ScalarPoly]:
    """Density of Wres[f D^-1 g D^-1] in dimension four.

    Returns the pointwise form ``fg * 4 pi^2 Tr[s/6 + E]`` and the form after
    moving one derivative from g onto f.  With ``exponential`` both f and g
    are replaced by e^(-2h).
    """
    if ctx.n != 4:
        raise DomainError("the conformal residue is stated for n = 4")
    E = conformal_E(ctx)
    tr = spinor_trace(E + scalar_mv(4, S / 6))
    pointwise = wres_normalization(4) * symbol("f") * symbol("g") * tr
    integrated = _integrate_by_parts(pointwise, 4)
    out = {"pointwise": pointwise, "integrated": integrated}
    if exponential:
        w = symbol("expm2h")

        def repl(sym):
            return w if sym.family in ("f", "g") else None

        out["exponential"] = substitute(pointwise, repl)
    return out


def spectral_action_expansion(coeffs: HeatCoefficients, moments: CutoffMoments | None = None) -> dict[int, ScalarPoly]:
    """Lambda-power -> coefficient of Tr F(D^2/Lambda^2) in dimension four."""
    if coeffs.n != 4:
        raise DomainError("the three-term expansion is stated for n = 4")
    moments = moments or CutoffMoments()
    out = {4: moments.F4 * coeffs.a0, 2: moments.F2 * coeffs.a2}
    out[0] = moments.F0 * coeffs.a4 if coeffs.a4 is not None else ScalarPoly()
    return {k: v for k, v in out.items()}


def fit_half_dimension_linear(samples: dict[int, ScalarPoly]) -> tuple[ScalarPoly, ScalarPoly]:
    """Fit ``value(n) = A + B*(n/2 - 1)`` exactly through the samples.

    Uses the two smallest dimensions and checks every remaining sample;
    raises ``DomainError`` when the data are not linear in n/2 - 1.
    """
    if len(samples) < 2:
        raise DomainError("need at least two dimensions to fit")
    dims = sorted(samples)
    n0, n1 = dims[:2]
    m0, m1 = n0 // 2 - 1, n1 // 2 - 1
    B = (samples[n1] - samples[n0]) * Fraction(1, m1 - m0)
    A = samples[n0] - B * m0
    for nn in dims[2:]:
        if samples[nn] != A + B * (nn // 2 - 1):
            raise DomainError(f"sample at n={nn} is off the linear fit")
    return A, B
