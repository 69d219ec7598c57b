import math
from fractions import Fraction

import pytest

from diracres import checks
from diracres.clifford import scalar_mv, spinor_trace
from diracres.heat import (
    CapabilityError,
    CutoffMoments,
    HeatCoefficients,
    assemble_heat_coefficients,
    fit_half_dimension_linear,
    heat_normalization,
    spectral_action_expansion,
    wres_bracket,
    wres_conformal,
    wres_interior,
    wres_normalization,
    wres_product_interior,
)
from diracres.perturbations import GaugeContext, PerturbationSpec, build_psi, endomorphism_E, psi_norm_sq
from diracres.ring import PI, DomainError, const, evaluate, symbol

S, F = symbol("s"), symbol("f")


@pytest.mark.parametrize("n", [4, 6, 8])
def test_a2_scalar(n):
    hc = assemble_heat_coefficients(PerturbationSpec("scalar-f"), GaugeContext(n), with_a4=False)
    d = 2 ** (n // 2)
    assert hc.a0 == heat_normalization(n) * d
    assert hc.a2 == heat_normalization(n) * d * (-S / 12 + F * F * (n - 1))
    assert hc.a4 is None


def test_a2_two_form():
    hc = assemble_heat_coefficients(PerturbationSpec("two-form"), GaugeContext(4), with_a4=False)
    assert hc.a2 == -(PI**-2) * Fraction(1, 4) * (S / 12 + psi_norm_sq(4) * 2)


def test_heat_normalization_value():
    assert evaluate(heat_normalization(4), {}) == pytest.approx(1 / (16 * math.pi**2))


@pytest.mark.parametrize("n", [4, 6])
def test_a4_scalar_reconciles_with_negative_dictionary(n):
    out = checks.chk_a4_scalar((n,))
    assert out.status == checks.MATCH
    assert "fails" not in out.candidates["R_ijij = -s"]


def test_a4_scalar_quartic_coefficient():
    # only Tr E^2 and Tr Omega^2 carry f^4
    n = 4
    hc = assemble_heat_coefficients(PerturbationSpec("scalar-f"), GaugeContext(n))
    f4 = [c for m, c in hc.a4.terms.items() if any(sym.family == "f" and not sym.derivs and e == 4 for sym, e in m)]
    want = heat_normalization(n) * 4 * Fraction(60 * (n - 1) * (n - 3), 360)
    assert len(f4) == len(want.terms) == 1
    assert f4[0] == next(iter(want.terms.values()))


def test_a4_capability_error():
    with pytest.raises(CapabilityError):
        assemble_heat_coefficients(PerturbationSpec("one-form"), GaugeContext(4))


def test_wres_examples():
    d4, _ = wres_interior(PerturbationSpec("scalar-f"), GaugeContext(4))
    assert d4 == PI**2 * 4 * 4 * (-S / 12 + F * F * 3)
    one, statement = wres_interior(PerturbationSpec("one-form-i-c-eta"), GaugeContext(4))
    assert one == PI**2 * 4 * 4 * (-S / 12)
    assert "b" not in {sym.family for m in one.terms for sym, _ in m}
    assert statement.startswith("Wres(D_Psi^(-2))")


def test_wres_two_form_n6():
    ctx = GaugeContext(6)
    dens, _ = wres_interior(PerturbationSpec("two-form"), ctx)
    # oracle: the trace of E for a two-form at n = 6 computed on its own
    trE = spinor_trace(endomorphism_E(PerturbationSpec("two-form"), ctx))
    assert dens == PI**3 * 8 * (trE + S * Fraction(8, 6))
    assert dens == PI**3 * 8 * 8 * (-S / 12 + psi_norm_sq(6) * (6 - 12))


def test_wres_domain_error():
    with pytest.raises(DomainError):
        wres_normalization(2)
    with pytest.raises(DomainError):
        wres_interior(PerturbationSpec("scalar-f"), GaugeContext(2))


@pytest.mark.parametrize("kind", ["scalar-f", "one-form-i-c-eta", "two-form"])
@pytest.mark.parametrize("n", [4, 6])
def test_wres_matches_bracket_and_a2(kind, n):
    ctx = GaugeContext(n)
    spec = PerturbationSpec(kind)
    dens, _ = wres_interior(spec, ctx)
    bracket = spinor_trace(wres_bracket(build_psi(spec, ctx), n))
    assert dens == wres_normalization(n) * bracket
    a2 = assemble_heat_coefficients(spec, ctx, with_a4=False).a2
    assert dens * heat_normalization(n) == a2 * wres_normalization(n)


def test_product_residue():
    zero = PerturbationSpec("one-form", mode="numeric", values={})
    assert wres_product_interior(zero, GaugeContext(4)) == -(PI**2) * Fraction(16, 12) * S
    with pytest.raises(DomainError):
        wres_product_interior(zero, GaugeContext(6))


def test_conformal_residue():
    out = wres_conformal(GaugeContext(4), exponential=True)
    ones = {"f": 1, "g": 1}
    pointwise = out["pointwise"]
    flat = sum(
        (const(c) * _drop(m, ones) for m, c in pointwise.terms.items() if not _has_derivative(m)),
        const(0),
    )
    assert flat == -(PI**2) * 4 * S / 3
    lap_g = sum((symbol("g", derivs=(j, j)) for j in range(1, 5)), const(0))
    assert pointwise == -(PI**2) * 4 * (F * symbol("g") * S / 3 - F * lap_g * 2)
    df_dg = sum((symbol("f", derivs=(j,)) * symbol("g", derivs=(j,)) for j in range(1, 5)), const(0))
    assert out["integrated"] == -(PI**2) * 4 * (F * symbol("g") * S / 3 + df_dg * 2)
    fams = {sym.family for m in out["exponential"].terms for sym, _ in m}
    assert "expm2h" in fams and not fams & {"f", "g"}


def _has_derivative(m):
    return any(sym.derivs for sym, _ in m)


def _drop(m, ones):
    from diracres.ring import ScalarPoly

    kept = tuple((sym, e) for sym, e in m if sym.family not in ones)
    return ScalarPoly({kept: Fraction(1)})


def test_spectral_action():
    hc = HeatCoefficients(n=4, a0=const(3), a2=const(0), a4=const(0))
    out = spectral_action_expansion(hc)
    assert out[4] == CutoffMoments().F4 * 3
    assert out[2].is_zero() and out[0].is_zero()
    with pytest.raises(DomainError):
        spectral_action_expansion(HeatCoefficients(n=6, a0=const(1), a2=const(0)))


def test_half_dimension_fit():
    samples = {}
    for n in (4, 6, 8):
        psi = build_psi(PerturbationSpec("scalar-f"), GaugeContext(n))
        samples[n] = spinor_trace(wres_bracket(psi, n)) * Fraction(1, 2 ** (n // 2))
    A, B = fit_half_dimension_linear(samples)
    # -s/12 + (n - 1) f^2 = (-s/12 + f^2) + 2 (n/2 - 1) f^2
    assert A == -S / 12 + F * F
    assert B == F * F * 2
    with pytest.raises(DomainError):
        fit_half_dimension_linear({4: const(0), 6: const(1), 8: const(5)})


def test_scalar_mv_trace_is_d_times_scalar():
    assert spinor_trace(scalar_mv(6, S)) == S * 8
