from fractions import Fraction
from itertools import combinations

import pytest

from diracres.clifford import Multivector, gen, mv_sum, scalar_mv, spinor_trace
from diracres.perturbations import (
    GaugeContext,
    PerturbationSpec,
    build_psi,
    c_d_eta,
    curvature_Omega,
    endomorphism_E,
    endomorphism_E_product,
    nabla_psi,
    psi_norm_sq,
    riemann_sq,
    scalar_from_riemann,
    spin_curvature,
    trace_Omega_sq,
)
from diracres.ring import I, DomainError, const, substitute, symbol

S, F = symbol("s"), symbol("f")


def test_build_psi_examples():
    ctx = GaugeContext(4)
    assert build_psi(PerturbationSpec("scalar-f"), ctx) == scalar_mv(4, F)
    eta = build_psi(PerturbationSpec("one-form-i-c-eta"), ctx)
    assert eta == mv_sum(4, (gen(4, k) * symbol("b", k) for k in range(1, 5))) * I
    two = build_psi(PerturbationSpec("two-form"), ctx)
    assert two.terms[(1, 2)] == symbol("a", 1, 2) * 2


def test_bad_inputs():
    with pytest.raises(DomainError):
        GaugeContext(5)
    with pytest.raises(DomainError):
        PerturbationSpec("three-form")
    with pytest.raises(DomainError):
        build_psi(PerturbationSpec("general-multivector", blades=((2, 1),)), GaugeContext(4))
    with pytest.raises(DomainError):
        PerturbationSpec("two-form", mode="numeric", values={("a", 1, 2): 1, ("a", 2, 1): 1})


@pytest.mark.parametrize("n", [4, 6])
def test_E_examples(n):
    ctx = GaugeContext(n)
    assert endomorphism_E(PerturbationSpec("scalar-f"), ctx) == scalar_mv(n, -S / 4 + F * F * (n - 1))
    assert endomorphism_E(PerturbationSpec("one-form-i-c-eta"), ctx) == scalar_mv(n, -S / 4) - c_d_eta(ctx) * I
    trE = spinor_trace(endomorphism_E(PerturbationSpec("two-form"), ctx))
    assert trE == (-S / 4 + psi_norm_sq(n) * (6 - 2 * n)) * ctx.d


def _specialize(mv, table):
    def repl(sym):
        if sym.family == "p":
            return table.get(sym.indices, const(0))
        return None

    return mv.map_coefficients(lambda p: substitute(p, repl))


def test_general_specializes_to_each_kind():
    n = 4
    ctx = GaugeContext(n)
    blades = tuple(b for k in range(3) for b in combinations(range(1, n + 1), k))
    general = endomorphism_E(PerturbationSpec("general-multivector", blades=blades), ctx)
    scalar = {(): F}
    one = {(k,): symbol("b", k) * I for k in range(1, n + 1)}
    two = {(k, l): symbol("a", k, l) * 2 for k, l in combinations(range(1, n + 1), 2)}
    assert _specialize(general, scalar) == endomorphism_E(PerturbationSpec("scalar-f"), ctx)
    assert _specialize(general, one) == endomorphism_E(PerturbationSpec("one-form-i-c-eta"), ctx)
    assert _specialize(general, two) == endomorphism_E(PerturbationSpec("two-form"), ctx)


def test_product_E_examples():
    ctx = GaugeContext(4)
    zero = PerturbationSpec("one-form", mode="numeric", values={})
    assert endomorphism_E_product(zero, ctx) == scalar_mv(4, -S / 4)
    spec = PerturbationSpec("one-form")
    psi = build_psi(spec, ctx)
    nab = mv_sum(4, (nabla_psi(psi, i) * gen(4, i) for i in range(1, 5)))
    div = sum((symbol("b", k, derivs=(k,)) for k in range(1, 5)), const(0))
    assert spinor_trace(nab * Fraction(1, 2)) == div * -2
    quad = mv_sum(4, (psi * gen(4, i) * psi * gen(4, i) for i in range(1, 5))) * Fraction(-1, 4)
    bsq = sum((symbol("b", k) ** 2 for k in range(1, 5)), const(0))
    # -(d/4)(2 - n) sum b_k^2 at n = d = 4
    assert spinor_trace(quad) == bsq * 2


def test_scalar_curvature_example():
    ctx = GaugeContext(4)
    om = curvature_Omega(PerturbationSpec("scalar-f"), ctx)
    want = spin_curvature(ctx, 1, 2) - gen(4, 2) * symbol("f", derivs=(1,)) + gen(4, 1) * symbol("f", derivs=(2,))
    want = want + gen(4, 1) * gen(4, 2) * (F * F * 2)
    assert om[1, 2] == want
    flat = PerturbationSpec("scalar-f", mode="numeric", values={"f": 0})
    om0 = curvature_Omega(flat, ctx)
    assert all(om0[i, j] == spin_curvature(ctx, i, j) for (i, j) in om0)
    assert trace_Omega_sq(flat, ctx) == riemann_sq(4) * Fraction(-4, 8)


def test_two_form_cross_terms_vanish():
    # curvature x derivative cross terms have odd grade and drop out of the trace
    ctx = GaugeContext(4)
    tr = trace_Omega_sq(PerturbationSpec("two-form"), ctx, "printed")
    for m in tr.terms:
        fams = {sym.family for sym, _ in m}
        assert not ("R" in fams and "a" in fams)


def test_antisymmetry_relabeling():
    # writing Psi with a_lk = -a_kl everywhere gives the same E
    ctx = GaugeContext(4)
    E = endomorphism_E(PerturbationSpec("two-form"), ctx)

    def swap(sym):
        if sym.family == "a":
            return -symbol("a", sym.indices[1], sym.indices[0])
        return None

    assert E.map_coefficients(lambda p: substitute(p, swap)) == E


def test_scalar_from_riemann_counts_each_pair_twice():
    s = scalar_from_riemann(4)
    assert len(s.terms) == 6 and all(c == 2 for c in s.terms.values())
