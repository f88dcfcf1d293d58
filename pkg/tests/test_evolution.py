import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference
from gamowkit import (
    CausalityError,
    CompositeBasis,
    EnergyGrid,
    JordanKetCoeffs,
    NotHardyError,
    PoleSpec,
    Rational,
    ShapeError,
    StateOperator,
    WaveFunction,
    assemble_hamiltonian,
    build_W_G,
    build_W_n,
    build_W_PT,
    evolve_jordan_bra,
    evolve_jordan_ket,
    evolve_state_operator,
    evolve_W_PT,
    gamow_ket,
    ket_propagator,
    run_evolution,
    unitary_evolve,
)
from gamowkit.evolution import bra_propagator, ls_ket_action, semigroup_composition_check
from gamowkit.oracles import expm_series, two_sided_evolution

GAMMAS = [0.1, 1.0, 10.0]


def block_generator(p):
    return reference.jordan_generator(p.position, p.gamma, p.order)


class TestKet:
    def test_zeroth_order(self):
        p = PoleSpec(3.0, 0.4, 2)
        t = 1.7
        out = evolve_jordan_ket(JordanKetCoeffs(p, [1, 0]), t).coeffs
        np.testing.assert_allclose(out, [np.exp(-3j * t) * np.exp(-0.2 * t), 0], rtol=1e-15, atol=0)

    def test_identity_at_zero(self):
        p = PoleSpec(3.0, 0.4, 4)
        np.testing.assert_array_equal(ket_propagator(p, 0.0), np.eye(4))

    def test_two_by_two_example(self):
        p = PoleSpec(0.0, 1.0, 2)
        out = evolve_jordan_ket(JordanKetCoeffs(p, [0, 1]), 1.0).coeffs
        np.testing.assert_allclose(out, math.exp(-0.5) * np.array([-1j, 1]), rtol=1e-15)

    @pytest.mark.parametrize("r", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("gamma", GAMMAS)
    def test_closed_form_matches_scipy_expm(self, r, gamma):
        p = PoleSpec(2.5, gamma, r)
        for t in np.linspace(0, 10 / gamma, 7):
            ref = reference.expm(-1j * t * block_generator(p))
            assert np.linalg.norm(ket_propagator(p, t) - ref, 2) <= 1e-12 * max(1.0, np.linalg.norm(ref, 2))

    def test_package_oracle_matches_scipy(self, rng):
        a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        np.testing.assert_allclose(expm_series(a), reference.expm(a), rtol=1e-12, atol=1e-12)

    def test_bra_is_conjugate_path(self):
        p = PoleSpec(1.0, 0.6, 3)
        t = 0.9
        np.testing.assert_allclose(bra_propagator(p, t), ket_propagator(p, t).conj().T, rtol=1e-15)
        c = np.array([1, 2j, -1])
        out = evolve_jordan_bra(JordanKetCoeffs(p, c), t).coeffs
        np.testing.assert_allclose(out, c @ bra_propagator(p, t))

    def test_gamow_norm_decay(self):
        p = PoleSpec(4.0, 0.3)
        g = gamow_ket(p)
        for t in (0.0, 1.0, 7.0, 30.0):
            assert evolve_jordan_ket(g, t).norm() == pytest.approx(math.exp(-p.gamma * t / 2) * g.norm(), rel=1e-12)

    def test_underflow_flush(self):
        p = PoleSpec(0.0, 1.0, 2)
        assert np.all(ket_propagator(p, 800.0) == 0)
        rep = run_evolution(JordanKetCoeffs(p, [1, 1]), 800.0)
        assert rep.diagnostics["underflow"] and rep.output.norm() == 0


class TestSemigroup:
    @settings(max_examples=100, deadline=None)
    @given(
        t1=st.floats(0, 20),
        t2=st.floats(0, 20),
        r=st.integers(1, 5),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_composition(self, t1, t2, r, seed):
        rng = np.random.default_rng(seed)
        p = PoleSpec(rng.uniform(-5, 5), rng.uniform(0.1, 2.0), r)
        s = JordanKetCoeffs(p, rng.normal(size=r) + 1j * rng.normal(size=r))
        out = evolve_jordan_ket(s, t1 + t2)
        scale = out.norm() / s.norm()
        assert semigroup_composition_check(s, t1, t2) <= 1e-12 * max(1.0, scale)

    def test_trivial_and_deep(self):
        p = PoleSpec(1.0, 1.0, 3)
        s = JordanKetCoeffs(p, [1, -1j, 0.5])
        assert semigroup_composition_check(s, 0, 0) == 0
        assert semigroup_composition_check(s, 0.7, 1.3) <= 1e-12
        decayed = evolve_jordan_ket(s, 10.0).norm() / s.norm()
        assert semigroup_composition_check(s, 5.0, 5.0) <= 1e-12 * decayed

    @pytest.mark.parametrize(
        "call",
        [
            lambda p: ket_propagator(p, -1e-9),
            lambda p: bra_propagator(p, -1.0),
            lambda p: evolve_jordan_ket(gamow_ket(p), -1.0),
            lambda p: evolve_jordan_bra(gamow_ket(p), -1.0),
            lambda p: evolve_state_operator(build_W_PT(p), assemble_hamiltonian(build_W_PT(p).basis), -1.0),
            lambda p: evolve_W_PT(p, -0.5),
            lambda p: semigroup_composition_check(gamow_ket(p), -1.0, 1.0),
            lambda p: semigroup_composition_check(gamow_ket(p), 1.0, -1.0),
            lambda p: run_evolution(gamow_ket(p), -2.0),
            lambda p: run_evolution(build_W_PT(p), -2.0),
            lambda p: ls_ket_action(None, 0.0, -1.0),
            lambda p: ket_propagator(p, float("nan")),
        ],
    )
    def test_rejects_negative_time(self, call):
        with pytest.raises(CausalityError, match="t >= 0"):
            call(PoleSpec(1.0, 0.5, 2))


class TestOperators:
    @pytest.mark.parametrize("r", [1, 2, 3, 4, 5])
    def test_exponential_law(self, r):
        for gamma in GAMMAS:
            p = PoleSpec(1.0, gamma, r)
            ops = [build_W_n(p, n) for n in range(r)] + [build_W_PT(p)]
            H = assemble_hamiltonian(ops[0].basis)
            for t in np.linspace(0, 10 / gamma, 20):
                for w in ops:
                    out = evolve_state_operator(w, H, t).matrix
                    err = np.linalg.norm(out - math.exp(-gamma * t) * w.matrix) / np.linalg.norm(w.matrix)
                    assert err <= 1e-12

    def test_gamow_dyad(self):
        p = PoleSpec(2.0, 0.7)
        w = build_W_G(p)
        out = evolve_state_operator(w, assemble_hamiltonian(w.basis), 2.0)
        np.testing.assert_allclose(out.matrix, math.exp(-1.4) * w.matrix, rtol=1e-14)

    def test_wpt_half_life(self):
        p = PoleSpec(2.0, 0.7, 2)
        out = evolve_W_PT(p, math.log(2) / p.gamma).matrix
        np.testing.assert_allclose(out, 0.5 * build_W_PT(p).matrix, rtol=1e-12, atol=1e-12)

    def test_wpt_zero_time(self):
        p = PoleSpec(2.0, 0.7, 3)
        np.testing.assert_array_equal(evolve_W_PT(p, 0.0).matrix, build_W_PT(p).matrix)

    def test_negative_control(self):
        p = PoleSpec(0.0, 1.0, 2)
        basis = CompositeBasis((p,))
        dyad = np.diag([0, 1]).astype(complex)
        out = evolve_state_operator(StateOperator(basis, dyad), assemble_hamiltonian(basis), 1.0).matrix
        oracle = two_sided_evolution(block_generator(p), dyad, 1.0)
        np.testing.assert_allclose(out, oracle, atol=1e-14)
        rel = np.linalg.norm(out - math.exp(-1.0) * dyad) / (math.exp(-1.0) * np.linalg.norm(dyad))
        assert rel == pytest.approx(math.sqrt(3), rel=1e-12)

    def test_two_sided_oracle_scipy(self, rng):
        p = PoleSpec(0.5, 0.8, 4)
        basis = CompositeBasis((p,))
        w = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        out = evolve_state_operator(StateOperator(basis, w), assemble_hamiltonian(basis), 2.3).matrix
        u = reference.expm(-2.3j * block_generator(p))
        np.testing.assert_allclose(out, u @ w @ u.conj().T, atol=1e-12)

    def test_continuum_phases(self):
        grid = EnergyGrid(0.0, 2.0, 3)
        p = PoleSpec(1.0, 0.5)
        basis = CompositeBasis((p,), grid)
        w = np.ones((4, 4), dtype=complex)
        out = evolve_state_operator(StateOperator(basis, w), assemble_hamiltonian(basis), 1.0).matrix
        e = grid.energies
        np.testing.assert_allclose(out[1:, 1:], np.exp(-1j * (e[:, None] - e[None, :])), atol=1e-15)

    def test_basis_mismatch(self):
        w = build_W_PT(PoleSpec(0.0, 1.0, 2))
        H = assemble_hamiltonian(CompositeBasis((PoleSpec(0.0, 1.0, 3),)))
        with pytest.raises(ShapeError):
            evolve_state_operator(w, H, 1.0)


class TestUnitary:
    def test_identity(self, wide_grid, rng):
        f = WaveFunction(wide_grid, rng.normal(size=wide_grid.n) + 0j)
        np.testing.assert_array_equal(unitary_evolve(f, 0.0).samples, f.samples)

    @settings(max_examples=30, deadline=None)
    @given(t=st.floats(-50, 50), seed=st.integers(0, 1000))
    def test_reversible_and_norm(self, t, seed):
        rng = np.random.default_rng(seed)
        grid = EnergyGrid(-5.0, 5.0, 64)
        f = WaveFunction(grid, rng.normal(size=64) + 1j * rng.normal(size=64))
        back = unitary_evolve(unitary_evolve(f, t), -t)
        assert np.max(np.abs(back.samples - f.samples)) <= 1e-14 * np.max(np.abs(f.samples)) * 4
        assert unitary_evolve(f, t).norm() == pytest.approx(f.norm(), rel=1e-14)


class TestLippmannSchwinger:
    @pytest.fixture
    def psi(self):
        grid = EnergyGrid(-40.0, 40.0, 4096)
        z = 3 - 1j
        return WaveFunction.from_rational(grid, Rational([1.0], np.polynomial.polynomial.polyfromroots([z, z, z])))

    def test_zero_time(self, psi):
        assert ls_ket_action(psi, 3.0, 0.0) == pytest.approx(np.conj(psi.closed_form(3.0)), rel=1e-14)

    def test_phase(self, psi):
        assert ls_ket_action(psi, 3.0, 2.0) == pytest.approx(np.exp(-6j) * np.conj(psi.closed_form(3.0)), rel=1e-14)

    def test_requires_upper_hardy(self):
        grid = EnergyGrid(-40.0, 40.0, 4096)
        phi = WaveFunction.from_rational(grid, Rational.from_poles([1 + 1j], [1.0]))
        with pytest.raises(NotHardyError):
            ls_ket_action(phi, 0.0, 1.0)


class TestReport:
    def test_operator_report(self):
        p = PoleSpec(1.0, 0.5, 3)
        rep = run_evolution(build_W_PT(p), 2.0, oracle=True)
        assert rep.mode == "semigroup_operator"
        assert rep.diagnostics["residual"] <= 1e-12
        assert rep.diagnostics["norm_after"] == pytest.approx(math.exp(-1.0) * rep.diagnostics["norm_before"])
        assert len(rep.input_hash) == 64

    def test_ket_report(self):
        rep = run_evolution(JordanKetCoeffs(PoleSpec(1.0, 0.5, 2), [1, 1j]), 1.0, oracle=True)
        assert rep.mode == "semigroup_ket" and rep.diagnostics["residual"] <= 1e-12

    def test_unitary_report_any_time(self, wide_grid):
        f = WaveFunction(wide_grid, np.ones(wide_grid.n))
        rep = run_evolution(f, -3.0)
        assert rep.mode == "unitary" and "residual" not in rep.diagnostics
