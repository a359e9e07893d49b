import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fcslab.errors import DomainError, ValidationError
from fcslab.linalg import expm_hermitian
from fcslab.modular import (
    Superoperator,
    araki_vector,
    araki_vector_perturbative,
    cocycle,
    cocycle_unitary,
    commutant_image,
    eta_vector,
    evolved_eta,
    hs_norm,
    inner,
    left_action,
    modular_conjugation,
    omega0_vector,
    omega_hat,
    omega_vector,
    relative_modular_operator,
    relative_modular_power,
    right_action,
    standard_liouvillean,
    state_from_vector,
)


def rand_c(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


seeds = st.integers(0, 2**32 - 1)


class TestSuperoperator:
    def test_left_identity(self, rng):
        x = rand_c(rng, 3)
        assert np.allclose(left_action(np.eye(3))(x), x)

    def test_left_action_matches_product(self, rng):
        a, x = rand_c(rng, 4), rand_c(rng, 4)
        assert np.allclose(left_action(a)(x), a @ x)

    def test_left_action_rejects_nonsquare(self):
        with pytest.raises(ValidationError):
            left_action(np.zeros((2, 3)))

    def test_dimension_mismatch_on_apply(self):
        with pytest.raises(ValidationError):
            left_action(np.eye(2))(np.eye(3))

    def test_omega_from_eta(self, q1r3):
        a = np.kron(oracles.sqrtm_psd(q1r3.rho_S.matrix), np.eye(q1r3.d_R))
        assert np.allclose(left_action(a)(eta_vector(q1r3)), omega_vector(q1r3), atol=1e-12)

    @given(seed=seeds)
    def test_multiplicative_and_dense(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c, x = (rand_c(rng, 3) for _ in range(4))
        assert np.allclose((left_action(a) @ left_action(b))(x), left_action(a @ b)(x))
        op = left_action(a) @ right_action(b) + 2.0 * commutant_image(c) - left_action(b)
        assert np.allclose(op.apply_dense(x), op(x), atol=1e-10)
        # Hilbert-Schmidt adjoint
        y = rand_c(rng, 3)
        assert np.isclose(inner(y, op(x)), inner(op.adjoint()(y), x))

    @given(seed=seeds)
    def test_unitary_sandwich_preserves_norm(self, seed):
        rng = np.random.default_rng(seed)
        h1, h2, x = rand_c(rng, 4), rand_c(rng, 4), rand_c(rng, 4)
        u1 = expm_hermitian(h1 + h1.conj().T, 1j)
        u2 = expm_hermitian(h2 + h2.conj().T, 1j)
        assert np.isclose(hs_norm(Superoperator.sandwich(u1, u2)(x)), hs_norm(x), rtol=1e-10)

    def test_dense_is_computed_once_under_concurrency(self, rng):
        op = left_action(rand_c(rng, 5))
        seen = []
        threads = [threading.Thread(target=lambda: seen.append(op.dense())) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(s is seen[0] for s in seen)


class TestModularConjugation:
    def test_hermitian_fixed(self):
        x = np.array([[1, 2 - 1j], [2 + 1j, 0]])
        assert np.allclose(modular_conjugation(x), x)

    def test_antilinear(self):
        assert np.allclose(modular_conjugation(1j * np.eye(2)), -1j * np.eye(2))

    @given(seed=seeds)
    def test_involution_and_adjoint(self, seed):
        rng = np.random.default_rng(seed)
        x = rand_c(rng, 3)
        assert np.allclose(modular_conjugation(x), x.conj().T)
        assert np.allclose(modular_conjugation(modular_conjugation(x)), x)
        c = complex(*rng.normal(size=2))
        assert np.allclose(modular_conjugation(c * x), np.conj(c) * modular_conjugation(x))

    def test_positive_cone_preserved(self, rng):
        z = rand_c(rng, 3)
        x = z @ z.conj().T
        assert np.linalg.eigvalsh(modular_conjugation(x)).min() >= -1e-12

    @given(seed=seeds)
    def test_commutant(self, seed):
        rng = np.random.default_rng(seed)
        a, b, x = rand_c(rng, 4), rand_c(rng, 4), rand_c(rng, 4)
        j_pi_j = commutant_image(a)
        # J pi(A) J X computed literally
        assert np.allclose(j_pi_j(x), modular_conjugation(a @ modular_conjugation(x)))
        lhs = (j_pi_j @ left_action(b))(x)
        rhs = (left_action(b) @ j_pi_j)(x)
        assert np.max(np.abs(lhs - rhs)) < 1e-10 * max(1, np.abs(lhs).max())


class TestRelativeModular:
    def test_eta_fixes_its_vector(self, q1r3):
        eta = q1r3.eta.matrix
        for alpha in (0.3, 1.0, 0.5 + 2j):
            out = relative_modular_power(eta, eta, alpha, eta_vector(q1r3))
            assert np.allclose(out, eta_vector(q1r3), atol=1e-12)

    def test_modular_flow_is_norm_preserving(self, q1r3, rng):
        x = rand_c(rng, 16)
        out = relative_modular_power(q1r3.eta.matrix, q1r3.eta.matrix, 0.8j, x)
        assert np.isclose(hs_norm(out), hs_norm(x))

    def test_scalar_power(self):
        out = relative_modular_power(np.diag([2.0, 1.0]), np.eye(2), 0.5, np.eye(2))
        assert np.allclose(out, np.diag([np.sqrt(2), 1]))

    def test_alpha_one_is_delta(self, rng):
        zeta = np.diag([0.2, 0.5, 0.3])
        xi = np.diag([0.1, 0.6, 0.3])
        x = rand_c(rng, 3)
        assert np.allclose(relative_modular_power(zeta, xi, 1.0, x), relative_modular_operator(zeta, xi)(x))
        assert np.allclose(relative_modular_operator(zeta, xi)(x), zeta @ x @ np.linalg.inv(xi))

    @given(seed=seeds, a=st.floats(-1, 1), b=st.floats(-1, 1))
    def test_group_law(self, seed, a, b):
        rng = np.random.default_rng(seed)
        def pos():
            z = rand_c(rng, 3)
            return z @ z.conj().T + 0.2 * np.eye(3)
        zeta, xi, x = pos(), pos(), rand_c(rng, 3)
        lhs = relative_modular_power(zeta, xi, a, relative_modular_power(zeta, xi, b, x))
        rhs = relative_modular_power(zeta, xi, a + b, x)
        assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1, np.abs(rhs).max())

    def test_singular_xi_rejected(self):
        with pytest.raises(DomainError):
            relative_modular_operator(np.eye(2), np.diag([1.0, 0.0]))

    def test_singular_zeta_conventions(self):
        zeta = np.diag([1.0, 0.0])
        x = np.ones((2, 2))
        out = relative_modular_power(zeta, np.eye(2), 0.5, x)
        assert np.allclose(out, [[1, 1], [0, 0]])
        with pytest.raises(DomainError):
            relative_modular_power(zeta, np.eye(2), -0.5, x)
        with pytest.raises(DomainError):
            relative_modular_power(zeta, np.eye(2), 0.5j, x)

    def test_delta_eta_is_thermal_flow(self, q1r3, rng):
        x = rand_c(rng, 16)
        lhs = relative_modular_operator(q1r3.eta.matrix, q1r3.eta.matrix)(x)
        rhs = standard_liouvillean(q1r3, "reservoir").exp(-q1r3.beta)(x)
        assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1, np.abs(rhs).max())

    def test_s_operator(self, q1r3, rng):
        o0 = omega0_vector(q1r3)
        w0 = q1r3.omega_0.matrix
        for _ in range(5):
            a = rand_c(rng, 16)
            half = relative_modular_power(w0, w0, 0.5, a @ o0)
            assert np.allclose(modular_conjugation(half), a.conj().T @ o0, atol=1e-9)


class TestLiouvilleans:
    def test_kernel_contains_functions_of_h(self, q1r3):
        x = expm_hermitian(q1r3.H_lam, -0.3) + q1r3.H_lam.matrix @ q1r3.H_lam.matrix
        assert np.abs(standard_liouvillean(q1r3, "coupled")(x)).max() < 1e-12

    def test_free_spectrum(self, q1r3):
        es = np.linalg.eigvalsh(q1r3.H_S.matrix)
        er = np.linalg.eigvalsh(q1r3.H_R.matrix)
        e0 = (es[:, None] + er[None, :]).ravel()
        expect = np.sort((e0[:, None] - e0[None, :]).ravel())
        assert np.allclose(standard_liouvillean(q1r3, "free").spectrum(), expect, atol=1e-10)

    def test_hat_exponential(self, q1r3_free):
        m, s = q1r3_free, 0.37
        out = standard_liouvillean(m, "hat").exp(1j * m.beta * s)(eta_vector(m))
        expect = oracles.expm(1j * m.beta * s * m.H_0.matrix) @ eta_vector(m) @ oracles.expm(
            -1j * m.beta * s * m.HR_full.matrix
        )
        assert np.allclose(out, expect, atol=1e-12)

    @pytest.mark.parametrize("which", ["free", "coupled"])
    def test_hermitian_as_superoperator(self, q1r3, which):
        dense = standard_liouvillean(q1r3, which).dense()
        assert np.allclose(dense, dense.conj().T)

    def test_araki_vector_in_kernel(self, q1r3):
        assert np.abs(standard_liouvillean(q1r3, "coupled")(araki_vector(q1r3))).max() < 1e-9

    def test_natural_cone_preserved(self, q1r3):
        out = standard_liouvillean(q1r3, "coupled").propagator(3.3)(q1r3.omega.matrix)
        assert np.linalg.eigvalsh(0.5 * (out + out.conj().T)).min() > -1e-12

    def test_unknown_kind(self, q1r3):
        with pytest.raises(ValueError):
            standard_liouvillean(q1r3, "other")

    def test_kernel_projector_projects_onto_kernel(self, q1r3_free, rng):
        m = q1r3_free
        x = rand_c(rng, 16)
        proj = standard_liouvillean(m, "coupled").kernel_projector()
        px = proj(x)
        assert np.allclose(proj(px), px, atol=1e-12)
        assert np.abs(standard_liouvillean(m, "coupled")(px)).max() < 1e-10


class TestCocycle:
    def test_identity_at_zero(self, q1r3, rng):
        x = rand_c(rng, 16)
        assert np.allclose(cocycle(q1r3, 0.0)(x), x)

    def test_identity_without_coupling(self, q1r3_free, rng):
        x = rand_c(rng, 16)
        assert np.allclose(cocycle(q1r3_free, 4.2)(x), x, atol=1e-12)

    def test_relative_modular_identity(self, q1r3, rng):
        gam = cocycle(q1r3, 1.0)
        delta_eta = relative_modular_operator(q1r3.eta.matrix, q1r3.eta.matrix)
        target = relative_modular_operator(evolved_eta(q1r3, 1.0), q1r3.eta.matrix)
        chained = gam @ delta_eta @ gam.adjoint()
        for _ in range(20):
            x = rand_c(rng, 16)
            assert np.max(np.abs(target(x) - chained(x))) < 1e-9 * max(1, np.abs(target(x)).max())

    def test_evolved_eta_density(self, q1r3):
        u = oracles.expm(1j * q1r3.H_lam.matrix)
        assert np.allclose(evolved_eta(q1r3, 1.0), u @ q1r3.eta.matrix @ u.conj().T, atol=1e-12)

    def test_group_law_and_unitarity(self, q1r3):
        t, s = 0.8, 1.9
        free = oracles.expm(1j * t * q1r3.H_0.matrix)
        lhs = cocycle_unitary(q1r3, t + s)
        rhs = cocycle_unitary(q1r3, t) @ free @ cocycle_unitary(q1r3, s) @ free.conj().T
        assert np.allclose(lhs, rhs, atol=1e-9)
        assert np.allclose(lhs @ lhs.conj().T, np.eye(16), atol=1e-12)

    def test_cauchy_problem(self, q1r3):
        t, h = 1.1, 1e-5
        du = (cocycle_unitary(q1r3, t + h) - cocycle_unitary(q1r3, t - h)) / (2 * h)
        e = oracles.expm(1j * t * q1r3.H_0.matrix)
        rhs = 1j * cocycle_unitary(q1r3, t) @ e @ (0.1 * q1r3.V.matrix) @ e.conj().T
        assert np.allclose(du, rhs, atol=1e-7)


class TestVectors:
    def test_standard_vectors_are_positive(self, q1r3):
        for x in (omega_vector(q1r3), eta_vector(q1r3), omega_hat(q1r3), araki_vector(q1r3)):
            assert np.allclose(x, x.conj().T)
            assert np.linalg.eigvalsh(x).min() > -1e-12

    def test_omega_represents_initial_state(self, q1r3):
        assert np.allclose(state_from_vector(omega_vector(q1r3)), q1r3.omega.matrix, atol=1e-12)

    def test_araki_at_zero_coupling(self, q1r3_free):
        assert np.allclose(araki_vector(q1r3_free), omega0_vector(q1r3_free), atol=1e-12)

    def test_araki_closed_form_is_gibbs(self, q1r3):
        o = araki_vector(q1r3)
        assert np.allclose(o @ o.conj().T / inner(o, o).real, oracles.gibbs(q1r3.H_lam.matrix, 1.0), atol=1e-9)
        assert np.allclose(araki_vector_perturbative(q1r3), o, atol=1e-9)

    def test_araki_linear_in_coupling(self, q1r3):
        o0 = omega0_vector(q1r3)
        d = [hs_norm(araki_vector(q1r3.with_coupling(lam)) - o0) for lam in (0.1, 0.05, 0.025)]
        assert 1.8 < d[0] / d[1] < 2.2 and 1.8 < d[1] / d[2] < 2.2
