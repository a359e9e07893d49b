import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fcslab.builders import NamedBuilder, build_named_model
from fcslab.errors import DomainError, ResourceError, ValidationError
from fcslab.fcs import (
    AtomicMeasure,
    atom_mismatch,
    calF,
    calF_derivative,
    cf_sup_distance,
    char_function,
    derivative_bound,
    fcs_reservoir_direct,
    fcs_reservoir_modular,
    fcs_system,
    kolmogorov_distance,
    strip_bounds,
    measure_moment,
    reservoir_spectrum_differences,
)
from fcslab.model import heat_R, heat_S


def assert_same_atoms(mu, ref, tol=1e-9):
    locs = np.array(sorted(ref))
    weights = np.array([ref[k] for k in sorted(ref)])
    assert len(mu) == len(locs)
    assert np.max(np.abs(mu.locations - locs)) < 1e-6
    assert np.max(np.abs(mu.weights - weights)) < tol


class TestAtomicMeasure:
    def test_coalesces_and_sorts(self):
        mu = AtomicMeasure.from_atoms([1.0, -1.0, 1.0 + 1e-10], [0.25, 0.5, 0.25])
        assert np.allclose(mu.locations, [-1, 1]) and np.allclose(mu.weights, [0.5, 0.5])

    def test_clamps_rounding_negatives(self):
        mu = AtomicMeasure.from_atoms([0.0, 1.0], [1.0 + 1e-13, -1e-13])
        assert len(mu) == 1

    def test_rejects_bad_mass_and_negatives(self):
        with pytest.raises(ValidationError):
            AtomicMeasure.from_atoms([0.0], [0.9])
        with pytest.raises(ValidationError):
            AtomicMeasure.from_atoms([0.0, 1.0], [1.1, -0.1])

    def test_csv_round_trip(self, tmp_path):
        mu = AtomicMeasure.from_atoms([-2.0, 0.0, 2.0], [0.1, 0.7, 0.2])
        path = tmp_path / "m.csv"
        text = mu.to_csv(path)
        assert text.splitlines()[0] == "location,weight"
        back = AtomicMeasure.from_csv(path)
        assert np.array_equal(back.locations, mu.locations) and np.array_equal(back.weights, mu.weights)
        assert AtomicMeasure.from_csv(text).mass == pytest.approx(1.0)

    def test_point_mass_csv(self):
        assert AtomicMeasure.point_mass().to_csv() == "location,weight\n0,1\n"

    @given(
        locs=st.lists(st.floats(-5, 5), min_size=1, max_size=8),
        raw=st.lists(st.floats(0.01, 1.0), min_size=8, max_size=8),
    )
    def test_invariants(self, locs, raw):
        w = np.array(raw[: len(locs)])
        mu = AtomicMeasure.from_atoms(locs, w / w.sum())
        assert np.all(np.diff(mu.locations) > mu.coalescing_tol)
        assert abs(mu.mass - 1) < 1e-10 and np.all(mu.weights >= 0)


class TestCharFunctionAndDistances:
    def test_point_mass(self):
        assert np.allclose(char_function(AtomicMeasure.point_mass(), np.linspace(-3, 3, 7)), 1)

    def test_two_atoms(self):
        mu = AtomicMeasure.from_atoms([-1.0, 1.0], [0.5, 0.5])
        assert np.isclose(char_function(mu, math.pi), -1)

    def test_moments(self):
        mu = AtomicMeasure.from_atoms([-1.0, 2.0], [0.5, 0.5])
        assert measure_moment(mu, 1) == pytest.approx(0.5)
        assert measure_moment(mu, 2) == pytest.approx(2.5)
        assert measure_moment(AtomicMeasure.point_mass(), 3) == 0
        with pytest.raises(ValidationError):
            measure_moment(mu, 0)

    def test_kolmogorov(self):
        mu = AtomicMeasure.from_atoms([0.0, 1.0], [0.5, 0.5])
        nu = AtomicMeasure.from_atoms([0.0, 1.0], [0.8, 0.2])
        assert kolmogorov_distance(mu, mu) == 0
        assert kolmogorov_distance(mu, nu) == pytest.approx(0.3)
        assert kolmogorov_distance(mu, AtomicMeasure.point_mass(5.0)) == pytest.approx(1.0)
        # atoms closer than the tolerance count as equal
        shifted = AtomicMeasure(mu.locations + 1e-10, mu.weights)
        assert kolmogorov_distance(mu, shifted) < 1e-12

    @given(
        a=st.lists(st.floats(0.01, 1), min_size=3, max_size=3),
        b=st.lists(st.floats(0.01, 1), min_size=3, max_size=3),
    )
    def test_distances_in_unit_interval(self, a, b):
        locs = [-1.0, 0.0, 2.0]
        mu = AtomicMeasure.from_atoms(locs, np.array(a) / sum(a))
        nu = AtomicMeasure.from_atoms(locs, np.array(b) / sum(b))
        d = kolmogorov_distance(mu, nu)
        assert 0 <= d <= 1
        assert atom_mismatch(mu, nu) <= 2 * d + 1e-12
        assert cf_sup_distance(mu, nu, np.linspace(-5, 5, 21)) <= 2 + 1e-12


class TestSystemFCS:
    def test_time_zero(self, q1r3):
        mu = fcs_system(q1r3, 0.0)
        assert np.array_equal(mu.locations, [0.0]) and mu.weights[0] == 1.0

    def test_decoupled(self, q1r3_free):
        mu = fcs_system(q1r3_free, 7.0)
        assert len(mu) == 1 and mu.locations[0] == 0.0

    def test_fixture_t5_bruteforce(self, q1r3):
        mu = fcs_system(q1r3, 5.0)
        assert set(np.round(mu.locations, 9)) <= {-2.0, 0.0, 2.0}
        assert_same_atoms(mu, oracles.system_fcs_bruteforce(q1r3, 5.0))

    @pytest.mark.parametrize("t", [1.0, 5.0, 20.0])
    def test_mean_is_heat_for_commuting_state(self, q1r3, t):
        assert abs(fcs_system(q1r3, t).mean() - heat_S(q1r3, t)) < 1e-9


class TestReservoirFCS:
    def test_time_zero_and_decoupled(self, q1r3, q1r3_free):
        for mu in (fcs_reservoir_direct(q1r3, 0.0), fcs_reservoir_direct(q1r3_free, 3.0)):
            assert len(mu) == 1 and mu.locations[0] == 0.0

    def test_fixture_t5_bruteforce(self, q1r3):
        mu = fcs_reservoir_direct(q1r3, 5.0)
        assert_same_atoms(mu, oracles.reservoir_fcs_bruteforce(q1r3, 5.0))
        diffs = reservoir_spectrum_differences(q1r3)
        assert all(np.min(np.abs(diffs - x)) < 1e-8 for x in mu.locations)

    @pytest.mark.parametrize("rho", [np.diag([0.75, 0.25]), np.array([[0.5, 0.3], [0.3, 0.5]]), np.diag([0.0, 1.0])])
    def test_mean_is_heat_for_all_states(self, q1r3, rho):
        m = q1r3.with_initial_state(rho)
        for t in (1.0, 5.0):
            assert abs(fcs_reservoir_direct(m, t).mean() - heat_R(m, t)) < 1e-9

    def test_modular_time_zero(self, q1r3):
        mu = fcs_reservoir_modular(q1r3, 0.0)
        assert mu.to_csv() == "location,weight\n0,1\n"

    @pytest.mark.parametrize("t", [1.0, 5.0])
    def test_modular_matches_direct(self, q1r3, t):
        a, b = fcs_reservoir_direct(q1r3, t), fcs_reservoir_modular(q1r3, t)
        assert len(a) == len(b)
        assert np.max(np.abs(a.locations - b.locations)) < 1e-8
        assert np.max(np.abs(a.weights - b.weights)) < 1e-8

    def test_modular_on_ill_conditioned_reservoir(self):
        m = build_named_model(
            NamedBuilder("two_level", {"rho": "gibbs"}),
            NamedBuilder("truncated_oscillator", {"cutoff": 5, "omega0": 2.0}),
            2.0,
            0.2,
        )
        assert atom_mismatch(fcs_reservoir_direct(m, 3.0), fcs_reservoir_modular(m, 3.0)) < 1e-8

    def test_modular_cap(self, q1r3):
        with pytest.raises(ResourceError):
            fcs_reservoir_modular(q1r3, 1.0, cap=8)


class TestCalF:
    def test_alpha_zero_exact(self, q1r3):
        assert calF(q1r3, 5.0, 0) == 1

    def test_time_zero(self, q1r3):
        for alpha in (0.2, 0.5 + 1j, 1.0):
            assert abs(calF(q1r3, 0.0, alpha) - 1) < 1e-12

    def test_alpha_one_bound(self, q1r3):
        f = calF(q1r3, 5.0, 1.0)
        assert abs(f.imag) < 1e-12 and 0 <= f.real <= 2

    def test_outside_strip(self, q1r3):
        with pytest.raises(DomainError):
            calF(q1r3, 1.0, 1.2)
        with pytest.raises(DomainError):
            calF(q1r3, 1.0, -0.1 + 1j)

    def test_matches_sandwich_oracle(self, q1r3):
        t, alpha = 2.0, 0.3 + 0.4j
        u = oracles.expm(1j * t * q1r3.H_lam.matrix)
        zeta = u @ q1r3.eta.matrix @ u.conj().T
        w, v = np.linalg.eigh(zeta)
        za = (v * w**alpha) @ v.conj().T
        we, ve = np.linalg.eigh(q1r3.eta.matrix)
        eta_inv = (ve * we ** (-alpha)) @ ve.conj().T
        omega = np.kron(oracles.sqrtm_psd(q1r3.rho_S.matrix), oracles.sqrtm_psd(q1r3.omega_R.matrix))
        expect = np.trace(omega.conj().T @ za @ omega @ eta_inv)
        assert abs(calF(q1r3, t, alpha) - expect) < 1e-10

    @pytest.mark.parametrize("t", [1.0, 5.0])
    def test_characteristic_function(self, q1r3, t):
        mu = fcs_reservoir_direct(q1r3, t)
        gammas = np.linspace(-10, 10, 41)
        vals = np.array([calF(q1r3, t, 1j * g / q1r3.beta) for g in gammas])
        assert np.max(np.abs(vals - char_function(mu, gammas))) < 1e-8

    def test_pure_state(self, q1r3):
        m = q1r3.with_initial_state(np.diag([1.0, 0.0]))
        assert abs(calF(m, 3.0, 0.5j) - char_function(fcs_reservoir_direct(m, 3.0), 0.5)) < 1e-8

    @given(t=st.floats(0, 30), re=st.floats(0, 1), im=st.floats(-3, 3))
    def test_bounds(self, q1r3, t, re, im):
        bound, f_re = strip_bounds(q1r3, t, re + 1j * im)
        val = abs(calF(q1r3, t, re + 1j * im))
        assert val <= bound + 1e-10
        assert val <= f_re + 1e-10

    @pytest.mark.parametrize("t", [1.0, 5.0, 20.0])
    def test_derivative_bound(self, q1r3, t):
        qr = heat_R(q1r3, t)
        for a in (0.1, 0.4, 0.8):
            assert abs(calF_derivative(q1r3, t, a)) <= derivative_bound(q1r3, t, a, qr)
