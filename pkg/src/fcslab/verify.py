"""Invariant suite: every exact identity and bound the library relies on, as residuals.

Each check yields a :class:`CheckResult` ``(name, residual, tolerance, passed)``.
Informational rows carry an infinite tolerance and always pass.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import asymptotics as asy
from .errors import ResourceError
from .fcs import (
    MODULAR_DIM_CAP,
    atom_mismatch,
    calF,
    calF_derivative,
    char_function,
    derivative_bound,
    fcs_reservoir_direct,
    fcs_reservoir_modular,
    fcs_system,
    is_commuting,
    strip_bounds,
)
from .linalg import expm_hermitian, hermitize, operator_norm
from .model import (
    first_law_residual,
    flux_expectation,
    flux_observables,
    heat_bound,
    heat_R,
    heat_S,
)
from .modular import (
    araki_vector,
    araki_vector_perturbative,
    cocycle,
    cocycle_unitary,
    commutant_image,
    evolved_eta,
    inner,
    left_action,
    modular_conjugation,
    omega0_vector,
    relative_modular_operator,
    standard_liouvillean,
)

VERIFY_HEADER = ("check", "residual", "tolerance", "pass")
ALPHA_GRID = (0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0)
S_GRID = (0.0, 0.3, 1.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)

    def row(self):
        return f"{self.name},{self.residual:.6e},{self.tolerance:.1e},{int(self.passed)}"


def _max_abs(a):
    return float(np.max(np.abs(a)))


def _random_complex(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def check_linalg(m, rng):
    h = m.H_lam
    res = h.resolution
    p = res.projectors
    radius = max(1.0, float(np.max(np.abs(res.eigenvalues))))
    yield CheckResult("spectral_reconstruction", _max_abs(res.from_values(res.eigenvalues) - h.matrix), 1e-10 * radius)
    # P_a P_b = delta_ab P_a for all pairs iff the grouped eigenbasis is orthonormal
    v = res.basis
    ortho = _max_abs(v.conj().T @ v - np.eye(m.dim))
    idem = max(_max_abs(q @ q - q) for q in p)
    yield CheckResult("projectors_orthogonal_idempotent", max(ortho, idem), 1e-10)
    yield CheckResult("projectors_resolve_identity", _max_abs(p.sum(0) - np.eye(m.dim)), 1e-10)
    u = expm_hermitian(h, 1.7j)
    yield CheckResult("exp_itH_unitary", _max_abs(u @ u.conj().T - np.eye(m.dim)), 1e-9)
    w = m.omega_lam.matrix
    a, b = _random_complex(rng, m.dim), _random_complex(rng, m.dim)
    lhs = np.trace(w @ a @ expm_hermitian(h, -m.beta) @ b @ expm_hermitian(h, m.beta))
    yield CheckResult("kms_gibbs", abs(lhs - np.trace(w @ b @ a)) / (1 + abs(lhs)), 1e-8)
    yield CheckResult("gibbs_commutes", _max_abs(w @ h.matrix - h.matrix @ w), 1e-10)


def check_model(m, times):
    phi_s, phi_r = flux_observables(m)
    rhs = 1j * m.lam * (m.H_lam.matrix @ m.V.matrix - m.V.matrix @ m.H_lam.matrix)
    yield CheckResult("flux_difference", _max_abs(phi_r.matrix - phi_s.matrix - rhs), 1e-10)
    bound_r = heat_bound(m)
    bound_s = 2.0 * operator_norm(m.HS_full.matrix)
    h = 1e-4
    for t in times:
        qs, qr = heat_S(m, t), heat_R(m, t)
        yield CheckResult(f"first_law[t={t:g}]", abs(first_law_residual(m, t)), 1e-9 * (1 + abs(qs) + abs(qr)))
        yield CheckResult(f"heat_R_bound[t={t:g}]", max(0.0, abs(qr) - bound_r), 0.0)
        yield CheckResult(f"heat_S_bound[t={t:g}]", max(0.0, abs(qs) - bound_s), 0.0)
        ds = (heat_S(m, t + h) - heat_S(m, t - h)) / (2 * h)
        dr = (heat_R(m, t + h) - heat_R(m, t - h)) / (2 * h)
        yield CheckResult(f"heat_S_rate[t={t:g}]", abs(ds - flux_expectation(m, phi_s, t)), 1e-6)
        yield CheckResult(f"heat_R_rate[t={t:g}]", abs(dr - flux_expectation(m, phi_r, t)), 1e-6)


def check_modular(m, rng, n_random=20):
    d = m.dim
    comm, cocyc, tomita, dense = 0.0, 0.0, 0.0, 0.0
    delta_eta = relative_modular_operator(m.eta.matrix, m.eta.matrix)
    thermal = standard_liouvillean(m, "reservoir").exp(-m.beta)
    gam = cocycle(m, 1.0)
    zeta = relative_modular_operator(evolved_eta(m, 1.0), m.eta.matrix)
    chained = gam @ delta_eta @ gam.adjoint()
    o0 = omega0_vector(m)
    half = standard_liouvillean(m, "free").exp(-0.5 * m.beta)  # Delta_{omega_0}^{1/2}
    flow = 0.0
    for _ in range(n_random):
        a, b, x = _random_complex(rng, d), _random_complex(rng, d), _random_complex(rng, d)
        x /= np.linalg.norm(x)
        lhs = commutant_image(a) @ left_action(b)
        rhs = left_action(b) @ commutant_image(a)
        comm = max(comm, _max_abs(lhs(x) - rhs(x)))
        cocyc = max(cocyc, _max_abs(zeta(x) - chained(x)) / max(1.0, _max_abs(zeta(x))))
        # S-operator: J Delta^{1/2} pi(A) Omega_0 = pi(A*) Omega_0
        s_lhs = modular_conjugation(half(a @ o0))
        tomita = max(tomita, _max_abs(s_lhs - a.conj().T @ o0))
        flow = max(flow, _max_abs(delta_eta(x) - thermal(x)) / max(1.0, _max_abs(thermal(x))))
        if d <= MODULAR_DIM_CAP // 3:
            dense = max(dense, _max_abs(gam.apply_dense(x) - gam(x)))
    yield CheckResult("tomita_commutant", comm, 1e-10)
    yield CheckResult("cocycle_relative_modular[t=1]", cocyc, 1e-9)
    yield CheckResult("s_operator", tomita, 1e-9)
    yield CheckResult("delta_eta_is_thermal_flow", flow, 1e-9)
    yield CheckResult("dense_matches_sandwich", dense, 1e-10)

    u = {t: cocycle_unitary(m, t) for t in (0.7, 1.3, 2.0)}
    free = expm_hermitian(m.H_0, 0.7j)
    group = u[0.7] @ free @ u[1.3] @ free.conj().T - u[2.0]
    yield CheckResult("cocycle_group_law", _max_abs(group), 1e-9)
    yield CheckResult("cocycle_unitary", _max_abs(u[2.0] @ u[2.0].conj().T - np.eye(d)), 1e-9)
    h = 1e-5
    t = 1.3
    du = (cocycle_unitary(m, t + h) - cocycle_unitary(m, t - h)) / (2 * h)
    gen = 1j * u[t] @ expm_hermitian(m.H_0, 1j * t) @ (m.lam * m.V.matrix) @ expm_hermitian(m.H_0, -1j * t)
    yield CheckResult("cocycle_cauchy_problem", _max_abs(du - gen), 1e-6)

    o_lam = araki_vector(m)
    coupled = standard_liouvillean(m, "coupled")
    yield CheckResult("liouvillean_kills_araki_vector", _max_abs(coupled(o_lam)), 1e-9)
    state = o_lam @ o_lam.conj().T / inner(o_lam, o_lam).real
    yield CheckResult("araki_closed_form_gibbs", _max_abs(state - m.omega_lam.matrix), 1e-9)
    yield CheckResult("araki_perturbative_closed_form", _max_abs(araki_vector_perturbative(m) - o_lam), 1e-9)
    pos = coupled.propagator(2.0)(m.omega.matrix)
    yield CheckResult("natural_cone_preserved", max(0.0, -float(np.linalg.eigvalsh(hermitize(pos))[0])), 1e-12)


def check_fcs(m, times, gammas):
    commuting = is_commuting(m.rho_S.matrix, m.H_S.matrix)
    for t in times:
        direct = fcs_reservoir_direct(m, t)
        system = fcs_system(m, t)
        yield CheckResult(f"mean_reservoir_fcs=heat_R[t={t:g}]", abs(direct.mean() - heat_R(m, t)), 1e-9)
        gap = abs(system.mean() - heat_S(m, t))
        yield CheckResult(f"mean_system_fcs=heat_S[t={t:g}]", gap, 1e-9 if commuting else math.inf)
        if m.dim <= MODULAR_DIM_CAP:
            modular = fcs_reservoir_modular(m, t)
            yield CheckResult(f"modular=direct[t={t:g}]", atom_mismatch(direct, modular), 1e-8)
        cf = np.array([calF(m, t, 1j * g / m.beta) for g in gammas])
        yield CheckResult(f"calF=charfun[t={t:g}]", _max_abs(cf - char_function(direct, gammas)), 1e-8)
        yield CheckResult(f"calF(0)=1[t={t:g}]", abs(calF(m, t, 0) - 1), 0.0)
        f1 = calF(m, t, 1.0)
        yield CheckResult(f"calF(1)_in_[0,d_S][t={t:g}]", max(0.0, -f1.real, f1.real - m.d_S, abs(f1.imag)), 1e-10)
        strip, rigid, deriv = 0.0, 0.0, 0.0
        qr = heat_R(m, t)
        for a in ALPHA_GRID:
            for im in (0.0, 0.7):
                alpha = a + 1j * im
                bound, f_re = strip_bounds(m, t, alpha)
                val = abs(calF(m, t, alpha))
                strip = max(strip, val - bound)
                rigid = max(rigid, val - f_re)
            if 0.0 < a < 0.9:
                deriv = max(deriv, abs(calF_derivative(m, t, a)) - derivative_bound(m, t, a, qr))
        yield CheckResult(f"strip_bound[t={t:g}]", max(0.0, strip), 1e-10)
        yield CheckResult(f"rigidity_bound[t={t:g}]", max(0.0, rigid), 1e-10)
        yield CheckResult(f"derivative_bound[t={t:g}]", max(0.0, deriv), 0.0)


def check_asymptotics(m, times, gammas):
    for t in [x for x in times if x != 0] or [1.0]:
        for s in S_GRID:
            yield CheckResult(f"midline[t={t:g},s={s:g}]", asy.midline_residual(m, t, s), 1e-8)
    ref = asy.double_limit_fcs(m)
    zc = np.array([asy.calF_zero_coupling(m, g) for g in gammas])
    yield CheckResult("zero_coupling=charfun(P_S)", _max_abs(zc - char_function(ref, gammas)), 1e-12)
    yield CheckResult(
        "mean(P_S)=omega_S(H_S)-rho_S(H_S)",
        abs(ref.mean() - (np.trace((m.omega_S.matrix - m.rho_S.matrix) @ m.H_S.matrix).real)),
        1e-12,
    )
    o_lam = araki_vector(m)
    n2 = inner(o_lam, o_lam).real
    worst = 0.0
    for g in (0.0, 0.5, 1.3):
        g1, g2 = asy.g_functions_continuation(m, g)
        target = asy.calF_limit(m, g / m.beta + 0.5j, "rank_one")
        worst = max(worst, abs(g1 * g2 / n2 - target) / max(1.0, abs(target)))
    yield CheckResult("g_functions=rank_one_continuation", worst, 1e-8)
    if m.dim <= asy.DIRECT_DIM_CAP:
        ces = asy.cesaro_fcs(m, "reservoir")
        yield CheckResult("cesaro_mean=cesaro_heat", abs(ces.mean() - asy.cesaro_heat(m)), 1e-9)
        yield CheckResult("cesaro_mass", abs(ces.mass - 1.0), 1e-10)


def run_suite(m, times=(0.0, 1.0, 5.0, 20.0), seed=0, gammas=None):
    """Run every check on ``m``; returns a list of :class:`CheckResult`."""
    if m.dim > asy.DIRECT_DIM_CAP:
        raise ResourceError(f"verification needs d <= {asy.DIRECT_DIM_CAP}, model has d = {m.dim}")
    gammas = np.linspace(-10, 10, 41) if gammas is None else np.asarray(gammas, dtype=float)
    rng = np.random.default_rng(seed)
    out = []
    for group in (
        check_linalg(m, rng),
        check_model(m, times),
        check_modular(m, rng),
        check_fcs(m, times, gammas),
        check_asymptotics(m, times, gammas),
    ):
        out.extend(group)
    return out


def report_csv(results):
    return "\n".join([",".join(VERIFY_HEADER)] + [r.row() for r in results]) + "\n"
