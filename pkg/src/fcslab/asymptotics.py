"""Long-time and weak-coupling limits of the counting statistics.

Finite reservoirs are never mixing, so two infinite-time limits are provided
side by side:

* ``cesaro``: the exact infinite-time average, obtained by keeping only the
  equal-energy blocks of H_lam (the kernel of L_lam);
* ``idealized``: what a mixing dynamics would produce, i.e. the coupled Gibbs
  state replacing the Cesaro projection by a rank-one one.

Their gap is the finite-size diagnostic.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import FCSLabError, ResourceError
from .fcs import (
    AtomicMeasure,
    _reservoir_blocks,
    _system_blocks,
    calF,
    cf_sup_distance,
    fcs_reservoir_direct,
    fcs_system,
    kolmogorov_distance,
)
from .linalg import expm_hermitian, log_partition_function
from .modular import (
    araki_vector,
    eta_vector,
    inner,
    omega0_vector,
    omega_hat,
    standard_liouvillean,
)

DIRECT_DIM_CAP = 128
GAMMA_WINDOW = np.linspace(-10.0, 10.0, 201)


def _blocks(m, which):
    if which == "system":
        e, prep, meas = _system_blocks(m)
        return e, prep, meas, +1
    if which == "reservoir":
        e, prep, meas = _reservoir_blocks(m)
        return e, prep, meas, -1
    raise ValueError(f"which must be 'system' or 'reservoir', got {which!r}")


def _from_weights(e, w, sign):
    loc = sign * (e[None, :] - e[:, None])
    return AtomicMeasure.from_atoms(loc.ravel(), w.ravel())


def cesaro_weights(m, prep, meas):
    """W[a, b] = sum_mu tr(prep[a] Pi_mu meas[b] Pi_mu) over eigenprojectors of H_lam."""
    res = m.H_lam.resolution
    u = res.basis
    mask = res.labels[:, None] == res.labels[None, :]
    a = np.stack([(u.conj().T @ p @ u) * mask for p in prep]).reshape(len(prep), -1)
    b = np.stack([(u.conj().T @ q @ u).T for q in meas]).reshape(len(meas), -1)
    return np.real(a @ b.T)


def cesaro_fcs(m, which="reservoir"):
    """Exact lim_{T->inf} (1/T) int_0^T P_{lam,t} dt."""
    if m.dim > DIRECT_DIM_CAP:
        raise ResourceError(f"direct path needs d <= {DIRECT_DIM_CAP}, model has d = {m.dim}")
    e, prep, meas, sign = _blocks(m, which)
    return _from_weights(e, cesaro_weights(m, prep, meas), sign)


def cesaro_state(m):
    """Infinite-time average of the evolved initial state: sum_mu Pi_mu omega Pi_mu."""
    res = m.H_lam.resolution
    u = res.basis
    mask = res.labels[:, None] == res.labels[None, :]
    return u @ ((u.conj().T @ m.omega.matrix @ u) * mask) @ u.conj().T


def cesaro_heat(m, which="reservoir"):
    """Cesaro limit of Q_R(lam, t) (or Q_S for ``which='system'``)."""
    diff = cesaro_state(m) - m.omega.matrix
    if which == "system":
        return float(np.real(np.trace(diff @ m.HS_full.matrix)))
    return float(-np.real(np.trace(diff @ m.HR_full.matrix)))


def time_averaged_fcs(m, which="reservoir", T=2000.0, dt=0.05, chunk=4096):
    """(1/T) int_0^T P_{lam,t} dt by the trapezoid rule on a uniform grid."""
    e, prep, meas, sign = _blocks(m, which)
    res = m.H_lam.resolution
    u = res.basis
    freqs = res.raw_eigenvalues
    a = np.stack([u.conj().T @ p @ u for p in prep])
    b = np.stack([u.conj().T @ q @ u for q in meas])
    # w_ab(t) = sum_ij A_a[i,j] B_b[j,i] exp(-it(f_i - f_j))
    coef = np.einsum("aij,bji->abij", a, b).reshape(len(prep) * len(meas), -1)
    omega = (freqs[:, None] - freqs[None, :]).ravel()
    n = int(round(T / dt))
    ts = np.linspace(0.0, T, n + 1)
    tw = np.full(n + 1, dt)
    tw[0] = tw[-1] = dt / 2
    acc = np.zeros(coef.shape[0])
    for start in range(0, n + 1, chunk):
        tt = ts[start : start + chunk]
        phases = np.exp(-1j * np.outer(omega, tt))
        acc += np.real(coef @ (phases @ tw[start : start + chunk]))
    w = (acc / T).reshape(len(prep), len(meas))
    return _from_weights(e, w, sign)


def fcs_limit_idealized(m, which="reservoir"):
    """Long-time limit that mixing would produce.

    System: omega_lam(P_e') rho_S(P_e) at e' - e.
    Reservoir: omega_R(P_eps) omega_lam(1 (x) P_eps') at eps - eps'.
    """
    wl = m.omega_lam.matrix
    if which == "system":
        res = m.H_S.resolution
        first = np.array([np.trace(m.rho_S.matrix @ p).real for p in res.projectors])
        second = np.array([np.trace(wl @ m.on_system(p)).real for p in res.projectors])
        sign = +1
    elif which == "reservoir":
        res = m.H_R.resolution
        first = np.array([np.trace(m.omega_R.matrix @ p).real for p in res.projectors])
        second = np.array([np.trace(wl @ m.on_reservoir(p)).real for p in res.projectors])
        sign = -1
    else:
        raise ValueError(f"which must be 'system' or 'reservoir', got {which!r}")
    return _from_weights(res.eigenvalues, np.outer(first, second), sign)


def double_limit_fcs(m):
    """P_S: law of E' - E with E ~ rho_S(P_e) and E' ~ omega_S(P_e') independent."""
    res = m.H_S.resolution
    p_init = np.array([np.trace(m.rho_S.matrix @ p).real for p in res.projectors])
    p_eq = np.array([np.trace(m.omega_S.matrix @ p).real for p in res.projectors])
    return _from_weights(res.eigenvalues, np.outer(p_init, p_eq), +1)


def midline_sides(m, t, s):
    """Both sides of the midline representation of the generating function.

    Returns (F_{lam,t}(1/2 + is), <e^{i beta s hatL} hatOmega | e^{itL_lam} e^{i beta s hatL} Omega_eta>).
    """
    lhs = calF(m, t, 0.5 + 1j * s)
    hat = standard_liouvillean(m, "hat").exp(1j * m.beta * s)
    coupled = standard_liouvillean(m, "coupled").propagator(t)
    rhs = inner(hat(omega_hat(m)), coupled(hat(eta_vector(m))))
    return lhs, rhs


def midline_residual(m, t, s):
    """|F_{lam,t}(1/2 + is) - <e^{i beta s hatL} hatOmega | e^{itL_lam} e^{i beta s hatL} Omega_eta>|."""
    lhs, rhs = midline_sides(m, t, s)
    return abs(lhs - rhs)


def calF_limit(m, s, mode="rank_one"):
    """Infinite-time limit of F_{lam,t}(1/2 + is).

    ``rank_one`` uses the mixing projector |Omega_lam><Omega_lam| / ||Omega_lam||^2;
    ``kernel_exact`` uses the projector onto ker L_lam, which is the exact
    Cesaro limit for a confined reservoir. ``s`` may be complex (the
    expressions are entire in s).
    """
    hat = standard_liouvillean(m, "hat")
    plus = hat.exp(1j * m.beta * s)
    minus = hat.exp(-1j * m.beta * s)
    o_hat, o_eta = omega_hat(m), eta_vector(m)
    if mode == "rank_one":
        o_lam = araki_vector(m)
        g1 = inner(o_hat, minus(o_lam))
        g2 = inner(o_lam, plus(o_eta))
        return g1 * g2 / inner(o_lam, o_lam).real
    if mode == "kernel_exact":
        proj = standard_liouvillean(m, "coupled").kernel_projector()
        return inner(o_hat, minus(proj(plus(o_eta))))
    raise ValueError(f"unknown mode {mode!r}")


def calF_zero_coupling(m, gamma):
    """rho_S(exp(-i gamma H_S)) omega_S(exp(i gamma H_S))."""
    a = np.trace(m.rho_S.matrix @ expm_hermitian(m.H_S, -1j * gamma))
    b = np.trace(m.omega_S.matrix @ expm_hermitian(m.H_S, 1j * gamma))
    return complex(a * b)


def g_functions_continuation(m, gamma):
    """The two factors of the rank-one limit continued to s = gamma/beta + i/2.

    G1 = <hatOmega | exp((beta/2 - i gamma) J pi(H_S) J) exp(-i gamma (L_0 + lam pi(V))) Omega_0>
    G2 = Z^{1/2} <Omega_lam | J pi(exp(-i gamma H_S)) J exp(i gamma (L_0 + lam pi(V))) Omega_lam>
    with Z = tr exp(-beta H_S). At lam = 0 they reduce to
    Z^{-1/2} rho_S(exp(-i gamma H_S)) and Z^{1/2} omega_S(exp(i gamma H_S)).
    """
    pert = standard_liouvillean(m, "perturbed")
    sqrt_z = math.exp(0.5 * log_partition_function(m.H_S, m.beta))
    right1 = expm_hermitian(m.HS_full, 0.5 * m.beta - 1j * gamma)
    g1 = inner(omega_hat(m), pert.exp(-1j * gamma)(omega0_vector(m)) @ right1)
    o_lam = araki_vector(m)
    right2 = expm_hermitian(m.HS_full, 1j * gamma)
    g2 = sqrt_z * inner(o_lam, pert.exp(1j * gamma)(o_lam) @ right2)
    return g1, g2


@dataclass
class LimitReport:
    mode: str
    measure: AtomicMeasure
    distances: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)


def limit_reports(m, gammas=GAMMA_WINDOW):
    """Reservoir limit measures in both modes, with distances to P_S and to each other."""
    ref = double_limit_fcs(m)
    ces = cesaro_fcs(m, "reservoir")
    ide = fcs_limit_idealized(m, "reservoir")
    meta = {"model": m.fingerprint, "d": m.dim, "lambda": m.lam, "beta": m.beta}
    out = []
    for mode, mu, other in (("cesaro_exact", ces, ide), ("mixing_idealized", ide, ces)):
        out.append(
            LimitReport(
                mode,
                mu,
                {
                    "kolmogorov_to_P_S": kolmogorov_distance(mu, ref),
                    "cf_sup_to_P_S": cf_sup_distance(mu, ref, gammas),
                    "kolmogorov_between_modes": kolmogorov_distance(mu, other),
                },
                dict(meta),
            )
        )
    return out


# -- scans -----------------------------------------------------------------------

SCAN_HEADER = ("axis", "value", "kolmogorov", "cf_sup", "mean_R", "mean_S", "seconds")


@dataclass
class ScanRow:
    axis: str
    value: float
    kolmogorov: float = float("nan")
    cf_sup: float = float("nan")
    mean_R: float = float("nan")
    mean_S: float = float("nan")
    seconds: float = 0.0
    error: str = ""


@dataclass
class ScanResult:
    rows: list

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    @property
    def errors(self):
        return [r for r in self.rows if r.error]

    def to_csv(self, path=None, timing=True):
        lines = [",".join(SCAN_HEADER)]
        for r in self.rows:
            vals = [r.kolmogorov, r.cf_sup, r.mean_R, r.mean_S]
            cells = [r.axis, f"{r.value:.17g}"] + [
                "" if math.isnan(v) else f"{v:.17g}" for v in vals
            ]
            cells.append(f"{r.seconds:.6f}" if timing else "0")
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _limit_pair(m, limit, t):
    if limit == "cesaro":
        return cesaro_fcs(m, "reservoir"), cesaro_fcs(m, "system")
    if limit == "idealized":
        return fcs_limit_idealized(m, "reservoir"), fcs_limit_idealized(m, "system")
    if limit == "time":
        return fcs_reservoir_direct(m, t), fcs_system(m, t)
    raise ValueError(f"unknown limit {limit!r}")


def _scan_row(m, axis, value, limit, gammas, t):
    start = time.perf_counter()
    row = ScanRow(axis, float(value))
    try:
        if m.dim > DIRECT_DIM_CAP:
            raise ResourceError(f"d = {m.dim} exceeds the cap {DIRECT_DIM_CAP}")
        ref = double_limit_fcs(m)
        mu_r, mu_s = _limit_pair(m, limit, t)
        row.kolmogorov = kolmogorov_distance(mu_r, ref)
        row.cf_sup = cf_sup_distance(mu_r, ref, gammas)
        row.mean_R = mu_r.mean()
        row.mean_S = mu_s.mean()
    except FCSLabError as exc:
        row.error = str(exc)
    row.seconds = time.perf_counter() - start
    return row


def scan(family, axis, values=None, limit="cesaro", gammas=GAMMA_WINDOW, times=None, workers=1):
    """Distance between a reservoir limit measure and P_S along a family of models.

    ``axis`` labels the rows (``lambda``, ``size`` or ``time``). For the time
    axis ``family`` may hold a single model and ``times`` the grid; the measure
    is then P_{R,lam,t} itself. ``limit`` picks ``cesaro`` or ``idealized``
    otherwise. Rows come back in family order; failures become error rows.
    """
    family = list(family)
    if not family:
        raise ValueError("empty family")
    if axis == "time":
        times = list(times if times is not None else values)
        if len(family) == 1:
            family = family * len(times)
        jobs = [(m, "time", tv, "time", tv) for m, tv in zip(family, times)]
    else:
        if values is None:
            values = [m.lam if axis == "lambda" else m.d_R for m in family]
        jobs = [(m, axis, v, limit, None) for m, v in zip(family, values)]

    def run(job):
        m, ax, v, lim, t = job
        return _scan_row(m, ax, v, lim, gammas, t)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    return ScanResult(rows)


def is_weakly_decreasing(values, atol=0.0):
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) <= atol))
