"""Full counting statistics of the energy exchanged between S and R.

Sign conventions: system atoms sit at e' - e (increase of the energy of S),
reservoir atoms at eps - eps' (decrease of the energy of R).
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceError, ValidationError
from .linalg import as_matrix, hermitize, positive_power, spectral_resolution
from .modular import Superoperator, evolved_eta, omega_vector

COALESCING_TOL = 1e-8
WEIGHT_FLOOR = 1e-12
MODULAR_DIM_CAP = 48


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely supported probability measure on the real line.

    Build instances with :meth:`from_atoms`, which sorts, coalesces nearby
    locations, clamps rounding-level negative weights and renormalizes.
    """

    locations: np.ndarray
    weights: np.ndarray
    coalescing_tol: float = COALESCING_TOL

    @classmethod
    def from_atoms(cls, locations, weights, coalescing_tol=COALESCING_TOL, mass_tol=1e-8):
        loc = np.asarray(locations, dtype=float).ravel()
        w = np.asarray(weights, dtype=float).ravel()
        if loc.shape != w.shape:
            raise ValidationError("locations and weights differ in length")
        if np.any(w < -1e-9):
            raise ValidationError(f"negative weight {w.min():.3g}")
        order = np.argsort(loc, kind="stable")
        loc, w = loc[order], w[order]
        groups = np.zeros(len(loc), dtype=int)
        if len(loc) > 1:
            groups[1:] = np.cumsum(np.diff(loc) > coalescing_tol)
        n = groups[-1] + 1 if len(loc) else 0
        gw = np.bincount(groups, weights=w, minlength=n)
        # weighted location inside each group, falling back to the plain mean
        num = np.bincount(groups, weights=w * loc, minlength=n)
        cnt = np.bincount(groups, minlength=n)
        plain = np.bincount(groups, weights=loc, minlength=n) / np.maximum(cnt, 1)
        gl = np.where(gw > 0, num / np.where(gw > 0, gw, 1), plain)
        total = gw.sum()
        if abs(total - 1.0) > mass_tol:
            raise ValidationError(f"total mass {total!r} differs from 1")
        keep = gw > WEIGHT_FLOOR
        gl, gw = gl[keep], gw[keep]
        gw = gw / gw.sum()
        gl = np.where(np.abs(gl) <= 1e-12, 0.0, gl)
        return cls(gl, gw, coalescing_tol)

    @classmethod
    def point_mass(cls, x=0.0):
        return cls(np.array([float(x)]), np.array([1.0]))

    def __len__(self):
        return len(self.locations)

    @property
    def mass(self):
        return float(self.weights.sum())

    def mean(self):
        return measure_moment(self, 1)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        c = np.concatenate([[0.0], np.cumsum(self.weights)])
        return c[np.searchsorted(self.locations, x, side="right")]

    def to_csv(self, path=None):
        """``location,weight`` rows in ascending order, 17 significant digits."""
        buf = io.StringIO()
        buf.write("location,weight\n")
        for loc, w in zip(self.locations, self.weights):
            buf.write(f"{loc:.17g},{w:.17g}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source):
        """Read a measure from a path or a text string produced by :meth:`to_csv`."""
        if "\n" in str(source):
            rows = list(csv.reader(io.StringIO(source)))
        else:
            with open(source, newline="") as fh:
                rows = list(csv.reader(fh))
        if not rows or rows[0] != ["location", "weight"]:
            raise ValidationError("missing header 'location,weight'")
        loc = [float(r[0]) for r in rows[1:] if r]
        w = [float(r[1]) for r in rows[1:] if r]
        return cls(np.array(loc), np.array(w))


def char_function(mu, gamma):
    """sum_k w_k exp(i gamma x_k)."""
    gamma = np.asarray(gamma, dtype=float)
    phase = np.exp(1j * np.multiply.outer(gamma, mu.locations))
    return phase @ mu.weights


def measure_moment(mu, k):
    if k < 1 or int(k) != k:
        raise ValidationError("moment order must be a positive integer", "k")
    return float(np.dot(mu.weights, mu.locations ** int(k)))


def _merged_grid(mu, nu, tol):
    x = np.sort(np.concatenate([mu.locations, nu.locations]))
    if len(x) == 0:
        return x
    keep = np.concatenate([[True], np.diff(x) > tol])
    # evaluate just above each merged cluster so near-equal atoms count together
    starts = np.flatnonzero(keep)
    ends = np.concatenate([starts[1:], [len(x)]]) - 1
    return x[ends]


def kolmogorov_distance(mu, nu, tol=COALESCING_TOL):
    """sup_x |F_mu(x) - F_nu(x)|; locations closer than ``tol`` are identified."""
    x = _merged_grid(mu, nu, tol)
    if len(x) == 0:
        return 0.0
    return float(np.max(np.abs(mu.cdf(x + tol) - nu.cdf(x + tol))))


def atom_mismatch(mu, nu, tol=COALESCING_TOL):
    """Largest weight difference after pairing atoms whose locations agree within ``tol``.

    An atom without a partner is compared against zero weight.
    """
    x = _merged_grid(mu, nu, tol)
    if len(x) == 0:
        return 0.0
    grid = np.concatenate([[-np.inf], x + tol])
    dm = np.diff(mu.cdf(grid[1:]), prepend=0.0)
    dn = np.diff(nu.cdf(grid[1:]), prepend=0.0)
    return float(np.max(np.abs(dm - dn)))


def cf_sup_distance(mu, nu, gammas):
    return float(np.max(np.abs(char_function(mu, gammas) - char_function(nu, gammas))))


# -- the three FCS constructions -------------------------------------------------


def _two_time_weights(m, prep, meas, t):
    """W[a, b] = tr(exp(-itH) prep[a] exp(itH) meas[b])."""
    w = np.empty((len(prep), len(meas)))
    for a, p in enumerate(prep):
        pt = m.propagate(p, t)
        for b, q in enumerate(meas):
            w[a, b] = np.real(np.vdot(q.conj().T, pt))  # tr(pt q)
    return w


def _system_blocks(m):
    res = m.H_S.resolution
    prep = [np.kron(p @ m.rho_S.matrix @ p, m.omega_R.matrix) for p in res.projectors]
    meas = [m.on_system(p) for p in res.projectors]
    return res.eigenvalues, prep, meas


def _reservoir_blocks(m):
    res = m.H_R.resolution
    prep = [np.kron(m.rho_S.matrix, p @ m.omega_R.matrix @ p) for p in res.projectors]
    meas = [m.on_reservoir(p) for p in res.projectors]
    return res.eigenvalues, prep, meas


def _measure_from_grid(first, second, w, sign):
    """Atoms at sign * (second - first) with weights w[first, second]."""
    loc = sign * (second[None, :] - first[:, None])
    return AtomicMeasure.from_atoms(loc.ravel(), w.ravel())


def fcs_system(m, t):
    """Two-time measurement statistics of the energy increase of S over [0, t]."""
    e, prep, meas = _system_blocks(m)
    return _measure_from_grid(e, e, _two_time_weights(m, prep, meas, t), +1)


def fcs_reservoir_direct(m, t):
    """Two-time measurement statistics of the energy decrease of R over [0, t]."""
    e, prep, meas = _reservoir_blocks(m)
    return _measure_from_grid(e, e, _two_time_weights(m, prep, meas, t), -1)


def fcs_reservoir_modular(m, t, cap=MODULAR_DIM_CAP):
    """Spectral measure of (1/beta) log Delta_{eta o tau^{-t} | eta} for the vector Omega.

    A power Delta^s of the relative modular operator is materialized as a dense
    d^2 x d^2 matrix and diagonalized; this is an independent route to
    :func:`fcs_reservoir_direct`.
    """
    if m.dim > cap:
        raise ResourceError(f"dense modular path needs d <= {cap}, model has d = {m.dim}")
    # Delta^s has the eigenvectors of Delta; a small s keeps its spectrum within
    # a few units of log-spread so that eigh resolves the smallest eigenvalues.
    spread = m.beta * float(np.ptp(m.H_R.resolution.eigenvalues))
    s = 1.0 if spread <= 1.0 else 1.0 / spread
    zeta = evolved_eta(m, t)
    delta_s = Superoperator.sandwich(
        positive_power(hermitize(zeta), s), positive_power(m.eta, -s)
    ).dense()
    evals, vecs = np.linalg.eigh(hermitize(delta_s))
    if evals[0] <= 0:
        raise DomainError("relative modular operator is not positive definite")
    amp = vecs.conj().T @ omega_vector(m).ravel()
    return AtomicMeasure.from_atoms(np.log(evals) / (s * m.beta), np.abs(amp) ** 2)


def calF(m, t, alpha):
    """F_{lam,t}(alpha) = <Omega | Delta_{eta o tau^{-t}|eta}^alpha Omega> for 0 <= Re alpha <= 1.

    Computed as tr(Omega* zeta_t^alpha Omega eta^{-alpha}); on alpha = i gamma / beta
    it is the characteristic function of the reservoir FCS.
    """
    alpha = complex(alpha)
    if not 0.0 <= alpha.real <= 1.0:
        raise DomainError(f"Re alpha = {alpha.real} outside [0, 1]")
    if alpha == 0:
        return 1.0 + 0.0j
    omega = omega_vector(m)
    # zeta_t^alpha = exp(itH) eta^alpha exp(-itH) by unitary covariance
    eta_a = m.on_reservoir(positive_power(m.omega_R, alpha))
    zeta_a = m.propagate(eta_a, -t)
    eta_inv = positive_power(m.omega_R, -alpha)
    # eta^{-alpha} = 1 (x) omega_R^{-alpha}: apply blockwise
    x = zeta_a @ omega
    d_S, d_R = m.d_S, m.d_R
    x = (x.reshape(m.dim, d_S, d_R) @ eta_inv).reshape(m.dim, m.dim)
    return complex(np.vdot(omega, x))


def calF_derivative(m, t, alpha, h=1e-5):
    """Central finite difference of F along the real alpha direction."""
    return (calF(m, t, alpha + h) - calF(m, t, alpha - h)) / (2 * h)


def strip_bounds(m, t, alpha):
    """(strip bound 1 + (d_S - 1) Re alpha, rigidity bound F(Re alpha))."""
    alpha = complex(alpha)
    return 1.0 + (m.d_S - 1) * alpha.real, calF(m, t, alpha.real).real


def derivative_bound(m, t, alpha, heat_r):
    """(1 + (1 - Re alpha)^{-1}) d_S - beta Q_R(lam, t)."""
    return (1.0 + 1.0 / (1.0 - complex(alpha).real)) * m.d_S - m.beta * heat_r


def is_commuting(a, b, tol=1e-10):
    a, b = as_matrix(a), as_matrix(b)
    return float(np.max(np.abs(a @ b - b @ a))) <= tol * max(1.0, float(np.max(np.abs(a))))


def reservoir_spectrum_differences(m):
    e = spectral_resolution(m.H_R).eigenvalues
    return np.unique(np.round((e[:, None] - e[None, :]).ravel(), 9))
