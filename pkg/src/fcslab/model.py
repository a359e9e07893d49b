"""A finite system coupled to a confined thermal reservoir, and its heat bookkeeping."""

import hashlib
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ValidationError
from .linalg import (
    DensityMatrix,
    HermitianObservable,
    as_matrix,
    commutator,
    gibbs_state,
    hermitize,
    operator_norm,
)


@dataclass(frozen=True, eq=False)
class OpenSystemModel:
    """System ``S`` (dim d_S) coupled to reservoir ``R`` (dim d_R) through ``lam * V``.

    Matrices on the joint space use the ordering ``H_S (x) H_R``. Derived
    quantities are computed on first access and cached.
    """

    H_S: HermitianObservable
    rho_S: DensityMatrix
    H_R: HermitianObservable
    V: HermitianObservable
    lam: float
    beta: float

    def __post_init__(self):
        if self.rho_S.dim != self.H_S.dim:
            raise ValidationError(
                f"dimension {self.rho_S.dim} does not match H_S dimension {self.H_S.dim}",
                "rho_S",
            )
        if self.V.dim != self.H_S.dim * self.H_R.dim:
            raise ValidationError(
                f"dimension {self.V.dim} != d_S * d_R = {self.H_S.dim * self.H_R.dim}", "V"
            )
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise ValidationError(f"inverse temperature must be positive, got {self.beta!r}", "beta")
        if not np.isfinite(self.lam):
            raise ValidationError("coupling constant must be finite", "lambda")

    @property
    def d_S(self):
        return self.H_S.dim

    @property
    def d_R(self):
        return self.H_R.dim

    @property
    def dim(self):
        return self.d_S * self.d_R

    def on_system(self, a):
        """A (x) 1."""
        return np.kron(as_matrix(a), np.eye(self.d_R))

    def on_reservoir(self, b):
        """1 (x) B."""
        return np.kron(np.eye(self.d_S), as_matrix(b))

    @cached_property
    def HS_full(self):
        return HermitianObservable(self.on_system(self.H_S))

    @cached_property
    def HR_full(self):
        return HermitianObservable(self.on_reservoir(self.H_R))

    @cached_property
    def H_0(self):
        return HermitianObservable(self.HS_full.matrix + self.HR_full.matrix)

    @cached_property
    def H_lam(self):
        if self.lam == 0:
            return self.H_0
        return HermitianObservable(self.H_0.matrix + self.lam * self.V.matrix)

    @cached_property
    def omega_S(self):
        return gibbs_state(self.H_S, self.beta)

    @cached_property
    def omega_R(self):
        return gibbs_state(self.H_R, self.beta)

    @cached_property
    def omega(self):
        """Initial state rho_S (x) omega_R."""
        return DensityMatrix(np.kron(self.rho_S.matrix, self.omega_R.matrix))

    @cached_property
    def omega_0(self):
        return DensityMatrix(np.kron(self.omega_S.matrix, self.omega_R.matrix))

    @cached_property
    def omega_lam(self):
        return gibbs_state(self.H_lam, self.beta)

    @cached_property
    def eta(self):
        """The positive functional 1 (x) omega_R, with eta(1) = d_S."""
        return DensityMatrix(self.on_reservoir(self.omega_R), normalized=False)

    def evolved_state(self, t):
        """exp(-itH) omega exp(itH): the initial state in the Schroedinger picture."""
        return self.propagate(self.omega.matrix, t)

    def propagate(self, rho, t):
        """exp(-itH_lam) rho exp(itH_lam) for any matrix rho."""
        if t == 0:
            return as_matrix(rho).copy()
        res = self.H_lam.resolution
        u = res.basis * np.exp(-1j * t * res.eigenvalues[res.labels])
        u = u @ res.basis.conj().T
        return u @ as_matrix(rho) @ u.conj().T

    def with_coupling(self, lam):
        return OpenSystemModel(self.H_S, self.rho_S, self.H_R, self.V, float(lam), self.beta)

    def with_initial_state(self, rho_S):
        rho = rho_S if isinstance(rho_S, DensityMatrix) else DensityMatrix(rho_S, field="rho_S")
        return OpenSystemModel(self.H_S, rho, self.H_R, self.V, self.lam, self.beta)

    @cached_property
    def fingerprint(self):
        h = hashlib.sha256()
        for a in (self.H_S, self.rho_S, self.H_R, self.V):
            h.update(np.ascontiguousarray(a.matrix).tobytes())
        h.update(np.array([self.lam, self.beta]).tobytes())
        return h.hexdigest()[:16]


def build_model(H_S, rho_S, H_R, V, lam, beta):
    """Validate and assemble an :class:`OpenSystemModel`.

    ``rho_S`` need not be faithful. Errors name the offending field.
    """
    hs = HermitianObservable(as_matrix(H_S), field="H_S")
    rho = rho_S if isinstance(rho_S, DensityMatrix) else DensityMatrix(rho_S, field="rho_S")
    hr = HermitianObservable(as_matrix(H_R), field="H_R")
    v = HermitianObservable(as_matrix(V), field="V")
    try:
        beta = float(beta)
        lam = float(lam)
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc), "beta/lambda") from exc
    return OpenSystemModel(hs, rho, hr, v, lam, beta)


def flux_observables(m):
    """Energy flux into S and out of R: Phi_S = -i lam [H_S, V], Phi_R = i lam [H_R, V]."""
    phi_s = -1j * m.lam * commutator(m.HS_full, m.V)
    phi_r = 1j * m.lam * commutator(m.HR_full, m.V)
    return HermitianObservable(hermitize(phi_s)), HermitianObservable(hermitize(phi_r))


def expectation(rho, a):
    return float(np.real(np.trace(as_matrix(rho) @ as_matrix(a))))


def heat_S(m, t):
    """Energy gained by S over [0, t]: omega(tau^t(H_S)) - omega(H_S)."""
    return expectation(m.evolved_state(t) - m.omega.matrix, m.HS_full)


def heat_R(m, t):
    """Energy lost by R over [0, t]: omega(H_R) - omega(tau^t(H_R))."""
    return expectation(m.omega.matrix - m.evolved_state(t), m.HR_full)


def interaction_change(m, t):
    """omega(tau^t(V) - V)."""
    return expectation(m.evolved_state(t) - m.omega.matrix, m.V)


def first_law_residual(m, t):
    """Q_R - Q_S - lam * omega(tau^t(V) - V); vanishes identically."""
    # one propagation for all three terms keeps the cancellation tight
    diff = m.evolved_state(t) - m.omega.matrix
    q_s = expectation(diff, m.HS_full)
    q_r = -expectation(diff, m.HR_full)
    return q_r - q_s - m.lam * expectation(diff, m.V)


def heat_bound(m):
    """2 ||H_S + lam V||, a uniform-in-time bound on |Q_R|."""
    return 2.0 * operator_norm(m.HS_full.matrix + m.lam * m.V.matrix)


def flux_expectation(m, phi, t):
    """omega(tau^t(Phi))."""
    return expectation(m.evolved_state(t), phi)


def integrated_flux(m, phi, t, nodes=64):
    """int_0^t omega(tau^s(Phi)) ds by Gauss-Legendre quadrature."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * t * (x + 1.0)
    vals = np.array([flux_expectation(m, phi, si) for si in s])
    return 0.5 * t * float(np.dot(w, vals))
