"""Liouville-space (GNS) machinery for a confined system.

The GNS space is the space of d x d matrices with inner product tr(X* Y); a
Liouville vector is simply a d x d complex ndarray. Superoperators are kept as
sums of sandwiches ``X -> c L X R`` and only materialized as d^2 x d^2 matrices
on request.

Standard dictionary for the confined case:

==========================  ====================================
pi(A)                       X -> A X
J                           X -> X*
J pi(A) J                   X -> X A*
Delta_{zeta|xi}             X -> zeta X xi^{-1}
L_0, L_lam                  X -> H X - X H  (H = H_0, H_lam)
L_0 + lam pi(V)             X -> H_lam X - X H_0
hat L_lam                   X -> H_lam X - X (1 (x) H_R)
==========================  ====================================
"""

import threading

import numpy as np

from .errors import DomainError, ValidationError
from .linalg import (
    as_matrix,
    expm_hermitian,
    hermitize,
    positive_power,
    spectral_resolution,
)


def inner(x, y):
    """<X|Y> = tr(X* Y)."""
    return complex(np.vdot(x, y))


def hs_norm(x):
    return float(np.linalg.norm(x))


class Superoperator:
    """Linear map X -> sum_k c_k L_k X R_k on d x d matrices.

    ``None`` stands for the identity factor. Composition (``@``), sums,
    differences and scalar multiples stay in sandwich form.
    """

    def __init__(self, dim, terms):
        self.dim = dim
        self.terms = tuple(
            (complex(c), None if l is None else as_matrix(l), None if r is None else as_matrix(r))
            for c, l, r in terms
        )
        for _, l, r in self.terms:
            for f in (l, r):
                if f is not None and f.shape != (dim, dim):
                    raise ValidationError(f"factor of shape {f.shape} on a {dim}-dim space")
        self._dense = None
        self._lock = threading.Lock()

    @classmethod
    def sandwich(cls, left=None, right=None, coeff=1.0, dim=None):
        if dim is None:
            dim = (left if left is not None else right).shape[0]
        return cls(dim, [(coeff, left, right)])

    @classmethod
    def identity(cls, dim):
        return cls(dim, [(1.0, None, None)])

    def __call__(self, x):
        x = np.asarray(x)
        if x.shape != (self.dim, self.dim):
            raise ValidationError(f"vector of shape {x.shape} on a {self.dim}-dim space")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, l, r in self.terms:
            y = x if l is None else l @ x
            y = y if r is None else y @ r
            out += c * y
        return out

    def __matmul__(self, other):
        if not isinstance(other, Superoperator):
            return NotImplemented
        terms = []
        for c1, l1, r1 in self.terms:
            for c2, l2, r2 in other.terms:
                l = l2 if l1 is None else (l1 if l2 is None else l1 @ l2)
                r = r1 if r2 is None else (r2 if r1 is None else r2 @ r1)
                terms.append((c1 * c2, l, r))
        return Superoperator(self.dim, terms)

    def __add__(self, other):
        return Superoperator(self.dim, self.terms + other.terms)

    def __neg__(self):
        return Superoperator(self.dim, [(-c, l, r) for c, l, r in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar):
        return Superoperator(self.dim, [(scalar * c, l, r) for c, l, r in self.terms])

    def adjoint(self):
        """Hilbert-Schmidt adjoint: X -> sum conj(c) L* X R*."""
        return Superoperator(
            self.dim,
            [
                (np.conj(c), None if l is None else l.conj().T, None if r is None else r.conj().T)
                for c, l, r in self.terms
            ],
        )

    def dense(self):
        """d^2 x d^2 matrix acting on row-major ``X.ravel()``; computed once."""
        if self._dense is None:
            with self._lock:
                if self._dense is None:
                    eye = np.eye(self.dim)
                    m = np.zeros((self.dim**2, self.dim**2), dtype=complex)
                    for c, l, r in self.terms:
                        m += c * np.kron(eye if l is None else l, eye if r is None else r.T)
                    self._dense = m
        return self._dense

    def apply_dense(self, x):
        return (self.dense() @ np.asarray(x).ravel()).reshape(self.dim, self.dim)


class Liouvillean(Superoperator):
    """Generator X -> A X - X B with Hermitian A, B.

    ``exp(z)`` is the sandwich exp(zA) . exp(-zB); ``kernel_projector`` is the
    long-time (Cesaro) average of exp(itL), i.e. the projection onto ker L.
    """

    def __init__(self, left_generator, right_generator):
        self.left_generator = as_matrix(left_generator)
        self.right_generator = as_matrix(right_generator)
        dim = self.left_generator.shape[0]
        super().__init__(dim, [(1.0, self.left_generator, None), (-1.0, None, self.right_generator)])
        self._res_left = spectral_resolution(self.left_generator)
        self._res_right = (
            self._res_left
            if right_generator is left_generator
            else spectral_resolution(self.right_generator)
        )

    def exp(self, z):
        return Superoperator.sandwich(
            expm_hermitian(self._res_left, z), expm_hermitian(self._res_right, -z)
        )

    def propagator(self, t):
        """exp(itL)."""
        return self.exp(1j * t)

    def spectrum(self):
        """Eigenvalues a - b over all pairs, with multiplicity, ascending."""
        a, b = self._res_left.raw_eigenvalues, self._res_right.raw_eigenvalues
        return np.sort((a[:, None] - b[None, :]).ravel())

    def kernel_projector(self, tol=None):
        rl, rr = self._res_left, self._res_right
        if tol is None:
            scale = max(1.0, float(np.max(np.abs(rl.eigenvalues))), float(np.max(np.abs(rr.eigenvalues))))
            tol = 1e-9 * scale
        terms = []
        pl, pr = rl.projectors, rr.projectors
        for i, a in enumerate(rl.eigenvalues):
            for j, b in enumerate(rr.eigenvalues):
                if abs(a - b) <= tol:
                    terms.append((1.0, pl[i], pr[j]))
        if not terms:
            return Superoperator(self.dim, [(0.0, None, None)])
        return Superoperator(self.dim, terms)


def left_action(a):
    """pi(A): X -> A X."""
    a = as_matrix(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}", "A")
    return Superoperator.sandwich(left=a)


def right_action(b):
    """X -> X B, which equals J pi(B*) J."""
    b = as_matrix(b)
    return Superoperator.sandwich(right=b)


def commutant_image(a):
    """J pi(A) J, i.e. X -> X A*."""
    return right_action(as_matrix(a).conj().T)


def modular_conjugation(x):
    """J X = X*. Anti-linear, involutive, maps positive matrices to themselves."""
    return np.asarray(x).conj().T


def relative_modular_operator(zeta, xi):
    """Delta_{zeta|xi}: X -> zeta X xi^{-1}, for positive definite xi."""
    return Superoperator.sandwich(as_matrix(zeta), _inverse_power(xi, 1.0))


def _inverse_power(xi, alpha):
    res = spectral_resolution(hermitize(as_matrix(xi)))
    ev = res.eigenvalues
    if ev[0] <= 1e-14 * max(ev[-1], 0.0) or ev[0] <= 0:
        raise DomainError(f"xi must be positive definite (smallest eigenvalue {float(ev[0])!r})")
    return res.from_values(np.exp(-complex(alpha) * np.log(ev)))


def relative_modular_power(zeta, xi, alpha, x):
    """Delta_{zeta|xi}^alpha X = zeta^alpha X xi^{-alpha}."""
    za = positive_power(hermitize(as_matrix(zeta)), alpha)
    return za @ np.asarray(x) @ _inverse_power(xi, alpha)


def standard_liouvillean(m, which="coupled"):
    """L_0 (``free``), L_lam (``coupled``) or hat L_lam (``hat``)."""
    if which == "free":
        return Liouvillean(m.H_0.matrix, m.H_0.matrix)
    if which == "coupled":
        return Liouvillean(m.H_lam.matrix, m.H_lam.matrix)
    if which == "hat":
        return Liouvillean(m.H_lam.matrix, m.HR_full.matrix)
    if which == "perturbed":
        # L_0 + lam pi(V)
        return Liouvillean(m.H_lam.matrix, m.H_0.matrix)
    if which == "reservoir":
        return Liouvillean(m.HR_full.matrix, m.HR_full.matrix)
    raise ValueError(f"unknown Liouvillean {which!r}")


def cocycle_unitary(m, t):
    """u_t = exp(itH_lam) exp(-itH_0)."""
    return expm_hermitian(m.H_lam, 1j * t) @ expm_hermitian(m.H_0, -1j * t)


def cocycle(m, t):
    """Gamma_lam(t) = exp(it(L_0 + lam pi(V))) exp(-itL_0), i.e. left multiplication by u_t."""
    return left_action(cocycle_unitary(m, t))


def evolved_eta(m, t):
    """Density of eta o tau_lam^{-t}: exp(itH_lam) eta exp(-itH_lam)."""
    return hermitize(m.propagate(m.eta.matrix, -t))


def omega_vector(m):
    """Omega = rho_S^{1/2} (x) omega_R^{1/2}, the cone representative of the initial state."""
    return np.kron(positive_power(m.rho_S, 0.5), positive_power(m.omega_R, 0.5))


def eta_vector(m):
    """Omega_eta = 1 (x) omega_R^{1/2}."""
    return np.kron(np.eye(m.d_S), positive_power(m.omega_R, 0.5))


def omega0_vector(m):
    return positive_power(m.omega_0, 0.5)


def omega_hat(m):
    """pi(rho_S^{1/2} (x) 1) Omega = rho_S (x) omega_R^{1/2}."""
    return np.kron(m.rho_S.matrix, positive_power(m.omega_R, 0.5))


def araki_vector(m):
    """Omega_lam = exp(-beta/2 (L_0 + lam pi(V))) Omega_0 = exp(-beta H_lam / 2) / sqrt(Z_0).

    Evaluated in the closed form with shifted exponents.
    """
    from .linalg import log_partition_function

    res = m.H_lam.resolution
    e0 = res.eigenvalues[0]
    half = res.from_values(np.exp(-0.5 * m.beta * (res.eigenvalues - e0)))
    log_z0 = log_partition_function(m.H_0, m.beta)
    return hermitize(half * np.exp(-0.5 * m.beta * e0 - 0.5 * log_z0))


def araki_vector_perturbative(m):
    """Same vector built literally as exp(-beta/2 (L_0 + lam pi(V))) applied to Omega_0."""
    gen = standard_liouvillean(m, "perturbed")
    return gen.exp(-0.5 * m.beta)(omega0_vector(m))


def state_from_vector(x):
    """Normalized density X X* / ||X||^2 of the vector functional A -> <X|AX>."""
    x = np.asarray(x)
    rho = x @ x.conj().T
    return hermitize(rho / np.trace(rho).real)


def kernel_projector(m):
    """Projector onto ker L_lam: X -> sum_mu Pi_mu X Pi_mu (Cesaro limit of exp(itL_lam))."""
    return standard_liouvillean(m, "coupled").kernel_projector()
