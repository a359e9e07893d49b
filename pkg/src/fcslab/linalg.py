"""Dense Hermitian linear algebra.

Every matrix function in the package is evaluated through an eigendecomposition
(never scaling-and-squaring), so that ``exp(itH)``, ``exp(-beta H / 2)`` and
fractional powers of the same operator are mutually consistent to rounding.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, ValidationError

HERMITIAN_RTOL = 1e-12
DEFAULT_DEGENERACY_RTOL = 1e-9


def hermitize(a):
    a = np.asarray(a)
    return 0.5 * (a + a.conj().T)


def as_matrix(a):
    """Return the dense complex matrix behind an observable, state or array."""
    if isinstance(a, (HermitianObservable, DensityMatrix)):
        return a.matrix
    return np.asarray(a, dtype=complex)


def _square(a, field):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}", field)
    if a.shape[0] < 1:
        raise ValidationError("dimension must be at least 1", field)
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries", field)


def hermiticity_defect(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def check_hermitian(a, field=None, rtol=HERMITIAN_RTOL):
    a = np.asarray(a, dtype=complex)
    _square(a, field)
    scale = float(np.max(np.abs(a)))
    defect = hermiticity_defect(a)
    if defect > rtol * max(scale, np.finfo(float).tiny):
        raise ValidationError(
            f"matrix is not Hermitian (defect {defect:.3g}, scale {scale:.3g})", field
        )
    return a


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


class HermitianObservable:
    """A dense Hermitian matrix with a lazily computed spectral resolution."""

    def __init__(self, matrix, field=None):
        if isinstance(matrix, HermitianObservable):
            matrix = matrix.matrix
        a = check_hermitian(matrix, field)
        self.matrix = _frozen(hermitize(a))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"HermitianObservable(dim={self.dim})"

    @cached_property
    def resolution(self):
        return spectral_resolution(self)

    @cached_property
    def norm(self):
        """Operator norm (largest singular value)."""
        return operator_norm(self.matrix)


class DensityMatrix:
    """Positive semidefinite matrix; unit trace unless ``normalized`` is False.

    Unnormalized instances represent positive functionals such as ``1 (x) omega_R``.
    """

    def __init__(self, matrix, normalized=True, field=None, atol=1e-12):
        a = check_hermitian(as_matrix(matrix), field)
        a = hermitize(a)
        evals = np.linalg.eigvalsh(a)
        scale = max(1.0, float(np.max(np.abs(evals))))
        if evals[0] < -atol * scale:
            raise ValidationError(
                f"matrix is not positive semidefinite (min eigenvalue {evals[0]:.3g})",
                field,
            )
        tr = float(np.trace(a).real)
        if normalized and abs(tr - 1.0) > atol * max(1, a.shape[0]):
            raise ValidationError(f"trace is {tr!r}, expected 1", field)
        self.matrix = _frozen(a)
        self.normalized = normalized

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, normalized={self.normalized})"

    @cached_property
    def resolution(self):
        return spectral_resolution(self)

    def expect(self, a):
        """tr(rho A), real part for Hermitian A."""
        return np.trace(self.matrix @ as_matrix(a))


@dataclass(frozen=True)
class SpectralResolution:
    """Distinct eigenvalues (ascending) with their orthogonal projectors.

    ``basis`` holds an orthonormal eigenbasis as columns and ``labels[k]`` is the
    group index of column ``k``; projectors are ``basis[:, labels == j]`` outer
    products.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray
    labels: np.ndarray
    raw_eigenvalues: np.ndarray

    @property
    def dim(self):
        return self.basis.shape[0]

    @cached_property
    def projectors(self):
        out = np.empty((len(self.eigenvalues), self.dim, self.dim), dtype=complex)
        for j in range(len(self.eigenvalues)):
            v = self.basis[:, self.labels == j]
            out[j] = v @ v.conj().T
        return out

    def __len__(self):
        return len(self.eigenvalues)

    def __iter__(self):
        return iter(zip(self.eigenvalues, self.projectors))

    def from_values(self, values):
        """Assemble sum_j values[j] P_j from one value per distinct eigenvalue."""
        d = np.asarray(values)[self.labels]
        return (self.basis * d) @ self.basis.conj().T

    @property
    def is_singular(self):
        return bool(self.eigenvalues[0] <= 0.0)


def default_degeneracy_tol(evals):
    radius = float(np.max(np.abs(evals))) if len(evals) else 0.0
    return DEFAULT_DEGENERACY_RTOL * max(1.0, radius)


def group_sorted(evals, tol):
    """Group ascending eigenvalues whose consecutive gaps are <= tol."""
    labels = np.zeros(len(evals), dtype=int)
    if len(evals) > 1:
        labels[1:] = np.cumsum(np.diff(evals) > tol)
    return labels


def spectral_resolution(h, degeneracy_tol=None):
    """Spectral resolution of a Hermitian matrix with degenerate levels merged.

    Eigenvalues closer than ``degeneracy_tol`` (chained) form one group; the
    reported eigenvalue is the group mean.
    """
    a = as_matrix(h)
    if not isinstance(h, (HermitianObservable, DensityMatrix)):
        a = check_hermitian(a)
    if degeneracy_tol is not None and not degeneracy_tol > 0:
        raise ValidationError("degeneracy_tol must be positive", "degeneracy_tol")
    evals, vecs = np.linalg.eigh(hermitize(a))
    tol = default_degeneracy_tol(evals) if degeneracy_tol is None else degeneracy_tol
    labels = group_sorted(evals, tol)
    groups = np.array([evals[labels == j].mean() for j in range(labels[-1] + 1)])
    return SpectralResolution(groups, vecs, labels, evals)


def _resolution(h):
    if isinstance(h, SpectralResolution):
        return h
    if isinstance(h, (HermitianObservable, DensityMatrix)):
        return h.resolution
    return spectral_resolution(h)


def matrix_function(res, f):
    """Return sum_e f(e) P_e.

    ``f`` is called on each distinct eigenvalue; a non-finite result or an
    exception raises :class:`DomainError` naming the offending eigenvalue.
    """
    res = _resolution(res)
    values = np.empty(len(res.eigenvalues), dtype=complex)
    with np.errstate(all="ignore"):
        for j, e in enumerate(res.eigenvalues):
            try:
                v = complex(f(e))
            except (ValueError, ZeroDivisionError, OverflowError) as exc:
                raise DomainError(f"function undefined at eigenvalue {float(e)!r}: {exc}") from exc
            if not np.isfinite(v):
                raise DomainError(f"function is not finite at eigenvalue {float(e)!r}")
            values[j] = v
    return res.from_values(values)


def expm_hermitian(h, z):
    """exp(z H) for Hermitian H and complex z, via the eigenbasis."""
    res = _resolution(h)
    return res.from_values(np.exp(z * res.eigenvalues))


def unitary(h, t):
    """exp(i t H)."""
    return expm_hermitian(h, 1j * t)


def positive_power(rho, alpha, support_rtol=1e-12):
    """rho**alpha for positive semidefinite rho.

    Eigenvalues at or below ``support_rtol * max eigenvalue`` are treated as the
    kernel. On the kernel ``0**alpha = 0`` for Re(alpha) > 0 and ``0**0 = 0``
    (so ``rho**0`` is the support projector). Negative or purely imaginary
    nonzero powers of a singular matrix raise :class:`DomainError`.
    """
    res = _resolution(rho)
    ev = res.eigenvalues
    cutoff = support_rtol * max(float(ev[-1]), np.finfo(float).tiny)
    if ev[0] < -cutoff * 1e3:
        raise DomainError(f"matrix is not positive semidefinite (eigenvalue {float(ev[0])!r})")
    kernel = ev <= cutoff
    alpha = complex(alpha)
    if kernel.any() and alpha != 0 and alpha.real <= 0:
        raise DomainError(
            f"power {alpha} of a singular matrix is undefined (kernel eigenvalue {float(ev[kernel][0])!r})"
        )
    values = np.zeros(len(ev), dtype=complex)
    values[~kernel] = np.exp(alpha * np.log(ev[~kernel]))
    return res.from_values(values)


def gibbs_state(h, beta):
    """exp(-beta H) / tr exp(-beta H), computed with shifted exponents."""
    res = _resolution(h)
    ev = res.eigenvalues
    ref = ev[0] if beta >= 0 else ev[-1]
    w = np.exp(-beta * (ev - ref))
    mult = np.bincount(res.labels, minlength=len(ev))
    w = w / np.dot(w, mult)
    return DensityMatrix(hermitize(res.from_values(w)))


def log_partition_function(h, beta):
    res = _resolution(h)
    ev = res.eigenvalues
    mult = np.bincount(res.labels, minlength=len(ev))
    ref = ev[0] if beta >= 0 else ev[-1]
    return float(-beta * ref + np.log(np.dot(mult, np.exp(-beta * (ev - ref)))))


def heisenberg_evolve(a, h, t):
    """tau^t(A) = exp(itH) A exp(-itH)."""
    am, hm = as_matrix(a), as_matrix(h)
    if am.shape != hm.shape:
        raise ValidationError(f"dimension mismatch {am.shape} vs {hm.shape}", "A")
    u = unitary(h, t)
    return HermitianObservable(hermitize(u @ am @ u.conj().T))


def operator_norm(a):
    return float(np.linalg.norm(as_matrix(a), 2))


def commutator(a, b):
    a, b = as_matrix(a), as_matrix(b)
    return a @ b - b @ a


def kron(*ops):
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, as_matrix(op))
    return out


def random_hermitian(dim, rng, scale=1.0):
    """GUE-like sample normalized so that E|H_ij|^2 ~ scale^2 / dim."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * hermitize(z) / np.sqrt(2 * dim)


def random_density_matrix(dim, rng, rank=None):
    rank = dim if rank is None else rank
    z = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = z @ z.conj().T
    return hermitize(rho / np.trace(rho).real)
