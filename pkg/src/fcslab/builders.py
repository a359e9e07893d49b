"""Named model builders: a small system and a few families of confined reservoirs.

Each builder returns a Hamiltonian together with the operator through which
the part couples; the interaction is ``V = A_S (x) B_R``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .linalg import gibbs_state, kron, random_hermitian
from .model import build_model

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

SYSTEM_BUILDERS = ("two_level",)
RESERVOIR_BUILDERS = ("spin_chain_reservoir", "random_reservoir", "truncated_oscillator")


@dataclass(frozen=True)
class NamedBuilder:
    name: str
    params: dict = field(default_factory=dict)

    @classmethod
    def coerce(cls, spec):
        if isinstance(spec, NamedBuilder):
            return spec
        if not isinstance(spec, dict) or "name" not in spec:
            raise ValidationError("builder needs a 'name'", "builder")
        return cls(spec["name"], dict(spec.get("params", {})))

    def to_dict(self):
        return {"name": self.name, "params": dict(self.params)}


def _positive_int(value, name, minimum=1):
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValidationError(f"must be an integer >= {minimum}, got {value!r}", name)
    return int(value)


def _real(value, name):
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"must be a real number, got {value!r}", name) from None
    if not np.isfinite(x):
        raise ValidationError("must be finite", name)
    return x


def site_operator(op, site, n):
    """op acting on ``site`` (1-based) of an n-site chain of qubits."""
    return kron(*[op if k == site else ID2 for k in range(1, n + 1)])


def two_level(gap=2.0, rho=(0.75, 0.25), beta=None):
    """H_S = diag(0, gap), coupling through sigma_x.

    ``rho`` is a list of populations, a full 2x2 matrix, or ``"gibbs"`` (which
    needs ``beta``).
    """
    gap = _real(gap, "gap")
    h = np.diag([0.0, gap]).astype(complex)
    if isinstance(rho, str):
        if rho != "gibbs":
            raise ValidationError(f"unknown initial state {rho!r}", "rho")
        if beta is None:
            raise ValidationError("'gibbs' needs beta", "rho")
        r = gibbs_state(h, beta).matrix
    else:
        r = np.asarray(rho, dtype=complex)
        if r.shape == (2,):
            r = np.diag(r)
        if r.shape != (2, 2):
            raise ValidationError(f"expected 2 populations or a 2x2 matrix, got shape {r.shape}", "rho")
    return h, r, SIGMA_X.copy()


def spin_chain_reservoir(n=3, h=1.0, g=0.3, interaction="ising", site=1):
    """Open chain of n qubits, H_R = (h/2) sum sigma_z + g sum_k I_k,k+1.

    ``interaction`` selects the nearest-neighbour term: ``ising`` (xx), ``xy``
    (xx + yy) or ``zz``. The system couples to sigma_x on ``site``.
    """
    n = _positive_int(n, "n")
    h, g = _real(h, "h"), _real(g, "g")
    site = _positive_int(site, "site")
    if site > n:
        raise ValidationError(f"site {site} outside a chain of {n}", "site")
    pairs = {"ising": (SIGMA_X,), "xy": (SIGMA_X, SIGMA_Y), "zz": (SIGMA_Z,)}
    if interaction not in pairs:
        raise ValidationError(f"unknown interaction {interaction!r}", "interaction")
    d = 2**n
    H = np.zeros((d, d), dtype=complex)
    for k in range(1, n + 1):
        H += 0.5 * h * site_operator(SIGMA_Z, k, n)
    for k in range(1, n):
        for p in pairs[interaction]:
            H += g * site_operator(p, k, n) @ site_operator(p, k + 1, n)
    return H, site_operator(SIGMA_X, site, n)


def random_reservoir(n=4, seed=0, scale=1.0):
    """Random Hermitian H_R of dimension n and a random coupling of unit norm."""
    n = _positive_int(n, "n")
    rng = np.random.default_rng(_positive_int(seed, "seed", 0))
    H = random_hermitian(n, rng, _real(scale, "scale"))
    B = random_hermitian(n, rng)
    return H, B / np.linalg.norm(B, 2)


def truncated_oscillator(cutoff=4, omega0=1.0):
    """omega0 * a^dagger a on ``cutoff`` levels, coupling through a + a^dagger."""
    cutoff = _positive_int(cutoff, "cutoff", 2)
    omega0 = _real(omega0, "omega0")
    a = np.diag(np.sqrt(np.arange(1, cutoff)), 1).astype(complex)
    return omega0 * np.diag(np.arange(cutoff)).astype(complex), a + a.conj().T


_RESERVOIRS = {
    "spin_chain_reservoir": spin_chain_reservoir,
    "random_reservoir": random_reservoir,
    "truncated_oscillator": truncated_oscillator,
}


def _call(fn, params, name):
    try:
        return fn(**params)
    except TypeError as exc:
        raise ValidationError(str(exc), name) from None


def build_named_model(system, reservoir, beta, lam):
    """Assemble a model from a system builder and a reservoir builder.

    Deterministic in the parameters (random reservoirs take an explicit seed).
    """
    system, reservoir = NamedBuilder.coerce(system), NamedBuilder.coerce(reservoir)
    if system.name not in SYSTEM_BUILDERS:
        raise ValidationError(f"unknown system builder {system.name!r}", "system.name")
    if reservoir.name not in _RESERVOIRS:
        raise ValidationError(f"unknown reservoir builder {reservoir.name!r}", "reservoir.name")
    sp = dict(system.params)
    if sp.get("rho") == "gibbs":
        sp["beta"] = beta
    h_s, rho_s, a_s = _call(two_level, sp, "system.params")
    h_r, b_r = _call(_RESERVOIRS[reservoir.name], reservoir.params, "reservoir.params")
    return build_model(h_s, rho_s, h_r, np.kron(a_s, b_r), lam, beta)


FIXTURE_SYSTEM = NamedBuilder("two_level", {"gap": 2.0, "rho": [0.75, 0.25]})
FIXTURE_RESERVOIR = NamedBuilder("spin_chain_reservoir", {"n": 3, "h": 1.0, "g": 0.3})


def fixture_q1r3(lam=0.1, beta=1.0):
    """Two-level system (gap 2) on a three-site chain; d = 16."""
    return build_named_model(FIXTURE_SYSTEM, FIXTURE_RESERVOIR, beta, lam)
