"""
The same statistics from relative modular operators
===================================================

The reservoir statistics can also be read off the spectral measure of
log Delta for the evolved reservoir state relative to the initial one. The
two constructions agree to rounding error.
"""

import numpy as np

from fcslab import calF, char_function, fcs_reservoir_direct, fcs_reservoir_modular
from fcslab.builders import fixture_q1r3
from fcslab.fcs import atom_mismatch

m = fixture_q1r3(lam=0.1)
t = 5.0
direct = fcs_reservoir_direct(m, t)
modular = fcs_reservoir_modular(m, t)
print(f"atoms: direct {len(direct)}, modular {len(modular)}")
print(f"largest weight mismatch: {atom_mismatch(direct, modular):.2e}")

# On the imaginary axis the generating function is the characteristic function.
gammas = np.linspace(-3, 3, 7)
cf = char_function(direct, gammas)
for g, c in zip(gammas, cf):
    f = calF(m, t, 1j * g / m.beta)
    print(f"gamma {g:+.1f}: calF {f.real:+.6f}{f.imag:+.6f}i   charfun {c.real:+.6f}{c.imag:+.6f}i")

# On the real axis it stays inside the strip bound 1 + (d_S - 1) alpha.
for a in (0.25, 0.5, 1.0):
    print(f"alpha {a}: |calF| = {abs(calF(m, t, a)):.6f} <= {1 + (m.d_S - 1) * a}")
