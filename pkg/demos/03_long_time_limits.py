"""
What the statistics look like after a long time
===============================================

A finite reservoir never forgets, so the long-time behaviour is a Cesaro
average. Here it is compared with a brute-force time average, with the law a
mixing reservoir would produce, and with the weak-coupling reference law
of the system energy change.
"""

from fcslab import asymptotics as asy
from fcslab.builders import fixture_q1r3
from fcslab.fcs import kolmogorov_distance

m = fixture_q1r3(lam=0.1)
ces = asy.cesaro_fcs(m)
avg = asy.time_averaged_fcs(m, T=2000.0, dt=0.05)
print(f"Cesaro vs time average over T = 2000: {kolmogorov_distance(ces, avg):.2e}")

ref = asy.double_limit_fcs(m)
print("\nreference law of E' - E:")
for x, w in zip(ref.locations, ref.weights):
    print(f"   {x:+.1f}: {w:.6f}")

for rep in asy.limit_reports(m):
    d = rep.distances
    print(f"\n{rep.mode}: Kolmogorov to reference {d['kolmogorov_to_P_S']:.4f}, "
          f"sup |cf difference| {d['cf_sup_to_P_S']:.4f}")
