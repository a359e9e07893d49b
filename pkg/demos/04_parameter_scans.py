"""
Scanning coupling and chain length
==================================

Walk a family of chains along the coupling axis and the size axis and watch
the distance between the long-time reservoir law and the reference law. At
these sizes the distance does not settle monotonically; a finite chain keeps
a memory of its initial energy.
"""

from fcslab import asymptotics as asy
from fcslab.config import ExperimentConfig
from fcslab.fixtures import FIXTURE_DIR

cfg = ExperimentConfig.load(FIXTURE_DIR / "chain_family.json")

lams = cfg.lambdas
family = [cfg.build(lam=v) for v in lams]
print(asy.scan(family, "lambda", lams).to_csv(timing=False))

sizes = [2, 3, 4, 5, 6]
family = [cfg.build(lam=0.05, reservoir_overrides={"n": n}) for n in sizes]
result = asy.scan(family, "size", sizes, workers=2)
print(result.to_csv(timing=False))
print("weakly decreasing along size:", asy.is_weakly_decreasing(result.column("kolmogorov")))
