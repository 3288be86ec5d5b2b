"""
Sampling check of the continuous case
=====================================

With a continuous rate, the check is done on the posterior CDF at a few grid
points.  Its average over the prior predictive must equal the prior CDF.
Bayes passes at three standard errors.  Tempering the likelihood by 3 does not.
"""

from reflectance import BetaParams, Updater
from reflectance.montecarlo import McConfig, mc_reflection_check

cfg = McConfig(seed=42, replications=10_000)
for rule in (Updater.bayes(), Updater.tempered(3)):
    report = mc_reflection_check(BetaParams(2, 2), 20, rule, cfg)
    print(report.to_dict()["summary"])
    for p in report.points:
        z = (p.estimate - p.reference) / p.standard_error
        print(f"   {p.label}: {p.estimate:.4f} vs {p.reference:.4f}  z = {z:+.2f}")
