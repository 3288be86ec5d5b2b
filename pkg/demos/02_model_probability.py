"""
Point null against a uniform alternative
========================================

H0 fixes the rate at 1/2, H1 puts a uniform prior on it, and the two start
equally likely.  After five successes H1 has probability 16/19.  The next
trial may push it up or down, but on average it stays at 16/19.
"""

from fractions import Fraction

from reflectance import BetaParams, PointVsBeta, TrialRecord
from reflectance.conjugate import example2_ledger, lookahead_model_prob
from reflectance.exactnum import format_rat

h = PointVsBeta(Fraction(1, 2), BetaParams(1, 1), Fraction(1))
state = TrialRecord(successes=5, failures=0)

led = example2_ledger(h, state)
for name, value in led.rational_items():
    print(f"{name:>20}: {format_rat(value):>8}  ({float(value):.4f})")

###############################################################################
# Exchangeability lets the lookahead sum run over success counts, so even a
# long horizon is an exact finite sum.
for k in (1, 10, 100, 1000):
    print(f"expected p(H1) after {k} more trials:", format_rat(lookahead_model_prob(h, state, k)))
