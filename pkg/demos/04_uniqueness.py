"""
Only one rule fits
==================

Given the Bayes posterior for every event, the singleton events already fix
the per-outcome rule.  Outcomes of probability zero are left free.  Changing
any pinned value breaks the constraint for that outcome.
"""

from fractions import Fraction

from reflectance import Event, FiniteModel, predictive, solve_unique_updater
from reflectance.reflection import bayes_event_rule, perturb_and_detect, perturbed_bayes

model = FiniteModel(
    ("t1", "t2"), ("y1", "y2", "never"),
    (Fraction(1, 4), Fraction(3, 4)),
    ((Fraction(1, 2), Fraction(1, 2), 0), (Fraction(1, 3), Fraction(2, 3), 0)),
)
pred = predictive(model)
sol = solve_unique_updater(pred, bayes_event_rule(model))
print(sol.to_dict(model.outcome_labels))

bent = perturbed_bayes(model, 1, 0, Fraction(1, 10))
print(solve_unique_updater(pred, bayes_event_rule(model), bent).to_dict(model.outcome_labels))

###############################################################################
# The same shift seen through a larger event is diluted by p(y2)/p(event).
det = perturb_and_detect(model, 1, 0, Fraction(1, 10))
print("singleton gap:", det.gap)
det = perturb_and_detect(model, 1, 0, Fraction(1, 10), Event(frozenset([0, 1])))
print("gap on {y1, y2}:", det.gap)
