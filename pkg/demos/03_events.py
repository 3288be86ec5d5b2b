"""
Reflection on every event
=========================

Bayes' rule keeps the conditional identity on every event of positive
probability.  A tempered rule (likelihood squared) fails even
unconditionally.  The no-op rule passes unconditionally and then fails on
events.
"""

from pathlib import Path

from reflectance import Updater, check_reflection_all_events, load_model
from reflectance.exactnum import format_rat

model = load_model(Path(__file__).with_name("coin.json"))

for rule in ("bayes", "tempered:2", "noop"):
    report = check_reflection_all_events(model, Updater.parse(rule))
    print(report.summary)
    for event, gap in report.violating_events:
        print("   ", event.labels(model), [format_rat(g) for g in gap])
