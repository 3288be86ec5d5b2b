"""Exit criteria for the whole package.  Each test prints one PASS/FAIL line
(run with ``pytest -s`` to see them) and asserts the criterion."""

import random
import time
from fractions import Fraction as F

import pytest

from reflectance.conjugate import (
    BetaParams, PointVsBeta, TrialRecord, example2_ledger, expected_posterior_mixture,
    leading_successes_event, mixture_collapses_to, sequence_model, two_hypothesis_step_model,
)
from reflectance.model import Event, Updater, apply_updater, event_posterior, predictive
from reflectance.montecarlo import McConfig, mc_reflection_check
from reflectance.reflection import (
    bayes_event_rule, check_reflection_all_events, expected_posterior,
    expected_posterior_given_event, lookahead_reflection, perturbed_bayes, solve_unique_updater,
)

from _models import coin_model, random_model

EX2 = PointVsBeta(F(1, 2), BetaParams(1, 1), F(1))


def report(number, name, ok, elapsed, budget):
    ok = ok and elapsed < budget
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {name} ({elapsed:.2f}s, budget {budget}s)")
    return ok


def timed(fn):
    t0 = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - t0


def test_01_example1_exact():
    def go():
        p = BetaParams(2, 2)
        mix = expected_posterior_mixture(p, 2)
        return (mix.weights == (F(3, 10), F(2, 5), F(3, 10))
                and [c for _, c in mix.components] == [BetaParams(2, 4), BetaParams(3, 3), BetaParams(4, 2)]
                and mixture_collapses_to(mix, p))
    ok, dt = timed(go)
    assert report(1, "Example 1 mixture collapses to beta(2,2)", ok, dt, 1)


def test_02_example1_depth():
    def go():
        p = BetaParams(2, 2)
        mix = expected_posterior_mixture(p, 100)
        return len(mix) == 101 and mixture_collapses_to(mix, p)
    ok, dt = timed(go)
    assert report(2, "101-component mixture collapses to beta(2,2)", ok, dt, 5)


def test_03_example2_ledger():
    def go():
        led = example2_ledger(EX2, TrialRecord(5, 0))
        return (led.prob_alt == F(16, 19) and led.odds_alt == F(16, 3)
                and led.alt_posterior == BetaParams(6, 1)
                and (led.p_success, led.p_failure) == (F(213, 266), F(53, 266))
                and (led.bf_success, led.bf_failure) == (F(12, 7), F(2, 7))
                and led.odds_after_success == F(192, 21) and led.odds_after_failure == F(32, 21)
                and (led.prob_after_success, led.prob_after_failure) == (F(192, 213), F(32, 53))
                and led.expected_prob_alt == F(16, 19))
    ok, dt = timed(go)
    assert report(3, "Example 2 ledger exact", ok, dt, 1)


def test_04_unconditional_reflection():
    rng = random.Random(20240401)

    def go():
        models = [random_model(rng) for _ in range(200)]
        return all(expected_posterior(m, Updater.bayes()) == m.prior for m in models)
    ok, dt = timed(go)
    assert report(4, "E[posterior] = prior on 200 random models", ok, dt, 10)


def test_05_event_conditional_reflection():
    rng = random.Random(5)

    def go():
        for k in range(20):
            m = random_model(rng, max_m=4, max_n=10, min_n=10 if k < 3 else 2)
            rep = check_reflection_all_events(m, Updater.bayes())
            if not rep.holds:
                return False
            # independent re-check of a handful of events straight from the definitions
            pred = predictive(m)
            for mask in rng.sample(range(1, 1 << m.n_outcomes), min(10, 2 ** m.n_outcomes - 1)):
                xi = Event.from_mask(mask)
                if sum(pred[i] for i in xi):
                    if expected_posterior_given_event(m, Updater.bayes(), xi) != event_posterior(m, xi):
                        return False
        nondegenerate = [coin_model()] + [random_model(rng, 3, 10, 2, allow_zero=False, min_m=2) for _ in range(5)]
        for u in (Updater.tempered(2), Updater.tempered(3), Updater.noop()):
            for m in nondegenerate:
                rep = check_reflection_all_events(m, u)
                if not rep.violating_events:
                    return False
                for ev, gap in rep.violating_events[:25]:
                    again = tuple(a - b for a, b in zip(expected_posterior_given_event(m, u, ev),
                                                        event_posterior(m, ev)))
                    if again != gap or not any(gap):
                        return False
        return True
    ok, dt = timed(go)
    assert report(5, "conditional identity on all events; violations for tempered/noop", ok, dt, 60)


def test_06_uniqueness():
    rng = random.Random(6)

    def go():
        models = [random_model(rng, 4, 7) for _ in range(30)]
        from reflectance.model import FiniteModel
        models.append(FiniteModel(("t1", "t2"), ("y1", "y2", "y3"), (F(1, 4), F(3, 4)),
                                  ((F(1, 2), F(1, 2), 0), (F(1, 3), F(2, 3), 0))))
        saw_free = False
        for m in models:
            pred = predictive(m)
            sol = solve_unique_updater(pred, bayes_event_rule(m))
            if not sol.consistent:
                return False
            for i, p in enumerate(pred):
                if p and sol.pinned[i] != apply_updater(m, Updater.bayes(), i):
                    return False
                if not p and i not in sol.free_outcomes:
                    return False
            saw_free |= bool(sol.free_outcomes)
            for i in (i for i, p in enumerate(pred) if p):
                delta = F(rng.choice([-1, 1]) * rng.randint(1, 20), rng.randint(1, 20))
                j = rng.randrange(m.n_params)
                bad = solve_unique_updater(pred, bayes_event_rule(m), perturbed_bayes(m, i, j, delta))
                if bad.consistent or bad.witness is None or bad.witness_gap[j] != delta:
                    return False
        return saw_free
    ok, dt = timed(go)
    assert report(6, "Bayes pinned uniquely; perturbations detected with witnesses", ok, dt, 10)


def test_07_tower_property():
    rng = random.Random(7)

    def go():
        for _ in range(20):
            m = random_model(rng)
            for k in (1, 2, 3):
                if lookahead_reflection(m, k) != m.prior:
                    return False
        step = two_hypothesis_step_model(EX2, TrialRecord(5, 0))
        return step.prior == (F(3, 19), F(16, 19)) and lookahead_reflection(step, 2) == step.prior
    ok, dt = timed(go)
    assert report(7, "k-step lookahead returns the prior (k = 1, 2, 3; Example 2 state k = 2)", ok, dt, 30)


def test_08_monte_carlo():
    def go():
        cfg = McConfig(seed=42, replications=10_000, grid=(F(1, 4), F(1, 2), F(3, 4)), sigma_level=3)
        p = BetaParams(2, 2)
        bayes = mc_reflection_check(p, 20, Updater.bayes(), cfg)
        tempered = mc_reflection_check(p, 20, Updater.tempered(3), cfg)
        again = mc_reflection_check(p, 20, Updater.bayes(), cfg)
        again_t = mc_reflection_check(p, 20, Updater.tempered(3), cfg)
        return (bayes.overall_pass and not tempered.overall_pass
                and bayes.to_json() == again.to_json() and tempered.to_json() == again_t.to_json())
    ok, dt = timed(go)
    assert report(8, "Monte Carlo: Bayes passes, tempered(3) fails at 3 sigma, deterministic", ok, dt, 30)


def test_09_cross_module():
    def go():
        model = sequence_model(EX2, 5)
        xi = Event(frozenset(leading_successes_event(model, 5)))
        post = event_posterior(model, xi)
        return model.n_outcomes == 32 and post[1] == F(16, 19) == example2_ledger(EX2, TrialRecord(5, 0)).prob_alt
    ok, dt = timed(go)
    assert report(9, "32-outcome sequence model reproduces 16/19", ok, dt, 1)
