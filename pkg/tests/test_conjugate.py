import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from reflectance.conjugate import (
    BetaMixture, BetaParams, PointVsBeta, TrialRecord, beta_binomial_pmf, beta_cdf, beta_pdf_poly,
    example2_ledger, expected_model_prob, expected_posterior_mixture, leading_successes_event,
    lookahead_model_prob, marginal_likelihoods, mixture_collapses_to, mixture_pdf_poly,
    model_posterior_prob, next_obs_bayes_factor, next_obs_predictive, posterior_params,
    sequence_model, two_hypothesis_step_model,
)
from reflectance.exactnum import Poly, beta_fn
from reflectance.model import Event, Updater, event_posterior
from reflectance.reflection import expected_posterior_given_event, lookahead_reflection

EX2 = PointVsBeta(F(1, 2), BetaParams(1, 1), F(1))
FIVE = TrialRecord(5, 0)


def test_beta_pdf_poly_examples():
    assert beta_pdf_poly(BetaParams(1, 1)) == Poly([1])
    assert beta_pdf_poly(BetaParams(2, 2)) == Poly([0, 6, -6])
    assert beta_pdf_poly(BetaParams(6, 1)) == Poly([0, 0, 0, 0, 0, 6])


def test_beta_pdf_matches_direct_evaluation():
    for a in range(1, 7):
        for b in range(1, 7):
            x = F(2, 7)
            direct = x ** (a - 1) * (1 - x) ** (b - 1) / beta_fn(a, b)
            assert beta_pdf_poly(BetaParams(a, b))(x) == direct


def test_beta_binomial_pmf_examples():
    p = BetaParams(2, 2)
    assert [beta_binomial_pmf(p, 2, s) for s in range(3)] == [F(3, 10), F(4, 10), F(3, 10)]
    assert beta_binomial_pmf(BetaParams(1, 1), 5, 5) == F(1, 6)
    assert beta_binomial_pmf(BetaParams(6, 1), 1, 1) == F(6, 7)
    with pytest.raises(ValueError):
        beta_binomial_pmf(p, 2, 3)


def test_beta_binomial_pmf_sums_to_one():
    for a in range(1, 9):
        for b in range(1, 9):
            for n in range(13):
                assert sum(beta_binomial_pmf(BetaParams(a, b), n, s) for s in range(n + 1)) == 1


def test_posterior_params():
    assert posterior_params(BetaParams(1, 1), TrialRecord(5, 0)) == BetaParams(6, 1)
    assert posterior_params(BetaParams(2, 2), TrialRecord()) == BetaParams(2, 2)
    assert posterior_params(BetaParams(2, 2), TrialRecord(2, 0)) == BetaParams(4, 2)


def test_expected_posterior_mixture_examples():
    mix = expected_posterior_mixture(BetaParams(2, 2), 2)
    assert mix.components == ((F(3, 10), BetaParams(2, 4)), (F(2, 5), BetaParams(3, 3)),
                              (F(3, 10), BetaParams(4, 2)))
    assert len(expected_posterior_mixture(BetaParams(2, 2), 100)) == 101
    assert expected_posterior_mixture(BetaParams(1, 1), 1).components == (
        (F(1, 2), BetaParams(1, 2)), (F(1, 2), BetaParams(2, 1)))


def test_mixture_collapse_examples():
    assert mixture_collapses_to(expected_posterior_mixture(BetaParams(2, 2), 2), BetaParams(2, 2))
    assert mixture_collapses_to(expected_posterior_mixture(BetaParams(2, 2), 100), BetaParams(2, 2))
    assert not mixture_collapses_to(BetaMixture(((F(1), BetaParams(3, 3)),)), BetaParams(2, 2))


def test_mixture_collapse_exhaustive():
    for a in range(1, 7):
        for b in range(1, 7):
            for n in range(1, 26):
                p = BetaParams(a, b)
                assert mixture_collapses_to(expected_posterior_mixture(p, n), p)


def test_mixture_validation():
    with pytest.raises(ValueError):
        BetaMixture(((F(1, 2), BetaParams(1, 1)),))
    with pytest.raises(ValueError):
        BetaMixture(((F(1, 2), BetaParams(1, 1)), (F(1, 2), BetaParams(1, 1))))
    with pytest.raises(ValueError):
        BetaParams(0, 1)


def test_beta_cdf():
    assert beta_cdf(BetaParams(2, 2), F(1, 2)) == F(1, 2)
    assert beta_cdf(BetaParams(2, 2), F(1, 4)) == F(5, 32)
    assert beta_cdf(BetaParams(3, 5), 1) == 1


def test_model_posterior_prob_examples():
    assert model_posterior_prob(EX2, FIVE) == (F(16, 19), F(16, 3))
    assert model_posterior_prob(EX2, TrialRecord())[0] == F(1, 2)
    # B(2,1)/B(1,1) = 1/2 against (1/2)^1
    assert beta_fn(2, 1) / beta_fn(1, 1) == F(1, 2)
    assert model_posterior_prob(EX2, TrialRecord(1, 0)) == (F(1, 2), F(1))


def test_next_obs_predictive_examples():
    assert next_obs_predictive(EX2, FIVE) == (F(213, 266), F(53, 266))
    assert F(1, 2) * F(3, 19) + F(6, 7) * F(16, 19) == F(213, 266)
    assert next_obs_predictive(EX2, TrialRecord()) == (F(1, 2), F(1, 2))
    assert next_obs_predictive(EX2, TrialRecord(1, 0))[0] == F(1, 2) * F(1, 2) + F(2, 3) * F(1, 2) == F(7, 12)


def test_next_obs_bayes_factor_examples():
    assert next_obs_bayes_factor(EX2, FIVE, True) == F(12, 7)
    assert next_obs_bayes_factor(EX2, FIVE, False) == F(2, 7)
    assert next_obs_bayes_factor(EX2, TrialRecord(), True) == 1


def test_branch_posteriors():
    assert model_posterior_prob(EX2, TrialRecord(6, 0)) == (F(192, 213), F(192, 21))
    assert model_posterior_prob(EX2, TrialRecord(5, 1)) == (F(32, 53), F(32, 21))
    assert F(16, 3) * F(12, 7) == F(192, 21)


def test_expected_model_prob_examples():
    assert F(192, 213) * F(213, 266) + F(32, 53) * F(53, 266) == F(16, 19)
    assert expected_model_prob(EX2, FIVE) == F(16, 19)
    assert expected_model_prob(EX2, TrialRecord()) == F(1, 2)
    t = TrialRecord(3, 1)
    # two-branch enumeration from marginal likelihoods alone
    prior1 = F(1, 2)
    m0, m1 = marginal_likelihoods(EX2, t)
    branch = F(0)
    for nxt in (TrialRecord(4, 1), TrialRecord(3, 2)):
        b0, b1 = marginal_likelihoods(EX2, nxt)
        p_branch = ((1 - prior1) * b0 + prior1 * b1) / ((1 - prior1) * m0 + prior1 * m1)
        post = prior1 * b1 / ((1 - prior1) * b0 + prior1 * b1)
        branch += post * p_branch
    assert branch == expected_model_prob(EX2, t) == model_posterior_prob(EX2, t)[0]


@st.composite
def hypotheses(draw):
    den = draw(st.integers(2, 12))
    num = draw(st.integers(1, den - 1))
    return PointVsBeta(F(num, den), BetaParams(draw(st.integers(1, 5)), draw(st.integers(1, 5))),
                       draw(st.fractions(min_value=F(1, 10), max_value=10, max_denominator=20)))


@settings(max_examples=60, deadline=None)
@given(hypotheses())
def test_model_probability_martingale(h):
    for n in range(11):
        for s in range(n + 1):
            t = TrialRecord(s, n - s)
            assert expected_model_prob(h, t) == model_posterior_prob(h, t)[0]


@settings(max_examples=40, deadline=None)
@given(hypotheses(), st.lists(st.integers(0, 1), max_size=8))
def test_beta_ratio_matches_sequential_product(h, seq):
    prob = F(1)
    t = TrialRecord()
    for y in seq:
        post = posterior_params(h.alt_prior, t)
        mean = F(post.a, post.a + post.b)
        prob *= mean if y else 1 - mean
        t = t.add(bool(y))
    assert marginal_likelihoods(h, t)[1] == prob


def test_sequence_model_reproduces_16_over_19():
    model = sequence_model(EX2, 5)
    assert model.n_outcomes == 32
    xi = Event(frozenset(leading_successes_event(model, 5)))
    assert event_posterior(model, xi) == (F(3, 19), F(16, 19))


def test_six_flip_event_conditional():
    model = sequence_model(EX2, 6)
    xi = Event(frozenset(leading_successes_event(model, 5)))
    assert len(xi) == 2
    got = expected_posterior_given_event(model, Updater.bayes(), xi)
    assert got[1] == F(16, 19)


def test_step_model_lookahead():
    m = two_hypothesis_step_model(EX2, FIVE)
    assert m.prior == (F(3, 19), F(16, 19))
    assert lookahead_reflection(m, 2) == m.prior


@pytest.mark.parametrize("k", [0, 1, 2, 10, 100])
def test_lookahead_model_prob(k):
    assert lookahead_model_prob(EX2, FIVE, k) == F(16, 19)


def test_example2_ledger():
    led = example2_ledger(EX2, FIVE)
    assert led.alt_posterior == BetaParams(6, 1)
    assert led.prob_after_success == F(192, 213) and led.prob_after_failure == F(32, 53)
    assert led.expected_prob_alt == led.prob_alt == F(16, 19)


def test_trial_record_from_sequence():
    assert TrialRecord.from_sequence([1, 1, 0, 1]) == TrialRecord(3, 1)
    with pytest.raises(ValueError):
        TrialRecord.from_sequence([1, 2])
