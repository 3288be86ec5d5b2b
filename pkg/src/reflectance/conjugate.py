"""Beta-binomial machinery with exact rational results.

Beta parameters are positive integers, so every density is a polynomial in
theta with rational coefficients and every predictive probability is a
rational.  Two uses: the expected posterior of a beta prior as a mixture of
beta posteriors, and the comparison of a point null against a beta-prior
alternative.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Sequence

from .exactnum import Poly, beta_fn, binom, format_rat, parse_rat
from .model import FiniteModel


@dataclass(frozen=True, order=True)
class BetaParams:
    a: int
    b: int

    def __post_init__(self):
        if not (isinstance(self.a, int) and isinstance(self.b, int)) or self.a < 1 or self.b < 1:
            raise ValueError(f"beta parameters must be positive integers, got ({self.a}, {self.b})")

    def __str__(self) -> str:
        return f"beta({self.a},{self.b})"


@dataclass(frozen=True)
class TrialRecord:
    successes: int = 0
    failures: int = 0

    def __post_init__(self):
        if self.successes < 0 or self.failures < 0:
            raise ValueError("trial counts must be nonnegative")

    @property
    def n(self) -> int:
        return self.successes + self.failures

    @classmethod
    def from_sequence(cls, seq: Iterable[int]) -> TrialRecord:
        """Reduce a 0/1 sequence to counts; order is irrelevant for binomial data."""
        s = f = 0
        for k, y in enumerate(seq):
            if y == 1 and not isinstance(y, bool):
                s += 1
            elif y == 0 and not isinstance(y, bool):
                f += 1
            else:
                raise ValueError(f"sequence[{k}]: expected 0 or 1, got {y!r}")
        return cls(s, f)

    def add(self, success: bool) -> TrialRecord:
        return TrialRecord(self.successes + 1, self.failures) if success \
            else TrialRecord(self.successes, self.failures + 1)


@dataclass(frozen=True)
class BetaMixture:
    components: tuple[tuple[Fraction, BetaParams], ...]

    def __post_init__(self):
        comps = tuple((Fraction(w), p) for w, p in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(w <= 0 for w, _ in comps):
            raise ValueError("mixture weights must be positive")
        if sum((w for w, _ in comps), Fraction(0)) != 1:
            raise ValueError("mixture weights must sum to 1")
        if len({p for _, p in comps}) != len(comps):
            raise ValueError("mixture components must have distinct parameters")

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(w for w, _ in self.components)

    def __len__(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class PointVsBeta:
    """H0: theta = null_rate against H1: theta ~ beta(a, b), with prior odds of H1 over H0."""

    null_rate: Fraction
    alt_prior: BetaParams
    prior_odds_alt: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "null_rate", Fraction(self.null_rate))
        object.__setattr__(self, "prior_odds_alt", Fraction(self.prior_odds_alt))
        if not 0 < self.null_rate < 1:
            raise ValueError("null_rate must lie strictly between 0 and 1")
        if self.prior_odds_alt <= 0:
            raise ValueError("prior_odds_alt must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> PointVsBeta:
        try:
            alt = data["alt_prior"]
            return cls(
                parse_rat(data["null_rate"], "null_rate"),
                BetaParams(int(alt["a"]), int(alt["b"])),
                parse_rat(data.get("prior_odds_alt", "1"), "prior_odds_alt"),
            )
        except KeyError as exc:
            raise ValueError(f"{exc.args[0]}: missing field") from None

    def to_dict(self) -> dict:
        return {
            "null_rate": format_rat(self.null_rate),
            "alt_prior": {"a": self.alt_prior.a, "b": self.alt_prior.b},
            "prior_odds_alt": format_rat(self.prior_odds_alt),
        }


def beta_pdf_poly(p: BetaParams) -> Poly:
    """theta^(a-1) (1-theta)^(b-1) / B(a, b), expanded binomially."""
    a, b = p.a, p.b
    norm = beta_fn(a, b)
    coeffs = [Fraction(0)] * (a + b - 1)
    for k in range(b):
        coeffs[a - 1 + k] = Fraction((-1) ** k * binom(b - 1, k)) / norm
    return Poly(coeffs)


def beta_cdf(p: BetaParams, x: Fraction) -> Fraction:
    """Exact beta CDF at a rational point of [0, 1]."""
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0, 1]")
    return beta_pdf_poly(p).integrate(0, x)


def beta_binomial_pmf(p: BetaParams, n: int, s: int) -> Fraction:
    """P(s successes in n trials) with theta ~ beta(a, b)."""
    if n < 0 or s < 0 or s > n:
        raise ValueError(f"need 0 <= s <= n, got s={s}, n={n}")
    return binom(n, s) * beta_fn(p.a + s, p.b + n - s) / beta_fn(p.a, p.b)


def posterior_params(p: BetaParams, t: TrialRecord) -> BetaParams:
    return BetaParams(p.a + t.successes, p.b + t.failures)


def expected_posterior_mixture(p: BetaParams, n_star: int) -> BetaMixture:
    """Posteriors after each possible success count in ``n_star`` future trials,
    weighted by the prior predictive of that count."""
    if n_star < 1:
        raise ValueError("n_star must be a positive integer")
    return BetaMixture(tuple(
        (beta_binomial_pmf(p, n_star, s), posterior_params(p, TrialRecord(s, n_star - s)))
        for s in range(n_star + 1)
    ))


def mixture_pdf_poly(m: BetaMixture) -> Poly:
    out = Poly()
    for w, params in m.components:
        out = out + beta_pdf_poly(params).scale(w)
    return out


def mixture_collapses_to(m: BetaMixture, p: BetaParams) -> bool:
    """True when the mixture density equals the beta(a, b) density as polynomials."""
    return mixture_pdf_poly(m) == beta_pdf_poly(p)


def marginal_likelihoods(h: PointVsBeta, t: TrialRecord) -> tuple[Fraction, Fraction]:
    """Probability of one particular sequence with the given counts, under (H0, H1)."""
    s, f = t.successes, t.failures
    under_null = h.null_rate**s * (1 - h.null_rate) ** f
    a, b = h.alt_prior.a, h.alt_prior.b
    under_alt = beta_fn(a + s, b + f) / beta_fn(a, b)
    return under_null, under_alt


def model_posterior_prob(h: PointVsBeta, t: TrialRecord) -> tuple[Fraction, Fraction]:
    """Posterior (probability, odds) of H1 after the data in ``t``."""
    m0, m1 = marginal_likelihoods(h, t)
    odds = h.prior_odds_alt * m1 / m0
    return odds / (1 + odds), odds


def next_obs_predictive(h: PointVsBeta, t: TrialRecord) -> tuple[Fraction, Fraction]:
    """(p_success, p_failure) for the next trial, averaged over H0 and H1."""
    prob_alt, _ = model_posterior_prob(h, t)
    post = posterior_params(h.alt_prior, t)
    mean_alt = Fraction(post.a, post.a + post.b)
    p_success = h.null_rate * (1 - prob_alt) + mean_alt * prob_alt
    return p_success, 1 - p_success


def next_obs_bayes_factor(h: PointVsBeta, t: TrialRecord, success: bool) -> Fraction:
    """BF10 contributed by the next single trial."""
    post = posterior_params(h.alt_prior, t)
    mean_alt = Fraction(post.a, post.a + post.b)
    if success:
        return mean_alt / h.null_rate
    return (1 - mean_alt) / (1 - h.null_rate)


def expected_model_prob(h: PointVsBeta, t: TrialRecord) -> Fraction:
    """Expected posterior probability of H1 across the two outcomes of the next trial."""
    p_s, p_f = next_obs_predictive(h, t)
    after_s, _ = model_posterior_prob(h, t.add(True))
    after_f, _ = model_posterior_prob(h, t.add(False))
    return after_s * p_s + after_f * p_f


def lookahead_model_prob(h: PointVsBeta, t: TrialRecord, k: int) -> Fraction:
    """Expected posterior probability of H1 after ``k`` more trials.

    Future data enter only through the success count, so the sum runs over
    k + 1 counts rather than 2^k sequences; large ``k`` is cheap.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    prob_alt, _ = model_posterior_prob(h, t)
    post = posterior_params(h.alt_prior, t)
    total = Fraction(0)
    for s in range(k + 1):
        # predictive of s future successes, mixing the two hypotheses
        p_null = binom(k, s) * h.null_rate**s * (1 - h.null_rate) ** (k - s)
        p_alt = beta_binomial_pmf(post, k, s)
        p_s = (1 - prob_alt) * p_null + prob_alt * p_alt
        if p_s == 0:
            continue
        after, _ = model_posterior_prob(h, TrialRecord(t.successes + s, t.failures + k - s))
        total += after * p_s
    return total


@dataclass(frozen=True)
class Example2Ledger:
    """Every quantity in the sequential point-null vs beta comparison at one data state."""

    prob_alt: Fraction
    odds_alt: Fraction
    alt_posterior: BetaParams
    p_success: Fraction
    p_failure: Fraction
    bf_success: Fraction
    bf_failure: Fraction
    odds_after_success: Fraction
    odds_after_failure: Fraction
    prob_after_success: Fraction
    prob_after_failure: Fraction
    expected_prob_alt: Fraction

    def rational_items(self) -> list[tuple[str, Fraction]]:
        return [(k, v) for k, v in vars(self).items() if isinstance(v, Fraction)]


def example2_ledger(h: PointVsBeta, t: TrialRecord) -> Example2Ledger:
    prob, odds = model_posterior_prob(h, t)
    p_s, p_f = next_obs_predictive(h, t)
    prob_s, odds_s = model_posterior_prob(h, t.add(True))
    prob_f, odds_f = model_posterior_prob(h, t.add(False))
    return Example2Ledger(
        prob_alt=prob,
        odds_alt=odds,
        alt_posterior=posterior_params(h.alt_prior, t),
        p_success=p_s,
        p_failure=p_f,
        bf_success=next_obs_bayes_factor(h, t, True),
        bf_failure=next_obs_bayes_factor(h, t, False),
        odds_after_success=odds_s,
        odds_after_failure=odds_f,
        prob_after_success=prob_s,
        prob_after_failure=prob_f,
        expected_prob_alt=expected_model_prob(h, t),
    )


def sequence_model(h: PointVsBeta, n_flips: int) -> FiniteModel:
    """All 2^n flip sequences as outcomes, with accounts H0 and H1.

    Each account's likelihood of a sequence is its marginal likelihood (theta
    integrated out under H1).  Outcome labels are strings of 0/1, first flip first.
    """
    if n_flips < 1:
        raise ValueError("n_flips must be positive")
    labels, row0, row1 = [], [], []
    for seq in iproduct((1, 0), repeat=n_flips):
        m0, m1 = marginal_likelihoods(h, TrialRecord.from_sequence(seq))
        labels.append("".join(map(str, seq)))
        row0.append(m0)
        row1.append(m1)
    prior_alt = h.prior_odds_alt / (1 + h.prior_odds_alt)
    return FiniteModel(("H0", "H1"), tuple(labels), (1 - prior_alt, prior_alt),
                       (tuple(row0), tuple(row1)))


def two_hypothesis_step_model(h: PointVsBeta, t: TrialRecord) -> FiniteModel:
    """One-trial model at the current data state: accounts H0/H1 with their
    current probabilities, outcomes success/failure with posterior-predictive rows."""
    prob_alt, _ = model_posterior_prob(h, t)
    post = posterior_params(h.alt_prior, t)
    mean_alt = Fraction(post.a, post.a + post.b)
    return FiniteModel(
        ("H0", "H1"), ("success", "failure"), (1 - prob_alt, prob_alt),
        ((h.null_rate, 1 - h.null_rate), (mean_alt, 1 - mean_alt)),
    )


def leading_successes_event(model: FiniteModel, k: int) -> Sequence[int]:
    """Indices of sequence-model outcomes whose first ``k`` flips are all successes."""
    return [i for i, lab in enumerate(model.outcome_labels) if lab[:k] == "1" * k]
