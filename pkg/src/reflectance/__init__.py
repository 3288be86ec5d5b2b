"""Exact verification that expected posteriors equal priors.

Modules: :mod:`~reflectance.exactnum` (rationals and polynomials),
:mod:`~reflectance.model` (finite models, events, updaters),
:mod:`~reflectance.reflection` (expected posteriors, event checks, uniqueness),
:mod:`~reflectance.conjugate` (beta-binomial), :mod:`~reflectance.montecarlo`
(sampling checks) and :mod:`~reflectance.cli`.
"""

from .conjugate import (
    BetaMixture,
    BetaParams,
    PointVsBeta,
    TrialRecord,
    beta_binomial_pmf,
    beta_pdf_poly,
    expected_model_prob,
    expected_posterior_mixture,
    mixture_collapses_to,
    model_posterior_prob,
    next_obs_bayes_factor,
    next_obs_predictive,
    posterior_params,
)
from .exactnum import Poly, Rat, beta_fn, binom, format_rat, parse_rat, poly_integral_01, rat
from .model import (
    Event,
    FiniteModel,
    ModelError,
    NullEventError,
    Updater,
    apply_updater,
    event_likelihood,
    event_mass,
    event_posterior,
    load_model,
    predictive,
)
from .reflection import (
    ReflectionReport,
    UniquenessSolution,
    check_reflection_all_events,
    expected_posterior,
    expected_posterior_given_event,
    lookahead_reflection,
    perturb_and_detect,
    solve_unique_updater,
)

__version__ = "0.1.0"
