"""
Expected posterior of a beta prior
==================================

A beta(2,2) prior on a binomial rate, and two future observations in mind.
Each possible success count gives a beta posterior; weighting them by their
prior predictive probabilities gives back the prior density, exactly.
"""

from reflectance import BetaParams, beta_pdf_poly, expected_posterior_mixture, mixture_collapses_to
from reflectance.conjugate import mixture_pdf_poly
from reflectance.exactnum import format_rat

prior = BetaParams(2, 2)
mix = expected_posterior_mixture(prior, 2)
for s, (w, comp) in enumerate(mix.components):
    print(f"s* = {s}: weight {format_rat(w)}  posterior {comp}")

# The densities are polynomials in theta, so the comparison is exact.
print("prior density:   ", beta_pdf_poly(prior))
print("mixture density: ", mixture_pdf_poly(mix))
print("equal:", mixture_collapses_to(mix, prior))

###############################################################################
# Looking further ahead changes nothing: 100 observations, 101 components.
big = expected_posterior_mixture(prior, 100)
print(len(big), "components, equal:", mixture_collapses_to(big, prior))
