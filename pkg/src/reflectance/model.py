"""Finite Bayesian models, data events and updating rules.

A :class:`FiniteModel` holds a prior over accounts (parameter values) and a
likelihood table over a finite outcome space.  Updating rules are described
by :class:`Updater`; ``apply_updater`` turns a model and an observed outcome
into a belief assignment, one exact rational per account.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .exactnum import format_rat, parse_rat

Belief = tuple[Fraction, ...]


class ModelError(ValueError):
    """Raised for malformed models, events or model files."""


class NullEventError(ValueError):
    """Raised when conditioning on an event (or outcome) of probability zero."""


@dataclass(frozen=True)
class FiniteModel:
    """Prior mass over accounts and a row-stochastic likelihood table.

    ``likelihood[j][i]`` is p(y_i | theta_j).  Entries are validated to be
    exact distributions on construction; nothing is renormalized.
    """

    param_labels: tuple[str, ...]
    outcome_labels: tuple[str, ...]
    prior: tuple[Fraction, ...]
    likelihood: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "param_labels", tuple(self.param_labels))
        object.__setattr__(self, "outcome_labels", tuple(self.outcome_labels))
        object.__setattr__(self, "prior", tuple(Fraction(p) for p in self.prior))
        object.__setattr__(
            self, "likelihood", tuple(tuple(Fraction(x) for x in row) for row in self.likelihood)
        )
        m, n = len(self.param_labels), len(self.outcome_labels)
        if m < 1:
            raise ModelError("params: at least one account is required")
        if n < 1:
            raise ModelError("outcomes: at least one outcome is required")
        if len(set(self.param_labels)) != m:
            raise ModelError("params: labels must be unique")
        if len(set(self.outcome_labels)) != n:
            raise ModelError("outcomes: labels must be unique")
        if len(self.prior) != m:
            raise ModelError(f"prior: expected {m} entries, got {len(self.prior)}")
        if any(p < 0 for p in self.prior):
            raise ModelError("prior: entries must be nonnegative")
        total = sum(self.prior, Fraction(0))
        if total != 1:
            raise ModelError(f"prior: entries sum to {format_rat(total)}, not 1")
        if len(self.likelihood) != m:
            raise ModelError(f"likelihood: expected {m} rows, got {len(self.likelihood)}")
        for j, row in enumerate(self.likelihood):
            if len(row) != n:
                raise ModelError(f"likelihood[{j}]: expected {n} entries, got {len(row)}")
            if any(x < 0 for x in row):
                raise ModelError(f"likelihood[{j}]: entries must be nonnegative")
            s = sum(row, Fraction(0))
            if s != 1:
                raise ModelError(f"likelihood[{j}]: row sums to {format_rat(s)}, not 1")

    @property
    def n_params(self) -> int:
        return len(self.param_labels)

    @property
    def n_outcomes(self) -> int:
        return len(self.outcome_labels)

    def param_index(self, label: str) -> int:
        try:
            return self.param_labels.index(label)
        except ValueError:
            raise ModelError(f"unknown account {label!r}") from None

    def outcome_index(self, label: str) -> int:
        try:
            return self.outcome_labels.index(label)
        except ValueError:
            raise ModelError(f"unknown outcome {label!r}") from None

    def with_prior(self, prior: Sequence[Fraction]) -> FiniteModel:
        return FiniteModel(self.param_labels, self.outcome_labels, tuple(prior), self.likelihood)

    @classmethod
    def from_dict(cls, data: Mapping) -> FiniteModel:
        if not isinstance(data, Mapping):
            raise ModelError("model: expected a JSON object")
        for key in ("params", "outcomes", "prior", "likelihood"):
            if key not in data:
                raise ModelError(f"{key}: missing field")
        params, outcomes = data["params"], data["outcomes"]
        for key, labels in (("params", params), ("outcomes", outcomes)):
            if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
                raise ModelError(f"{key}: expected a list of strings")
        if not isinstance(data["prior"], list):
            raise ModelError("prior: expected a list of \"num/den\" strings")
        prior = [_parse(x, f"prior[{j}]") for j, x in enumerate(data["prior"])]
        rows = data["likelihood"]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ModelError("likelihood: expected a list of rows")
        likelihood = [
            [_parse(x, f"likelihood[{j}][{i}]") for i, x in enumerate(row)]
            for j, row in enumerate(rows)
        ]
        return cls(tuple(params), tuple(outcomes), tuple(prior), tuple(map(tuple, likelihood)))

    def to_dict(self) -> dict:
        return {
            "params": list(self.param_labels),
            "outcomes": list(self.outcome_labels),
            "prior": [format_rat(p) for p in self.prior],
            "likelihood": [[format_rat(x) for x in row] for row in self.likelihood],
        }


def _parse(value, field_name: str) -> Fraction:
    try:
        return parse_rat(value, field_name)
    except ValueError as exc:
        raise ModelError(str(exc)) from None


def load_model(path: str | Path) -> FiniteModel:
    """Read a model from a JSON file (see :meth:`FiniteModel.from_dict`)."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return FiniteModel.from_dict(data)


@dataclass(frozen=True)
class Event:
    """A set of outcome indices.  Conditioning operations reject the empty event."""

    members: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        members = frozenset(self.members)
        if any((not isinstance(i, int)) or i < 0 for i in members):
            raise ModelError("event members must be nonnegative outcome indices")
        object.__setattr__(self, "members", members)

    @classmethod
    def from_mask(cls, mask: int) -> Event:
        return cls(frozenset(i for i in range(mask.bit_length()) if mask >> i & 1))

    @classmethod
    def full(cls, n: int) -> Event:
        return cls(frozenset(range(n)))

    @classmethod
    def from_labels(cls, model: FiniteModel, labels: Iterable[str]) -> Event:
        return cls(frozenset(model.outcome_index(s) for s in labels))

    @property
    def mask(self) -> int:
        return sum(1 << i for i in self.members)

    def sorted(self) -> list[int]:
        return sorted(self.members)

    def complement(self, n: int) -> Event:
        return Event(frozenset(range(n)) - self.members)

    def labels(self, model: FiniteModel) -> list[str]:
        return [model.outcome_labels[i] for i in self.sorted()]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.sorted())

    def __contains__(self, i: object) -> bool:
        return i in self.members


def _check_event(model: FiniteModel, xi: Event) -> None:
    if not xi.members:
        raise ModelError("cannot condition on the empty event")
    bad = [i for i in xi.members if i >= model.n_outcomes]
    if bad:
        raise ModelError(f"event indices out of range: {sorted(bad)}")


@dataclass(frozen=True)
class Updater:
    """An updating rule: ``bayes``, ``tempered`` with integer temperature ``t``, or ``noop``.

    Tempering raises each likelihood to the power ``t`` before normalizing, so
    ``tempered(1)`` is Bayes' rule and ``tempered(0)`` leaves the prior alone.
    """

    kind: str = "bayes"
    t: int = 1

    def __post_init__(self):
        if self.kind not in ("bayes", "tempered", "noop"):
            raise ValueError(f"unknown updater kind {self.kind!r}")
        if not isinstance(self.t, int) or self.t < 0:
            raise ValueError("temperature must be a nonnegative integer")

    @classmethod
    def bayes(cls) -> Updater:
        return cls("bayes", 1)

    @classmethod
    def tempered(cls, t: int) -> Updater:
        return cls("tempered", t)

    @classmethod
    def noop(cls) -> Updater:
        return cls("noop", 0)

    @classmethod
    def parse(cls, text: str) -> Updater:
        """Parse ``bayes``, ``noop`` or ``tempered:T``."""
        name, _, arg = text.strip().partition(":")
        if name == "tempered":
            if not arg.isdigit():
                raise ValueError(f"tempered rule needs a nonnegative integer temperature, got {arg!r}")
            return cls.tempered(int(arg))
        if arg or name not in ("bayes", "noop"):
            raise ValueError(f"unknown rule {text!r}; use bayes, noop or tempered:T")
        return cls(name, 1 if name == "bayes" else 0)

    @property
    def exponent(self) -> int:
        return {"bayes": 1, "noop": 0}.get(self.kind, self.t)

    def __str__(self) -> str:
        return f"tempered:{self.t}" if self.kind == "tempered" else self.kind


def predictive(model: FiniteModel) -> tuple[Fraction, ...]:
    """Prior predictive p(y_i) = sum_j prior[j] * likelihood[j][i]."""
    out = [Fraction(0)] * model.n_outcomes
    for pj, row in zip(model.prior, model.likelihood):
        if pj == 0:
            continue
        for i, x in enumerate(row):
            out[i] += pj * x
    return tuple(out)


def apply_updater(model: FiniteModel, u: Updater, i: int) -> Belief:
    """Beliefs over accounts after observing outcome ``i`` under rule ``u``.

    Raises NullEventError when the normalizer is zero.
    """
    if not 0 <= i < model.n_outcomes:
        raise ModelError(f"outcome index {i} out of range")
    t = u.exponent
    if t == 0:
        return model.prior
    weights = [pj * row[i] ** t for pj, row in zip(model.prior, model.likelihood)]
    z = sum(weights, Fraction(0))
    if z == 0:
        raise NullEventError(
            f"conditioning on a null event: outcome {model.outcome_labels[i]!r} has zero "
            f"normalizer under {u}"
        )
    return tuple(w / z for w in weights)


def event_likelihood(model: FiniteModel, xi: Event, j: int) -> Fraction:
    """p(xi | theta_j), summed over the outcomes in ``xi``."""
    _check_event(model, xi)
    row = model.likelihood[j]
    return sum((row[i] for i in xi.members), Fraction(0))


def event_mass(model: FiniteModel, xi: Event) -> Fraction:
    """p(xi) under the prior predictive."""
    _check_event(model, xi)
    pred = predictive(model)
    return sum((pred[i] for i in xi.members), Fraction(0))


def event_posterior(model: FiniteModel, xi: Event) -> Belief:
    """Bayes posterior over accounts given that the data fell in ``xi``."""
    _check_event(model, xi)
    joint = [pj * sum((row[i] for i in xi.members), Fraction(0))
             for pj, row in zip(model.prior, model.likelihood)]
    z = sum(joint, Fraction(0))
    if z == 0:
        raise NullEventError(f"conditioning on a null event {xi.labels(model)}")
    return tuple(x / z for x in joint)
