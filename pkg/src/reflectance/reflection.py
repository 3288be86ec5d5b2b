"""Expected posteriors, redundant-reflection checks and the uniqueness solver.

The central identity: averaging the updated beliefs over the prior predictive
gives back the prior, and averaging over the outcomes inside any event gives
back the Bayes posterior for that event.  Bayes' rule satisfies both; these
functions check any :class:`~reflectance.model.Updater` against them exactly
and, in the other direction, recover the only per-outcome rule that can.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Callable, Mapping, Optional, Sequence

from .exactnum import format_rat, lcm_of_denominators
from .model import (
    Belief,
    Event,
    FiniteModel,
    ModelError,
    NullEventError,
    Updater,
    apply_updater,
    event_posterior,
    predictive,
)

DEFAULT_EVENT_CAP = 20
LOOKAHEAD_BUDGET = 10**6


class EventCapError(ValueError):
    """Raised when exhaustive event enumeration would exceed the configured cap."""


def _zero(m: int) -> list[Fraction]:
    return [Fraction(0)] * m


def expected_posterior(model: FiniteModel, u: Updater) -> Belief:
    """Sum of updated beliefs weighted by the prior predictive.

    Outcomes with zero predictive mass are skipped, so the rule only needs to
    be defined where data can actually occur.
    """
    pred = predictive(model)
    acc = _zero(model.n_params)
    for i, p in enumerate(pred):
        if p == 0:
            continue
        bel = apply_updater(model, u, i)
        for j, b in enumerate(bel):
            acc[j] += b * p
    return tuple(acc)


def expected_posterior_given_event(model: FiniteModel, u: Updater, xi: Event) -> Belief:
    """Expected updated belief restricted to the outcomes in ``xi``."""
    if not xi.members:
        raise ModelError("cannot condition on the empty event")
    pred = predictive(model)
    if any(i >= model.n_outcomes for i in xi.members):
        raise ModelError("event indices out of range")
    mass = sum((pred[i] for i in xi.members), Fraction(0))
    if mass == 0:
        raise NullEventError(f"conditioning on a null event {xi.labels(model)}")
    acc = _zero(model.n_params)
    for i in xi.sorted():
        if pred[i] == 0:
            continue
        for j, b in enumerate(apply_updater(model, u, i)):
            acc[j] += b * pred[i]
    return tuple(a / mass for a in acc)


@dataclass(frozen=True)
class ReflectionReport:
    """Outcome of checking one updater against every nonempty event.

    ``violating_events`` pairs each failing event with its per-account gap,
    E[Bel_u | event] minus the Bayes posterior for the event, in ascending
    bitmask order.
    """

    rule: Updater
    holds_unconditional: bool
    unconditional_gap: Belief
    violating_events: tuple[tuple[Event, Belief], ...]
    checked_event_count: int
    skipped_null_events: int
    param_labels: tuple[str, ...] = ()
    outcome_labels: tuple[str, ...] = ()

    @property
    def holds(self) -> bool:
        return self.holds_unconditional and not self.violating_events

    @property
    def summary(self) -> str:
        if self.holds:
            return (
                f"rule {self.rule}: reflection holds on all {self.checked_event_count} "
                f"positive-mass events (exact); {self.skipped_null_events} null events skipped"
            )
        return (
            f"rule {self.rule}: {len(self.violating_events)} of {self.checked_event_count} "
            f"positive-mass events violate reflection; unconditional identity "
            f"{'holds' if self.holds_unconditional else 'fails'}"
        )

    def to_dict(self) -> dict:
        def ev(e: Event) -> list[str]:
            return [self.outcome_labels[i] for i in e.sorted()] if self.outcome_labels else e.sorted()

        return {
            "rule": str(self.rule),
            "holds_unconditional": self.holds_unconditional,
            "unconditional_gap": [format_rat(g) for g in self.unconditional_gap],
            "checked_event_count": self.checked_event_count,
            "skipped_null_events": self.skipped_null_events,
            "params": list(self.param_labels),
            "violating_events": [
                {"event": ev(e), "gap": [format_rat(g) for g in gap]}
                for e, gap in self.violating_events
            ],
            "summary": self.summary,
        }


def _scaled_terms(model: FiniteModel, u: Updater):
    """Integer-scaled per-outcome gap contributions and masses.

    For outcome i the contribution to account j is
    Bel_u(j|y_i) p(y_i) - prior[j] p(y_i|j); summing over an event and dividing
    by the event mass gives the conditional gap.  Everything is scaled by one
    common denominator so enumeration runs on plain integers.
    """
    pred = predictive(model)
    diffs: list[list[Fraction]] = []
    for i, p in enumerate(pred):
        if p == 0:
            diffs.append(_zero(model.n_params))
            continue
        bel = apply_updater(model, u, i)
        diffs.append([b * p - pj * row[i]
                      for b, pj, row in zip(bel, model.prior, model.likelihood)])
    scale = lcm_of_denominators([x for d in diffs for x in d] + list(pred))
    D = [tuple(int(x * scale) for x in d) for d in diffs]
    P = [int(p * scale) for p in pred]
    return D, P


def _enumerate_chunk(args):
    """Gray-code walk over the low bits for one fixed prefix of high bits.

    Returns (violations, checked, skipped) with violations as
    (mask, gap_numerators, mass_numerator) tuples.
    """
    D, P, low_bits, prefix = args
    m = len(D[0]) if D else 0
    sums = [0] * m
    mass = 0
    base = prefix << low_bits
    for bit in range(len(D) - low_bits):
        if prefix >> bit & 1:
            k = bit + low_bits
            mass += P[k]
            for j in range(m):
                sums[j] += D[k][j]
    violations, checked, skipped = [], 0, 0
    gray = 0
    for step in range(1 << low_bits):
        if step:
            bit = (step & -step).bit_length() - 1
            gray ^= 1 << bit
            d = D[bit]
            if gray >> bit & 1:
                mass += P[bit]
                for j in range(m):
                    sums[j] += d[j]
            else:
                mass -= P[bit]
                for j in range(m):
                    sums[j] -= d[j]
        mask = base | gray
        if mask == 0:
            continue
        if mass == 0:
            skipped += 1
            continue
        checked += 1
        if any(sums):
            violations.append((mask, tuple(sums), mass))
    return violations, checked, skipped


def check_reflection_all_events(
    model: FiniteModel,
    u: Updater,
    max_outcomes: int = DEFAULT_EVENT_CAP,
    workers: int = 1,
) -> ReflectionReport:
    """Compare E[Bel_u | xi] with the Bayes posterior for every nonempty event xi.

    Null events are counted and skipped.  With ``workers > 1`` the enumeration
    is split by high bits across processes; the merged report is identical to
    the sequential one.
    """
    n = model.n_outcomes
    if n > max_outcomes:
        raise EventCapError(
            f"{n} outcomes means {2**n - 1} events, above the cap of {max_outcomes} outcomes; "
            "raise the cap or use the Monte Carlo check (reflectance.montecarlo)"
        )
    D, P = _scaled_terms(model, u)
    high_bits = min(n - 1, max(0, (workers - 1).bit_length() + 2)) if workers > 1 else 0
    low_bits = n - high_bits
    chunks = [(D, P, low_bits, prefix) for prefix in range(1 << high_bits)]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_enumerate_chunk, chunks))
    else:
        results = [_enumerate_chunk(c) for c in chunks]

    raw = sorted((v for r in results for v in r[0]), key=lambda v: v[0])
    violating = tuple(
        (Event.from_mask(mask), tuple(Fraction(s, mass) for s in sums)) for mask, sums, mass in raw
    )
    unconditional = expected_posterior(model, u)
    gap = tuple(e - p for e, p in zip(unconditional, model.prior))
    return ReflectionReport(
        rule=u,
        holds_unconditional=not any(gap),
        unconditional_gap=gap,
        violating_events=violating,
        checked_event_count=sum(r[1] for r in results),
        skipped_null_events=sum(r[2] for r in results),
        param_labels=model.param_labels,
        outcome_labels=model.outcome_labels,
    )


def product_model(model: FiniteModel, k: int, budget: int = LOOKAHEAD_BUDGET) -> FiniteModel:
    """k independent repetitions of one observation, given each account.

    Outcome labels are the per-step labels joined with commas.
    """
    if k < 1:
        raise ValueError("depth k must be a positive integer")
    size = model.n_outcomes**k
    if size > budget:
        raise EventCapError(f"{model.n_outcomes}^{k} = {size} sequences exceeds the budget of {budget}")
    labels = [",".join(seq) for seq in iproduct(model.outcome_labels, repeat=k)]
    rows = []
    for row in model.likelihood:
        cur = list(row)
        for _ in range(k - 1):
            cur = [a * b for a in cur for b in row]
        rows.append(tuple(cur))
    return FiniteModel(model.param_labels, tuple(labels), model.prior, tuple(rows))


def lookahead_reflection(model: FiniteModel, k: int, budget: int = LOOKAHEAD_BUDGET) -> Belief:
    """Expected Bayes posterior after k further i.i.d. observations."""
    return expected_posterior(product_model(model, k, budget), Updater.bayes())


@dataclass(frozen=True)
class UniquenessSolution:
    """Per-outcome beliefs forced by the reflection constraints.

    ``pinned`` covers every positive-mass outcome; zero-mass outcomes are in
    ``free_outcomes``, where any value satisfies every constraint.  When a
    constraint fails, ``witness`` is the first failing event in bitmask order
    and ``witness_gap`` is E[Bel' | witness] minus the rule's value there.
    """

    pinned: Mapping[int, Belief]
    free_outcomes: frozenset[int]
    consistent: bool
    witness: Optional[Event] = None
    witness_gap: Optional[Belief] = None
    checked_event_count: int = 0

    def to_dict(self, outcome_labels: Sequence[str] | None = None) -> dict:
        def name(i: int):
            return outcome_labels[i] if outcome_labels else i

        out = {
            "consistent": self.consistent,
            "pinned": {str(name(i)): [format_rat(b) for b in bel]
                       for i, bel in sorted(self.pinned.items())},
            "free_outcomes": [name(i) for i in sorted(self.free_outcomes)],
            "checked_event_count": self.checked_event_count,
            "witness": None if self.witness is None else [name(i) for i in self.witness.sorted()],
            "witness_gap": None if self.witness_gap is None
            else [format_rat(g) for g in self.witness_gap],
        }
        if self.consistent:
            out["summary"] = (f"consistent: {len(self.pinned)} outcomes pinned, "
                              f"{len(self.free_outcomes)} free (probability zero)")
        else:
            out["summary"] = f"inconsistent: reflection fails on event {out['witness']}"
        return out


def solve_unique_updater(
    predictive: Sequence[Fraction],
    event_rule: Callable[[Event], Optional[Belief]],
    candidate: Optional[Mapping[int, Belief]] = None,
    max_outcomes: int = DEFAULT_EVENT_CAP,
) -> UniquenessSolution:
    """Recover the per-outcome updating rule implied by an event rule.

    Singleton events pin Bel'(.|y_i) = event_rule({y_i}) wherever p(y_i) > 0.
    Every positive-mass event xi is then checked:
    sum_{i in xi} Bel'(.|y_i) p(y_i) == event_rule(xi) p(xi).
    Bel' is the pinned rule itself, or ``candidate`` (values per outcome index)
    when one is supplied; candidate values on zero-mass outcomes are never used.
    ``event_rule`` returning None means undefined, which is an error here.
    """
    pred = [Fraction(p) for p in predictive]
    n = len(pred)
    if n > max_outcomes:
        raise EventCapError(f"{n} outcomes exceeds the cap of {max_outcomes}")
    if any(p < 0 for p in pred) or sum(pred, Fraction(0)) != 1:
        raise ValueError("predictive must be nonnegative and sum to 1")

    def rule(xi: Event) -> Belief:
        val = event_rule(xi)
        if val is None:
            raise ValueError(f"event rule undefined on positive-mass event {xi.sorted()}")
        return tuple(Fraction(v) for v in val)

    pinned = {i: rule(Event(frozenset([i]))) for i in range(n) if pred[i] > 0}
    free = frozenset(i for i in range(n) if pred[i] == 0)
    if not pinned:
        raise ValueError("predictive has no positive-mass outcome")
    m = len(next(iter(pinned.values())))
    bel = dict(pinned)
    if candidate is not None:
        for i in pinned:
            if i not in candidate:
                raise ValueError(f"candidate rule undefined on positive-mass outcome {i}")
            bel[i] = tuple(Fraction(v) for v in candidate[i])

    checked = 0
    for mask in range(1, 1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        mass = sum((pred[i] for i in members), Fraction(0))
        if mass == 0:
            continue
        checked += 1
        xi = Event(frozenset(members))
        target = rule(xi)
        lhs = _zero(m)
        for i in members:
            if pred[i]:
                for j, b in enumerate(bel[i]):
                    lhs[j] += b * pred[i]
        if any(lhs[j] != target[j] * mass for j in range(m)):
            gap = tuple(lhs[j] / mass - target[j] for j in range(m))
            return UniquenessSolution(pinned, free, False, xi, gap, checked)
    return UniquenessSolution(pinned, free, True, None, None, checked)


def bayes_event_rule(model: FiniteModel) -> Callable[[Event], Belief]:
    """The event rule Bel(theta | xi) given by Bayes' rule on ``model``."""
    return lambda xi: event_posterior(model, xi)


@dataclass(frozen=True)
class Detection:
    """An event on which a perturbed posterior breaks reflection, with the exact gap."""

    event: Event
    gap: Belief
    perturbed: Mapping[int, Belief] = field(default_factory=dict)


def perturbed_bayes(model: FiniteModel, i: int, j: int, delta: Fraction) -> dict[int, Belief]:
    """Bayes posteriors on positive-mass outcomes with Bel'(theta_j | y_i) shifted by ``delta``."""
    pred = predictive(model)
    out = {k: apply_updater(model, Updater.bayes(), k) for k in range(model.n_outcomes) if pred[k]}
    if i in out:
        row = list(out[i])
        row[j] += delta
        out[i] = tuple(row)
    return out


def perturb_and_detect(
    model: FiniteModel, i: int, j: int, delta: Fraction, query: Optional[Event] = None
) -> Detection:
    """Shift one Bayes posterior value and exhibit the event where reflection fails.

    The singleton {y_i} always works; the gap there is ``delta`` on account j.
    For a ``query`` event the gap is delta * p(y_i) / p(query) when y_i is in it.
    """
    delta = Fraction(delta)
    if delta == 0:
        raise ValueError("delta must be nonzero")
    if not 0 <= j < model.n_params:
        raise ModelError(f"account index {j} out of range")
    if not 0 <= i < model.n_outcomes:
        raise ModelError(f"outcome index {i} out of range")
    pred = predictive(model)
    if pred[i] == 0:
        raise NullEventError(
            f"outcome {model.outcome_labels[i]!r} has probability zero; "
            "perturbation is invisible almost surely"
        )
    bel = perturbed_bayes(model, i, j, delta)
    xi = query if query is not None else Event(frozenset([i]))
    if not xi.members:
        raise ModelError("cannot condition on the empty event")
    mass = sum((pred[k] for k in xi.members), Fraction(0))
    if mass == 0:
        raise NullEventError(f"query event {xi.labels(model)} has probability zero")
    acc = _zero(model.n_params)
    for k in xi.sorted():
        if pred[k]:
            for jj, b in enumerate(bel[k]):
                acc[jj] += b * pred[k]
    target = event_posterior(model, xi)
    return Detection(xi, tuple(a / mass - t for a, t in zip(acc, target)), bel)


def abs_difference_decomposition(
    predictive: Sequence[Fraction],
    bel: Sequence[Belief],
    bel_prime: Sequence[Belief],
) -> list[tuple[Fraction, Fraction]]:
    """E|Bel - Bel'| per account, directly and via the split on zeta = {Bel > Bel'}.

    Returns one ``(direct, decomposed)`` pair per account.  The decomposed
    value is p(zeta)(E[Bel|zeta] - E[Bel'|zeta]) plus the mirrored term on the
    complement, with a term dropped when its event has probability zero.
    """
    pred = [Fraction(p) for p in predictive]
    m = len(bel[0])
    out = []
    for j in range(m):
        direct = sum((abs(b[j] - c[j]) * p for b, c, p in zip(bel, bel_prime, pred)), Fraction(0))
        zeta = [i for i in range(len(pred)) if bel[i][j] > bel_prime[i][j]]
        zbar = [i for i in range(len(pred)) if i not in zeta]
        total = Fraction(0)
        for members, sign in ((zeta, 1), (zbar, -1)):
            mass = sum((pred[i] for i in members), Fraction(0))
            if mass == 0:
                continue
            e_bel = sum((bel[i][j] * pred[i] for i in members), Fraction(0)) / mass
            e_prime = sum((bel_prime[i][j] * pred[i] for i in members), Fraction(0)) / mass
            total += mass * sign * (e_bel - e_prime)
        out.append((direct, total))
    return out
