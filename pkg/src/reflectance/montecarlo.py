"""Sampling-based reflection checks in floating point.

Random numbers come from Philox4x32-10 (Salmon et al., "Parallel random
numbers: as easy as 1, 2, 3", SC'11), a counter-based generator implemented
here in vectorized numpy.  Replication ``r`` under seed ``s`` uses the block
at counter (r mod 2^32, r div 2^32, 0, 0) with key (s mod 2^32, s div 2^32),
so every replication's stream depends only on (seed, r): the aggregate is the
same no matter how replications are scheduled.

Floats never leave this module; the exact engine does not consume them.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import special, stats

from .conjugate import BetaParams
from .exactnum import format_rat, parse_rat
from .model import FiniteModel, Updater, apply_updater, predictive

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint32(0x9E3779B9)
_W1 = np.uint32(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)


class McConfigError(ValueError):
    pass


def philox4x32(counter: np.ndarray, key: tuple[int, int], rounds: int = 10) -> np.ndarray:
    """Philox4x32 block function.

    ``counter`` has shape (N, 4) of uint32; returns the (N, 4) uint32 output.
    """
    c = np.asarray(counter, dtype=np.uint32)
    x0, x1, x2, x3 = (c[:, k].astype(np.uint64) for k in range(4))
    k0, k1 = np.uint32(key[0] & 0xFFFFFFFF), np.uint32(key[1] & 0xFFFFFFFF)
    with np.errstate(over="ignore"):
        for r in range(rounds):
            if r:
                k0 = np.uint32(k0 + _W0)
                k1 = np.uint32(k1 + _W1)
            p0 = _M0 * x0
            p1 = _M1 * x2
            hi0, lo0 = p0 >> np.uint64(32), p0 & _MASK32
            hi1, lo1 = p1 >> np.uint64(32), p1 & _MASK32
            x0, x1, x2, x3 = (
                hi1 ^ x1 ^ np.uint64(k0),
                lo1,
                hi0 ^ x3 ^ np.uint64(k1),
                lo0,
            )
    return np.stack([x0, x1, x2, x3], axis=1).astype(np.uint32)


def replication_uniforms(seed: int, replications: int, stream: int = 0) -> np.ndarray:
    """Two uniforms in (0, 1) per replication, shape (replications, 2).

    Each uniform uses 53 bits from two 32-bit words, offset by half a step so
    neither 0 nor 1 can occur.
    """
    r = np.arange(replications, dtype=np.uint64)
    ctr = np.zeros((replications, 4), dtype=np.uint32)
    ctr[:, 0] = (r & _MASK32).astype(np.uint32)
    ctr[:, 1] = (r >> np.uint64(32)).astype(np.uint32)
    ctr[:, 2] = stream
    out = philox4x32(ctr, (seed & 0xFFFFFFFF, seed >> 32)).astype(np.uint64)
    hi = out[:, 0::2] >> np.uint64(5)
    lo = out[:, 1::2] >> np.uint64(6)
    bits53 = (hi << np.uint64(26)) | lo
    return (bits53.astype(np.float64) + 0.5) / 2.0**53


@dataclass(frozen=True)
class McConfig:
    seed: int = 42
    replications: int = 10_000
    grid: tuple[Fraction, ...] = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
    sigma_level: int = 3

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(Fraction(g) for g in self.grid))
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise McConfigError("seed must be an unsigned 64-bit integer")
        if not isinstance(self.replications, int) or self.replications < 100:
            raise McConfigError(f"replications must be at least 100, got {self.replications}")
        if any(not 0 < g < 1 for g in self.grid):
            raise McConfigError("grid points must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise McConfigError("grid must be strictly increasing")
        if not isinstance(self.sigma_level, int) or self.sigma_level < 1:
            raise McConfigError("sigma_level must be a positive integer")


@dataclass(frozen=True)
class McPoint:
    label: str
    estimate: float
    reference: float
    standard_error: float
    passed: bool


@dataclass(frozen=True)
class McReport:
    """Per-point Monte Carlo estimates against their exact references.

    A point passes when |estimate - reference| <= sigma_level * standard_error.
    """

    points: tuple[McPoint, ...]
    seed: int
    replications: int
    sigma_level: int
    rule: str
    overall_pass: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "overall_pass", all(p.passed for p in self.points))

    def to_dict(self) -> dict:
        d = asdict(self)
        for p in d["points"]:
            for key in ("estimate", "reference", "standard_error"):
                p[key] = float(f"{p[key]:.17g}")
        d["summary"] = (
            f"Monte Carlo ({self.replications} replications, seed {self.seed}, rule {self.rule}): "
            f"{'pass' if self.overall_pass else 'FAIL'} at {self.sigma_level} sigma"
        )
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _point(label: str, values: np.ndarray, reference: float, sigma: int) -> McPoint:
    n = values.shape[0]
    est = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(n))
    dev = abs(float((values - reference).mean()))
    return McPoint(label, est, reference, se, dev <= sigma * se)


def mc_reflection_check(p: BetaParams, n_obs: int, u: Updater, cfg: McConfig) -> McReport:
    """Monte Carlo estimate of E[posterior CDF] at each grid point vs the prior CDF.

    Each replication draws theta from the prior, s ~ binomial(n_obs, theta) and
    evaluates the updated beta CDF.  Tempering by t updates with counts scaled by t.
    """
    if n_obs < 1:
        raise McConfigError("n_obs must be a positive integer")
    t = u.exponent
    uni = replication_uniforms(cfg.seed, cfg.replications)
    theta = special.betaincinv(p.a, p.b, uni[:, 0])
    cdf = stats.binom.cdf(np.arange(n_obs + 1)[None, :], n_obs, theta[:, None])
    s = (cdf < uni[:, 1:2]).sum(axis=1)
    a_post = p.a + t * s
    b_post = p.b + t * (n_obs - s)
    points = []
    for g in cfg.grid:
        x = float(g)
        values = special.betainc(a_post, b_post, x)
        ref = float(special.betainc(p.a, p.b, x))
        points.append(_point(f"cdf@{format_rat(g)}", values, ref, cfg.sigma_level))
    return McReport(tuple(points), cfg.seed, cfg.replications, cfg.sigma_level, str(u))


def mc_reflection_check_finite(model: FiniteModel, u: Updater, cfg: McConfig) -> McReport:
    """Sample outcomes from the exact predictive and average the updated beliefs per account."""
    pred = predictive(model)
    cum, acc = [], Fraction(0)
    for q in pred:
        acc += q
        cum.append(float(acc))
    cum[-1] = 1.0
    table = np.full((model.n_outcomes, model.n_params), np.nan)
    for i, q in enumerate(pred):
        if q:
            table[i] = [float(b) for b in apply_updater(model, u, i)]
    uni = replication_uniforms(cfg.seed, cfg.replications)[:, 0]
    outcome = np.minimum(np.searchsorted(np.asarray(cum), uni, side="right"), model.n_outcomes - 1)
    points = []
    for j, label in enumerate(model.param_labels):
        ref = float(model.prior[j])
        points.append(_point(label, table[outcome, j], ref, cfg.sigma_level))
    return McReport(tuple(points), cfg.seed, cfg.replications, cfg.sigma_level, str(u))


def parse_grid(text: str | Sequence[str]) -> tuple[Fraction, ...]:
    items = text.split(",") if isinstance(text, str) else list(text)
    return tuple(parse_rat(s.strip(), "grid") for s in items if s.strip())
