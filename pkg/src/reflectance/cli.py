"""Command-line entry point: ``reflectance <subcommand> [options]``.

Exit status: 0 when every check passes, 1 when a check finds a violation,
2 for input or usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence, TextIO

from . import conjugate as cj
from .exactnum import format_rat, parse_rat
from .model import Event, ModelError, NullEventError, Updater, load_model, predictive
from .montecarlo import McConfig, mc_reflection_check, mc_reflection_check_finite, parse_grid
from .reflection import (
    DEFAULT_EVENT_CAP,
    EventCapError,
    bayes_event_rule,
    check_reflection_all_events,
    expected_posterior,
    lookahead_reflection,
    perturb_and_detect,
    perturbed_bayes,
    solve_unique_updater,
)

OK, VIOLATION, USAGE = 0, 1, 2


def show(q: Fraction) -> str:
    """``"213/266 ≈ 0.8008"``."""
    return f"{format_rat(q)} ≈ {float(q):.4f}"


def _vector(labels: Sequence[str], values: Sequence[Fraction]) -> dict[str, str]:
    return {lab: format_rat(v) for lab, v in zip(labels, values)}


def _text_vector(labels: Sequence[str], values: Sequence[Fraction], indent: str = "  ") -> str:
    return "\n".join(f"{indent}{lab}: {show(v)}" for lab, v in zip(labels, values))


class _Out:
    def __init__(self, args, stream: TextIO):
        self.json = args.json
        self.stream = stream

    def emit(self, payload: dict, text: str) -> None:
        if self.json:
            self.stream.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
        else:
            self.stream.write(text.rstrip("\n") + "\n")


def _event_cap(args) -> int:
    if getattr(args, "max_outcomes", None) is not None:
        return args.max_outcomes
    env = os.environ.get("REFLECTANCE_EVENT_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ModelError(f"REFLECTANCE_EVENT_CAP: expected an integer, got {env!r}") from None
    return DEFAULT_EVENT_CAP


def cmd_predictive(args, out: _Out) -> int:
    model = load_model(args.model)
    pred = predictive(model)
    out.emit(
        {"predictive": _vector(model.outcome_labels, pred), "summary": "prior predictive (exact)"},
        "prior predictive (exact)\n" + _text_vector(model.outcome_labels, pred),
    )
    return OK


def cmd_reflect(args, out: _Out) -> int:
    model = load_model(args.model)
    rule = Updater.parse(args.rule)
    exp = expected_posterior(model, rule)
    holds = tuple(exp) == model.prior
    summary = ("expected posterior = prior (exact)" if holds
               else "expected posterior != prior: reflection violated")
    gap = [e - p for e, p in zip(exp, model.prior)]
    text = [f"rule {rule}: {summary}", "expected posterior:",
            _text_vector(model.param_labels, exp), "prior:", _text_vector(model.param_labels, model.prior)]
    if not holds:
        text += ["gap (expected - prior):", _text_vector(model.param_labels, gap)]
    out.emit(
        {"rule": str(rule), "holds": holds,
         "expected_posterior": _vector(model.param_labels, exp),
         "prior": _vector(model.param_labels, model.prior),
         "gap": _vector(model.param_labels, gap), "summary": summary},
        "\n".join(text),
    )
    return OK if holds else VIOLATION


def cmd_reflect_events(args, out: _Out) -> int:
    model = load_model(args.model)
    rule = Updater.parse(args.rule)
    report = check_reflection_all_events(model, rule, _event_cap(args), workers=args.workers)
    lines = [report.summary]
    shown = report.violating_events[: args.show]
    for ev, gap in shown:
        gaps = ", ".join(f"{lab}: {show(g)}" for lab, g in zip(model.param_labels, gap))
        lines.append(f"  event {{{', '.join(ev.labels(model))}}}: gap {gaps}")
    if len(report.violating_events) > len(shown):
        lines.append(f"  ... {len(report.violating_events) - len(shown)} more (use --json for all)")
    out.emit(report.to_dict(), "\n".join(lines))
    return OK if report.holds else VIOLATION


def cmd_lookahead(args, out: _Out) -> int:
    model = load_model(args.model)
    exp = lookahead_reflection(model, args.depth)
    holds = tuple(exp) == model.prior
    summary = (f"expected posterior after {args.depth} observations = prior (exact)" if holds
               else f"expected posterior after {args.depth} observations != prior")
    out.emit(
        {"depth": args.depth, "holds": holds,
         "expected_posterior": _vector(model.param_labels, exp),
         "prior": _vector(model.param_labels, model.prior), "summary": summary},
        summary + "\n" + _text_vector(model.param_labels, exp),
    )
    return OK if holds else VIOLATION


def _parse_perturbation(model, spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise ModelError(f"--perturb: expected OUTCOME:ACCOUNT:DELTA, got {spec!r}")
    i = model.outcome_index(parts[0])
    j = model.param_index(parts[1])
    delta = parse_rat(parts[2], "--perturb delta")
    return i, j, delta


def cmd_unique(args, out: _Out) -> int:
    model = load_model(args.model)
    pred = predictive(model)
    candidate = None
    if args.perturb:
        i, j, delta = _parse_perturbation(model, args.perturb)
        if delta == 0:
            raise ModelError("--perturb: delta must be nonzero")
        candidate = perturbed_bayes(model, i, j, delta)
    sol = solve_unique_updater(pred, bayes_event_rule(model), candidate, _event_cap(args))
    payload = sol.to_dict(model.outcome_labels)
    payload["params"] = list(model.param_labels)
    lines = [payload["summary"]]
    for i, bel in sorted(sol.pinned.items()):
        vals = ", ".join(f"{lab}: {show(b)}" for lab, b in zip(model.param_labels, bel))
        lines.append(f"  pinned {model.outcome_labels[i]}: {vals}")
    for i in sorted(sol.free_outcomes):
        lines.append(f"  free {model.outcome_labels[i]} (probability zero)")
    if not sol.consistent:
        lines.append(f"  witness event {{{', '.join(sol.witness.labels(model))}}}")
        lines.append("  gap:\n" + _text_vector(model.param_labels, sol.witness_gap, "    "))
    out.emit(payload, "\n".join(lines))
    return OK if sol.consistent else VIOLATION


def cmd_perturb(args, out: _Out) -> int:
    model = load_model(args.model)
    i = model.outcome_index(args.outcome)
    j = model.param_index(args.account)
    delta = parse_rat(args.delta, "--delta")
    query = None
    if args.query:
        query = Event.from_labels(model, [s.strip() for s in args.query.split(",")])
    det = perturb_and_detect(model, i, j, delta, query)
    violated = any(det.gap)
    labels = det.event.labels(model)
    summary = (f"reflection fails on event {{{', '.join(labels)}}}" if violated
               else f"perturbation not visible on event {{{', '.join(labels)}}}")
    out.emit(
        {"event": labels, "gap": _vector(model.param_labels, det.gap), "violated": violated,
         "summary": summary},
        summary + "\n" + _text_vector(model.param_labels, det.gap),
    )
    return VIOLATION if violated else OK


def cmd_example1(args, out: _Out) -> int:
    prior = cj.BetaParams(args.a, args.b)
    mix = cj.expected_posterior_mixture(prior, args.n_star)
    collapses = cj.mixture_collapses_to(mix, prior)
    verdict = (f"mixture density equals the {prior} prior exactly" if collapses
               else f"mixture density differs from the {prior} prior")
    lines = [f"prior {prior}, contemplating n* = {args.n_star} future observations",
             f"expected posterior: {len(mix)}-component mixture"]
    show_all = len(mix) <= 12 or args.json
    for s, (w, params) in enumerate(mix.components):
        if show_all or s < 3 or s >= len(mix) - 3:
            lines.append(f"  s* = {s}: weight {show(w)}, component {params}")
        elif s == 3:
            lines.append("  ...")
    lines.append(verdict)
    out.emit(
        {"prior": {"a": prior.a, "b": prior.b}, "n_star": args.n_star,
         "weights": [format_rat(w) for w in mix.weights],
         "components": [{"successes": s, "weight": format_rat(w), "a": p.a, "b": p.b}
                        for s, (w, p) in enumerate(mix.components)],
         "collapses_to_prior": collapses, "summary": verdict},
        "\n".join(lines),
    )
    return OK if collapses else VIOLATION


def _load_json(path: str, what: str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{what} {path}: invalid JSON ({exc.msg})") from None


def _load_trials(path: str | None):
    if path is None:
        return cj.TrialRecord(5, 0), None
    data = _load_json(path, "data file")
    seq = data.get("sequence") if isinstance(data, dict) else data
    if isinstance(seq, list):
        return cj.TrialRecord.from_sequence(seq), len(seq)
    if isinstance(data, dict):
        return cj.TrialRecord(int(data.get("successes", 0)), int(data.get("failures", 0))), None
    raise ModelError("data file: expected {\"successes\": s, \"failures\": f} or a 0/1 sequence")


def cmd_example2(args, out: _Out) -> int:
    if args.hypothesis:
        h = cj.PointVsBeta.from_dict(_load_json(args.hypothesis, "hypothesis file"))
    else:
        h = cj.PointVsBeta(Fraction(1, 2), cj.BetaParams(1, 1), Fraction(1))
    t, seq_len = _load_trials(args.data)
    led = cj.example2_ledger(h, t)
    holds = led.expected_prob_alt == led.prob_alt
    summary = ("expected posterior model probability = current model probability (exact)"
               if holds else "expected model probability differs from current probability")
    names = {
        "prob_alt": "p(H1 | y)", "odds_alt": "posterior odds H1:H0",
        "p_success": "p(next success | y)", "p_failure": "p(next failure | y)",
        "bf_success": "BF10 if success", "bf_failure": "BF10 if failure",
        "odds_after_success": "odds after success", "odds_after_failure": "odds after failure",
        "prob_after_success": "p(H1 | success, y)", "prob_after_failure": "p(H1 | failure, y)",
        "expected_prob_alt": "E[p(H1 | next, y)]",
    }
    lines = [f"H0: theta = {format_rat(h.null_rate)}; H1: theta ~ {h.alt_prior}; "
             f"prior odds {format_rat(h.prior_odds_alt)}",
             f"data: {t.successes} successes, {t.failures} failures"
             + (f" (sequence of length {seq_len})" if seq_len is not None else ""),
             f"  posterior under H1: {led.alt_posterior}"]
    lines += [f"  {names[k]}: {show(v)}" for k, v in led.rational_items()]
    lines.append(summary)
    payload = {k: format_rat(v) for k, v in led.rational_items()}
    payload["alt_posterior"] = {"a": led.alt_posterior.a, "b": led.alt_posterior.b}
    payload["hypotheses"] = h.to_dict()
    payload["data"] = {"successes": t.successes, "failures": t.failures}
    if seq_len is not None:
        payload["data"]["sequence_length"] = seq_len
    payload["holds"] = holds
    payload["summary"] = summary
    out.emit(payload, "\n".join(lines))
    return OK if holds else VIOLATION


def cmd_mc_check(args, out: _Out) -> int:
    cfg = McConfig(args.seed, args.reps, parse_grid(args.grid), args.sigma)
    rule = Updater.parse(args.rule)
    if args.model:
        report = mc_reflection_check_finite(load_model(args.model), rule, cfg)
    else:
        try:
            a, b = (int(x) for x in args.beta.split(","))
        except ValueError:
            raise ModelError(f"--beta: expected A,B positive integers, got {args.beta!r}") from None
        report = mc_reflection_check(cj.BetaParams(a, b), args.n_obs, rule, cfg)
    d = report.to_dict()
    lines = [d["summary"]]
    for p in report.points:
        lines.append(f"  {p.label}: estimate {p.estimate:.6f}, reference {p.reference:.6f}, "
                     f"se {p.standard_error:.6f}, {'pass' if p.passed else 'FAIL'}")
    out.emit(d, "\n".join(lines))
    return OK if report.overall_pass else VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reflectance",
        description="Exact checks that expected posteriors equal priors, and that only Bayes' rule does this.",
    )
    common = argparse.ArgumentParser(add_help=False)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--json", action="store_true", help="machine-readable output")
    mode.add_argument("--text", dest="json", action="store_false", help="human-readable output (default)")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_cmd(name, helptext, model_required=True):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--model", required=model_required, help="model JSON file")
        return p

    model_cmd("predictive", "prior predictive distribution").set_defaults(func=cmd_predictive)

    p = model_cmd("reflect", "check E[posterior] = prior for a rule")
    p.add_argument("--rule", default="bayes", help="bayes | noop | tempered:T")
    p.set_defaults(func=cmd_reflect)

    p = model_cmd("reflect-events", "check the conditional identity on every event")
    p.add_argument("--rule", default="bayes")
    p.add_argument("--max-outcomes", type=int, default=None,
                   help=f"event enumeration cap (default {DEFAULT_EVENT_CAP} or $REFLECTANCE_EVENT_CAP)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--show", type=int, default=20, help="violating events listed in text mode")
    p.set_defaults(func=cmd_reflect_events)

    p = model_cmd("lookahead", "expected posterior after k i.i.d. observations")
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(func=cmd_lookahead)

    p = model_cmd("unique", "recover the unique rule from the Bayes event rule")
    p.add_argument("--perturb", help="OUTCOME:ACCOUNT:DELTA, test a perturbed Bayes rule")
    p.add_argument("--max-outcomes", type=int, default=None)
    p.set_defaults(func=cmd_unique)

    p = model_cmd("perturb", "shift one posterior value and show where reflection fails")
    p.add_argument("--outcome", required=True)
    p.add_argument("--account", required=True)
    p.add_argument("--delta", required=True)
    p.add_argument("--query", help="comma-separated outcome labels to evaluate instead of {OUTCOME}")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("example1", parents=[common], help="beta prior: expected posterior mixture")
    p.add_argument("--n-star", type=int, default=2)
    p.add_argument("--a", type=int, default=2)
    p.add_argument("--b", type=int, default=2)
    p.set_defaults(func=cmd_example1)

    p = sub.add_parser("example2", parents=[common], help="point null vs beta: the full ledger")
    p.add_argument("--hypothesis", help="hypothesis JSON file")
    p.add_argument("--data", help="trial data JSON file (counts or 0/1 sequence)")
    p.set_defaults(func=cmd_example2)

    p = model_cmd("mc-check", "Monte Carlo reflection check", model_required=False)
    p.add_argument("--beta", default="2,2", help="A,B of the beta prior (ignored with --model)")
    p.add_argument("--n-obs", type=int, default=20)
    p.add_argument("--rule", default="bayes")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--grid", default="1/4,1/2,3/4")
    p.add_argument("--sigma", type=int, default=3)
    p.set_defaults(func=cmd_mc_check)
    return parser


def run(argv: Sequence[str] | None = None, stdout: TextIO | None = None,
        stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, _Out(args, stdout))
    except (ModelError, NullEventError, EventCapError, ValueError, OSError) as exc:
        stderr.write(f"reflectance {args.command}: error: {exc}\n")
        return USAGE


def main() -> None:
    sys.exit(run())
