"""Command-line front end.

    sleepingbeauty credence  --scenario sbp --weighting halfer
    sleepingbeauty simulate  --scenario sbp --n 100000 --seed 42 --mode per-awakening --event H
    sleepingbeauty dutchbook --book hitchcock --policy cdt-halfer --pstar 1/1
    sleepingbeauty branch    --scenario quantum_sbp --mode double
    sleepingbeauty tables

Exit status: 0 on success, 1 on usage errors, 2 on engine errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import betting, protocol, report, sampler
from .measure import WEIGHTINGS, named_event

COMMANDS = ("credence", "simulate", "dutchbook", "branch", "tables")
POLICIES = ("accept-all", "reject-all", "cdt-halfer", "edt-halfer", "cdt-thirder", "edt-thirder")
SAMPLE_MODES = {"per-experiment": sampler.PER_EXPERIMENT, "per-awakening": sampler.PER_AWAKENING}
BRANCH_MODES = ("single", "double")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    scenario: str | None = None
    params: dict = field(default_factory=dict)

    def validate(self) -> RunConfig:
        p = self.params
        if self.command == "simulate":
            if p.get("mode") not in SAMPLE_MODES:
                raise UsageError("simulate needs --mode per-experiment|per-awakening")
            if p.get("seed") is None:
                raise UsageError("simulate needs --seed")
            if p.get("n") is None or p["n"] < 1:
                raise UsageError("simulate needs --n >= 1")
        if self.command == "branch" and p.get("mode") not in BRANCH_MODES:
            raise UsageError("branch takes --mode single|double")
        if self.command == "dutchbook" and p.get("N") is not None and p["N"] < 2:
            raise UsageError("--N must be at least 2")
        return self


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected p/q, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sleepingbeauty", description="Awakening protocols, credences and Dutch books.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--scenario", help="built-in name or scenario file path")
    parser.add_argument("--weighting", choices=WEIGHTINGS, default="halfer")
    parser.add_argument("--n", type=int, default=100000)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--mode")
    parser.add_argument("--event", default="H")
    parser.add_argument("--book", default="hitchcock", help="hitchcock, briggs or custom:<path>")
    parser.add_argument("--policy", choices=POLICIES, default="accept-all")
    parser.add_argument("--pstar", type=_fraction, default=Fraction(1))
    parser.add_argument("--N", type=int, dest="N")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--format", choices=("text", "records"), default="text")
    return parser


def load_scenario(name: str) -> protocol.ExperimentProtocol:
    if os.path.exists(name):
        return protocol.load(name)
    return protocol.builtin(name)


def _book(spec: str, proto) -> betting.BettingBook:
    if spec.startswith("custom:"):
        return betting.load_book(spec[len("custom:"):], proto)
    return betting.builtin_book(spec, proto)


def execute(cfg: RunConfig) -> list[report.Report]:
    p = cfg.params
    if cfg.command == "credence":
        proto = load_scenario(cfg.scenario or "sbp")
        return [report.credence_report(proto, p["weighting"])]
    if cfg.command == "simulate":
        proto = load_scenario(cfg.scenario or "sbp")
        event = named_event(proto, p["event"])
        return [report.simulate_report(proto, event, SAMPLE_MODES[p["mode"]], p["n"], p["seed"], p["workers"])]
    if cfg.command == "dutchbook":
        policy = betting.Policy.parse(p["policy"], p["pstar"])
        if p.get("N") is not None:
            return [report.n_waking_report(p["N"], policy)]
        proto = load_scenario(cfg.scenario or "sbp")
        return report.dutchbook_report(_book(p["book"], proto), policy)
    if cfg.command == "branch":
        proto = load_scenario(cfg.scenario or "quantum_sbp")
        return report.branch_report(proto, p["mode"])
    seed = p["seed"] if p.get("seed") is not None else 42
    return report.all_tables(p["n"], seed)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        params = vars(args).copy()
        command, scenario = params.pop("command"), params.pop("scenario")
        if command == "branch" and params["mode"] is None:
            params["mode"] = "single"
        cfg = RunConfig(command, scenario, params).validate()
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        reports = execute(cfg)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(report.emit(reports, args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
