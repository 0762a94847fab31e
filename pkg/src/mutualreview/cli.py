"""Command-line front end: scenario files, numbered presets and CSV output.

A scenario is a small YAML tree.  Top-level keys fix the group and the run
budget; ``cases`` names behaviour set-ups; ``compare`` lists
``[variant, base]`` pairs for delta experiments; ``m_values`` drives the
accuracy sweep.  Every preset under ``presets/`` is such a file.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from . import __version__
from .assignment import ForcedReview
from .engine import (
    DEFAULT_REPLICATIONS,
    conditional_experiment,
    delta_experiment,
    ranking_accuracy,
    run_experiment,
)
from .model import (
    BehaviorProfile,
    ConfigError,
    ControversialSet,
    GroupConfig,
    Noisy,
    OneSidedFavor,
    ReciprocalFavor,
    ReverseRanking,
    SamplingExhausted,
    validate_config,
)

WORKERS_ENV = "MUTUALREVIEW_WORKERS"
EXPERIMENTS = ("funding", "delta", "accuracy")
PROBABILITY_HEADER = ["scenario", "proposal_merit", "funded_probability", "std_error"]
ACCURACY_HEADER = ["scenario", "m", "topT_accuracy", "kendall_tau"]

TOP_KEYS = {
    "name", "description", "experiment", "n", "m", "rate", "p", "seed", "replications",
    "paired", "mutual_review", "tie_break", "sigma", "cases", "compare", "m_values",
}
CASE_KEYS = {
    "bonus", "sigma", "reverse", "noisy", "one_sided", "reciprocal",
    "controversial", "shift", "controversy_sigma", "condition",
}


class ParseError(Exception):
    """The scenario text is unreadable or has keys we do not know."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ValidationError(ConfigError):
    """The scenario parses but breaks a model constraint."""


@dataclass
class Case:
    label: str
    bonus: bool = True
    profile: BehaviorProfile = field(default_factory=BehaviorProfile)
    condition: ForcedReview | None = None


@dataclass
class Scenario:
    name: str
    experiment: str
    config: GroupConfig
    replications: int
    paired: bool
    cases: dict[str, Case]
    compare: list[tuple[str, str]]
    m_values: list[int]
    description: str = ""
    raw: dict = field(default_factory=dict)


# -- parsing ---------------------------------------------------------------

def _key_lines(node) -> dict[tuple, int]:
    """Map key paths to 1-based source lines, for error messages."""
    lines: dict[tuple, int] = {}

    def walk(n, path):
        if isinstance(n, yaml.MappingNode):
            for k, v in n.value:
                p = path + (k.value,)
                lines[p] = k.start_mark.line + 1
                walk(v, p)

    walk(node, ())
    return lines


def parse_scenario(text: str, source: str = "<scenario>") -> dict:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ParseError(f"{source}: {getattr(exc, 'problem', None) or exc}", line) from None
    if data is None:
        raise ParseError(f"{source}: scenario is empty", 1)
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be a mapping", 1)
    lines = _key_lines(node)
    for key in data:
        if key not in TOP_KEYS:
            raise ParseError(f"unknown key '{key}'", lines.get((key,)), key)
    cases = data.get("cases") or {}
    if not isinstance(cases, dict):
        raise ParseError("'cases' must be a mapping", lines.get(("cases",)), "cases")
    for label, body in cases.items():
        body = body or {}
        if not isinstance(body, dict):
            raise ParseError(f"case '{label}' must be a mapping", lines.get(("cases", label)), label)
        for key in body:
            if key not in CASE_KEYS:
                raise ParseError(
                    f"unknown key '{key}' in case '{label}'", lines.get(("cases", label, key)), key
                )
    return data


def _merit_map(value, what: str) -> dict[int, Any]:
    if not isinstance(value, dict):
        raise ValidationError(f"{what} must map merit indices to values")
    return {int(k): v for k, v in value.items()}


def _build_case(label: str, body: dict, default_sigma: float) -> Case:
    strategies: dict[int, Any] = {}

    def put(merit, strat):
        if merit in strategies:
            raise ValidationError(f"case '{label}': reviewer {merit} has two strategies")
        strategies[merit] = strat

    for merit in body.get("reverse") or []:
        put(int(merit), ReverseRanking())
    for merit, sigma in _merit_map(body.get("noisy") or {}, "noisy").items():
        put(merit, Noisy(float(sigma)))
    for merit, ally in _merit_map(body.get("one_sided") or {}, "one_sided").items():
        put(merit, OneSidedFavor(int(ally)))
    for pair in body.get("reciprocal") or []:
        if len(pair) != 2:
            raise ValidationError(f"case '{label}': reciprocal entries are [i, j] pairs")
        i, j = (int(x) for x in pair)
        put(i, ReciprocalFavor(j))
        put(j, ReciprocalFavor(i))
    controversy = None
    if body.get("controversial"):
        controversy = ControversialSet(
            tuple(int(k) for k in body["controversial"]),
            shift=float(body.get("shift", 5.0)),
            sigma=float(body.get("controversy_sigma", 2.5)),
        )
    condition = None
    if body.get("condition") is not None:
        cond = body["condition"]
        if len(cond) != 2:
            raise ValidationError(f"case '{label}': condition is [reviewer, proposal]")
        condition = ForcedReview(int(cond[0]), int(cond[1]))
    profile = BehaviorProfile(
        strategies, sigma=float(body.get("sigma", default_sigma)), controversy=controversy, label=label
    )
    return Case(label, bool(body.get("bonus", True)), profile, condition)


def build_scenario(data: dict, overrides: dict | None = None) -> Scenario:
    """Turn a parsed tree (plus CLI overrides) into a validated :class:`Scenario`."""
    data = {**data, **{k: v for k, v in (overrides or {}).items() if v is not None and k != "bonus"}}
    experiment = data.get("experiment", "funding")
    if experiment not in EXPERIMENTS:
        raise ValidationError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
    try:
        cfg = GroupConfig(
            n_proposals=int(data.get("n", 25)),
            reviews_per_pi=int(data.get("m", 7)),
            acceptance_rate=float(data.get("rate", 0.15)),
            utility_exponent=float(data.get("p", 1.0)),
            mutual_review_allowed=bool(data.get("mutual_review", True)),
            seed=int(data.get("seed", 0)),
            tie_break=str(data.get("tie_break", "random")),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from None
    _checked(validate_config, cfg)
    reps = int(data.get("replications", DEFAULT_REPLICATIONS))
    if reps < 1:
        raise ValidationError(f"replications must be >= 1, got {reps}")

    sigma = float(data.get("sigma", 0.0))
    raw_cases = data.get("cases") or {"honest": {}}
    cases = {label: _build_case(str(label), body or {}, sigma) for label, body in raw_cases.items()}
    bonus = (overrides or {}).get("bonus")
    if bonus is not None:
        for c in cases.values():
            c.bonus = bonus
    for c in cases.values():
        _checked(c.profile.validate, cfg.n_proposals)
        if c.condition is not None:
            for idx in (c.condition.reviewer, c.condition.proposal):
                if not 1 <= idx <= cfg.n_proposals:
                    raise ValidationError(f"case '{c.label}': condition index {idx} out of range")

    compare = [tuple(str(x) for x in pair) for pair in data.get("compare") or []]
    for pair in compare:
        if len(pair) != 2 or any(x not in cases for x in pair):
            raise ValidationError(f"compare entries must name two cases, got {list(pair)}")
        if cases[pair[0]].condition != cases[pair[1]].condition:
            raise ValidationError(f"compared cases {list(pair)} must share their condition")
    if experiment == "delta" and not compare:
        raise ValidationError("a delta experiment needs at least one compare entry")

    m_values = [int(m) for m in data.get("m_values") or [cfg.reviews_per_pi]]
    for m in m_values:
        _checked(validate_config, cfg.replace(reviews_per_pi=m))

    return Scenario(
        name=str(data.get("name", "scenario")),
        experiment=experiment,
        config=cfg,
        replications=reps,
        paired=bool(data.get("paired", True)),
        cases=cases,
        compare=compare,
        m_values=m_values,
        description=str(data.get("description", "")),
        raw=data,
    )


def _checked(fn, *args):
    try:
        fn(*args)
    except ValidationError:
        raise
    except ConfigError as exc:
        raise ValidationError(str(exc)) from None


def preset_names() -> list[str]:
    files = resources.files("mutualreview").joinpath("presets").iterdir()
    names = [Path(f.name).stem for f in files if f.name.endswith(".yaml")]
    return sorted(names, key=lambda s: (len(s), s))


def preset_text(name: str) -> str:
    path = resources.files("mutualreview").joinpath("presets", f"{name}.yaml")
    if not path.is_file():
        raise ValidationError(f"no preset named '{name}' (have: {', '.join(preset_names())})")
    return path.read_text(encoding="utf-8")


def load_scenario(path: str | os.PathLike, overrides: dict | None = None) -> Scenario:
    """Read a scenario file (or the name of a preset) and validate it."""
    p = Path(path)
    if p.exists():
        text, source = p.read_text(encoding="utf-8"), str(p)
    elif str(path) in preset_names():
        text, source = preset_text(str(path)), f"preset {path}"
    else:
        raise FileNotFoundError(f"no scenario file or preset named '{path}'")
    return build_scenario(parse_scenario(text, source), overrides)


# -- running ---------------------------------------------------------------

def _case_config(sc: Scenario, case: Case) -> GroupConfig:
    return sc.config.replace(bonus_enabled=case.bonus)


def _prob_rows(label, stats_prob, stats_se):
    return [[label, k + 1, f"{p:.6f}", f"{s:.6f}"] for k, (p, s) in enumerate(zip(stats_prob, stats_se))]


def _summary(label: str, values, n_funded: int, signed: bool = False) -> str:
    """One line listing the proposals with the largest (absolute) values."""
    top = sorted(range(len(values)), key=lambda k: (-abs(values[k]), k))[: n_funded + 1]
    fmt = "{:+.4f}" if signed else "{:.4f}"
    return f"{label}: " + " ".join(f"{k + 1}:" + fmt.format(values[k]) for k in sorted(top))


def execute(sc: Scenario, workers: int = 1) -> tuple[list[str], list[list], list[str]]:
    """Run a scenario; return (CSV header, rows, summary lines)."""
    summaries: list[str] = []
    if sc.experiment == "accuracy":
        rows = []
        for label, case in sc.cases.items():
            acc = ranking_accuracy(
                _case_config(sc, case), sc.m_values, sc.replications, sc.config.seed, case.profile, workers
            )
            for r in acc:
                rows.append([label, r.m, f"{r.top_accuracy:.6f}", f"{r.kendall_tau:.6f}"])
            summaries.append(
                f"{label}: " + " ".join(f"m={r.m}:{r.top_accuracy:.3f}" for r in acc)
            )
        return ACCURACY_HEADER, rows, summaries

    rows: list[list] = []
    t = sc.config.n_funded
    if sc.experiment == "funding":
        for label, case in sc.cases.items():
            cfg = _case_config(sc, case)
            if case.condition is None:
                stats = run_experiment(cfg, case.profile, sc.replications, cfg.seed, workers)
            else:
                stats = conditional_experiment(cfg, case.profile, case.condition, sc.replications, cfg.seed, workers)
            rows += _prob_rows(label, stats.funded_probability, stats.std_error)
            summaries.append(_summary(label, stats.funded_probability, t))
        return PROBABILITY_HEADER, rows, summaries

    seen: set[str] = set()
    for variant, base in sc.compare:
        vc, bc = sc.cases[variant], sc.cases[base]
        d = delta_experiment(
            _case_config(sc, bc),
            bc.profile,
            vc.profile,
            sc.replications,
            sc.config.seed,
            paired=sc.paired,
            condition=bc.condition,
            workers=workers,
            variant_cfg=_case_config(sc, vc),
        )
        for label, stats in ((base, d.base), (variant, d.variant)):
            if label not in seen:
                seen.add(label)
                rows += _prob_rows(label, stats.funded_probability, stats.std_error)
        label = f"{variant}-vs-{base}"
        rows += _prob_rows(label, d.delta, d.std_error)
        summaries.append(_summary(label, d.delta, t, signed=True))
    return PROBABILITY_HEADER, rows, summaries


def write_outputs(sc: Scenario, header, rows, out_dir: Path) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{sc.name}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    meta = {
        "name": sc.name,
        "description": sc.description,
        "version": __version__,
        "experiment": sc.experiment,
        "config": asdict(sc.config),
        "n_funded": sc.config.n_funded,
        "replications": sc.replications,
        "paired": sc.paired,
        "m_values": sc.m_values if sc.experiment == "accuracy" else None,
        "compare": [list(p) for p in sc.compare],
        "cases": {
            label: {
                "bonus": c.bonus,
                "sigma": c.profile.sigma,
                "strategies": {
                    str(k): {"kind": type(s).__name__, **asdict(s)}
                    for k, s in sorted(c.profile.strategies.items())
                },
                "controversy": asdict(c.profile.controversy) if c.profile.controversy else None,
                "condition": asdict(c.condition) if c.condition else None,
            }
            for label, c in sc.cases.items()
        },
    }
    json_path = out_dir / f"{sc.name}.json"
    json_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return csv_path, json_path


# -- argument handling -----------------------------------------------------

def _on_off(text: str) -> bool:
    low = text.lower()
    if low in ("on", "true", "yes", "1"):
        return True
    if low in ("off", "false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected on or off, got {text!r}")


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mutualreview", description="Mutual proposal review simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or scenario file")
    run.add_argument("scenario", help="preset name (fig1..fig12) or path to a YAML scenario")
    run.add_argument("-o", "--out", default="results", help="output directory (default: results)")
    run.add_argument("--n", type=int, help="number of proposals N")
    run.add_argument("--m", type=int, help="reviews per PI m")
    run.add_argument("--rate", type=float, help="acceptance rate")
    run.add_argument("--p", type=float, help="utility exponent p")
    run.add_argument("--replications", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--bonus", type=_on_off, help="force quality bonuses on or off for every case")
    run.add_argument("--paired", type=_on_off, help="common random numbers for deltas (on|off)")
    run.add_argument("--tie-break", choices=["random", "merit"], dest="tie_break")
    run.add_argument("--workers", type=int, default=None, help=f"worker processes (default: ${WORKERS_ENV} or 1)")

    sub.add_parser("presets", help="list the built-in presets")
    show = sub.add_parser("show", help="print a preset's scenario text")
    show.add_argument("name")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            for name in preset_names():
                data = yaml.safe_load(preset_text(name))
                print(f"{name:6s} {data.get('description', '')}")
            return 0
        if args.command == "show":
            sys.stdout.write(preset_text(args.name))
            return 0

        overrides = {
            "n": args.n,
            "m": args.m,
            "rate": args.rate,
            "p": args.p,
            "replications": args.replications,
            "seed": args.seed,
            "paired": args.paired,
            "tie_break": args.tie_break,
            "bonus": args.bonus,
        }
        sc = load_scenario(args.scenario, overrides)
        workers = args.workers if args.workers is not None else _default_workers()
        header, rows, summaries = execute(sc, max(1, workers))
        csv_path, json_path = write_outputs(sc, header, rows, Path(args.out))
    except (ParseError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SamplingExhausted, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for line in summaries:
        print(line)
    print(f"wrote {csv_path} and {json_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
