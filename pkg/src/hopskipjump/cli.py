"""Command-line surface: attacks, benchmarks, sensitivity studies,
and model validation.

Exit codes: 0 on success, 1 for usage/configuration/load problems,
2 when a run completed but did not succeed (budget exhausted without a
certified sample, or fixture mismatches).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .attack import (
    AttackConfig,
    STEP_SCHEMES,
    hsja_attack,
    init_untargeted,
)
from .boundary import BoundaryConfig, boundary_attack
from .exceptions import HopSkipJumpError
from .geometry import Norm, distance
from .harness import (
    BenchmarkSpec,
    WRAPPED_THETA,
    build_classifier,
    default_analytic_params,
    delta_sensitivity_experiment,
    run_benchmark,
    stepsize_scheme_experiment,
    write_report_files,
)
from .oracles import (
    MODEL_SCHEMA_VERSION,
    AttackObjective,
    QueryingOracle,
    RegionBasedWrapper,
    check_fixtures,
    load_model,
)
from .attack import TRACE_SCHEMA_VERSION
from .rng import RngStream
from .sampleio import read_sample, write_trace

_ANALYTIC_KINDS = ("analytic:hyperplane", "analytic:sphere", "analytic:quadratic")


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed_default() -> int:
    env = os.environ.get("HSJA_SEED")
    return int(env) if env else 0


def _load_oracle_params(text: str | None) -> dict | None:
    if text is None:
        return None
    if text.startswith("@"):
        text = Path(text[1:]).read_text(encoding="utf-8")
    return json.loads(text)


def _build_classifier_from_flags(args, d: int):
    """Classifier from --oracle/--oracle-params, defaults sized to d."""
    spec = args.oracle
    if spec.startswith("model:"):
        return load_model(spec.split(":", 1)[1])
    if spec not in _ANALYTIC_KINDS:
        raise HopSkipJumpError(
            f"--oracle must be one of {', '.join(_ANALYTIC_KINDS)} or model:<path>, got {spec!r}"
        )
    params = _load_oracle_params(args.oracle_params)
    if params is None:
        params = default_analytic_params(spec, d)
    return build_classifier({"kind": spec, "params": params})


def _parse_region_based(text: str | None):
    if text is None:
        return None
    try:
        radius_text, votes_text = text.split(",")
        return float(radius_text), int(votes_text)
    except ValueError:
        raise HopSkipJumpError(
            f"--region-based expects 'radius,votes', got {text!r}"
        ) from None


def _add_oracle_flags(parser):
    parser.add_argument(
        "--oracle",
        required=True,
        help="analytic:hyperplane|analytic:sphere|analytic:quadratic|model:<path>",
    )
    parser.add_argument(
        "--oracle-params",
        help="JSON object (inline or @file) with analytic parameters; "
        "defaults are derived from the input dimension",
    )


def cmd_attack(args) -> int:
    x_star = read_sample(args.input)
    d = x_star.shape[0]
    classifier = _build_classifier_from_flags(args, d)
    region = _parse_region_based(args.region_based)
    if region is not None:
        radius, votes = region
        classifier = RegionBasedWrapper(
            classifier, radius, votes, RngStream(args.seed).derive(1)
        )

    if args.targeted:
        if args.init is None:
            raise HopSkipJumpError("--targeted requires --init (a target-class exemplar)")
        if args.target is None:
            raise HopSkipJumpError("--targeted requires --target <label>")
        objective = AttackObjective.targeted_to(classifier, x_star, args.target)
        x_init = read_sample(args.init)
    else:
        objective = AttackObjective.untargeted(classifier, x_star)
        x_init = read_sample(args.init) if args.init else None

    theta = args.theta
    if theta is None and region is not None:
        theta = WRAPPED_THETA  # coarse bracket under vote noise

    norm = Norm.parse(args.norm)
    if args.attack == "hsja":
        oracle = QueryingOracle(objective)
        config = AttackConfig(
            norm=norm,
            targeted=args.targeted,
            target_label=args.target,
            iterations=args.iterations,
            initial_batch=args.b0,
            max_queries=args.max_queries,
            theta_override=theta,
            seed=args.seed,
        )
        trace = hsja_attack(oracle, x_star, config, x_init=x_init)
    else:
        if norm is not Norm.L2:
            raise HopSkipJumpError("the boundary baseline only optimizes the l2 metric")
        oracle = QueryingOracle(objective, query_cap=args.max_queries)
        if x_init is None:
            x_init = init_untargeted(oracle, x_star, RngStream(args.seed).derive(2))
        config = BoundaryConfig(max_queries=None, seed=args.seed)
        trace = boundary_attack(oracle, x_star, config, x_init)

    write_trace(args.output, trace)
    final = (
        distance(trace.final_sample, x_star, norm)
        if trace.final_sample is not None
        else math.inf
    )
    print(
        f"{args.attack}: success={trace.success} queries={trace.queries_used} "
        f"distance={final:.6g} trace={args.output}"
    )
    return 0 if trace.success else 2


def cmd_benchmark(args) -> int:
    spec = BenchmarkSpec.from_file(args.spec)
    report = run_benchmark(spec, jobs=args.jobs)
    try:
        written = write_report_files(report, args.outdir)
    except OSError as exc:
        print(f"error: cannot write to {args.outdir}: {exc}", file=sys.stderr)
        return 1
    for attack, points in report["curves"].items():
        summary = "  ".join(f"@{p['queries']}: {p['median_distance']:.4g}" for p in points)
        print(f"{attack} median distance {summary}")
    for path in written:
        print(f"wrote {path}")
    if report["failures"]:
        print(f"{len(report['failures'])} run(s) failed to initialize (see report.json)")
    return 0


def cmd_grad_eval(args) -> int:
    x_star = read_sample(args.input)
    classifier_spec = {"kind": args.oracle}
    params = _load_oracle_params(args.oracle_params)
    if params is None and args.oracle in _ANALYTIC_KINDS:
        params = default_analytic_params(args.oracle, x_star.shape[0])
    classifier_spec["params"] = params
    multipliers = [float(m) for m in args.multipliers.split(",")]
    result = delta_sensitivity_experiment(
        classifier_spec,
        x_star,
        multipliers=multipliers,
        batch=args.batch,
        reps=args.reps,
        master_seed=args.seed,
    )
    out = Path(args.output)
    lines = ["# multiplier baseline median q1 q3 n"]
    for row in result["rows"]:
        lines.append(
            f"{row['multiplier']} {int(row['baseline'])} "
            f"{row['median']!r} {row['q1']!r} {row['q3']!r} {row['n']}"
        )
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(result['rows'])} rows, {result['points']} boundary points)")
    return 0


def cmd_stepsize_eval(args) -> int:
    schemes = [s.strip() for s in args.schemes.split(",")] if args.schemes else list(STEP_SCHEMES)
    x_star = read_sample(args.input) if args.input else None
    d = x_star.shape[0] if x_star is not None else args.dimension
    classifier_spec = {"kind": args.oracle}
    params = _load_oracle_params(args.oracle_params)
    if params is None and args.oracle in _ANALYTIC_KINDS:
        params = default_analytic_params(args.oracle, d)
    classifier_spec["params"] = params
    result = stepsize_scheme_experiment(
        classifier_spec,
        schemes,
        budget=args.budget,
        samples=[x_star] if x_star is not None else None,
        n_samples=args.samples,
        master_seed=args.seed,
    )
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = outdir / "stepsize_summary.json"
    summary.write_text(json.dumps(result, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    for name, data in result["schemes"].items():
        path = outdir / f"scheme_{name.replace(':', '_')}.dat"
        lines = ["# queries median_best"]
        lines += [f"{q} {m!r}" for q, m in zip(data["checkpoints"], data["median_best"])]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"{name}: final median {data['final_median']:.6g}")
    print(f"wrote {summary}")
    return 0


def cmd_validate_model(args) -> int:
    model = load_model(args.model)
    fixtures_path = Path(args.fixtures) if args.fixtures else _default_fixtures_path(args.model)
    try:
        fixtures = json.loads(Path(fixtures_path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        print(f"error: fixtures file not found: {fixtures_path}", file=sys.stderr)
        return 1
    matches, total = check_fixtures(model, fixtures)
    print(f"{matches}/{total} fixtures match")
    return 0 if matches == total else 2


def _default_fixtures_path(model_path) -> Path:
    path = Path(model_path)
    name = path.name
    if name.endswith(".model.json"):
        return path.with_name(name[: -len(".model.json")] + ".fixtures.json")
    return path.with_suffix(".fixtures.json")


def build_parser() -> _Parser:
    parser = _Parser(prog="hsja", description=__doc__)
    parser.add_argument(
        "--version",
        action="version",
        version=(
            f"hsja {__version__} "
            f"(modelfile-schema {MODEL_SCHEMA_VERSION}, trace-schema {TRACE_SCHEMA_VERSION})"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    attack = sub.add_parser("attack", help="run one attack and write its trace")
    _add_oracle_flags(attack)
    attack.add_argument("--input", required=True, help="original sample (.json or .csv)")
    attack.add_argument("--norm", required=True, choices=["l2", "linf"])
    attack.add_argument("--attack", default="hsja", choices=["hsja", "boundary"])
    attack.add_argument("--targeted", action="store_true")
    attack.add_argument("--target", type=int, help="target label (targeted mode)")
    attack.add_argument("--init", help="starting sample file (required when targeted)")
    attack.add_argument("--max-queries", type=int, default=25000)
    attack.add_argument("--iterations", type=int, default=64)
    attack.add_argument("--b0", type=int, default=100)
    attack.add_argument("--seed", type=int, default=_seed_default())
    attack.add_argument("--theta", type=float, help="binary-search threshold override")
    attack.add_argument("--region-based", help="wrap the oracle: 'radius,votes'")
    attack.add_argument("--output", default="trace.json")
    attack.set_defaults(func=cmd_attack)

    bench = sub.add_parser("benchmark", help="run a benchmark spec")
    bench.add_argument("--spec", required=True)
    bench.add_argument("--outdir", required=True)
    bench.add_argument("--jobs", type=int, default=1)
    bench.set_defaults(func=cmd_benchmark)

    grad = sub.add_parser("grad-eval", help="probe-radius sensitivity study")
    _add_oracle_flags(grad)
    grad.add_argument("--input", required=True, help="original sample file")
    grad.add_argument("--multipliers", default="0.01,0.1,1,10,100")
    grad.add_argument("--batch", type=int, default=1000)
    grad.add_argument("--reps", type=int, default=5)
    grad.add_argument("--seed", type=int, default=_seed_default())
    grad.add_argument("--output", default="grad_eval.dat")
    grad.set_defaults(func=cmd_grad_eval)

    step = sub.add_parser("stepsize-eval", help="step-size scheme comparison")
    _add_oracle_flags(step)
    step.add_argument("--schemes", help=f"comma list from: {', '.join(STEP_SCHEMES)}")
    step.add_argument("--budget", type=int, default=3000)
    step.add_argument("--samples", type=int, default=10)
    step.add_argument("--dimension", type=int, default=10, help="sample dimension when generating")
    step.add_argument("--input", help="optional single original sample file")
    step.add_argument("--seed", type=int, default=_seed_default())
    step.add_argument("--outdir", default="stepsize_eval")
    step.set_defaults(func=cmd_stepsize_eval)

    validate = sub.add_parser("validate-model", help="check a model file against its fixtures")
    validate.add_argument("--model", required=True)
    validate.add_argument("--fixtures", help="defaults to <model>.fixtures.json")
    validate.set_defaults(func=cmd_validate_model)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HopSkipJumpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
