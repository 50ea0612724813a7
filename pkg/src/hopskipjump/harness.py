"""Experiment runner: distance-versus-query curves, success-rate
tables, and the probe-radius / step-scheme sensitivity studies.

A benchmark spec names an oracle (analytic parameters or a model file,
optionally region-wrapped), the attacks to compare, a sample set, and
query checkpoints. Each (sample, attack, repetition) run gets its own
derived random stream and its own query-capped oracle, so removing a
sample never perturbs another sample's trace and reruns are
byte-identical. The per-run metric is the anytime one: the best
certified distance achieved at or before each checkpoint.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .attack import (
    AttackConfig,
    AttackTrace,
    estimate_gradient_direction,
    hsja_attack,
    init_untargeted,
    validate_step_scheme,
)
from .boundary import BoundaryConfig, boundary_attack
from .exceptions import (
    BenchmarkSpecError,
    InitializationFailedError,
    InvalidInputError,
    QueryBudgetExceededError,
    UnsupportedExperimentError,
)
from .geometry import Norm, as_sample
from .oracles import (
    AnalyticModel,
    AttackObjective,
    Classifier,
    Hyperplane,
    QuadraticBoundary,
    QueryingOracle,
    RegionBasedWrapper,
    SphereBoundary,
    load_model,
)
from .rng import RngStream, mix_indices

ATTACK_NAMES = ("hsja", "boundary")
DEFAULT_CHECKPOINTS = (1000, 5000, 20000)
# Stream lanes: 0 is the attack's own lane (see hsja_attack), so the
# harness derives wrapper and initialization streams off other lanes.
_WRAPPER_LANE = 1
_INIT_LANE = 2
_ATTACK_CODE = {"hsja": 1, "boundary": 2}
# theta used for region-wrapped oracles unless the benchmark spec
# file overrides it;
# a coarse bracket tolerates vote noise near the boundary.
WRAPPED_THETA = 0.01


# ---------------------------------------------------------------------------
# Oracle descriptors
# ---------------------------------------------------------------------------


def build_classifier(descriptor: dict, base_dir: Path | None = None) -> Classifier:
    """Instantiate the base classifier named by an oracle descriptor."""
    kind = descriptor.get("kind")
    params = descriptor.get("params", {})
    if kind == "analytic:hyperplane":
        return Hyperplane(params["w"], params["b"])
    if kind == "analytic:sphere":
        return SphereBoundary(params["center"], params["radius"])
    if kind == "analytic:quadratic":
        return QuadraticBoundary(params["a"], params["w"], params["b"])
    if kind == "model":
        path = Path(descriptor["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_model(path)
    raise BenchmarkSpecError(f"oracle.kind {kind!r} unknown")


def wrap_classifier(base: Classifier, descriptor: dict, stream: RngStream) -> Classifier:
    wrap = descriptor.get("region_based")
    if not wrap:
        return base
    return RegionBasedWrapper(base, wrap["radius"], wrap["votes"], stream)


def default_analytic_params(kind: str, d: int) -> dict:
    """Dimension-only default parameters for the analytic oracles.

    Used by the CLI when no explicit parameters are given: a diagonal
    hyperplane with the threshold at coordinate-sum 0.55d, a sphere of
    radius 0.25 at the cube center, and a mildly curved quadratic.
    """
    if kind == "analytic:hyperplane":
        w = np.full(d, 1.0 / math.sqrt(d))
        return {"w": w.tolist(), "b": -0.55 * math.sqrt(d)}
    if kind == "analytic:sphere":
        return {"center": [0.5] * d, "radius": 0.25}
    if kind == "analytic:quadratic":
        signs = np.where(np.arange(d) % 2 == 0, 1.0, -1.0)
        a = np.diag(0.5 * signs * np.linspace(0.5, 1.0, d))
        w = np.full(d, 1.0 / d)
        return {"a": a.tolist(), "w": w.tolist(), "b": -0.1}
    raise InvalidInputError(f"no default parameters for oracle kind {kind!r}")


# ---------------------------------------------------------------------------
# Benchmark spec
# ---------------------------------------------------------------------------


@dataclass
class BenchmarkSpec:
    """Validated description of one benchmark run."""

    oracle: dict
    attacks: list[str] = field(default_factory=lambda: list(ATTACK_NAMES))
    norm: Norm = Norm.L2
    targeted: bool = False
    target_label: int | None = None
    samples: list[dict] = field(default_factory=list)
    checkpoints: list[int] = field(default_factory=lambda: list(DEFAULT_CHECKPOINTS))
    thresholds: list[float] = field(default_factory=list)
    repetitions: int = 1
    master_seed: int = 0
    hsja_overrides: dict = field(default_factory=dict)
    boundary_overrides: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> "BenchmarkSpec":
        problems = []
        oracle = doc.get("oracle")
        if not isinstance(oracle, dict) or "kind" not in oracle:
            problems.append("oracle: must be an object with a 'kind'")
            oracle = {"kind": None}
        attacks = doc.get("attacks", list(ATTACK_NAMES))
        if not attacks or any(a not in ATTACK_NAMES for a in attacks):
            problems.append(f"attacks: must be a non-empty subset of {list(ATTACK_NAMES)}")
        try:
            norm = Norm.parse(doc.get("norm", "l2"))
        except InvalidInputError:
            problems.append("norm: must be 'l2' or 'linf'")
            norm = Norm.L2
        samples_doc = doc.get("samples")
        samples: list[dict] = []
        if isinstance(samples_doc, dict) and "inline" in samples_doc:
            raw = samples_doc["inline"]
        elif isinstance(samples_doc, dict) and "file" in samples_doc:
            path = Path(samples_doc["file"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            try:
                raw = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                problems.append(f"samples.file: cannot read {path}")
                raw = []
        else:
            problems.append("samples: need 'inline' vectors or a 'file'")
            raw = []
        for i, entry in enumerate(raw):
            if isinstance(entry, dict):
                if "values" not in entry:
                    problems.append(f"samples[{i}]: missing 'values'")
                    continue
                samples.append(entry)
            else:
                samples.append({"values": entry})
        if not samples and "samples:" not in " ".join(problems):
            problems.append("samples: empty sample set")
        checkpoints = doc.get("checkpoints", list(DEFAULT_CHECKPOINTS))
        if not checkpoints or any(
            b <= a for a, b in zip(checkpoints, checkpoints[1:])
        ) or any(c <= 0 for c in checkpoints):
            problems.append("checkpoints: must be positive and strictly increasing")
        repetitions = doc.get("repetitions", 1)
        if not isinstance(repetitions, int) or repetitions < 1:
            problems.append("repetitions: must be an integer >= 1")
        thresholds = doc.get("thresholds", [])
        targeted = bool(doc.get("targeted", False))
        target_label = doc.get("target_label")
        if targeted and target_label is None:
            problems.append("target_label: required when targeted")
        if targeted:
            missing = [i for i, s in enumerate(samples) if "init" not in s]
            if missing:
                problems.append(f"samples: targeted mode needs 'init' for indices {missing}")
        if problems:
            raise BenchmarkSpecError("invalid benchmark spec: " + "; ".join(problems))
        return cls(
            oracle=oracle,
            attacks=list(attacks),
            norm=norm,
            targeted=targeted,
            target_label=target_label,
            samples=samples,
            checkpoints=list(checkpoints),
            thresholds=list(thresholds),
            repetitions=repetitions,
            master_seed=int(doc.get("master_seed", 0)),
            hsja_overrides=dict(doc.get("hsja", {})),
            boundary_overrides=dict(doc.get("boundary", {})),
        )

    @classmethod
    def from_file(cls, path) -> "BenchmarkSpec":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise BenchmarkSpecError(f"spec file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise BenchmarkSpecError(f"spec file is not valid JSON: {exc}") from None
        return cls.from_dict(doc, base_dir=path.parent)

    def echo(self) -> dict:
        return {
            "oracle": self.oracle,
            "attacks": self.attacks,
            "norm": self.norm.value,
            "targeted": self.targeted,
            "target_label": self.target_label,
            "n_samples": len(self.samples),
            "checkpoints": self.checkpoints,
            "thresholds": self.thresholds,
            "repetitions": self.repetitions,
            "master_seed": self.master_seed,
            "hsja": self.hsja_overrides,
            "boundary": self.boundary_overrides,
        }


def environment_stamp() -> dict:
    """Versions only; nothing time-dependent, reports stay byte-stable."""
    return {
        "package": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
    }


# ---------------------------------------------------------------------------
# Benchmark execution
# ---------------------------------------------------------------------------


def _certified_points(trace: AttackTrace):
    """(queries, distance) pairs for every certified iterate in a trace."""
    for record in trace.records:
        yield record.queries, record.distance
        if record.boundary_distance is not None:
            yield record.queries, record.boundary_distance


def best_by_checkpoint(trace: AttackTrace, checkpoints) -> list[tuple[float, int]]:
    """Anytime metric: (best distance, queries at best) per checkpoint."""
    out = []
    for checkpoint in checkpoints:
        best = math.inf
        best_queries = 0
        for queries, dist in _certified_points(trace):
            if queries <= checkpoint and dist < best:
                best = dist
                best_queries = queries
        out.append((best, best_queries))
    return out


def _run_one(spec: BenchmarkSpec, base: Classifier, attack: str, index: int, rep: int):
    entry = spec.samples[index]
    x_star = as_sample(entry["values"])
    run_seed = mix_indices(spec.master_seed, index, _ATTACK_CODE[attack], rep)
    wrapper_stream = RngStream(run_seed).derive(_WRAPPER_LANE)
    classifier = wrap_classifier(base, spec.oracle, wrapper_stream)
    if spec.targeted:
        objective = AttackObjective.targeted_to(classifier, x_star, spec.target_label)
    else:
        objective = AttackObjective.untargeted(classifier, x_star)
    cap = max(spec.checkpoints)
    oracle = QueryingOracle(objective, query_cap=cap)
    wrapped = bool(spec.oracle.get("region_based"))
    try:
        if attack == "hsja":
            overrides = dict(spec.hsja_overrides)
            if wrapped:
                overrides.setdefault("theta_override", WRAPPED_THETA)
            config = AttackConfig(
                norm=spec.norm,
                targeted=spec.targeted,
                target_label=spec.target_label,
                iterations=overrides.get("iterations", 1000),
                initial_batch=overrides.get("initial_batch", 100),
                max_queries=None,  # the oracle cap is the budget
                theta_override=overrides.get("theta_override"),
                q_exponent=overrides.get("q_exponent", 0.5),
                seed=run_seed,
                use_baseline=overrides.get("use_baseline", True),
            )
            x_init = entry.get("init") if spec.targeted else None
            trace = hsja_attack(oracle, x_star, config, x_init=x_init)
        else:
            overrides = dict(spec.boundary_overrides)
            config = BoundaryConfig(
                orthogonal_step=overrides.get("orthogonal_step", 0.01),
                source_step=overrides.get("source_step", 0.01),
                adaptation_factor=overrides.get("adaptation_factor", 1.5),
                success_window=overrides.get("success_window", 30),
                max_queries=None,
                seed=run_seed,
            )
            if spec.targeted:
                x_init = as_sample(entry["init"])
            else:
                init_stream = RngStream(run_seed).derive(_INIT_LANE)
                x_init = init_untargeted(oracle, x_star, init_stream)
            trace = boundary_attack(oracle, x_star, config, x_init)
    except (InitializationFailedError, QueryBudgetExceededError) as exc:
        return {"failure": f"{type(exc).__name__}: {exc}", "trace": None}
    return {"failure": None, "trace": trace}


def _sample_id(index: int, rep: int, repetitions: int) -> str:
    return f"s{index:03d}" if repetitions == 1 else f"s{index:03d}r{rep}"


def run_benchmark(spec: BenchmarkSpec, outdir=None, jobs: int = 1) -> dict:
    """Run every (sample, attack, repetition), aggregate, optionally
    write report files. Returns the report document."""
    base = build_classifier(spec.oracle)

    # Exclude samples the base model misclassifies (labels provided);
    # the check always uses the deterministic base model.
    kept, excluded = [], []
    for i, entry in enumerate(spec.samples):
        label = entry.get("label")
        if label is not None and base.classify(as_sample(entry["values"])) != int(label):
            excluded.append(i)
        else:
            kept.append(i)
    total_labeled = sum(1 for e in spec.samples if e.get("label") is not None)
    if total_labeled:
        original_accuracy = (total_labeled - len(excluded)) / total_labeled
    else:
        original_accuracy = 1.0

    tasks = [
        (attack, index, rep)
        for attack in spec.attacks
        for index in kept
        for rep in range(spec.repetitions)
    ]

    def execute(task):
        attack, index, rep = task
        return task, _run_one(spec, base, attack, index, rep)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(execute, tasks))
    else:
        results = dict(map(execute, tasks))

    rows = []
    failures = []
    for attack, index, rep in tasks:
        outcome = results[(attack, index, rep)]
        sample_id = _sample_id(index, rep, spec.repetitions)
        if outcome["failure"] is not None:
            failures.append({"attack": attack, "sample_id": sample_id, "error": outcome["failure"]})
            bests = [(math.inf, 0)] * len(spec.checkpoints)
        else:
            bests = best_by_checkpoint(outcome["trace"], spec.checkpoints)
        for checkpoint, (best, at_queries) in zip(spec.checkpoints, bests):
            rows.append(
                {
                    "attack": attack,
                    "sample_id": sample_id,
                    "checkpoint": checkpoint,
                    "best_distance": best,
                    "queries_used": at_queries,
                    "success": bool(math.isfinite(best)),
                }
            )

    curves = {}
    for attack in spec.attacks:
        points = []
        for checkpoint in spec.checkpoints:
            dists = [
                r["best_distance"]
                for r in rows
                if r["attack"] == attack and r["checkpoint"] == checkpoint
            ]
            finite = [d for d in dists if math.isfinite(d)]
            if finite:
                q1, med, q3 = np.percentile(finite, [25, 50, 75])
            else:
                q1 = med = q3 = math.inf
            points.append(
                {
                    "queries": checkpoint,
                    "median_distance": float(med),
                    "q1": float(q1),
                    "q3": float(q3),
                    "n": len(finite),
                }
            )
        curves[attack] = points

    report = {
        "config": spec.echo(),
        "environment": environment_stamp(),
        "original_accuracy": original_accuracy,
        "excluded_samples": excluded,
        "failures": failures,
        "rows": rows,
        "curves": curves,
    }
    if outdir is not None:
        write_report_files(report, outdir)
    return report


def _json_safe(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


def write_report_files(report: dict, outdir) -> list[Path]:
    """Emit report.json, rows.csv, and one gnuplot curve file per attack."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    json_path = outdir / "report.json"
    doc = json.loads(json.dumps(report, default=str))  # deep copy
    for row in doc["rows"]:
        row["best_distance"] = _json_safe(row["best_distance"])
    json_path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    written.append(json_path)

    csv_path = outdir / "rows.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["attack", "sample_id", "checkpoint", "best_distance", "queries_used", "success"]
        )
        for row in report["rows"]:
            writer.writerow(
                [
                    row["attack"],
                    row["sample_id"],
                    row["checkpoint"],
                    repr(row["best_distance"]),
                    row["queries_used"],
                    row["success"],
                ]
            )
    written.append(csv_path)

    for attack, points in report["curves"].items():
        curve_path = outdir / f"curve_{attack}.dat"
        lines = ["# queries median q1 q3"]
        for point in points:
            lines.append(
                f"{point['queries']} {point['median_distance']!r} {point['q1']!r} {point['q3']!r}"
            )
        curve_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(curve_path)
    return written


def success_curve(report: dict, thresholds=None) -> list[dict]:
    """Success rate per (attack, checkpoint, threshold) plus the
    induced accuracy on perturbed data.

    A row's success means its best distance is within the threshold;
    the infinity sentinel counts every run whose success flag is set.
    Perturbed accuracy = original accuracy x (1 - success rate).
    """
    if thresholds is None:
        thresholds = report["config"].get("thresholds") or []
    original_accuracy = report.get("original_accuracy", 1.0)
    out = []
    attacks = report["config"]["attacks"]
    checkpoints = report["config"]["checkpoints"]
    for attack in attacks:
        for checkpoint in checkpoints:
            rows = [
                r
                for r in report["rows"]
                if r["attack"] == attack and r["checkpoint"] == checkpoint
            ]
            if not rows:
                continue
            for threshold in thresholds:
                if math.isinf(threshold):
                    hits = sum(r["success"] for r in rows)
                else:
                    hits = sum(
                        1
                        for r in rows
                        if math.isfinite(r["best_distance"]) and r["best_distance"] <= threshold
                    )
                rate = hits / len(rows)
                out.append(
                    {
                        "attack": attack,
                        "checkpoint": checkpoint,
                        "threshold": threshold,
                        "success_rate": rate,
                        "perturbed_accuracy": original_accuracy * (1.0 - rate),
                    }
                )
    return out


# ---------------------------------------------------------------------------
# Bundled desk-scale suites
# ---------------------------------------------------------------------------

SUITE_DIMENSIONS = (10, 20, 100)
_SUITE_SEED = 20240

def default_suite_spec(d: int, n_samples: int = 20, wrapped: bool = False) -> dict:
    """A deterministic hyperplane benchmark suite at dimension ``d``.

    Twenty interior originals with margins in [0.08, 0.35] against a
    random unit-normal hyperplane through the cube; the wrapped
    variant adds the majority-vote defense (radius 0.05, 25 votes),
    the regime where decision noise separates the two attacks.
    """
    gen = RngStream(_SUITE_SEED).derive(6, d, int(wrapped)).generator()
    w = gen.standard_normal(d)
    w /= np.linalg.norm(w)
    b = -float(w @ np.full(d, 0.5))
    samples = []
    while len(samples) < n_samples:
        x = gen.uniform(0.2, 0.8, size=d)
        if 0.08 <= abs(float(w @ x) + b) <= 0.35:
            samples.append([float(v) for v in x])
    oracle = {"kind": "analytic:hyperplane", "params": {"w": [float(v) for v in w], "b": b}}
    if wrapped:
        oracle["region_based"] = {"radius": 0.05, "votes": 25}
    return {
        "oracle": oracle,
        "attacks": ["hsja", "boundary"],
        "norm": "l2",
        "samples": {"inline": samples},
        "checkpoints": list(DEFAULT_CHECKPOINTS),
        "thresholds": [0.1, 0.2, 0.5, 1.0],
        "repetitions": 1,
        "master_seed": _SUITE_SEED + d + (1000 if wrapped else 0),
    }


def bundled_spec_dir() -> Path:
    return Path(__file__).parent / "data"


def write_bundled_specs(outdir=None) -> list[Path]:
    """Materialize the default suites as spec files."""
    outdir = Path(outdir) if outdir is not None else bundled_spec_dir()
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for d in SUITE_DIMENSIONS:
        path = outdir / f"bench_hyperplane_d{d}.json"
        path.write_text(
            json.dumps(default_suite_spec(d), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        written.append(path)
    path = outdir / "bench_hyperplane_d20_wrapped.json"
    path.write_text(
        json.dumps(default_suite_spec(20, wrapped=True), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    written.append(path)
    return written


# ---------------------------------------------------------------------------
# Sensitivity experiments
# ---------------------------------------------------------------------------

DELTA_MULTIPLIERS = (0.01, 0.1, 1.0, 10.0, 100.0)
_SENSITIVITY_ITERATIONS = (10, 20, 30, 40, 50, 60)


def _require_analytic(descriptor: dict) -> AnalyticModel:
    if descriptor.get("region_based"):
        raise UnsupportedExperimentError("sensitivity experiments need an unwrapped oracle")
    model = build_classifier(descriptor)
    if not isinstance(model, AnalyticModel):
        raise UnsupportedExperimentError(
            "sensitivity experiments need an analytic oracle with a true gradient"
        )
    return model


def collect_boundary_points(model: AnalyticModel, x_star, iterations, master_seed: int):
    """Near-boundary iterates (point, pre-projection distance) from a
    single attack run, harvested at the requested iteration indices."""
    x_star = as_sample(x_star)
    wanted = set(iterations)
    harvested = []

    def hook(t, x_t, dist_prev):
        if t in wanted:
            harvested.append((x_t.copy(), dist_prev))

    oracle = QueryingOracle(AttackObjective.untargeted(model, x_star))
    config = AttackConfig(
        iterations=max(wanted) + 1, initial_batch=100, max_queries=None, seed=master_seed
    )
    hsja_attack(oracle, x_star, config, iterate_hook=hook)
    return harvested


def delta_sensitivity_experiment(
    descriptor: dict,
    x_star,
    multipliers=DELTA_MULTIPLIERS,
    batch: int = 1000,
    reps: int = 5,
    *,
    boundary_points=None,
    iterations=_SENSITIVITY_ITERATIONS,
    master_seed: int = 0,
) -> dict:
    """Cosine between gradient-direction estimates and the true
    gradient as the probe radius sweeps around the schedule value.

    The 1x center is the attack's own radius, distance/d, measured at
    near-boundary points produced by actually running the attack; each
    multiplier is evaluated with the baseline on and off.
    """
    model = _require_analytic(descriptor)
    x_star = as_sample(x_star)
    d = model.input_dim
    if boundary_points is None:
        boundary_points = collect_boundary_points(model, x_star, iterations, master_seed)
    if not boundary_points:
        raise UnsupportedExperimentError("no boundary points collected")
    # The estimator follows the success predicate, whose score is -s
    # when the original sample sits on the positive-score side.
    success_sign = 1.0 if model.classify(x_star) == 0 else -1.0

    rows = []
    detail = []
    for multiplier in multipliers:
        for use_baseline in (True, False):
            cosines = []
            for p_index, (point, dist_prev) in enumerate(boundary_points):
                grad = success_sign * model.gradient(point)
                grad_norm = np.linalg.norm(grad)
                delta = multiplier * (dist_prev / d)
                for rep in range(reps):
                    stream = RngStream(master_seed).derive(
                        3, p_index, int(multiplier * 100), int(use_baseline), rep
                    )
                    oracle = QueryingOracle(AttackObjective.untargeted(model, x_star))
                    est = estimate_gradient_direction(
                        oracle, point, delta, batch, stream, use_baseline
                    )
                    raw_norm = np.linalg.norm(est.raw)
                    cosines.append(float(est.raw @ grad) / (raw_norm * grad_norm))
            q1, med, q3 = np.percentile(cosines, [25, 50, 75])
            rows.append(
                {
                    "multiplier": multiplier,
                    "baseline": use_baseline,
                    "median": float(med),
                    "q1": float(q1),
                    "q3": float(q3),
                    "n": len(cosines),
                }
            )
            detail.append({"multiplier": multiplier, "baseline": use_baseline, "cosines": cosines})
    return {
        "delta_center": "dist/d",
        "points": len(boundary_points),
        "batch": batch,
        "reps": reps,
        "rows": rows,
        "detail": detail,
    }


def stepsize_scheme_experiment(
    descriptor: dict,
    schemes,
    budget: int,
    *,
    samples=None,
    n_samples: int = 10,
    master_seed: int = 0,
) -> dict:
    """Median-distance-versus-query curves for the step-size rules."""
    for scheme in schemes:
        validate_step_scheme(scheme)
    model = build_classifier(descriptor)
    if samples is None:
        model_analytic = isinstance(model, AnalyticModel)
        gen = RngStream(master_seed).derive(4).generator()
        samples = []
        while len(samples) < n_samples:
            x = gen.uniform(0.0, 1.0, size=model.input_dim)
            # Degenerate near-boundary originals make the runs noisy.
            if model_analytic and abs(model.score(x)) < 0.02:
                continue
            samples.append(x)
    grid = sorted({max(1, int(budget * frac / 10)) for frac in range(1, 11)})

    out = {}
    for scheme in schemes:
        per_sample = []
        first_record_queries = []
        for index, x_star in enumerate(samples):
            run_seed = mix_indices(master_seed, 5, index)
            oracle = QueryingOracle(AttackObjective.untargeted(model, x_star), query_cap=budget)
            config = AttackConfig(
                iterations=1000, initial_batch=100, max_queries=None, seed=run_seed
            )
            trace = hsja_attack(oracle, as_sample(x_star), config, step_scheme=scheme)
            per_sample.append([b for b, _ in best_by_checkpoint(trace, grid)])
            iteration_records = [r for r in trace.records if r.t >= 1]
            if iteration_records:
                first_record_queries.append(iteration_records[0].queries)
        medians = [float(np.median([row[i] for row in per_sample])) for i in range(len(grid))]
        out[scheme] = {
            "checkpoints": grid,
            "median_best": medians,
            "final_median": medians[-1],
            "first_record_queries_median": float(np.median(first_record_queries)),
        }
    return {"budget": budget, "n_samples": len(samples), "schemes": out}
