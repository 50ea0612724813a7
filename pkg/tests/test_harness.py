"""Benchmark runner, aggregation, and sensitivity experiments."""

import json
import math

import numpy as np
import pytest

from hopskipjump.exceptions import BenchmarkSpecError, UnsupportedExperimentError
from hopskipjump.harness import (
    BenchmarkSpec,
    DELTA_MULTIPLIERS,
    build_classifier,
    default_suite_spec,
    delta_sensitivity_experiment,
    run_benchmark,
    stepsize_scheme_experiment,
    success_curve,
)
from hopskipjump.rng import RngStream


def tiny_spec_doc(n_samples=3, d=6, checkpoints=(200, 800), reps=1):
    gen = RngStream(808).generator()
    w = gen.standard_normal(d)
    w /= np.linalg.norm(w)
    samples = []
    while len(samples) < n_samples:
        x = gen.uniform(0.25, 0.75, size=d)
        if 0.1 <= abs(float(w @ x) - 0.0) <= 0.3:
            samples.append([float(v) for v in x])
    return {
        "oracle": {"kind": "analytic:hyperplane", "params": {"w": w.tolist(), "b": 0.0}},
        "attacks": ["hsja", "boundary"],
        "norm": "l2",
        "samples": {"inline": samples},
        "checkpoints": list(checkpoints),
        "thresholds": [0.05, 0.2],
        "repetitions": reps,
        "master_seed": 99,
    }


def pocket_ellipsoid_descriptor(d=10):
    """Success means leaving an anisotropic ellipsoid around the cube
    center; curvature sits between the 1x and 100x probe radii."""
    axes = np.linspace(0.12, 0.25, d)
    center = np.full(d, 0.5)
    inv2 = 1.0 / axes**2
    a = -np.diag(inv2)
    w = 2.0 * inv2 * center
    b = 1.0 - float(center @ np.diag(inv2) @ center)
    return (
        {"kind": "analytic:quadratic", "params": {"a": a.tolist(), "w": w.tolist(), "b": b}},
        center,
    )


def mild_quadratic_descriptor(d=10):
    a = 0.5 * np.diag(np.linspace(-1.0, 1.0, d))
    w = np.linspace(0.8, 1.2, d) / np.sqrt(d)
    x_mid = np.full(d, 0.5)
    b = -(x_mid @ a @ x_mid + w @ x_mid)
    return {"kind": "analytic:quadratic", "params": {"a": a.tolist(), "w": w.tolist(), "b": float(b)}}


class TestBenchmarkSpec:
    def test_valid_spec_parses(self):
        spec = BenchmarkSpec.from_dict(tiny_spec_doc())
        assert spec.attacks == ["hsja", "boundary"]
        assert len(spec.samples) == 3

    def test_invalid_spec_lists_every_field(self):
        doc = tiny_spec_doc()
        doc["attacks"] = ["hsja", "deepfool"]
        doc["checkpoints"] = [500, 100]
        doc["repetitions"] = 0
        with pytest.raises(BenchmarkSpecError) as excinfo:
            BenchmarkSpec.from_dict(doc)
        message = str(excinfo.value)
        assert "attacks" in message and "checkpoints" in message and "repetitions" in message

    def test_missing_oracle(self):
        doc = tiny_spec_doc()
        del doc["oracle"]
        with pytest.raises(BenchmarkSpecError, match="oracle"):
            BenchmarkSpec.from_dict(doc)

    def test_unknown_oracle_kind(self):
        with pytest.raises(BenchmarkSpecError, match="kind"):
            build_classifier({"kind": "analytic:cubic", "params": {}})


class TestRunBenchmark:
    def test_row_count_and_structure(self):
        spec = BenchmarkSpec.from_dict(tiny_spec_doc())
        report = run_benchmark(spec)
        assert len(report["rows"]) == 2 * 3 * 2  # attacks x samples x checkpoints
        for attack in spec.attacks:
            points = report["curves"][attack]
            assert [p["queries"] for p in points] == spec.checkpoints
            for point in points:
                assert point["q1"] <= point["median_distance"] <= point["q3"]

    def test_best_distance_monotone_across_checkpoints(self):
        spec = BenchmarkSpec.from_dict(tiny_spec_doc(checkpoints=(100, 300, 800)))
        report = run_benchmark(spec)
        by_run = {}
        for row in report["rows"]:
            by_run.setdefault((row["attack"], row["sample_id"]), []).append(
                (row["checkpoint"], row["best_distance"])
            )
        for rows in by_run.values():
            dists = [d for _, d in sorted(rows)]
            assert all(b <= a for a, b in zip(dists, dists[1:]))

    def test_reports_are_byte_identical(self, tmp_path):
        doc = tiny_spec_doc(reps=2)
        for run_dir in ("a", "b"):
            spec = BenchmarkSpec.from_dict(doc)
            run_benchmark(spec, outdir=tmp_path / run_dir)
        for name in ("report.json", "rows.csv", "curve_hsja.dat", "curve_boundary.dat"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_jobs_do_not_change_results(self):
        doc = tiny_spec_doc()
        serial = run_benchmark(BenchmarkSpec.from_dict(doc), jobs=1)
        threaded = run_benchmark(BenchmarkSpec.from_dict(doc), jobs=4)
        assert json.dumps(serial["rows"], sort_keys=True) == json.dumps(
            threaded["rows"], sort_keys=True
        )

    def test_sample_streams_are_isolated(self):
        doc = tiny_spec_doc(n_samples=3)
        full = run_benchmark(BenchmarkSpec.from_dict(doc))
        doc_smaller = dict(doc)
        doc_smaller["samples"] = {"inline": doc["samples"]["inline"][:2]}
        reduced = run_benchmark(BenchmarkSpec.from_dict(doc_smaller))

        def rows_for(report, sample_id):
            return sorted(
                (r["attack"], r["checkpoint"], r["best_distance"], r["queries_used"])
                for r in report["rows"]
                if r["sample_id"] == sample_id
            )

        for sample_id in ("s000", "s001"):
            assert rows_for(full, sample_id) == rows_for(reduced, sample_id)

    def test_misclassified_labeled_samples_are_excluded(self):
        doc = tiny_spec_doc(n_samples=2)
        w = np.array(doc["oracle"]["params"]["w"])
        values = doc["samples"]["inline"]
        base_labels = [int(float(w @ np.array(v)) > 0) for v in values]
        doc["samples"] = {
            "inline": [
                {"values": values[0], "label": base_labels[0]},
                {"values": values[1], "label": 1 - base_labels[1]},  # wrong label
            ]
        }
        report = run_benchmark(BenchmarkSpec.from_dict(doc))
        assert report["excluded_samples"] == [1]
        assert report["original_accuracy"] == 0.5
        assert {r["sample_id"] for r in report["rows"]} == {"s000"}

    def test_wrapped_oracle_suite_runs(self):
        doc = tiny_spec_doc(n_samples=2, checkpoints=(500,))
        doc["oracle"]["region_based"] = {"radius": 0.03, "votes": 9}
        doc["attacks"] = ["hsja"]
        report = run_benchmark(BenchmarkSpec.from_dict(doc))
        assert len(report["rows"]) == 2
        assert all(math.isfinite(r["best_distance"]) for r in report["rows"])

    def test_single_sample_median_is_that_run(self):
        doc = tiny_spec_doc(n_samples=1, checkpoints=(2000,))
        doc["attacks"] = ["hsja"]
        report = run_benchmark(BenchmarkSpec.from_dict(doc))
        (row,) = report["rows"]
        point = report["curves"]["hsja"][0]
        assert point["median_distance"] == pytest.approx(row["best_distance"])


class TestSuccessCurve:
    def test_perturbed_accuracy_identity(self):
        report = {
            "config": {"attacks": ["hsja"], "checkpoints": [1000], "thresholds": [0.5]},
            "original_accuracy": 0.96,
            "rows": [
                {"attack": "hsja", "checkpoint": 1000, "best_distance": 0.4, "success": True},
                {"attack": "hsja", "checkpoint": 1000, "best_distance": 0.9, "success": True},
            ],
        }
        (row,) = success_curve(report)
        assert row["success_rate"] == 0.5
        assert row["perturbed_accuracy"] == pytest.approx(0.48)

    def test_zero_threshold_has_zero_rate(self):
        spec = BenchmarkSpec.from_dict(tiny_spec_doc(n_samples=2))
        report = run_benchmark(spec)
        rows = success_curve(report, thresholds=[0.0])
        assert all(r["success_rate"] == 0.0 for r in rows)

    def test_infinite_threshold_counts_success_flags(self):
        spec = BenchmarkSpec.from_dict(tiny_spec_doc(n_samples=2))
        report = run_benchmark(spec)
        rows = success_curve(report, thresholds=[math.inf])
        for row in rows:
            flagged = [
                r["success"]
                for r in report["rows"]
                if r["attack"] == row["attack"] and r["checkpoint"] == row["checkpoint"]
            ]
            assert row["success_rate"] == pytest.approx(sum(flagged) / len(flagged))


class TestDeltaSensitivity:
    def test_linear_boundary_aligns_at_every_multiplier(self):
        # With zero curvature and exact boundary points the estimate
        # aligns regardless of the probe radius.
        d = 10
        gen = RngStream(909).generator()
        w = gen.standard_normal(d)
        w /= np.linalg.norm(w)
        x_star = np.full(d, 0.3)
        margin = 0.2
        descriptor = {
            "kind": "analytic:hyperplane",
            "params": {"w": w.tolist(), "b": margin - float(w @ x_star)},
        }
        # score(x_star) = +margin, so success lies on the negative side;
        # the crossing along -w sits at distance `margin`.
        boundary = x_star - margin * w
        points = [(boundary, margin)] * 3
        result = delta_sensitivity_experiment(
            descriptor, x_star, batch=1000, reps=3, boundary_points=points, master_seed=5
        )
        for row in result["rows"]:
            assert row["median"] >= 0.9

    def test_curved_boundary_orderings(self):
        descriptor, x_star = pocket_ellipsoid_descriptor()
        result = delta_sensitivity_experiment(
            descriptor, x_star, batch=1000, reps=5, master_seed=11
        )
        medians = {(r["multiplier"], r["baseline"]): r["median"] for r in result["rows"]}
        with_baseline = {m: medians[(m, True)] for m in DELTA_MULTIPLIERS}
        assert max(with_baseline, key=with_baseline.get) == 1.0
        assert medians[(1.0, True)] > medians[(100.0, True)]
        assert medians[(100.0, True)] >= medians[(100.0, False)]

    def test_non_analytic_oracle_rejected(self, tmp_path):
        model = {
            "type": "mlp",
            "input_dim": 2,
            "n_classes": 2,
            "layers": [{"weights": [[1.0, 0.0], [0.0, 1.0]], "bias": [0.0, 0.0], "activation": "identity"}],
        }
        path = tmp_path / "m.json"
        path.write_text(json.dumps(model))
        with pytest.raises(UnsupportedExperimentError):
            delta_sensitivity_experiment({"kind": "model", "path": str(path)}, [0.2, 0.2])

    def test_wrapped_oracle_rejected(self):
        descriptor, x_star = pocket_ellipsoid_descriptor()
        descriptor = dict(descriptor, region_based={"radius": 0.05, "votes": 5})
        with pytest.raises(UnsupportedExperimentError):
            delta_sensitivity_experiment(descriptor, x_star)


class TestStepSchemes:
    def test_sqrt_decay_beats_constants_and_schemes_are_monotone(self):
        descriptor = mild_quadratic_descriptor()
        result = stepsize_scheme_experiment(
            descriptor,
            ["sqrt-decay", "grid-search", "constant:0.01", "constant:0.1", "constant:1.0"],
            budget=3000,
            n_samples=8,
            master_seed=7,
        )
        schemes = result["schemes"]
        sqrt_final = schemes["sqrt-decay"]["final_median"]
        for name in ("constant:0.01", "constant:0.1", "constant:1.0"):
            assert sqrt_final <= schemes[name]["final_median"]
        for data in schemes.values():
            medians = data["median_best"]
            assert all(b <= a + 1e-12 for a, b in zip(medians, medians[1:]))

    def test_grid_search_spends_more_before_first_iterate(self):
        descriptor = mild_quadratic_descriptor()
        result = stepsize_scheme_experiment(
            descriptor, ["sqrt-decay", "grid-search"], budget=1500, n_samples=5, master_seed=7
        )
        schemes = result["schemes"]
        assert (
            schemes["grid-search"]["first_record_queries_median"]
            > schemes["sqrt-decay"]["first_record_queries_median"]
        )

    def test_unknown_scheme_rejected(self):
        descriptor = mild_quadratic_descriptor()
        from hopskipjump.exceptions import InvalidInputError

        with pytest.raises(InvalidInputError, match="valid"):
            stepsize_scheme_experiment(descriptor, ["warp-drive"], budget=500)


class TestBundledSuites:
    def test_suite_spec_is_deterministic_and_valid(self):
        a = default_suite_spec(10)
        b = default_suite_spec(10)
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
        spec = BenchmarkSpec.from_dict(a)
        assert len(spec.samples) == 20
        assert spec.checkpoints == [1000, 5000, 20000]

    def test_wrapped_suite_differs(self):
        wrapped = default_suite_spec(20, wrapped=True)
        assert wrapped["oracle"]["region_based"] == {"radius": 0.05, "votes": 25}
