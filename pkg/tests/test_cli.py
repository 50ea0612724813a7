"""Command-line integration: flags, files, and exit codes."""

import json
import os
import stat

import pytest

from hopskipjump.cli import main
from hopskipjump.harness import default_suite_spec
from hopskipjump.rng import RngStream


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def write_sample(path, values):
    path.write_text(json.dumps([float(v) for v in values]))
    return str(path)


def small_spec(tmp_path, n_samples=2, checkpoints=(150, 400)):
    doc = default_suite_spec(6, n_samples=n_samples)
    doc["checkpoints"] = list(checkpoints)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc))
    return path


GOLDEN_MLP = {
    "type": "mlp",
    "input_dim": 2,
    "n_classes": 2,
    "layers": [
        {"weights": [[1.0, 0.0], [0.0, 1.0]], "bias": [0.0, 0.0], "activation": "identity"}
    ],
}


class TestAttackCommand:
    def test_happy_path_writes_trace(self, workdir, capsys):
        sample = write_sample(workdir / "s.json", [0.3] * 10)
        code = main(
            [
                "attack", "--oracle", "analytic:hyperplane", "--input", sample,
                "--norm", "l2", "--seed", "7", "--max-queries", "2000", "--iterations", "15",
            ]
        )
        assert code == 0
        trace = json.loads((workdir / "trace.json").read_text())
        assert trace["success"] is True
        assert capsys.readouterr().out.startswith("hsja:")

    def test_missing_init_for_targeted_is_usage_error(self, workdir, capsys):
        sample = write_sample(workdir / "s.json", [0.3] * 4)
        code = main(
            [
                "attack", "--oracle", "analytic:hyperplane", "--input", sample,
                "--norm", "l2", "--targeted", "--target", "1",
            ]
        )
        assert code == 1
        assert "--init" in capsys.readouterr().err

    def test_same_flags_give_identical_traces(self, workdir):
        sample = write_sample(workdir / "s.json", [0.35] * 8)
        flags = [
            "attack", "--oracle", "analytic:sphere", "--input", sample,
            "--norm", "l2", "--seed", "11", "--max-queries", "1500", "--iterations", "10",
        ]
        assert main(flags + ["--output", "a.json"]) == 0
        assert main(flags + ["--output", "b.json"]) == 0
        assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()

    def test_boundary_attack_runs(self, workdir):
        sample = write_sample(workdir / "s.json", [0.35] * 8)
        code = main(
            [
                "attack", "--oracle", "analytic:hyperplane", "--input", sample,
                "--norm", "l2", "--attack", "boundary", "--seed", "3",
                "--max-queries", "1500", "--output", "ba.json",
            ]
        )
        assert code == 0
        trace = json.loads((workdir / "ba.json").read_text())
        assert trace["config"]["attack"] == "boundary"

    def test_region_based_flag_applies_coarse_theta(self, workdir):
        sample = write_sample(workdir / "s.json", [0.35] * 8)
        code = main(
            [
                "attack", "--oracle", "analytic:hyperplane", "--input", sample,
                "--norm", "l2", "--region-based", "0.05,15", "--seed", "5",
                "--max-queries", "2000", "--iterations", "12", "--output", "rb.json",
            ]
        )
        assert code == 0
        trace = json.loads((workdir / "rb.json").read_text())
        assert trace["config"]["theta_override"] == 0.01

    def test_env_seed_fallback(self, workdir, monkeypatch):
        sample = write_sample(workdir / "s.json", [0.3] * 6)
        monkeypatch.setenv("HSJA_SEED", "21")
        flags = [
            "attack", "--oracle", "analytic:hyperplane", "--input", sample,
            "--norm", "l2", "--max-queries", "800", "--iterations", "6",
        ]
        assert main(flags + ["--output", "env.json"]) == 0
        assert main(flags + ["--output", "seeded.json", "--seed", "21"]) == 0
        assert (workdir / "env.json").read_bytes() == (workdir / "seeded.json").read_bytes()

    def test_unknown_oracle_kind_fails(self, workdir, capsys):
        sample = write_sample(workdir / "s.json", [0.3] * 4)
        code = main(
            ["attack", "--oracle", "analytic:torus", "--input", sample, "--norm", "l2"]
        )
        assert code == 1

    def test_csv_sample_accepted(self, workdir):
        path = workdir / "s.csv"
        path.write_text(",".join(["0.3"] * 6) + "\n")
        code = main(
            [
                "attack", "--oracle", "analytic:hyperplane", "--input", str(path),
                "--norm", "l2", "--max-queries", "600", "--iterations", "5",
            ]
        )
        assert code == 0


class TestBenchmarkCommand:
    def test_bundled_style_spec_runs(self, workdir, capsys):
        spec = small_spec(workdir)
        code = main(["benchmark", "--spec", str(spec), "--outdir", "out"])
        assert code == 0
        out = workdir / "out"
        rows = (out / "rows.csv").read_text().strip().splitlines()
        assert len(rows) - 1 == 2 * 2 * 2  # attacks x samples x checkpoints
        assert (out / "report.json").exists()
        assert (out / "curve_hsja.dat").exists()

    def test_malformed_spec_lists_fields(self, workdir, capsys):
        path = workdir / "bad.json"
        doc = json.loads(small_spec(workdir).read_text())
        doc["checkpoints"] = [100, 50]
        doc["attacks"] = ["nope"]
        path.write_text(json.dumps(doc))
        code = main(["benchmark", "--spec", str(path), "--outdir", "out"])
        assert code == 1
        err = capsys.readouterr().err
        assert "checkpoints" in err and "attacks" in err

    def test_unwritable_outdir_is_io_error(self, workdir, capsys):
        if os.geteuid() == 0:
            pytest.skip("permission bits do not bind as root")
        spec = small_spec(workdir)
        blocked = workdir / "blocked"
        blocked.mkdir()
        blocked.chmod(stat.S_IRUSR | stat.S_IXUSR)
        code = main(["benchmark", "--spec", str(spec), "--outdir", str(blocked / "sub")])
        assert code == 1
        assert "blocked" in capsys.readouterr().err

    def test_outdir_occupied_by_file_is_io_error(self, workdir, capsys):
        spec = small_spec(workdir)
        occupied = workdir / "occupied"
        occupied.write_text("not a directory")
        code = main(["benchmark", "--spec", str(spec), "--outdir", str(occupied)])
        assert code == 1
        assert "occupied" in capsys.readouterr().err

    def test_jobs_flag_reproduces_serial_bytes(self, workdir):
        spec = small_spec(workdir)
        assert main(["benchmark", "--spec", str(spec), "--outdir", "serial"]) == 0
        assert main(["benchmark", "--spec", str(spec), "--outdir", "pooled", "--jobs", "3"]) == 0
        assert (workdir / "serial" / "rows.csv").read_bytes() == (
            workdir / "pooled" / "rows.csv"
        ).read_bytes()


class TestEvalCommands:
    def test_grad_eval_writes_one_row_per_cell(self, workdir):
        gen = RngStream(314).generator()
        sample = write_sample(workdir / "s.json", gen.uniform(0.3, 0.7, size=6))
        code = main(
            [
                "grad-eval", "--oracle", "analytic:quadratic", "--input", sample,
                "--multipliers", "0.1,1,10", "--batch", "200", "--reps", "2", "--seed", "4",
                "--output", "grad.dat",
            ]
        )
        assert code == 0
        lines = (workdir / "grad.dat").read_text().strip().splitlines()
        assert len(lines) - 1 == 3 * 2  # multipliers x baseline flags

    def test_stepsize_eval_unknown_scheme_lists_valid(self, workdir, capsys):
        code = main(
            [
                "stepsize-eval", "--oracle", "analytic:quadratic",
                "--schemes", "sqrt-decay,warp-drive", "--budget", "300",
            ]
        )
        assert code == 1
        assert "sqrt-decay" in capsys.readouterr().err

    def test_stepsize_eval_writes_curves(self, workdir):
        code = main(
            [
                "stepsize-eval", "--oracle", "analytic:quadratic",
                "--schemes", "sqrt-decay,constant:0.1", "--budget", "400",
                "--samples", "3", "--dimension", "6", "--seed", "2", "--outdir", "steps",
            ]
        )
        assert code == 0
        out = workdir / "steps"
        assert (out / "stepsize_summary.json").exists()
        assert (out / "scheme_sqrt-decay.dat").exists()
        assert (out / "scheme_constant_0.1.dat").exists()


class TestValidateModel:
    def make_model_pair(self, workdir, corrupt=False):
        from hopskipjump.oracles import load_model_dict

        model_path = workdir / "toy.model.json"
        model_path.write_text(json.dumps(GOLDEN_MLP))
        model = load_model_dict(GOLDEN_MLP)
        gen = RngStream(51).generator()
        inputs = gen.uniform(0, 1, size=(100, 2))
        labels = model.classify_batch(inputs).tolist()
        if corrupt:
            labels[0] = 1 - labels[0]
        fixtures_path = workdir / "toy.fixtures.json"
        fixtures_path.write_text(json.dumps({"inputs": inputs.tolist(), "labels": labels}))
        return model_path

    def test_matching_fixtures_pass(self, workdir, capsys):
        model_path = self.make_model_pair(workdir)
        code = main(["validate-model", "--model", str(model_path)])
        assert code == 0
        assert "100/100 fixtures match" in capsys.readouterr().out

    def test_mismatch_exits_two(self, workdir, capsys):
        model_path = self.make_model_pair(workdir, corrupt=True)
        code = main(["validate-model", "--model", str(model_path)])
        assert code == 2
        assert "99/100" in capsys.readouterr().out

    def test_load_error_exits_one(self, workdir):
        bad = workdir / "bad.model.json"
        bad.write_text("{\"type\": \"mlp\"}")
        assert main(["validate-model", "--model", str(bad)]) == 1


class TestParser:
    def test_usage_error_exits_one(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["attack"])  # missing required flags
        assert excinfo.value.code == 1

    def test_version_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert "modelfile-schema" in capsys.readouterr().out
