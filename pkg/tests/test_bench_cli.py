"""Experiment runner emissions, determinism, validation, CLI plumbing."""

import json
from pathlib import Path

import pytest

from lagrom.bench import (
    load_timing,
    run_experiment,
    timing_table,
    validate_run_dir,
)
from lagrom.cli import main
from lagrom.presets import ExperimentConfig, parse_config_file, resolve


TINY = dict(n_cells=40, n_steps=20, n_snapshots=5)


def tiny_config(preset="test2", **overrides):
    merged = {**TINY, **overrides}
    return ExperimentConfig(preset=preset, **merged)


class TestConfig:
    def test_unknown_preset_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(preset="test99")

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig(preset="test1", methods=("warp-drive",))

    def test_determinism_flag_is_pinned(self):
        with pytest.raises(ValueError):
            ExperimentConfig(preset="test1", deterministic=False)

    def test_training_window_must_precede_horizon(self):
        with pytest.raises(ValueError):
            resolve(ExperimentConfig(preset="test1", n_steps=10, n_snapshots=10))

    def test_scale_divides_resolution(self):
        res = resolve(ExperimentConfig(preset="test1", scale=10))
        assert res.spec.n_cells == 200
        assert res.spec.n_steps == 100
        assert res.n_snapshots == 25

    def test_preset_defaults(self):
        res = resolve(ExperimentConfig(preset="test0-diffusion"))
        assert res.fixed_rank == 20 and res.epsilon is None
        res = resolve(ExperimentConfig(preset="test3"))
        assert res.epsilon == 1e-8 and res.fixed_rank is None
        assert res.spec.periodic

    def test_config_file_round_trip(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            """
            # custom inviscid problem
            preset = custom
            scale = 25
            epsilon = 1e-6
            methods = lagrangian-dmd
            flux = burgers
            diffusion = none
            ic = one-plus-sin
            bc = periodic
            domain_hi = 6.283185307179586
            """
        )
        config = parse_config_file(cfg)
        assert config.preset == "custom"
        assert config.scale == 25
        assert config.methods == ("lagrangian-dmd",)
        res = resolve(config)
        assert res.spec.periodic
        assert res.epsilon == 1e-6

    def test_config_file_unknown_key(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("bogus = 1\n")
        with pytest.raises(ValueError):
            parse_config_file(cfg)


class TestRunExperiment:
    def test_emits_expected_files(self, tmp_path):
        record = run_experiment(tiny_config(output_dir=str(tmp_path / "out")))
        out = Path(record.output_dir)
        expected = {
            "snapshots.csv",
            "lagrangian_positions.csv",
            "lagrangian_values.csv",
            "lagrangian-dmd_errors.csv",
            "lagrangian-dmd_modes.csv",
            "lagrangian-pod_errors.csv",
            "lagrangian-pod_modes.csv",
            "timing.json",
            "manifest.json",
            "plot.py",
        }
        assert expected <= {p.name for p in out.iterdir()}
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["deterministic"] is True
        assert manifest["n_cells"] == 40
        compile((out / "plot.py").read_text(), "plot.py", "exec")

    def test_record_contents(self, tmp_path):
        record = run_experiment(tiny_config(output_dir=str(tmp_path / "out")), keep_states=True)
        for name in ("lagrangian-dmd", "lagrangian-pod"):
            res = record.methods[name]
            assert res.failure is None
            assert res.rank >= 1
            assert res.fit_seconds > 0 and res.rollout_seconds > 0
            assert res.report.error_observable.shape == (20,)
            assert res.states.shape == (40, 20)
        assert record.hfm_eulerian_seconds > 0
        assert record.hfm_lagrangian_seconds > 0

    def test_identical_configs_emit_identical_csvs(self, tmp_path):
        a = run_experiment(tiny_config(output_dir=str(tmp_path / "a")))
        b = run_experiment(tiny_config(output_dir=str(tmp_path / "b")))
        for name in sorted(p.name for p in Path(a.output_dir).iterdir()):
            if name.endswith(".csv"):
                assert (Path(a.output_dir) / name).read_bytes() == (Path(b.output_dir) / name).read_bytes()

    def test_validate_passes_on_emitted_run(self, tmp_path):
        record = run_experiment(tiny_config(output_dir=str(tmp_path / "out")))
        checks = validate_run_dir(record.output_dir)
        assert checks, "validation produced no checks"
        failed = [c for c in checks if not c[1]]
        assert not failed, f"failed checks: {failed}"

    def test_levelset_method(self, tmp_path):
        record = run_experiment(
            tiny_config(
                preset="levelset",
                output_dir=str(tmp_path / "lvl"),
                n_cells=80,
                n_steps=40,
                n_snapshots=8,
            )
        )
        res = record.methods["levelset-dmd"]
        assert res.failure is None
        assert record.hfm_levelset_seconds > 0
        field_csv = Path(record.output_dir) / "levelset_snapshots.csv"
        first = field_csv.read_text().splitlines()[0]
        assert first.startswith("# n_x=80,n_y=")

    def test_output_root_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LAGROM_OUT_ROOT", str(tmp_path / "root"))
        record = run_experiment(tiny_config())
        assert str(tmp_path / "root") in record.output_dir

    def test_method_failure_recorded_without_aborting(self, tmp_path, monkeypatch):
        import lagrom.bench as bench_mod
        from lagrom.errors import TooFewSnapshots

        def broken_fit(*args, **kwargs):
            raise TooFewSnapshots("forced failure for the record")

        monkeypatch.setattr(bench_mod, "fit_lagrangian_dmd", broken_fit)
        record = run_experiment(tiny_config(output_dir=str(tmp_path / "out")))
        assert "TooFewSnapshots" in record.methods["lagrangian-dmd"].failure
        assert record.methods["lagrangian-pod"].failure is None


class TestTimingTable:
    def test_table_rows_and_json(self, tmp_path):
        records = [
            run_experiment(tiny_config(output_dir=str(tmp_path / "t2"))),
            run_experiment(tiny_config(preset="test1", output_dir=str(tmp_path / "t1"))),
        ]
        table, data = timing_table(records)
        assert "dmd_seconds" in table and "pod_seconds" in table
        assert set(data["rank"]) == {"test2", "test1"}

    def test_row_omitted_without_method(self, tmp_path):
        record = run_experiment(
            tiny_config(methods=("lagrangian-dmd",), output_dir=str(tmp_path / "dm"))
        )
        table, data = timing_table([record])
        assert "pod_seconds" not in data

    def test_reload_from_timing_json(self, tmp_path):
        record = run_experiment(tiny_config(output_dir=str(tmp_path / "out")))
        loaded = load_timing(record.output_dir)
        assert loaded.label == record.label
        assert loaded.methods["lagrangian-dmd"].rank == record.methods["lagrangian-dmd"].rank


class TestCli:
    def test_run_and_validate_and_table(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(
            [
                "run",
                "test2",
                "--cells", "40",
                "--steps", "20",
                "--snapshots", "5",
                "--out", str(out),
            ]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "experiment test2" in printed

        assert main(["validate", str(out)]) == 0
        shown = capsys.readouterr().out
        assert "PASS" in shown and "FAIL" not in shown

        json_out = tmp_path / "table.json"
        assert main(["table", str(out), "--json", str(json_out)]) == 0
        assert json.loads(json_out.read_text())["rank"]["test2"] >= 1

    def test_run_requires_preset_or_config(self):
        with pytest.raises(SystemExit):
            main(["run"])

    def test_run_rejects_epsilon_with_rank(self):
        with pytest.raises(SystemExit):
            main(["run", "test1", "--epsilon", "1e-8", "--rank", "5"])

    def test_run_from_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        out = tmp_path / "out"
        cfg.write_text(
            "preset = test1\nn_cells = 40\nn_steps = 20\nn_snapshots = 5\n"
            f"output_dir = {out}\nmethods = lagrangian-dmd\n"
        )
        assert main(["run", "--config", str(cfg)]) == 0
        assert "experiment test1" in capsys.readouterr().out
        assert (out / "timing.json").exists()

    def test_validate_flags_corruption(self, tmp_path, capsys):
        out = tmp_path / "run"
        main(["run", "test1", "--cells", "40", "--steps", "20", "--snapshots", "5", "--out", str(out)])
        capsys.readouterr()
        errors = out / "lagrangian-dmd_errors.csv"
        lines = errors.read_text().splitlines()
        parts = lines[-1].split(",")
        parts[4] = "0.0"  # force a bound below the recorded error
        lines[-1] = ",".join(parts)
        errors.write_text("\n".join(lines) + "\n")
        assert main(["validate", str(out)]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_bench_kernels_smoke(self, capsys):
        assert main(["bench-kernels", "--size", "64", "--repeats", "3"]) == 0
        assert "kernel benchmark" in capsys.readouterr().out
