"""Experiment runner, optimizer, heatmap and CLI round-trip tests."""

import json
import math

import numpy as np
import pytest

from mrrlink.channel import LinkConfig
from mrrlink.experiments import (
    ExperimentSpec,
    apply_axis,
    golden_section,
    heatmap,
    optimize_divergence,
    run_experiment,
)

DEG = math.pi / 180.0


def base_cfg(**kw) -> LinkConfig:
    d = dict(Z=1000.0, theta_div=0.4e-3, sigma_theta_e=100e-6,
             sigma_theta_o=5 * DEG, cn2_0=5e-15)
    d.update(kw)
    return LinkConfig(**d)


class TestSpecValidation:
    def test_empty_engines_rejected(self):
        with pytest.raises(ValueError):
            ExperimentSpec(base_cfg(), "Pt", (0.1,), engines=())

    def test_unknown_metric_rejected(self):
        with pytest.raises(ValueError):
            ExperimentSpec(base_cfg(), "Pt", (0.1,), metrics=("capacity",))

    def test_unsorted_grid_rejected(self):
        with pytest.raises(ValueError):
            ExperimentSpec(base_cfg(), "Pt", (0.2, 0.1))

    def test_axis_application(self):
        cfg = apply_axis(base_cfg(), "w_z", 0.8)
        assert cfg.theta_div == pytest.approx(0.8e-3)
        cfg = apply_axis(base_cfg(), "Cn2", 1e-13)
        assert cfg.cn2_0 == 1e-13


class TestRunExperiment:
    def test_analytic_outage_sweep(self):
        spec = ExperimentSpec(base_cfg(), "Pt",
                              tuple(10 ** (p / 10) / 1000 for p in (0, 10, 20, 30)),
                              metrics=("outage",), engines=("analytic",), regime="weak")
        res = run_experiment(spec)
        vals = [r["value"] for r in res.rows]
        assert len(vals) == 4
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_both_engines_agree_and_rows_paired(self):
        spec = ExperimentSpec(base_cfg(P_t=0.02), "Pt", (0.02,),
                              metrics=("outage",), engines=("analytic", "montecarlo"),
                              regime="weak", n_samples=200_000, seed=5)
        res = run_experiment(spec)
        engines = {r["engine"] for r in res.rows}
        assert engines == {"analytic", "montecarlo"}

    def test_error_recorded_run_continues(self):
        # sigma_theta_o far outside the sector table: strong constants fail
        spec = ExperimentSpec(base_cfg(sigma_theta_o=0.2 * DEG, cn2_0=1e-13), "Pt",
                              (0.05, 0.1), metrics=("outage",), engines=("analytic",),
                              regime="strong")
        res = run_experiment(spec)
        assert len(res.errors) == 2
        assert res.rows == []

    def test_csv_deterministic_across_workers(self, tmp_path):
        grid = tuple(10 ** (p / 10) / 1000 for p in (0.0, 15.0, 30.0))
        outs = {}
        for workers in (1, 2):
            path = tmp_path / f"w{workers}.csv"
            spec = ExperimentSpec(base_cfg(), "Pt", grid, metrics=("outage", "ber"),
                                  engines=("analytic", "montecarlo"), regime="weak",
                                  n_samples=60_000, seed=7, output_path=str(path))
            run_experiment(spec, workers=workers)
            outs[workers] = path.read_bytes()
        assert outs[1] == outs[2]

    def test_sidecar_written(self, tmp_path):
        path = tmp_path / "run.csv"
        spec = ExperimentSpec(base_cfg(), "Pt", (0.1,), metrics=("outage",),
                              engines=("analytic",), regime="weak",
                              output_path=str(path))
        run_experiment(spec)
        meta = json.loads((tmp_path / "run.csv.json").read_text())
        assert meta["sweep_axis"] == "Pt"
        assert "version" in meta and "base_config" in meta


class TestGoldenSection:
    def test_quadratic(self):
        x, fx = golden_section(lambda x: (x - 2.0) ** 2, 1.0, 5.0, 1e-8)
        assert x == pytest.approx(2.0, abs=1e-6)

    def test_asymmetric(self):
        x, _ = golden_section(lambda x: abs(x - 0.3) + 0.1 * x, 0.0, 1.0, 1e-9)
        assert x == pytest.approx(0.3, abs=1e-6)


class TestOptimizer:
    def test_interior_optimum_found(self):
        res = optimize_divergence(base_cfg(P_t=0.1), objective="outage", regime="weak")
        assert res.interior
        assert 0.1e-3 < res.theta_opt < 2e-3
        # bracket endpoints must be worse
        from mrrlink.experiments import _constants_for
        from mrrlink.weak import outage_weak
        for edge in (0.12e-3, 1.9e-3):
            cfg = base_cfg(P_t=0.1).with_(theta_div=edge)
            k, _ = _constants_for(cfg, "weak")
            assert outage_weak(k, cfg.gamma_th) > res.value

    def test_optimum_shifts_with_link_length(self):
        thetas = {}
        for z in (800.0, 1400.0):
            cfg = base_cfg(Z=z, Z_hu=z / 10 + 2, P_t=0.1)
            thetas[z] = optimize_divergence(cfg, regime="weak").theta_opt
        assert thetas[800.0] != pytest.approx(thetas[1400.0], rel=1e-3)

    def test_monotone_objective_reports_edge(self):
        # a bracket entirely past the optimum: outage rises with theta
        res = optimize_divergence(base_cfg(P_t=0.1), objective="outage",
                                  bracket=(1.2e-3, 2e-3), regime="weak")
        assert not res.interior
        assert res.theta_opt in (1.2e-3, 2e-3)
        assert "monotone" in res.message

    def test_small_jitter_pushes_theta_down(self):
        loose = optimize_divergence(base_cfg(sigma_theta_e=200e-6), regime="weak")
        tight = optimize_divergence(base_cfg(sigma_theta_e=50e-6), regime="weak")
        assert tight.theta_opt < loose.theta_opt


class TestHeatmap:
    def test_dimensions_and_compositionality(self):
        from mrrlink.experiments import _constants_for
        from mrrlink.weak import outage_weak

        cfg = base_cfg(P_t=10 ** 2.5 / 1000)
        se = np.linspace(50e-6, 400e-6, 3)
        wz = np.linspace(0.2, 1.2, 4)
        mat = heatmap(cfg, se, wz, metric="outage", regime="weak")
        assert mat.shape == (3, 4)
        c = cfg.with_(sigma_theta_e=float(se[1]), theta_div=float(wz[2]) / cfg.Z)
        k, _ = _constants_for(c, "weak")
        assert mat[1, 2] == pytest.approx(outage_weak(k, c.gamma_th), rel=1e-12)

    def test_ridge_monotone_in_jitter(self):
        cfg = base_cfg(P_t=10 ** 2.5 / 1000)
        se = np.linspace(50e-6, 400e-6, 5)
        wz = np.linspace(0.1, 2.0, 16)
        mat = heatmap(cfg, se, wz, metric="outage", regime="weak")
        argmins = wz[np.argmin(mat, axis=1)]
        assert all(b >= a - 1e-12 for a, b in zip(argmins, argmins[1:]))


class TestCli:
    def test_run_roundtrip(self, tmp_path, capsys):
        from mrrlink.cli import main

        spec = tmp_path / "sweep.cfg"
        spec.write_text(
            "# outage sweep\nZ = 1000\ntheta_div = 0.4 mrad\nsigma_theta_o = 5 deg\n"
            "sweep = Pt\ngrid = 0:30:3 dBm\nmetrics = outage\nengines = analytic\n"
            "regime = weak\n"
        )
        out = tmp_path / "out.csv"
        rc = main(["run", str(spec), "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("sweep_axis,")
        assert len(lines) == 4
        assert (tmp_path / "out.csv.json").exists()

    def test_recipe_listing(self, capsys):
        from mrrlink.cli import main

        assert main(["recipe", "--list"]) == 0
        names = capsys.readouterr().out.split()
        assert "fig9" in names and "fig15" in names

    def test_optimize_command(self, capsys):
        from mrrlink.cli import main

        rc = main(["optimize", "--objective", "outage", "--regime", "weak",
                   "--set", "Pt=20 dBm", "--set", "sigma_theta_o=5 deg"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert 0.1 <= out["theta_opt_mrad"] <= 2.0

    def test_mc_tables_command(self, tmp_path, capsys):
        from mrrlink.cli import main

        rc = main(["mc-tables", "--samples", "50000", "--out",
                   str(tmp_path / "tables")])
        assert rc == 0
        text = (tmp_path / "tables_moments.csv").read_text().splitlines()
        assert text[0] == "sigma_deg,mu,sd"
        assert len(text) == 12

    def test_unknown_config_key_fails_cleanly(self, tmp_path):
        from mrrlink.cli import main
        from mrrlink.errors import UnknownKeyError

        spec = tmp_path / "bad.cfg"
        spec.write_text("foo = 1\n")
        with pytest.raises(UnknownKeyError):
            main(["run", str(spec)])


class TestCliHeatmap:
    def test_heatmap_command_writes_matrix(self, tmp_path, capsys):
        from mrrlink.cli import main

        out = tmp_path / "map.csv"
        rc = main(["heatmap", "--sigma-e", "100", "200", "--sigma-e-points", "2",
                   "--w-z", "0.2", "0.8", "--w-z-points", "3", "--regime", "weak",
                   "--set", "Pt=25 dBm", "--set", "sigma_theta_o=5 deg",
                   "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 3                      # header + 2 jitter rows
        assert len(lines[1].split(",")) == 4        # jitter value + 3 beamwidths
