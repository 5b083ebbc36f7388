"""End-to-end tests for the command line interface."""

import json

import numpy as np
import pytest

from clustershrink.cli import main
from clustershrink.estimators import estimate_js_positive, estimate_lindley
from clustershrink.selection import select_hybrid


@pytest.fixture
def vector_file(tmp_path):
    def write(values, name="y.txt"):
        path = tmp_path / name
        path.write_text("\n".join(str(v) for v in values) + "\n")
        return path

    return write


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_estimate_output(text):
    header = {}
    values = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(":")
            header[key.strip()] = val.strip()
        elif line.strip():
            values.append(float(line))
    return header, np.array(values)


class TestEstimate:
    def test_text_input_matches_library(self, capsys, vector_file):
        y = [2.0, -1.0, 0.5, 3.0, -2.5]
        path = vector_file(y)
        code, out, _ = run(capsys, "estimate", "--input", path, "--sigma", "1",
                           "--estimator", "js_plus")
        assert code == 0
        header, values = parse_estimate_output(out)
        expected = estimate_js_positive(np.array(y), 1.0)
        np.testing.assert_allclose(values, expected.estimate, rtol=1e-8)
        assert header["estimator"] == "js_plus"
        assert header["n"] == "5"
        assert "shrinkage_factor" in header

    def test_json_input(self, capsys, tmp_path):
        path = tmp_path / "y.json"
        path.write_text("[1.5, -0.5, 2.0, 0.0]")
        code, out, _ = run(capsys, "estimate", "--input", path, "--sigma", "0.5",
                           "--estimator", "lindley_plus")
        assert code == 0
        header, values = parse_estimate_output(out)
        expected = estimate_lindley(np.array([1.5, -0.5, 2.0, 0.0]), 0.5, positive_part=True)
        np.testing.assert_allclose(values, expected.estimate, rtol=1e-8)
        assert header["sigma"] == "0.5"

    def test_output_file(self, capsys, vector_file, tmp_path):
        path = vector_file([1.0, 2.0, 3.0, 4.0])
        dest = tmp_path / "est.txt"
        code, out, _ = run(capsys, "estimate", "--input", path, "--sigma", "1",
                           "--estimator", "ml", "--out", dest)
        assert code == 0
        header, values = parse_estimate_output(dest.read_text())
        np.testing.assert_allclose(values, [1.0, 2.0, 3.0, 4.0])

    def test_hybrid_reports_selection(self, capsys, vector_file):
        rng = np.random.default_rng(3)
        y = np.concatenate([rng.normal(4, 1, 20), rng.normal(-4, 1, 20)])
        path = vector_file(y)
        code, out, _ = run(capsys, "estimate", "--input", path, "--sigma", "1",
                           "--estimator", "hybrid", "--candidates", "1,2")
        assert code == 0
        header, values = parse_estimate_output(out)
        assert header["candidates"] == "1,2"
        assert header["chosen_clusters"] == "2"
        assert "loss_estimate[1]" in header
        selection, output = select_hybrid(y, 1.0, candidates=(1, 2))
        np.testing.assert_allclose(values, output.estimate, rtol=1e-8)

    def test_candidates_rejected_for_plain_estimator(self, capsys, vector_file):
        path = vector_file([1.0, 2.0, 3.0])
        code, _, err = run(capsys, "estimate", "--input", path, "--sigma", "1",
                           "--estimator", "js", "--candidates", "1,2")
        assert code == 1
        assert err

    def test_non_numeric_input(self, capsys, tmp_path):
        path = tmp_path / "y.txt"
        path.write_text("1.0\ntwo\n3.0\n")
        code, _, err = run(capsys, "estimate", "--input", path, "--sigma", "1")
        assert code == 1
        assert ":2:" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "estimate", "--input", tmp_path / "absent.txt",
                         "--sigma", "1")
        assert code == 3

    def test_bad_sigma(self, capsys, vector_file):
        path = vector_file([1.0, 2.0, 3.0])
        code, _, _ = run(capsys, "estimate", "--input", path, "--sigma", "-1")
        assert code == 2

    def test_too_small_for_js(self, capsys, vector_file):
        path = vector_file([1.0, 2.0])
        code, _, _ = run(capsys, "estimate", "--input", path, "--sigma", "1",
                         "--estimator", "js")
        assert code == 2

    def test_unknown_estimator(self, capsys, vector_file):
        path = vector_file([1.0, 2.0, 3.0])
        code, _, _ = run(capsys, "estimate", "--input", path, "--sigma", "1",
                         "--estimator", "ridge")
        assert code == 1

    def test_nonfinite_input(self, capsys, vector_file):
        path = vector_file([1.0, "inf", 3.0])
        code, _, _ = run(capsys, "estimate", "--input", path, "--sigma", "1")
        assert code == 2


class TestSimulate:
    def config(self, tmp_path, **overrides):
        body = {
            "n": 20,
            "sigma": 1.0,
            "trials": 50,
            "seed": 11,
            "theta": {"kind": "two_point", "tau": 3.0},
            "estimators": ["ml", "js_plus"],
        }
        body.update(overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(body))
        return path

    def test_stdout_table(self, capsys, tmp_path):
        code, out, _ = run(capsys, "simulate", "--config", self.config(tmp_path))
        assert code == 0
        assert "ml" in out and "js_plus" in out
        assert "mean_loss" in out

    def test_csv_output(self, capsys, tmp_path):
        dest = tmp_path / "result.csv"
        code, _, _ = run(capsys, "simulate", "--config", self.config(tmp_path),
                         "--out", dest)
        assert code == 0
        lines = dest.read_text().splitlines()
        meta = [l for l in lines if l.startswith("#")]
        assert "# seed: 11" in meta
        assert any(l.startswith("# rng:") for l in meta)
        data = [l for l in lines if not l.startswith("#")]
        assert data[0] == "estimator,mean_loss,std_error,trials_ok"
        assert len(data) == 3

    def test_sweep_adds_leading_column(self, capsys, tmp_path):
        dest = tmp_path / "sweep.csv"
        path = self.config(tmp_path, sweep={"variable": "tau", "values": [1.0, 5.0]})
        code, _, _ = run(capsys, "simulate", "--config", path, "--out", dest)
        assert code == 0
        data = [l for l in dest.read_text().splitlines() if not l.startswith("#")]
        assert data[0] == "tau,estimator,mean_loss,std_error,trials_ok"
        assert len(data) == 1 + 2 * 2

    def test_unknown_config_key(self, capsys, tmp_path):
        code, _, err = run(capsys, "simulate", "--config",
                           self.config(tmp_path, burn_in=5))
        assert code == 1
        assert "burn_in" in err

    def test_malformed_json(self, capsys, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        code, _, _ = run(capsys, "simulate", "--config", path)
        assert code == 1


class TestTheory:
    def config(self, tmp_path, **body):
        path = tmp_path / "theory.json"
        path.write_text(json.dumps(body))
        return path

    def test_report_contents(self, capsys, tmp_path):
        path = self.config(tmp_path, n=1000, sigma=1.0, clusters=2,
                           theta={"kind": "two_point", "tau": 3.0})
        code, out, _ = run(capsys, "theory", "--config", path)
        assert code == 0
        for key in ("gamma", "rho", "beta", "alpha", "loss_js_plus",
                    "loss_js1", "loss_cluster"):
            assert key in out

    def test_cluster_count_must_be_power_of_two(self, capsys, tmp_path):
        path = self.config(tmp_path, n=100, clusters=3,
                           theta={"kind": "two_point", "tau": 3.0})
        code, _, _ = run(capsys, "theory", "--config", path)
        assert code == 1

    def test_four_cluster_refinement(self, capsys, tmp_path):
        path = self.config(tmp_path, n=1000, clusters=4,
                           theta={"kind": "two_point", "tau": 5.0})
        code, out, _ = run(capsys, "theory", "--config", path)
        assert code == 0
        mu_line = next(l for l in out.splitlines() if l.startswith("mu:"))
        assert len(mu_line.split(":")[1].split()) == 3

    def test_unknown_key(self, capsys, tmp_path):
        path = self.config(tmp_path, n=100, bandwidth=2,
                           theta={"kind": "two_point", "tau": 3.0})
        code, _, err = run(capsys, "theory", "--config", path)
        assert code == 1
        assert "bandwidth" in err


class TestFigures:
    def test_csv_only(self, capsys, tmp_path):
        code, out, _ = run(capsys, "figures", "--figure", "fig5", "--trials", "2",
                           "--out-dir", tmp_path, "--no-plots")
        assert code == 0
        csvs = sorted(p.name for p in tmp_path.glob("*.csv"))
        assert csvs == ["fig5a.csv", "fig5b.csv", "fig5c.csv", "fig5d.csv"]
        assert not list(tmp_path.glob("*.png"))
        assert "fig5a.csv" in out

    def test_rendered_plots(self, capsys, tmp_path):
        code, _, _ = run(capsys, "figures", "--figure", "fig1", "--trials", "2",
                         "--out-dir", tmp_path)
        assert code == 0
        pngs = sorted(p.name for p in tmp_path.glob("*.png"))
        assert pngs == ["fig1a.png", "fig1b.png"]

    def test_unknown_figure(self, capsys, tmp_path):
        code, _, _ = run(capsys, "figures", "--figure", "fig99", "--out-dir", tmp_path)
        assert code == 1

    def test_trials_override_rejected_for_theory_figure(self, capsys, tmp_path):
        code, _, _ = run(capsys, "figures", "--figure", "fig2", "--trials", "5",
                         "--out-dir", tmp_path, "--no-plots")
        assert code == 1


class TestCheckConcentration:
    def config(self, tmp_path, **body):
        path = tmp_path / "conc.json"
        path.write_text(json.dumps(body))
        return path

    def test_report_and_trend(self, capsys, tmp_path):
        path = self.config(tmp_path, statistic="count_above",
                           theta={"kind": "two_point", "tau": 2.0},
                           n_grid=[100, 400], trials=30)
        code, out, _ = run(capsys, "check-concentration", "--config", path)
        assert code == 0
        assert "predicted" in out
        assert "deviation_shrinks_with_n" in out

    def test_unknown_statistic(self, capsys, tmp_path):
        path = self.config(tmp_path, statistic="y_max",
                           theta={"kind": "two_point", "tau": 2.0})
        code, _, _ = run(capsys, "check-concentration", "--config", path)
        assert code == 1


class TestParser:
    def test_no_arguments(self, capsys):
        code, _, _ = run(capsys)
        assert code == 1

    def test_unknown_subcommand(self, capsys):
        code, _, _ = run(capsys, "estimate-all")
        assert code == 1
