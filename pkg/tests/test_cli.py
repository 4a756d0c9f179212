import csv
import datetime as dt
import json

import numpy as np
import pytest

from niqcd.cli import dispatch, load_config_file, read_value_csv
from niqcd.errors import DataError
from niqcd.simulate import make_setting


@pytest.fixture
def data_csv(tmp_path):
    x = make_setting("S1").model.sample(200, seed=3)
    path = tmp_path / "data.csv"
    path.write_text("value\n" + "\n".join(repr(float(v)) for v in x) + "\n")
    return path


@pytest.fixture
def model_json(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(make_setting("S1").model.to_json())
    return path


@pytest.fixture
def price_csv(tmp_path):
    rng = np.random.default_rng(12)
    rets = rng.standard_cauchy(220) * 1e-3
    prices = 100.0 * np.exp(np.concatenate([[0.0], np.cumsum(rets)]))
    day = dt.date(2021, 1, 4)
    rows = ["date,close"]
    for p in prices:
        rows.append(f"{day.isoformat()},{float(p)!r}")
        day += dt.timedelta(days=1)
    path = tmp_path / "prices.csv"
    path.write_text("\n".join(rows) + "\n")
    return path


def strip_timing(report_csv):
    """Report rows minus the wall-clock columns (time_mean_s, time_se_s)."""
    rows = list(csv.reader(open(report_csv)))
    return [row[:7] for row in rows]


class TestExitCodes:
    def test_usage_error_is_1(self, capsys):
        assert dispatch(["fit"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand_is_1(self):
        assert dispatch(["frobnicate"]) == 1

    def test_simulate_requires_seed(self):
        assert dispatch(["simulate", "--setting", "S1", "--method", "niqcd",
                         "--n", "50", "--reps", "1", "--out", "/tmp/x"]) == 1

    def test_data_error_is_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("value\n1.0\nnot-a-number\n")
        assert dispatch(["fit", "--input", str(bad)]) == 2

    def test_numerical_error_is_3(self, model_json):
        # an impossible quadrature tolerance forces the depth limit
        assert dispatch(["metrics", "--model", str(model_json),
                         "--abs-tol", "1e-300", "--mc-n", "1000"]) == 3

    def test_version_is_0(self, capsys):
        assert dispatch(["--version"]) == 0
        assert capsys.readouterr().out.strip() == "0.1.0"

    def test_help_is_0(self):
        for cmd in ("fit", "simulate", "metrics", "gof", "stock"):
            assert dispatch([cmd, "--help"]) == 0


class TestFit:
    def test_json_to_stdout(self, data_csv, capsys):
        assert dispatch(["fit", "--input", str(data_csv),
                         "--family", "cauchy", "--no-refine"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["method"] == "NIQCD"
        assert out["m"] == len(out["mu"]) == len(out["sigma"]) == len(out["lambda"])

    def test_iqcd_method(self, data_csv, capsys):
        assert dispatch(["fit", "--input", str(data_csv), "--method", "iqcd"]) == 0
        assert json.loads(capsys.readouterr().out)["method"] == "IQCD"

    def test_as_prices(self, price_csv, capsys):
        assert dispatch(["fit", "--input", str(price_csv), "--as-prices",
                         "--no-refine"]) == 0
        assert json.loads(capsys.readouterr().out)["m"] >= 1

    def test_config_file_and_flag_override(self, data_csv, tmp_path, capsys):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text("epsilon = 0.2\nm_init = 8  # grid size\nrefine = false\n")
        assert dispatch(["fit", "--input", str(data_csv), "--config", str(cfg),
                         "--epsilon", "0.1"]) == 0
        json.loads(capsys.readouterr().out)
        loaded = load_config_file(cfg)
        assert loaded == {"epsilon": 0.2, "m_init": 8, "refine": False}

    def test_bad_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.ini"
        cfg.write_text("bandwidth = 3\n")
        with pytest.raises(DataError):
            load_config_file(cfg)


class TestValueCsv:
    def test_reads_plain_column(self, tmp_path):
        path = tmp_path / "v.csv"
        path.write_text("1.5\n2.5\n\n3.5\n")
        assert np.array_equal(read_value_csv(path), [1.5, 2.5, 3.5])

    def test_header_tolerated(self, tmp_path):
        path = tmp_path / "v.csv"
        path.write_text("value\n1.0\n2.0\n")
        assert np.array_equal(read_value_csv(path), [1.0, 2.0])

    def test_bad_row_reports_line(self, tmp_path):
        path = tmp_path / "v.csv"
        path.write_text("1.0\nxyz\n")
        with pytest.raises(DataError, match=":2"):
            read_value_csv(path)


class TestSimulate:
    def test_byte_identical_reports_modulo_timing(self, tmp_path):
        argv = ["simulate", "--setting", "S1", "--method", "niqcd",
                "--n", "60", "--reps", "3", "--seed", "7", "--no-refine"]
        assert dispatch(argv + ["--out", str(tmp_path / "a")]) == 0
        assert dispatch(argv + ["--out", str(tmp_path / "b")]) == 0
        assert (strip_timing(tmp_path / "a" / "report.csv")
                == strip_timing(tmp_path / "b" / "report.csv"))
        ja = json.load(open(tmp_path / "a" / "report.json"))
        jb = json.load(open(tmp_path / "b" / "report.json"))
        assert ja[0]["mhat_histogram"] == jb[0]["mhat_histogram"]

    def test_all_settings_both_methods(self, tmp_path):
        assert dispatch(["simulate", "--setting", "all", "--method", "both",
                         "--n", "60", "--reps", "1", "--seed", "5",
                         "--no-refine", "--out", str(tmp_path)]) == 0
        rows = list(csv.reader(open(tmp_path / "report.csv")))
        assert len(rows) == 13  # header + 6 settings x 2 methods


class TestMetricsGof:
    def test_metrics_json(self, capsys):
        assert dispatch(["metrics", "--setting", "S1", "--mc-n", "2000"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["bcd"] == "undefined-heavy-tail"
        assert abs(out["wdol"] - 0.01) < 0.02

    def test_metrics_needs_one_source(self, model_json):
        assert dispatch(["metrics"]) == 1
        assert dispatch(["metrics", "--model", str(model_json),
                         "--setting", "S1"]) == 1

    def test_gof_asymptotic(self, model_json, data_csv, capsys):
        assert dispatch(["gof", "--model", str(model_json),
                         "--data", str(data_csv)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["method"] == "asymptotic_case0"
        assert 0.0 <= out["p_value"] <= 1.0

    def test_gof_bootstrap(self, model_json, data_csv, capsys):
        assert dispatch(["gof", "--model", str(model_json), "--data", str(data_csv),
                         "--method", "bootstrap", "--b", "199", "--seed", "5"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["bootstrap_b"] == 199


class TestStock:
    def test_outputs(self, price_csv, tmp_path, capsys):
        out = tmp_path / "out"
        assert dispatch(["stock", "--prices", str(price_csv),
                         "--weekly-from", "2021-05-01",
                         "--predict-from", "2021-07-01",
                         "--no-refine", "--out", str(out)]) == 0
        model = json.loads((out / "model.json").read_text())
        assert model["m"] == len(model["mu"])
        traj = (out / "trajectory.csv").read_text().splitlines()
        assert traj[0].startswith("date,mu1")
        cats = (out / "categories.csv").read_text().splitlines()
        assert cats[0] == "date,category"
        assert len(cats) > 1
        first_date = cats[1].split(",")[0]
        assert first_date >= "2021-07-01"

    def test_byte_stable_outputs(self, price_csv, tmp_path):
        argv = ["stock", "--prices", str(price_csv),
                "--weekly-from", "2021-05-01", "--no-refine"]
        assert dispatch(argv + ["--out", str(tmp_path / "a")]) == 0
        assert dispatch(argv + ["--out", str(tmp_path / "b")]) == 0
        for name in ("model.json", "trajectory.csv", "categories.csv"):
            assert (tmp_path / "a" / name).read_bytes() == \
                   (tmp_path / "b" / name).read_bytes()
