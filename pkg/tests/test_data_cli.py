import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sfiegarch.cli import main
from sfiegarch.data import (
    Dataset,
    ParseError,
    aggregate_returns,
    descriptive_stats,
    ingest_prices,
)
from sfiegarch.errors import InvalidParameterError
from sfiegarch.model import SfiegarchSpec, spec_to_dict


def write_prices(path, rows):
    with open(path, "w") as fh:
        fh.write("timestamp,price\n")
        for ts, p in rows:
            fh.write(f"{ts},{p}\n")


class TestIngest:
    def test_flat_prices_zero_return(self, tmp_path):
        f = tmp_path / "p.csv"
        write_prices(f, [("2024-01-02T09:00:00", 100.0), ("2024-01-02T09:15:00", 100.0)])
        ds = ingest_prices(f)
        assert ds.values.tolist() == [0.0]

    def test_exact_log_return(self, tmp_path):
        f = tmp_path / "p.csv"
        write_prices(
            f,
            [("2024-01-02T09:00:00", 100.0), ("2024-01-02T09:15:00", 100.0 * math.exp(0.01))],
        )
        ds = ingest_prices(f)
        assert ds.values[0] == pytest.approx(1.0, abs=1e-12)

    def test_return_count(self, tmp_path):
        f = tmp_path / "p.csv"
        rows = [(f"2024-01-02T09:{m:02d}:{s:02d}", 100 + 0.01 * i)
                for i, (m, s) in enumerate((m, s) for m in range(60) for s in range(0, 60, 20))]
        write_prices(f, rows)
        ds = ingest_prices(f)
        assert ds.values.size == len(rows) - 1

    def test_nonpositive_prices_rejected_with_rows(self, tmp_path):
        f = tmp_path / "p.csv"
        write_prices(
            f,
            [
                ("2024-01-02T09:00:00", 100.0),
                ("2024-01-02T09:15:00", -5.0),
                ("2024-01-02T09:30:00", 101.0),
            ],
        )
        ds = ingest_prices(f)
        assert ds.rejected_rows == [3]
        assert ds.values.size == 1

    def test_malformed_row_raises_with_line(self, tmp_path):
        f = tmp_path / "p.csv"
        write_prices(f, [("2024-01-02T09:00:00", 100.0), ("not-a-time", 101.0)])
        with pytest.raises(ParseError, match="line 3"):
            ingest_prices(f)

    def test_nonincreasing_timestamps_rejected(self, tmp_path):
        f = tmp_path / "p.csv"
        write_prices(
            f, [("2024-01-02T09:15:00", 100.0), ("2024-01-02T09:00:00", 101.0)]
        )
        with pytest.raises(ParseError):
            ingest_prices(f)

    def test_day_counts_pattern(self, tmp_path):
        f = tmp_path / "p.csv"
        rows = []
        for day in (2, 3):
            for k in range(4):
                rows.append((f"2024-01-0{day}T09:{15 * k:02d}:00", 100.0 + len(rows)))
        write_prices(f, rows)
        ds = ingest_prices(f)
        # first return lands on day one (stamped by endpoint): 3 then 4
        assert ds.day_counts == [3, 4]


class TestAggregate:
    def make_returns(self, n):
        from datetime import datetime, timedelta

        ts = [datetime(2024, 1, 2, 9, 0) + timedelta(minutes=15 * i) for i in range(n)]
        return Dataset(timestamps=ts, values=np.arange(1.0, n + 1), kind="returns")

    def test_block_sums(self):
        ds = self.make_returns(8)
        agg = aggregate_returns(ds, 4)
        assert agg.values.tolist() == [10.0, 26.0]

    def test_identity_block(self):
        ds = self.make_returns(5)
        assert aggregate_returns(ds, 1).values.tolist() == ds.values.tolist()

    def test_sum_preservation_full_blocks(self):
        ds = self.make_returns(12)
        agg = aggregate_returns(ds, 3)
        assert agg.values.sum() == pytest.approx(ds.values.sum())

    def test_partial_block_policy(self):
        ds = self.make_returns(7)
        dropped = aggregate_returns(ds, 4)
        kept = aggregate_returns(ds, 4, keep_partial=True)
        assert dropped.values.size == 1 and kept.values.size == 2
        assert kept.values[-1] == pytest.approx(5 + 6 + 7)

    def test_paper_style_counts(self):
        # 33992 returns in blocks of 4 -> 8498
        ds = Dataset(timestamps=[], values=np.zeros(33_992), kind="returns")
        assert aggregate_returns(ds, 4).values.size == 8498

    def test_intraday_aggregation_day_pattern(self):
        # 27 fifteen-minute returns per day aggregated by 4 leaves one day with
        # 6 hourly returns followed by days with 7 (block ends straddle days)
        from datetime import datetime, timedelta

        ts = []
        for day in range(4):
            start = datetime(2024, 1, 2 + day, 8, 45)
            ts += [start + timedelta(minutes=15 * k) for k in range(27)]
        ds = Dataset(timestamps=ts, values=np.ones(108), kind="returns")
        agg = aggregate_returns(ds, 4)
        assert agg.values.size == 27
        assert agg.day_counts == [6, 7, 7, 7]


class TestDescriptiveStats:
    def test_normal_sample_kurtosis(self):
        rng = np.random.default_rng(0)
        st = descriptive_stats(rng.standard_normal(10**6))
        assert st.kurtosis == pytest.approx(3.0, abs=0.05)  # raw, non-excess
        assert abs(st.skewness) < 0.02

    def test_constant_series_flags(self):
        st = descriptive_stats(np.full(10, 1.5))
        assert st.sd == 0.0 and math.isnan(st.kurtosis) and math.isnan(st.skewness)

    def test_needs_four_points(self):
        with pytest.raises(InvalidParameterError):
            descriptive_stats([1.0, 2.0])


@pytest.fixture
def model_file(tmp_path):
    spec = SfiegarchSpec(omega=0.2, theta=-0.25, gamma_mag=0.24, d=0.3, s=2)
    doc = spec_to_dict(spec)
    path = tmp_path / "model.json"
    path.write_text(json.dumps(doc))
    return path


class TestCli:
    def test_sim_deterministic_and_byte_identical(self, tmp_path, model_file):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            rc = main(
                ["--seed", "9", "--out", str(out), "sim", "--model", str(model_file),
                 "--n", "50", "--burn-in", "100", "--m-trunc", "100"]
            )
            assert rc == 0
        assert (out1 / "sim.csv").read_bytes() == (out2 / "sim.csv").read_bytes()

    def test_acov_and_spectrum(self, tmp_path, model_file):
        rc = main(["--out", str(tmp_path), "acov", "--model", str(model_file), "--max-lag", "5"])
        assert rc == 0
        lines = (tmp_path / "acov.csv").read_text().strip().splitlines()
        assert lines[0] == "lag,value" and len(lines) == 7
        rc = main(
            ["--out", str(tmp_path), "spectrum", "--model", str(model_file), "--n-freq", "16"]
        )
        assert rc == 0
        assert (tmp_path / "spectrum.csv").exists()

    def test_fit_forecast_pipeline(self, tmp_path, model_file):
        # simulate, fit, then forecast from the saved artifacts
        rc = main(
            ["--seed", "4", "--out", str(tmp_path), "sim", "--model", str(model_file),
             "--n", "800", "--burn-in", "0", "--m-trunc", "800"]
        )
        assert rc == 0
        sim = (tmp_path / "sim.csv").read_text().splitlines()
        with open(tmp_path / "returns.csv", "w") as fh:
            fh.write("t,r\n")
            for line in sim[1:]:
                t, x, _, _ = line.split(",")
                fh.write(f"{t},{x}\n")
        rc = main(
            ["--out", str(tmp_path), "fit", "--returns", str(tmp_path / "returns.csv"),
             "--s", "2", "--no-mean"]
        )
        assert rc == 0
        doc = json.loads((tmp_path / "fit.json").read_text())
        assert doc["converged"] and "model" in doc
        rc = main(
            ["--out", str(tmp_path), "forecast", "--fit", str(tmp_path / "fit.json"),
             "--residuals", str(tmp_path / "residuals.csv"), "--h", "5"]
        )
        assert rc == 0
        fc = (tmp_path / "forecast.csv").read_text().splitlines()
        assert fc[0].startswith("h,r_hat,r2_hat,sigma2_hat,sigma2_check,sigma2_tilde")
        assert len(fc) == 6
        # h = 1 triple equality visible in the emitted file
        row1 = fc[1].split(",")
        assert row1[3] == row1[4] == row1[5]

    def test_diag_and_evaluate(self, tmp_path):
        rng = np.random.default_rng(2)
        with open(tmp_path / "series.csv", "w") as fh:
            fh.write("t,r\n")
            for i, v in enumerate(rng.standard_normal(300)):
                fh.write(f"{i},{float(v)!r}\n")
        rc = main(["--out", str(tmp_path), "diag", "--series", str(tmp_path / "series.csv"),
                   "--lags", "5,10"])
        assert rc == 0
        doc = json.loads((tmp_path / "diag.json").read_text())
        assert "ljung_box" in doc and "10" in doc["ljung_box"]
        with open(tmp_path / "pred.csv", "w") as fh:
            fh.write("t,r_hat\n")
            for i in range(300):
                fh.write(f"{i},0.0\n")
        rc = main(
            ["--out", str(tmp_path), "evaluate", "--actual", str(tmp_path / "series.csv"),
             "--predicted", str(tmp_path / "pred.csv")]
        )
        assert rc == 0
        doc = json.loads((tmp_path / "evaluate.json").read_text())
        assert doc["error_measures"]["mae"] > 0

    def test_pit_and_predictive_loglik(self, tmp_path):
        rng = np.random.default_rng(6)
        sigma = np.exp(0.1 * rng.standard_normal(500))
        y = sigma * rng.standard_normal(500)
        with open(tmp_path / "actual.csv", "w") as fh:
            fh.write("t,r\n")
            for i, v in enumerate(y):
                fh.write(f"{i},{float(v)!r}\n")
        with open(tmp_path / "pred.csv", "w") as fh:
            fh.write("t,r_hat\n")
            for i in range(500):
                fh.write(f"{i},0.0\n")
        with open(tmp_path / "sig.csv", "w") as fh:
            fh.write("t,sigma2\n")
            for i, s in enumerate(sigma**2):
                fh.write(f"{i},{float(s)!r}\n")
        rc = main(
            ["--out", str(tmp_path), "evaluate", "--actual", str(tmp_path / "actual.csv"),
             "--predicted", str(tmp_path / "pred.csv"),
             "--pit-sigma2", str(tmp_path / "sig.csv"), "--nu-grid", "1.5,2.0"]
        )
        assert rc == 0
        doc = json.loads((tmp_path / "evaluate.json").read_text())
        assert len(doc["density_transform"]) == 2
        # correctly specified Gaussian: PIT should not reject at nu = 2
        by_nu = {row["nu"]: row for row in doc["density_transform"]}
        assert by_nu[2.0]["pvalue"] > 0.05
        assert set(doc["predictive_loglik"]) == {"1.5", "2.0"}
        assert (tmp_path / "density_transform.csv").exists()

    def test_ingest_subcommand(self, tmp_path):
        f = tmp_path / "prices.csv"
        write_prices(
            f,
            [(f"2024-01-02T09:{i:02d}:00", 100 * math.exp(0.001 * i)) for i in range(9)],
        )
        rc = main(["--out", str(tmp_path), "ingest", "--prices", str(f), "--block", "2"])
        assert rc == 0
        doc = json.loads((tmp_path / "ingest.json").read_text())
        assert doc["n_returns"] == 4
        lines = (tmp_path / "returns.csv").read_text().splitlines()
        assert lines[0] == "timestamp,r" and len(lines) == 5

    def test_config_file_overrides_fit_options(self, tmp_path, model_file):
        rc = main(
            ["--seed", "4", "--out", str(tmp_path), "sim", "--model", str(model_file),
             "--n", "400", "--burn-in", "0", "--m-trunc", "400"]
        )
        assert rc == 0
        sim = (tmp_path / "sim.csv").read_text().splitlines()
        with open(tmp_path / "returns.csv", "w") as fh:
            fh.write("t,r\n")
            for line in sim[1:]:
                t, x, _, _ = line.split(",")
                fh.write(f"{t},{x}\n")
        (tmp_path / "opts.json").write_text(json.dumps({"fix_d": 0.0, "max_iter": 400}))
        rc = main(
            ["--out", str(tmp_path), "--config", str(tmp_path / "opts.json"),
             "fit", "--returns", str(tmp_path / "returns.csv"), "--s", "2", "--no-mean"]
        )
        assert rc == 0
        doc = json.loads((tmp_path / "fit.json").read_text())
        assert doc["model"]["d"] == 0.0  # pinned by the config file

    def test_validation_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"d": 0.9, "s": 2, "gamma": 0.2}))
        rc = main(["--out", str(tmp_path), "acov", "--model", str(bad), "--max-lag", "3"])
        assert rc == 2

    def test_entry_point_installed(self):
        proc = subprocess.run(
            [sys.executable, "-m", "sfiegarch.cli", "--version"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
