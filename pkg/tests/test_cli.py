import csv
import io
import time

import pytest

from censored_extremes import asymptotics as asy
from censored_extremes.censored_data import sort_with_concomitants, top_k_view, uncensored_fraction
from censored_extremes.cli import run
from censored_extremes.datasets import load_synthetic_survival, synthetic_path
from censored_extremes.ekm import ekm_weights
from censored_extremes.estimators import hill_censored, moment_censored


@pytest.fixture(scope="module")
def data_file():
    return str(synthetic_path())


@pytest.fixture(scope="module")
def srt():
    return sort_with_concomitants(load_synthetic_survival())


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestEstimate:
    def test_matches_library(self, data_file, srt):
        code, out, err = run(["estimate", "--input", data_file, "--k-grid", "5:50"])
        assert code == 0, err
        table = rows(out)
        assert [int(r["k"]) for r in table] == list(range(5, 51))
        for r in table:
            view = top_k_view(srt, int(r["k"]))
            assert float(r["gamma_hat"]) == moment_censored(view).gamma_hat
            assert float(r["p_hat"]) == uncensored_fraction(view)
            assert float(r["threshold"]) == view.threshold

    def test_normalized_flag(self, data_file, srt):
        _, out, _ = run(["estimate", "--input", data_file, "--k-grid", "40", "--normalized",
                         "--estimator", "hill-censored"])
        view = top_k_view(srt, 40)
        assert float(rows(out)[0]["gamma_hat"]) == hill_censored(view, True).gamma_hat

    def test_intervals(self, data_file, srt):
        code, out, _ = run(["estimate", "--input", data_file, "--k-grid", "20,60,100", "--ci", "0.9"])
        assert code == 0
        for r in rows(out):
            if r["note"]:
                assert r["note"].startswith("guard") and r["ci_lo"] == ""
                continue
            lo, g, hi = float(r["ci_lo"]), float(r["gamma_hat"]), float(r["ci_hi"])
            assert lo <= g <= hi
            est = asy.with_confidence_interval(top_k_view(srt, int(r["k"])), moment_censored(top_k_view(srt, int(r["k"]))), 0.9)
            assert float(r["var_hat"]) == est.variance_hat

    def test_default_grid_is_fast(self, data_file):
        t0 = time.perf_counter()
        code, out, _ = run(["estimate", "--input", data_file, "--ci", "0.95"])
        assert code == 0
        assert time.perf_counter() - t0 < 5.0
        assert len(rows(out)) == 671 - 5 + 1

    def test_writes_out_file(self, data_file, tmp_path):
        target = tmp_path / "est.csv"
        code, out, _ = run(["estimate", "--input", data_file, "--k-grid", "5:9", "--out", str(target)])
        assert code == 0 and out == ""
        assert len(rows(target.read_text())) == 5


class TestExitCodes:
    def test_k_out_of_range(self, data_file):
        code, _, err = run(["estimate", "--input", data_file, "--k-grid", "5,1342"])
        assert code == 1 and "1341" in err

    def test_unknown_option(self, data_file):
        assert run(["estimate", "--input", data_file, "--bogus"])[0] == 1
        assert run([])[0] == 1

    def test_bad_estimator(self, data_file):
        assert run(["estimate", "--input", data_file, "--estimator", "pickands"])[0] == 1

    def test_missing_file(self, tmp_path):
        assert run(["estimate", "--input", str(tmp_path / "none.csv")])[0] == 2

    def test_malformed_file(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("time,status\n1.0,1\nabc,0\n")
        code, _, err = run(["km", "--input", str(bad)])
        assert code == 2 and "row" in err

    def test_guard(self):
        code, _, err = run(["variance", "--law", "hill", "--gf", "1", "--gg", "0.5"])
        assert code == 3 and "gamma_G > gamma_F" in err

    def test_missing_law_parameter(self):
        assert run(["variance", "--law", "moment-zero"])[0] == 1


class TestVariance:
    def test_hill(self):
        _, out, _ = run(["variance", "--law", "hill", "--gf", "0.5", "--gg", "1.5"])
        assert out == "bias,0\nvariance,0.375\n"

    def test_moment_laws(self):
        _, out, _ = run(["variance", "--law", "moment-pos", "--gf", "0.5", "--gg", "1.5"])
        assert float(out.splitlines()[1].split(",")[1]) == pytest.approx(4.875, rel=1e-12)
        _, out, _ = run(["variance", "--law", "moment-neg", "--gf", "-0.5", "--gg", "-1"])
        assert float(out.splitlines()[1].split(",")[1]) == pytest.approx(2.4, rel=1e-12)
        _, out, _ = run(["variance", "--law", "moment-zero", "--alpha-f", str(6 / 7)])
        assert float(out.splitlines()[1].split(",")[1]) == pytest.approx(1.776, rel=1e-9)

    def test_quadrature_row(self):
        _, out, _ = run(["variance", "--law", "quadrature", "--gf", "0.5", "--gg", "1.5"])
        table = rows(out)[0]
        assert float(table["quadrature"]) == pytest.approx(float(table["closed_form"]), rel=1e-6)


class TestKmEkm:
    def test_km_last_value(self, data_file):
        _, out, _ = run(["km", "--input", data_file])
        table = rows(out)
        xs = [float(r["x"]) for r in table]
        assert xs == sorted(xs)
        cdf = [float(r["cdf"]) for r in table]
        assert all(0 <= c <= 1 for c in cdf) and cdf == sorted(cdf)

    def test_ekm_weights_table(self, data_file, srt):
        _, out, _ = run(["ekm", "--input", data_file, "--k", "30"])
        table = rows(out)
        assert len(table) == 30
        view = top_k_view(srt, 30)
        w = ekm_weights(view)
        assert float(table[-1]["cum_mass"]) == pytest.approx(w.total_mass, rel=1e-12)
        assert float(table[-1]["omega"]) == w.omega[0]

    def test_ekm_integral(self, data_file, srt):
        _, out, _ = run(["ekm", "--input", data_file, "--k", "30", "--phi", "log"])
        r = rows(out)[0]
        view = top_k_view(srt, 30)
        assert float(r["value"]) == hill_censored(view).gamma_hat
        assert float(r["total_mass"]) == ekm_weights(view).total_mass


class TestSimulate:
    @pytest.mark.parametrize("name, metrics", [("fig2", {"mse", "classification"}), ("fig3", {"coverage", "sd_gap"})])
    def test_presets(self, name, metrics):
        args = ["simulate", "--preset", name, "--reps", "3", "--seed", "4"]
        code, out, err = run(args)
        assert code == 0, err
        table = rows(out)
        assert metrics <= {r["metric"] for r in table}
        assert {r["scenario"] for r in table} >= {"a_beta_n1000"}
        assert run(args)[1] == out

    def test_spec_file(self, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text('{"f_dist": "pareto(2)", "g_dist": "pareto(0.6666666666666666)", "n": 300,'
                        ' "reps": 4, "k_grid": "10:30:10", "estimators": ["hill_censored"]}')
        code, out, _ = run(["simulate", "--spec", str(spec), "--threads", "2"])
        assert code == 0
        assert out == run(["simulate", "--spec", str(spec)])[1]
        assert out.splitlines()[0] == "estimator,k,metric,value,reps_effective"

    def test_needs_one_source(self):
        assert run(["simulate"])[0] == 1
        assert run(["simulate", "--preset", "fig2", "--spec", "x.json"])[0] == 1
