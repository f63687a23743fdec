import numpy as np
import pytest

from sleephmm.cli import EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_OK, main
from sleephmm.estimation import NATURAL_NAMES, natural_vector
from sleephmm.io import read_params_csv, read_posterior_csv, read_study_csv, write_subject_csv
from sleephmm.simulation import SIMULATION_PARAMS, MissingSpec, make_scenario, simulate_observations


@pytest.fixture(scope="module")
def subject(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "subject.csv"
    series = simulate_observations(make_scenario(3).pattern, missing=MissingSpec.last_days(3), seed=41)
    write_subject_csv(series, path)
    return path


@pytest.fixture(scope="module")
def fit_dir(subject, tmp_path_factory):
    out = tmp_path_factory.mktemp("fit")
    assert main(["fit", "--input", str(subject), "--out", str(out)]) == EXIT_OK
    return out


class TestFit:
    def test_outputs(self, fit_dir):
        assert {p.name for p in fit_dir.iterdir()} >= {"fit.csv", "posterior.csv", "fit.svg"}
        posterior, viterbi = read_posterior_csv(fit_dir / "posterior.csv")
        assert posterior.size == 10080 and set(np.unique(viterbi)) <= {0, 1}
        svg = (fit_dir / "fit.svg").read_text()
        assert svg.startswith("<svg") and svg.count('class="panel"') == 3
        assert "did not converge" not in svg

    def test_estimates_recovered(self, fit_dir):
        params = read_params_csv(fit_dir / "fit.csv")
        e = params.emission
        assert e.mu0 == pytest.approx(5.19, rel=0.1) and e.mu1 == pytest.approx(1.31, rel=0.1)
        assert abs(e.pi1 - 0.95) <= 0.05

    def test_reports_missing_fraction(self, subject, tmp_path, capsys):
        cfg = tmp_path / "fit.cfg"
        cfg.write_text("max_iterations = 1\n")
        code = main(["fit", "--input", str(subject), "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == EXIT_NOT_CONVERGED
        assert "missing fraction 0.429" in capsys.readouterr().out
        assert "did not converge" in (tmp_path / "o" / "fit.svg").read_text()
        assert (tmp_path / "o" / "fit.csv").exists()

    def test_deterministic(self, subject, fit_dir, tmp_path):
        assert main(["fit", "--input", str(subject), "--out", str(tmp_path)]) == EXIT_OK
        for name in ("fit.csv", "posterior.csv", "fit.svg"):
            assert (tmp_path / name).read_bytes() == (fit_dir / name).read_bytes()


class TestDecode:
    def test_matches_fit_outputs(self, subject, fit_dir, tmp_path):
        code = main(["decode", "--input", str(subject), "--params", str(fit_dir / "fit.csv"),
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        assert (tmp_path / "posterior.csv").read_bytes() == (fit_dir / "posterior.csv").read_bytes()

    def test_near_perfect_rater(self, tmp_path):
        e = SIMULATION_PARAMS.emission
        values = natural_vector(SIMULATION_PARAMS)
        values[4], values[5] = 1e-12, 1 - 1e-12
        lines = ["parameter,estimate,se"] + [f"{n},{float(v)!r},NA" for n, v in zip(NATURAL_NAMES, values)]
        params = tmp_path / "sharp.csv"
        params.write_text("\n".join(lines) + "\n")
        series = simulate_observations(make_scenario(2).pattern,
                                       type(e)(e.mu0, e.mu1, e.s0, e.s1, 1e-12, 1 - 1e-12), seed=2)
        data = tmp_path / "sharp_subject.csv"
        write_subject_csv(series, data)
        assert main(["decode", "--input", str(data), "--params", str(params), "--out", str(tmp_path)]) == 0
        _, viterbi = read_posterior_csv(tmp_path / "posterior.csv")
        observed = ~np.isnan(series.self_report)
        np.testing.assert_array_equal(viterbi[observed], series.self_report[observed])


class TestSimulate:
    def test_single_replicate(self, tmp_path, capsys):
        code = main(["simulate", "--scenario", "4", "--reps", "1", "--missing-days", "3",
                     "--seed", "5", "--out", str(tmp_path)])
        assert code == EXIT_OK
        table = read_study_csv(tmp_path / "study.csv")
        np.testing.assert_array_equal(table["band_width"], 0.0)
        np.testing.assert_array_equal(table["truth"], make_scenario(4).pattern)
        assert (tmp_path / "study.svg").read_text().count('class="panel"') == 3
        assert "max band width 0.0000" in capsys.readouterr().out

    def test_no_refit_is_jobs_invariant(self, tmp_path):
        args = ["simulate", "--scenario", "1", "--reps", "3", "--no-refit", "--seed", "9"]
        assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
        assert main(args + ["--jobs", "2", "--out", str(tmp_path / "b")]) == EXIT_OK
        assert (tmp_path / "a" / "study.csv").read_bytes() == (tmp_path / "b" / "study.csv").read_bytes()


class TestErrors:
    def test_missing_input(self, tmp_path, capsys):
        assert main(["fit", "--input", str(tmp_path / "none.csv"), "--out", str(tmp_path)]) == EXIT_INPUT
        assert "not found" in capsys.readouterr().err

    def test_malformed_input(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("minute,activity,self_report\n0,1,1\n1,-4,0\n")
        assert main(["decode", "--input", str(bad), "--params", str(bad), "--out", str(tmp_path)]) == EXIT_INPUT
        assert "line 3" in capsys.readouterr().err

    def test_bad_config(self, subject, tmp_path, capsys):
        cfg = tmp_path / "fit.cfg"
        cfg.write_text("speed = fast\n")
        code = main(["fit", "--input", str(subject), "--config", str(cfg), "--out", str(tmp_path)])
        assert code == EXIT_INPUT
        assert "unknown key" in capsys.readouterr().err

    def test_too_short_to_fit(self, tmp_path):
        short = tmp_path / "short.csv"
        short.write_text("minute,activity,self_report\n0,1,1\n1,0,1\n")
        assert main(["fit", "--input", str(short), "--out", str(tmp_path)]) == EXIT_INPUT

    def test_argument_errors(self):
        with pytest.raises(SystemExit):
            main(["simulate", "--scenario", "9", "--out", "x"])
