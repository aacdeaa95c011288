"""CLI and artifact round-trip tests."""

import json

import pytest

from swapsim import cli, io
from swapsim.engine import ExperimentConfig, run_trials
from swapsim.qcore import BellOutcome
from swapsim.toys import run_rps, run_toy_source_variant


class TestTokens:
    def test_round_trip(self):
        for outcome in list(BellOutcome) + [None]:
            assert io.outcome_from_token(io.outcome_token(outcome)) is outcome

    def test_token_values(self):
        assert io.outcome_token(BellOutcome.PSI_MINUS) == "psi-"
        assert io.outcome_token(BellOutcome.NO_HERALD) == "none"
        assert io.outcome_token(None) == "absent"

    def test_unknown_token_rejected(self):
        with pytest.raises(ValueError):
            io.outcome_from_token("maybe")


class TestEnsembleCsv:
    def test_round_trip(self, tmp_path):
        ens = run_trials(ExperimentConfig(n_trials=200, seed=6))
        path = tmp_path / "ens.csv"
        io.write_ensemble_csv(path, ens)
        back = io.read_ensemble_csv(path)
        assert tuple(back) == ens.records

    def test_header(self, tmp_path):
        ens = run_trials(ExperimentConfig(n_trials=3, seed=6))
        path = tmp_path / "ens.csv"
        io.write_ensemble_csv(path, ens)
        first = path.read_text().splitlines()[0]
        assert first == "trial_id,a,b,A,B,c_outcome,heralded"

    def test_absent_token_when_c_disabled(self, tmp_path):
        ens = run_trials(ExperimentConfig(n_trials=3, seed=6, c_enabled=False))
        path = tmp_path / "ens.csv"
        io.write_ensemble_csv(path, ens)
        assert ",absent,false" in path.read_text()

    def test_partial_mode_round_trip(self, tmp_path):
        ens = run_trials(ExperimentConfig(n_trials=60, seed=6, bsm_partial=True))
        path = tmp_path / "ens.csv"
        io.write_ensemble_csv(path, ens)
        assert ",none," in path.read_text()
        assert tuple(io.read_ensemble_csv(path)) == ens.records


class TestToyCsv:
    def test_lambda_columns(self, tmp_path):
        trials = run_toy_source_variant(5, 2)
        path = tmp_path / "toy.csv"
        io.write_toy_csv(path, trials)
        lines = path.read_text().splitlines()
        assert lines[0] == "trial_id,a,b,A,B,lambda_A,lambda_B,accepted"
        assert len(lines) == 6

    def test_rps_csv(self, tmp_path):
        path = tmp_path / "rps.csv"
        io.write_rps_csv(path, run_rps(4, 1))
        lines = path.read_text().splitlines()
        assert lines[0] == "trial_id,alice,bob,verdict"
        assert len(lines) == 5


class TestCliSimulate:
    def test_writes_artifacts_with_report(self, tmp_path):
        out = tmp_path / "run1"
        rc = cli.main(
            ["simulate", "--geometry", "early", "--trials", "400", "--seed", "7",
             "--out", str(out)]
        )
        assert rc == 0
        report = json.loads((tmp_path / "run1.report.json").read_text())
        assert report["meta"]["geometry"] == "early"
        assert report["meta"]["seed"] == 7
        assert "S" in report["chsh"]
        assert {t["hypothesis"] for t in report["ci_tests"]} == {
            "no-signaling-A", "no-signaling-B", "LC_ps-A", "LC_ps-B",
        }
        mirror = json.loads((tmp_path / "run1.json").read_text())
        assert mirror["meta"]["herald"] == "psi-minus"
        assert len(mirror["records"]) == 400

    def test_exact_mode_report(self, tmp_path):
        out = tmp_path / "run2"
        rc = cli.main(
            ["simulate", "--exact", "--geometry", "delayed", "--trials", "50",
             "--seed", "1", "--out", str(out)]
        )
        assert rc == 0
        report = json.loads((tmp_path / "run2.report.json").read_text())
        assert report["exact"]["chsh"]["S"] == pytest.approx(2.8284271247, abs=1e-9)
        assert report["exact"]["nda"]["verdict"] == "NoDifference"
        assert report["exact"]["fragility"]["max_spread"] > 0

    def test_missing_out_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli.main(["simulate", "--trials", "10"])
        assert exc.value.code == 2

    def test_io_failure_exit_code(self, tmp_path):
        rc = cli.main(
            ["simulate", "--trials", "10", "--out", str(tmp_path / "no" / "way" / "run")]
        )
        assert rc == 3

    def test_env_seed_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SWAPSIM_SEED", "424242")
        out = tmp_path / "run3"
        cli.main(["simulate", "--trials", "20", "--out", str(out)])
        report = json.loads((tmp_path / "run3.report.json").read_text())
        assert report["meta"]["seed"] == 424242

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("geometry = early\ntrials = 60\nseed = 9\n")
        out = tmp_path / "run4"
        cli.main(["simulate", "--config", str(cfg), "--trials", "30", "--out", str(out)])
        report = json.loads((tmp_path / "run4.report.json").read_text())
        assert report["meta"]["geometry"] == "early"
        assert report["meta"]["n_trials"] == 30  # flag wins over file
        assert report["meta"]["seed"] == 9

    def test_config_file_can_enable_exact(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("exact = true\ntrials = 40\n")
        out = tmp_path / "run5"
        cli.main(["simulate", "--config", str(cfg), "--seed", "2", "--out", str(out)])
        report = json.loads((tmp_path / "run5.report.json").read_text())
        assert report["meta"]["exact"] is True
        assert "nda" in report["exact"]

    def test_disable_c_run(self, tmp_path):
        out = tmp_path / "run6"
        rc = cli.main(
            ["simulate", "--disable-c", "true", "--trials", "50", "--seed", "1",
             "--out", str(out)]
        )
        assert rc == 0
        report = json.loads((tmp_path / "run6.report.json").read_text())
        assert report["heralded"]["count"] == 0
        assert report["chsh"] is None  # empty event-ready ensemble
        assert ",absent," in (tmp_path / "run6.csv").read_text()


class TestCliToyRps:
    def test_toy_source_report(self, tmp_path):
        out = tmp_path / "toy1"
        rc = cli.main(
            ["toy", "--variant", "source", "--trials", "4000", "--seed", "3",
             "--out", str(out)]
        )
        assert rc == 0
        report = json.loads((tmp_path / "toy1.report.json").read_text())
        names = {t["hypothesis"] for t in report["ci_tests"]}
        assert {"SI_ps", "SI", "LC_ps-A", "LC_ps-B", "LC-A", "LC-B"} <= names
        assert abs(report["marginals"]["P(A=+1)"] - 0.5) < 0.05

    def test_bad_variant_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli.main(["toy", "--variant", "quantum", "--out", str(tmp_path / "x")])
        assert exc.value.code == 2

    def test_zero_trials_is_usage_error(self, tmp_path):
        for argv in (
            ["toy", "--trials", "0", "--out", str(tmp_path / "x")],
            ["rps", "--trials", "0", "--out", str(tmp_path / "x")],
            ["teleport", "--trials", "0"],
        ):
            with pytest.raises(SystemExit) as exc:
                cli.main(argv)
            assert exc.value.code == 2

    def test_rps_report(self, tmp_path):
        out = tmp_path / "rps1"
        rc = cli.main(["rps", "--trials", "3000", "--seed", "3", "--out", str(out)])
        assert rc == 0
        report = json.loads((tmp_path / "rps1.report.json").read_text())
        by_name = {t["hypothesis"]: t["verdict"] for t in report["ci_tests"]}
        assert by_name["rps-unconditional"] == "Holds"
        assert by_name["rps-given-Draw"] == "Violated"


class TestCliGeometryTeleport:
    def test_geometry_preset_stdout(self, capsys):
        rc = cli.main(["geometry", "--preset", "early"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "classification: ED" in out

    def test_geometry_boost_reorders_c(self, capsys):
        rc = cli.main(["geometry", "--preset", "spacelike", "--boost", "0.5"])
        assert rc == 0
        lines = [l for l in capsys.readouterr().out.splitlines() if l.startswith("order")]
        assert len(lines) == 2
        rest_line, boosted_line = lines
        assert rest_line != boosted_line

    def test_geometry_delayed_boost_keeps_c_last(self, capsys):
        cli.main(["geometry", "--preset", "delayed", "--boost", "0.9"])
        boosted = capsys.readouterr().out.splitlines()[-1]
        assert boosted.split("(")[0].rstrip().endswith("C")

    def test_geometry_bad_boost(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["geometry", "--preset", "spacelike", "--boost", "1.5"])
        assert exc.value.code == 2

    def test_geometry_custom_coords(self, capsys):
        rc = cli.main(
            ["geometry", "--coords",
             "A=1,-1;B=1,1;C=1,0;SourceLeft=0,-1;SourceRight=0,1"]
        )
        assert rc == 0
        assert "classification: Spacelike" in capsys.readouterr().out

    def test_teleport_stdout_report(self, capsys):
        rc = cli.main(["teleport", "--controlled", "true", "--trials", "2000", "--seed", "2"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["teleport"]["p_match"] == 1.0

    def test_teleport_file_report(self, tmp_path):
        out = tmp_path / "tp"
        rc = cli.main(
            ["teleport", "--controlled", "false", "--trials", "2000", "--seed", "2",
             "--out", str(out)]
        )
        assert rc == 0
        payload = json.loads((tmp_path / "tp.report.json").read_text())
        assert payload["teleport"]["mutual_information_bits"] < 0.2


class TestDeterminism:
    def test_identical_runs_are_byte_identical(self, tmp_path, monkeypatch):
        dirs = [tmp_path / "one", tmp_path / "two"]
        for d in dirs:
            d.mkdir()
            monkeypatch.chdir(d)
            cli.main(["simulate", "--trials", "300", "--seed", "5", "--out", "run"])
            cli.main(["toy", "--variant", "collider", "--trials", "300", "--seed", "5",
                      "--out", "toy"])
        for name in ("run.csv", "run.json", "run.report.json", "toy.csv", "toy.report.json"):
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes(), name
