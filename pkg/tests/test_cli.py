import json
import os

import pytest

from fockfade.cli import main, parse_losses, parse_states, read_config_file


def run(tmp_path, *argv):
    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        return main(list(argv))
    finally:
        os.chdir(cwd)


class TestParsing:
    def test_loss_grid(self):
        assert parse_losses("5:30:6") == (5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
        assert parse_losses("10:10:1") == (10.0,)

    def test_loss_grid_errors(self):
        from fockfade.cli import ConfigError
        for bad in ("5:30", "30:5:3", "a:b:c", "5:30:0"):
            with pytest.raises(ConfigError):
                parse_losses(bad)

    def test_states(self):
        assert parse_states("tmsv, pss_s") == ("tmsv", "pss_s")
        from fockfade.cli import ConfigError
        with pytest.raises(ConfigError):
            parse_states("tmsv,wigner")

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("losses = 5:10:2  # two points\nsqueezing-db = 4\n\n")
        out = read_config_file(str(cfg))
        assert out == {"losses": "5:10:2", "squeezing_db": "4"}


class TestSweepCommand:
    def test_csv_and_manifest(self, tmp_path):
        code = run(tmp_path, "sweep", "--states", "tmsv,pss_s",
                   "--losses", "5:10:2", "--quad-order", "24", "-o", "out")
        assert code == 0
        lines = (tmp_path / "out.csv").read_text().strip().split("\n")
        assert lines[0] == "loss_db,state,E_LN,P_c,R_E,trace_deficit"
        assert len(lines) == 1 + 2 * 2
        first = lines[1].split(",")
        assert first[0] == "5" and first[1] == "tmsv"
        assert float(first[3]) == 1.0
        manifest = json.loads((tmp_path / "out.manifest.json").read_text())
        assert manifest["subcommand"] == "sweep"
        assert manifest["config"]["chi2"] == 0.02
        assert manifest["config"]["chi1"] == 0.0  # asymmetric default

    def test_deterministic_output(self, tmp_path):
        for name in ("a", "b"):
            run(tmp_path, "sweep", "--states", "tmsv", "--losses", "8:8:1",
                "--quad-order", "24", "-o", name)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_chi_flag_sets_both(self, tmp_path):
        run(tmp_path, "sweep", "--states", "tmsv", "--losses", "8:8:1",
            "--setting", "sym", "--chi", "0.1", "--quad-order", "12",
            "--sym-quad-order", "12", "-o", "s")
        manifest = json.loads((tmp_path / "s.manifest.json").read_text())
        assert manifest["config"]["chi1"] == 0.1
        assert manifest["config"]["chi2"] == 0.1

    def test_config_file_precedence(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("losses=5:10:2\nquad_order=24\nsqueezing_db=4\n")
        run(tmp_path, "sweep", "--config", str(cfg), "--states", "tmsv",
            "--squeezing-db", "3", "-o", "p")
        manifest = json.loads((tmp_path / "p.manifest.json").read_text())
        # flag beats file; file beats default
        assert manifest["config"]["squeezing_db"] == 3.0
        assert manifest["config"]["quad_order"] == 24
        assert manifest["config"]["losses"] == [5.0, 10.0]

    def test_bad_config_exit_2(self, tmp_path):
        assert run(tmp_path, "sweep", "--states", "tmsv",
                   "--losses", "banana") == 2
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("not a key value line\n")
        assert run(tmp_path, "sweep", "--config", str(cfg)) == 2

    def test_numerical_failure_exit_3(self, tmp_path):
        # a 10 dB source on a tiny grid cannot hold its trace
        assert run(tmp_path, "sweep", "--states", "tmsv", "--losses", "5:5:1",
                   "--squeezing-db", "10", "--f-max", "2", "--ell-max", "2",
                   "--quad-order", "12") == 3


class TestScalarCommands:
    def test_channel_info_round_trip(self, tmp_path):
        assert run(tmp_path, "channel-info", "--target-loss-db", "10",
                   "-o", "ci") == 0
        info = json.loads((tmp_path / "ci.json").read_text())
        assert info["mean_loss_db"] == pytest.approx(10.0, abs=0.01)
        assert 0.88 < info["eta0"] < 0.91

    def test_channel_info_unreachable_loss(self, tmp_path):
        assert run(tmp_path, "channel-info", "--target-loss-db", "0.1") == 2

    def test_optimize_t_prs(self, tmp_path):
        assert run(tmp_path, "optimize-t", "--family", "prs_b",
                   "--objective", "initial_rate", "-o", "opt") == 0
        res = json.loads((tmp_path / "opt.json").read_text())
        assert res["T_star"] == 1.0

    def test_threshold_none(self, tmp_path):
        assert run(tmp_path, "threshold", "--family", "pss_s",
                   "--loss-db", "10", "-o", "th") == 0
        res = json.loads((tmp_path / "th.json").read_text())
        assert res["eta_th"] is None

    def test_compare_bell(self, tmp_path):
        assert run(tmp_path, "compare-bell", "--squeezing-db", "6",
                   "--loss-db", "10", "-o", "cb") == 0
        res = json.loads((tmp_path / "cb.json").read_text())
        assert res["rate_ratio"] > 1.0
