import json

import pytest

from netsiege.cli import main


def run_cli(args, capsys=None):
    code = main(args)
    return code


class TestGenerateNet:
    def test_writes_deterministic_file_and_summary(self, tmp_path, capsys):
        out = tmp_path / "net.txt"
        code = main(["generate-net", "--nodes", "50", "--density", "0.6",
                     "--seed", "7", "--out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "nodes=50" in printed and "high_value=" in printed
        first = out.read_bytes()
        assert main(["generate-net", "--nodes", "50", "--density", "0.6",
                     "--seed", "7", "--out", str(out)]) == 0
        assert out.read_bytes() == first

    def test_too_few_nodes_exits_2(self, tmp_path, capsys):
        code = main(["generate-net", "--nodes", "1", "--out", str(tmp_path / "x.txt")])
        assert code == 2
        assert "at least 2 nodes" in capsys.readouterr().err

    def test_bad_density_exits_2(self, tmp_path):
        assert main(["generate-net", "--nodes", "5", "--density", "0.0",
                     "--out", str(tmp_path / "x.txt")]) == 2


class TestHelpAndUsage:
    @pytest.mark.parametrize("cmd", ["generate-net", "train", "evaluate", "plot"])
    def test_help_exits_zero(self, cmd):
        with pytest.raises(SystemExit) as exc:
            main([cmd, "--help"])
        assert exc.value.code == 0

    def test_unknown_regime_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["train", "--regime", "bogus"])
        assert exc.value.code == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["generate-net", "--bogus", "1"])
        assert exc.value.code == 2


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory):
    """A tiny but real training run shared by the CLI tests."""
    out = tmp_path_factory.mktemp("run") / "alt"
    code = main([
        "train", "--regime", "alternating", "--epochs", "6", "--seed", "3",
        "--nodes", "6", "--density", "0.8", "--max-timesteps", "40",
        "--checkpoint-every", "3", "--out", str(out),
    ])
    assert code == 0
    return out


class TestTrain:
    def test_artifacts_exist(self, trained_run, capsys):
        assert (trained_run / "training_log.csv").exists()
        assert (trained_run / "manifest.json").exists()
        assert (trained_run / "defender_final.npz").exists()
        manifest = json.loads((trained_run / "manifest.json").read_text())
        assert manifest["epochs"] == 6
        assert sum(manifest["draw_counts"].values()) == 6

    def test_rerun_is_byte_identical(self, trained_run, tmp_path):
        out2 = tmp_path / "again"
        assert main([
            "train", "--regime", "alternating", "--epochs", "6", "--seed", "3",
            "--nodes", "6", "--density", "0.8", "--max-timesteps", "40",
            "--checkpoint-every", "3", "--out", str(out2),
        ]) == 0
        for name in ("training_log.csv", "manifest.json", "defender_final.npz",
                     "attacker_apt_final.npz"):
            assert (trained_run / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_csv_log_shape(self, trained_run):
        lines = (trained_run / "training_log.csv").read_text().strip().splitlines()
        assert lines[0] == ("epoch,regime,active_attacker,defender_reward,"
                            "attacker_reward,episode_length,winner")
        assert len(lines) == 7


class TestEvaluate:
    def test_cross_product_reports_and_matrix(self, trained_run, tmp_path, capsys):
        out = tmp_path / "eval"
        code = main([
            "evaluate",
            "--defender", f"alt={trained_run / 'defender_final.npz'}",
            "--attacker-ransomware", str(trained_run / "attacker_ransomware_final.npz"),
            "--attacker-apt", str(trained_run / "attacker_apt_final.npz"),
            "--episodes", "4", "--nodes", "6", "--density", "0.8",
            "--seed", "1", "--out", str(out),
        ])
        assert code == 0
        assert (out / "report_alt_ransomware.json").exists()
        assert (out / "report_alt_apt.json").exists()
        matrix = (out / "matrix.csv").read_text().splitlines()
        assert matrix[0] == "defender,attacker_type,mean,iqm,win_rate,n_episodes"
        assert len(matrix) == 3

    def test_single_episode_mean_equals_iqm(self, trained_run, tmp_path):
        out = tmp_path / "eval1"
        assert main([
            "evaluate",
            "--defender", f"alt={trained_run / 'defender_final.npz'}",
            "--attacker-apt", str(trained_run / "attacker_apt_final.npz"),
            "--episodes", "1", "--nodes", "6", "--density", "0.8",
            "--seed", "2", "--out", str(out),
        ]) == 0
        rep = json.loads((out / "report_alt_apt.json").read_text())
        assert rep["mean"] == rep["iqm"]

    def test_rerun_is_byte_identical(self, trained_run, tmp_path):
        outs = []
        for name in ("e1", "e2"):
            out = tmp_path / name
            assert main([
                "evaluate",
                "--defender", f"alt={trained_run / 'defender_final.npz'}",
                "--attacker-apt", str(trained_run / "attacker_apt_final.npz"),
                "--episodes", "3", "--nodes", "6", "--density", "0.8",
                "--seed", "4", "--out", str(out),
            ]) == 0
            outs.append(out)
        assert (outs[0] / "matrix.csv").read_bytes() == (outs[1] / "matrix.csv").read_bytes()
        assert ((outs[0] / "report_alt_apt.json").read_bytes()
                == (outs[1] / "report_alt_apt.json").read_bytes())

    def test_missing_checkpoint_exits_2_naming_it(self, tmp_path, capsys):
        code = main([
            "evaluate", "--defender", "missing.npz",
            "--attacker-apt", "also_missing.npz",
            "--out", str(tmp_path),
        ])
        assert code == 2
        assert "missing.npz" in capsys.readouterr().err

    def test_no_attackers_exits_2(self, trained_run, tmp_path):
        assert main([
            "evaluate", "--defender", str(trained_run / "defender_final.npz"),
            "--out", str(tmp_path),
        ]) == 2


class TestPlot:
    def test_training_curves_svg(self, trained_run, tmp_path):
        out = tmp_path / "plots"
        assert main(["plot", "--training-log", str(trained_run / "training_log.csv"),
                     "--smooth-order", "1", "--out", str(out)]) == 0
        svg = out / "training_log_curves.svg"
        assert svg.exists() and svg.read_bytes().startswith(b"<?xml")

    def test_svg_bytes_are_deterministic(self, trained_run, tmp_path):
        outs = []
        for name in ("p1", "p2"):
            out = tmp_path / name
            assert main(["plot", "--training-log", str(trained_run / "training_log.csv"),
                         "--out", str(out)]) == 0
            outs.append((out / "training_log_curves.svg").read_bytes())
        assert outs[0] == outs[1]

    def test_eval_bars_and_histograms(self, trained_run, tmp_path):
        eval_dir = tmp_path / "eval"
        assert main([
            "evaluate",
            "--defender", f"alt={trained_run / 'defender_final.npz'}",
            "--attacker-ransomware", str(trained_run / "attacker_ransomware_final.npz"),
            "--attacker-apt", str(trained_run / "attacker_apt_final.npz"),
            "--episodes", "3", "--nodes", "6", "--density", "0.8",
            "--seed", "1", "--out", str(eval_dir),
        ]) == 0
        plots = tmp_path / "plots"
        assert main([
            "plot", "--eval-csv", str(eval_dir / "matrix.csv"),
            "--reports", str(eval_dir / "report_alt_ransomware.json"),
            str(eval_dir / "report_alt_apt.json"),
            "--out", str(plots),
        ]) == 0
        for name in ("bars_mean.svg", "bars_iqm.svg", "bars_win_rate.svg",
                     "hist_ransomware.svg", "hist_apt.svg"):
            assert (plots / name).exists(), name

    def test_malformed_log_exits_2_with_line_number(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("epoch,regime,active_attacker,defender_reward,attacker_reward,"
                       "episode_length,winner\n0,alt,apt,not_a_number,0,1,timeout\n")
        assert main(["plot", "--training-log", str(bad), "--out", str(tmp_path)]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_nothing_to_plot_exits_2(self, tmp_path):
        assert main(["plot", "--out", str(tmp_path)]) == 2
