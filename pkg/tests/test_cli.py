import pytest

from grale.cli import main
from grale.loaders import dump_generic, load_generic
from grale.rules import load_rules


@pytest.fixture
def data_dir(toy, tmp_path):
    d = tmp_path / "data"
    dump_generic(toy, d)
    return d


def run(*argv):
    return main([str(a) for a in argv])


class TestMine:
    def test_mine_to_file(self, toy, data_dir, tmp_path, capsys):
        out = tmp_path / "rules.tsv"
        code = run("mine", "--data-dir", data_dir, "--format", "generic",
                   "--ms", "0.5", "--mt", "0.5", "--sc", "0.5", "--tc", "0.5",
                   "-o", out)
        assert code == 0
        assert "mined 9 rules" in capsys.readouterr().err
        rs = load_rules(out, expected_fingerprint=toy.fingerprint())
        assert len(rs) == 9

    def test_mine_to_stdout(self, data_dir, capsys):
        code = run("mine", "--data-dir", data_dir, "--format", "generic",
                   "--ms", "0.5", "--mt", "0.5", "--sc", "0.5", "--tc", "0.5")
        captured = capsys.readouterr()
        assert code == 0
        assert captured.out.startswith("#grale-rules v1\n")
        assert " => " in captured.out

    def test_missing_data_dir(self, capsys, monkeypatch):
        monkeypatch.delenv("GRALE_DATA_DIR", raising=False)
        code = run("mine", "--ms", "0.5", "--mt", "0.5")
        assert code == 1
        assert "grale: error:" in capsys.readouterr().err

    def test_data_dir_from_environment(self, data_dir, capsys, monkeypatch):
        monkeypatch.setenv("GRALE_DATA_DIR", str(data_dir))
        code = run("mine", "--format", "generic", "--ms", "0.5", "--mt", "0.5")
        assert code == 0
        assert capsys.readouterr().out.startswith("#grale-rules v1\n")

    def test_bad_threshold_value(self, data_dir, capsys):
        code = run("mine", "--data-dir", data_dir, "--format", "generic",
                   "--ms", "0.0", "--mt", "0.5")
        assert code == 1
        assert "ms must be in" in capsys.readouterr().err

    def test_nonexistent_data_dir(self, tmp_path, capsys):
        code = run("mine", "--data-dir", tmp_path / "nope", "--format", "generic",
                   "--ms", "0.5", "--mt", "0.5")
        assert code == 1
        assert "missing data file" in capsys.readouterr().err


class TestEvaluate:
    def test_random_scenario(self, data_dir, capsys):
        code = run("evaluate", "--data-dir", data_dir, "--format", "generic",
                   "--scenario", "random", "--reps", "3", "--seed", "5")
        captured = capsys.readouterr()
        assert code == 0
        lines = captured.out.splitlines()
        assert lines[0] == "# grale evaluate"
        assert lines[2].startswith("# scenario=random trainFraction=0.6 reps=3 seed=5")
        assert lines[3] == "rep,scenario,ms,mt,sc,tc,ruleCount,M,N,accuracy,trainAccuracy"
        assert len([l for l in lines if not l.startswith("#")]) == 1 + 3

    def test_rule_scenario_needs_supports(self, data_dir, capsys):
        code = run("evaluate", "--data-dir", data_dir, "--format", "generic",
                   "--scenario", "train-on-train")
        assert code == 1
        assert "--ms and --mt" in capsys.readouterr().err

    def test_train_on_train_to_file(self, data_dir, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = run("evaluate", "--data-dir", data_dir, "--format", "generic",
                   "--scenario", "train-on-train", "--ms", "0.5", "--mt", "0.5",
                   "--sc", "0.5", "--tc", "0.5", "--reps", "2", "-o", out)
        assert code == 0
        text = out.read_text()
        assert "0,train-on-train,0.500000," in text
        assert "# excluded,test=0,train=0" in text
        assert capsys.readouterr().out == ""

    def test_unknown_scenario(self, data_dir, capsys):
        code = run("evaluate", "--data-dir", data_dir, "--format", "generic",
                   "--scenario", "holdout")
        assert code == 1
        assert "unknown scenario" in capsys.readouterr().err

    def test_both_new_runs_on_tiny_data(self, data_dir, capsys):
        code = run("evaluate", "--data-dir", data_dir, "--format", "generic",
                   "--scenario", "both-new", "--ms", "0.5", "--mt", "0.5",
                   "--sc", "0.5", "--tc", "0.0", "--reps", "2", "--workers", "2")
        assert code == 0
        out = capsys.readouterr().out
        assert "0,both-new," in out


class TestSweep:
    def test_sweep_to_file(self, data_dir, tmp_path):
        out = tmp_path / "sweep.csv"
        code = run("sweep", "--data-dir", data_dir, "--format", "generic",
                   "--grid", "0.5,0.8", "--scenario", "train-on-train",
                   "--sc", "0.5", "--tc", "0.5", "--reps", "1", "-o", out)
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "# grale sweep"
        assert lines[3].startswith("ms_mt,mean_test_accuracy,")
        assert lines[4].startswith("0.500000,")
        assert lines[5].startswith("0.800000,")

    def test_sweep_rejects_random(self, data_dir, capsys):
        code = run("sweep", "--data-dir", data_dir, "--format", "generic",
                   "--grid", "0.5", "--scenario", "random")
        assert code == 1
        assert "rule-based" in capsys.readouterr().err

    def test_sweep_rejects_bad_grid(self, data_dir, capsys):
        code = run("sweep", "--data-dir", data_dir, "--format", "generic",
                   "--grid", "0.5,abc", "--scenario", "train-on-train")
        assert code == 1
        assert "bad --grid" in capsys.readouterr().err


class TestRecommend:
    def test_recommend_round_trip(self, data_dir, tmp_path, capsys):
        rules = tmp_path / "rules.tsv"
        assert run("mine", "--data-dir", data_dir, "--format", "generic",
                   "--ms", "0.5", "--mt", "0.5", "--sc", "0.5", "--tc", "0.5",
                   "-o", rules) == 0
        capsys.readouterr()
        code = run("recommend", "--data-dir", data_dir, "--format", "generic",
                   "--rules", rules)
        captured = capsys.readouterr()
        assert code == 0
        assert captured.out.startswith("userId,itemId,ruleIndices\n")
        # the universal rule gives every user all four items
        assert "16 recommendations for 4 users" in captured.err

    def test_recommend_warns_on_foreign_rules(self, toy, data_dir, tmp_path, capsys):
        rules = tmp_path / "rules.tsv"
        assert run("mine", "--data-dir", data_dir, "--format", "generic",
                   "--ms", "0.5", "--mt", "0.5", "--sc", "0.5", "--tc", "0.5",
                   "-o", rules) == 0
        shrunk = tmp_path / "shrunk"
        dump_generic(toy.subset(user_indices=[0, 1, 2]), shrunk)
        with pytest.warns(UserWarning, match="may not transfer"):
            code = run("recommend", "--data-dir", shrunk, "--format", "generic",
                       "--rules", rules)
        assert code == 0


class TestInspectGranules:
    def test_item_side(self, data_dir, capsys):
        code = run("inspect-granules", "--data-dir", data_dir, "--format", "generic",
                   "--side", "item", "--min-support", "0.5")
        captured = capsys.readouterr()
        assert code == 0
        assert captured.out == (
            "*\t1.000000\t4\n"
            "year=1980s\t0.500000\t2\n"
            "year=1990s\t0.500000\t2\n"
        )

    def test_user_side_to_file(self, data_dir, tmp_path):
        out = tmp_path / "granules.tsv"
        code = run("inspect-granules", "--data-dir", data_dir, "--format", "generic",
                   "--side", "user", "--min-support", "0.5", "-o", out)
        assert code == 0
        assert len(out.read_text().splitlines()) == 4

    def test_bad_min_support(self, data_dir, capsys):
        code = run("inspect-granules", "--data-dir", data_dir, "--format", "generic",
                   "--side", "user", "--min-support", "0")
        assert code == 1
        assert "min_support" in capsys.readouterr().err


class TestDumpMmer:
    def test_round_trip(self, toy, data_dir, tmp_path, capsys):
        out = tmp_path / "copy"
        code = run("dump-mmer", "--data-dir", data_dir, "--format", "generic",
                   "-o", out)
        assert code == 0
        assert "wrote users.csv" in capsys.readouterr().err
        assert load_generic(out).equivalent_to(toy)

    def test_requires_output_directory(self, data_dir, capsys):
        code = run("dump-mmer", "--data-dir", data_dir, "--format", "generic")
        assert code == 1
        assert "needs -o" in capsys.readouterr().err


class TestArgparseBehavior:
    def test_unknown_subcommand_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run("transmogrify")
        assert exc.value.code == 2

    def test_missing_required_flag_exits_2(self, data_dir, capsys):
        with pytest.raises(SystemExit) as exc:
            run("sweep", "--data-dir", data_dir)  # --grid is required
        assert exc.value.code == 2

    def test_bad_format_choice_exits_2(self, data_dir):
        with pytest.raises(SystemExit) as exc:
            run("mine", "--data-dir", data_dir, "--format", "parquet",
                "--ms", "0.5", "--mt", "0.5")
        assert exc.value.code == 2
