import json

import numpy as np
import pytest

from pairrank import fit_bt, gh_nodes_weights, next_batch, utility_graph
from pairrank.bt import ComparisonMatrix
from pairrank.cli import main
from pairrank.matrix_io import read_matrix_csv
from pairrank.sampling import SamplerState


@pytest.fixture
def matrix_csv(tmp_path):
    path = tmp_path / "votes.csv"
    path.write_text("item_a,item_b,count_a_wins\nalpha,beta,3\nbeta,alpha,1\n")
    return path


@pytest.fixture
def five_item_csv(tmp_path):
    gen = np.random.Generator(np.random.PCG64(12))
    labels = ["a", "b", "c", "d", "e"]
    rows = ["item_a,item_b,count_a_wins"]
    for i in range(5):
        for j in range(5):
            if i != j:
                rows.append(f"{labels[i]},{labels[j]},{gen.integers(1, 6)}")
    path = tmp_path / "m.csv"
    path.write_text("\n".join(rows) + "\n")
    return path


class TestFitCommand:
    def test_two_item_closed_form(self, matrix_csv, capsys):
        assert main(["fit", str(matrix_csv), "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        delta = payload["scores"][0] - payload["scores"][1]
        assert delta == pytest.approx(np.log(3.0), abs=1e-6)

    def test_symmetric_matrix_gives_zero_scores(self, tmp_path, capsys):
        path = tmp_path / "sym.csv"
        path.write_text("a,b,2\nb,a,2\n")
        main(["fit", str(path), "--json"])
        payload = json.loads(capsys.readouterr().out)
        assert payload["scores"] == pytest.approx([0.0, 0.0], abs=1e-9)

    def test_json_matches_library(self, five_item_csv, capsys):
        main(["fit", str(five_item_csv), "--json"])
        payload = json.loads(capsys.readouterr().out)
        items, matrix = read_matrix_csv(five_item_csv)
        estimate = fit_bt(matrix)
        assert payload["items"] == items
        assert payload["scores"] == pytest.approx(list(estimate.scores), abs=1e-10)

    def test_missing_file_errors(self, tmp_path, capsys):
        code = main(["fit", str(tmp_path / "absent.csv")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_parse_error_reports_line(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,1\nbroken row\n")
        assert main(["fit", str(path)]) == 1
        assert "line 2" in capsys.readouterr().err


class TestNextCommand:
    def test_below_threshold_prints_one_pair(self, matrix_csv, capsys):
        assert main(["next", str(matrix_csv), "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        # 4 observed votes > threshold 1 for n=2: MST with a single edge
        assert len(payload["pairs"]) == 1

    def test_five_items_above_threshold_prints_tree(self, five_item_csv, capsys):
        main(["next", str(five_item_csv), "--json"])
        payload = json.loads(capsys.readouterr().out)
        assert payload["mode"] == "MST"
        assert len(payload["pairs"]) == 4

    def test_matches_library_next_batch(self, five_item_csv, capsys):
        main(["next", str(five_item_csv), "--json"])
        payload = json.loads(capsys.readouterr().out)
        items, matrix = read_matrix_csv(five_item_csv)
        matrix = ComparisonMatrix.from_counts(matrix.observed_counts(), prior_count=1)
        estimate = fit_bt(matrix)
        graph = utility_graph(estimate, gh_nodes_weights(30))
        batch = next_batch(graph, SamplerState(5, matrix.observed_total()))
        assert [tuple(p) for p in payload["pairs"]] == list(batch.pairs)


class TestSimulateCommand:
    def test_deterministic_outputs(self, tmp_path, capsys):
        args = ["simulate", "--n", "6", "--reps", "2", "--budget", "1",
                "--eval-points", "0.5,1", "--seed", "7",
                "--strategies", "hybrid-mst,random"]
        out1 = tmp_path / "run1"
        out2 = tmp_path / "run2"
        assert main(args + ["--out-dir", str(out1)]) == 0
        assert main(args + ["--out-dir", str(out2)]) == 0
        assert (out1 / "trajectories.csv").read_bytes() == (out2 / "trajectories.csv").read_bytes()
        capsys.readouterr()

    def test_strategy_blocks_in_output(self, tmp_path, capsys):
        main(["simulate", "--n", "5", "--reps", "2", "--budget", "1",
              "--eval-points", "1", "--seed", "3",
              "--strategies", "hybrid-mst,random", "--out-dir", str(tmp_path / "o")])
        out = capsys.readouterr().out
        assert "strategy: hybrid-mst" in out
        assert "strategy: random" in out

    def test_summary_json_contains_savings_when_fpc_included(self, tmp_path, capsys):
        main(["simulate", "--n", "5", "--reps", "2", "--budget", "2",
              "--eval-points", "0.5,1,2", "--seed", "3",
              "--strategies", "hybrid-mst,fpc", "--out-dir", str(tmp_path / "o")])
        capsys.readouterr()
        payload = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert "saving_budget" in payload
        assert "hybrid-mst" in payload["saving_budget"]

    def test_config_file_with_flag_overrides(self, tmp_path, capsys):
        config = {"n": 5, "error_rate": 0.0, "budget": 1, "strategies": ["random"],
                  "reps": 1, "seed": 1, "eval_points": [1], "quadrature_order": 10}
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(config))
        assert main(["simulate", "--config", str(config_path), "--reps", "2",
                     "--out-dir", str(tmp_path / "o")]) == 0
        capsys.readouterr()
        payload = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert payload["config"]["reps"] == 2
        assert payload["config"]["n"] == 5

    def test_rescaled_flag(self, tmp_path, capsys):
        assert main(["simulate", "--n", "5", "--reps", "2", "--budget", "1",
                     "--eval-points", "1", "--seed", "3", "--strategies", "random",
                     "--rescaled", "--out-dir", str(tmp_path / "o")]) == 0
        capsys.readouterr()

    def test_unknown_strategy_fails(self, tmp_path, capsys):
        assert main(["simulate", "--n", "5", "--strategies", "bogus",
                     "--out-dir", str(tmp_path / "o")]) == 1
        assert "error" in capsys.readouterr().err


class TestParser:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0

    def test_no_command_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 2
