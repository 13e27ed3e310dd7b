import json

import numpy as np
import pytest

from trustsel.cli import main
from trustsel.core import BinaryTrustMatrix, BudgetConfig, ModelOutputs, SelectionPlan
from trustsel.errors import InputError, ParseError
from trustsel.io import (
    load_binary,
    load_config,
    load_outputs,
    load_plan,
    read_matrix_csv,
    save_binary,
    save_outputs,
    save_plan,
    write_matrix_csv,
)
from trustsel.pipeline import EXIT_ERROR, EXIT_FAILSAFE, EXIT_OK, run_pipeline


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestCsv:
    def test_small_file(self, tmp_path):
        p = write(tmp_path / "o.csv", "model_id,t1,t2,t3\na,1,2,3\nb,4,5,6.5\n")
        out = load_outputs(p)
        assert out.model_ids == ("a", "b")
        assert out.values.tolist() == [[1, 2, 3], [4, 5, 6.5]]

    def test_round_trip_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        vals = rng.normal(size=(4, 30)) * 10.0 ** rng.integers(-12, 12, size=(4, 30))
        save_outputs(tmp_path / "x.csv", ModelOutputs(vals, ("a", "b", "c", "d")))
        back = load_outputs(tmp_path / "x.csv")
        assert np.array_equal(back.values, vals)
        assert back.model_ids == ("a", "b", "c", "d")

    def test_binary_round_trip(self, tmp_path):
        A = BinaryTrustMatrix(np.array([[1, 0, 1], [0, 0, 1]], dtype=np.int8))
        save_binary(tmp_path / "b.csv", A, ("x", "y"))
        assert (tmp_path / "b.csv").read_text().splitlines()[1] == "x,1,0,1"
        ids, back = load_binary(tmp_path / "b.csv")
        assert ids == ("x", "y") and np.array_equal(back.values, A.values)

    def test_nan_cell(self, tmp_path):
        p = write(tmp_path / "o.csv", "model_id,t1,t2\na,1,2\nb,NaN,3\n")
        with pytest.raises(ParseError) as exc:
            load_outputs(p)
        assert exc.value.line == 3
        assert "t1" in str(exc.value)

    def test_non_numeric_cell(self, tmp_path):
        p = write(tmp_path / "o.csv", "model_id,t1,t2\na,1,x\n")
        with pytest.raises(ParseError, match="t2"):
            load_outputs(p)

    def test_ragged_row(self, tmp_path):
        p = write(tmp_path / "o.csv", "model_id,t1,t2\na,1,2\nb,3\n")
        with pytest.raises(ParseError) as exc:
            load_outputs(p)
        assert exc.value.line == 3

    def test_bad_header(self, tmp_path):
        with pytest.raises(ParseError):
            load_outputs(write(tmp_path / "o.csv", "id,t1\na,1\n"))

    def test_binary_rejects_fraction(self, tmp_path):
        p = write(tmp_path / "b.csv", "model_id,t1,t2\na,1,0.5\nb,0,1\n")
        with pytest.raises(ParseError, match="t2"):
            load_binary(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            read_matrix_csv(tmp_path / "nope.csv")

    def test_plan_round_trip(self, tmp_path):
        A = BinaryTrustMatrix(np.array([[1, 1, 0, 0], [0, 0, 1, 1]], dtype=np.int8))
        plan = SelectionPlan.from_assignment([0, 0, 1, 1], A)
        save_plan(tmp_path / "p.json", plan, ("a", "b"), "oracle")
        doc = json.loads((tmp_path / "p.json").read_text())
        assert doc["schema_version"] == 1 and doc["kind"] == "plan" and doc["models"] == ["a", "a", "b", "b"]
        back = load_plan(tmp_path / "p.json", A)
        assert back.assignment.tolist() == [0, 0, 1, 1] and back.trust_score == 4

    def test_config_aliases(self, tmp_path):
        p = write(tmp_path / "c.json", json.dumps({"budget": 3, "rate": 2, "lambda": 1.1, "solver": "oracle"}))
        assert load_config(p) == {"B": 3, "R": 2, "lam": 1.1, "solver": "oracle"}


def all_one_row_outputs():
    # model 0 sits at the centre of every slot, so it is never excluded
    vals = np.array([[0.0] * 12, [1.0] * 12, [-1.0] * 12, [50.0] * 6 + [-50.0] * 6])
    return ModelOutputs(vals, ("center", "up", "down", "wild"))


class TestPipeline:
    def test_all_one_row_zero_gaps(self, tmp_path):
        outputs = all_one_row_outputs()
        report = run_pipeline(outputs, BudgetConfig(B=2, R=3), out_dir=tmp_path)
        assert report.scores["splice"] == report.scores["fixing"] == report.scores["oracle"] == 12
        assert report.scores["lp_bound"] == pytest.approx(12)
        assert report.gaps["fixing_vs_oracle_pct"] == 0.0
        assert report.gaps["fixing_vs_lp_pct"] == pytest.approx(0.0, abs=1e-9)
        assert report.exit_code == EXIT_OK

    def test_report_rederivable_from_artifacts(self, tmp_path):
        from trustsel.attack import InstanceSpec, generate_instance

        inst = generate_instance(InstanceSpec(M=5, T=40, C=1, seed=3))
        config = BudgetConfig(B=3, R=4)
        report = run_pipeline(inst.outputs, config, out_dir=tmp_path, truth=inst.ground_truth)
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["schema_version"] == 1 and doc["kind"] == "report"
        _, A = load_binary(tmp_path / "binary.csv")
        for name in ("splice", "fixing", "oracle"):
            plan = load_plan(tmp_path / f"plan_{name}.json", A)
            assert plan.trust_score == doc["scores"][name]
            assert plan.switch_count == doc["switches"][name]
        s = doc["scores"]
        assert s["splice"] <= s["fixing"] <= s["oracle"] <= s["lp_bound"] + 1e-6
        assert doc["gaps"]["fixing_vs_lp_pct"] >= -1e-9
        assert set(doc["rmse"]["models"]) == set(inst.outputs.model_ids)
        assert report.as_dict()["scores"] == doc["scores"]

    def test_unknown_solver(self):
        with pytest.raises(ValueError):
            run_pipeline(all_one_row_outputs(), BudgetConfig(B=1, R=2), solvers=("magic",))


@pytest.fixture
def failsafe_csv(tmp_path):
    # slots 1 and 3 have two far-apart models: lambda 0.5 excludes both
    text = "model_id,t1,t2,t3,t4,t5,t6\na,1,10,1,10,1,1\nb,1,12,1,12,1,1\n"
    return write(tmp_path / "fs.csv", text)


class TestCli:
    def test_failsafe_exit_code(self, failsafe_csv, tmp_path, capsys):
        rc = main(["report", str(failsafe_csv), "-o", str(tmp_path / "run"), "--lambda", "0.5", "-B", "1", "-R", "2"])
        assert rc == EXIT_FAILSAFE
        doc = json.loads((tmp_path / "run" / "report.json").read_text())
        assert doc["failsafe_slots"] == [1, 3]

    def test_select_failsafe(self, failsafe_csv, tmp_path):
        out = tmp_path / "p.json"
        rc = main(["select", str(failsafe_csv), "--from-outputs", "--lambda", "0.5", "-B", "1", "-R", "2", "-o", str(out)])
        assert rc == EXIT_FAILSAFE
        assert json.loads(out.read_text())["failsafe_slots"] == [1, 3]

    def test_binarize_stdout(self, failsafe_csv, capsys):
        assert main(["binarize", str(failsafe_csv), "--lambda", "0.5"]) == EXIT_FAILSAFE
        lines = capsys.readouterr().out.splitlines()
        assert lines[1] == "a,1,0,1,0,1,1"

    def test_gen_then_report(self, tmp_path):
        assert main(["gen", "-o", str(tmp_path / "g"), "--seed", "4", "-T", "48"]) == EXIT_OK
        rc = main(["report", str(tmp_path / "g" / "outputs.csv"), "-o", str(tmp_path / "r"), "--truth", str(tmp_path / "g" / "truth.csv")])
        assert rc in (EXIT_OK, EXIT_FAILSAFE)
        doc = json.loads((tmp_path / "r" / "report.json").read_text())
        assert doc["rmse"] is not None and doc["config"]["B"] == 7 and doc["config"]["R"] == 4

    def test_config_file_then_flags(self, tmp_path):
        assert main(["gen", "-o", str(tmp_path / "g"), "--seed", "1", "-T", "40"]) == EXIT_OK
        cfg = write(tmp_path / "c.json", json.dumps({"budget": 2, "rate": 5, "solver": "splice"}))
        out = tmp_path / "p.json"
        args = ["select", str(tmp_path / "g" / "outputs.csv"), "--from-outputs", "--config", str(cfg), "-o", str(out)]
        main(args)
        doc = json.loads(out.read_text())
        assert doc["solver"] == "splice" and doc["config"]["B"] == 2 and doc["config"]["R"] == 5
        main(args + ["-B", "3", "--solver", "oracle"])
        doc = json.loads(out.read_text())
        assert doc["solver"] == "oracle" and doc["config"]["B"] == 3 and doc["config"]["R"] == 5

    def test_lp_bound_and_dump(self, tmp_path):
        A = BinaryTrustMatrix(np.array([[1, 1, 0, 0, 1, 1], [0, 0, 1, 1, 0, 0]], dtype=np.int8))
        save_binary(tmp_path / "b.csv", A, ("a", "b"))
        out = tmp_path / "lp.json"
        rc = main(["select", str(tmp_path / "b.csv"), "--solver", "lp-bound", "-B", "1", "-R", "2", "--lp-out", str(tmp_path / "m.lp"), "-o", str(out)])
        assert rc == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["kind"] == "lp-bound" and doc["objective"] == pytest.approx(5.0)
        assert (tmp_path / "m.lp").read_text().startswith("\\")

    def test_trust_and_attack(self, tmp_path, capsys):
        p = write(tmp_path / "o.csv", "model_id,t1,t2\na,0,5\nb,4,5\n")
        assert main(["trust", str(p)]) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[1] == "a,0.5,10"
        q = write(tmp_path / "s.csv", "model_id," + ",".join(f"t{k}" for k in range(1, 11)) + "\nm,1,2,3,4,5,6,7,8,9,10\n")
        assert main(["attack", str(q), "--model", "m", "--x", "20"]) == EXIT_OK
        assert capsys.readouterr().out.splitlines()[1] == "m,1,8,3,4,5,6,7,2,9,10"

    def test_errors_exit_one(self, tmp_path):
        bad = write(tmp_path / "bad.csv", "model_id,t1\na,nan\n")
        assert main(["binarize", str(bad)]) == EXIT_ERROR
        assert main(["select", str(tmp_path / "missing.csv")]) == EXIT_ERROR
        ok = write(tmp_path / "ok.csv", "model_id,t1,t2\na,1,0\nb,0,1\n")
        assert main(["select", str(ok), "-B", "4", "-R", "4"]) == EXIT_ERROR
        assert main(["attack", str(ok), "--model", "zz"]) == EXIT_ERROR

    def test_usage_error_is_not_failsafe(self):
        with pytest.raises(SystemExit) as exc:
            main(["select"])
        assert exc.value.code == EXIT_ERROR

    def test_bench_small(self, tmp_path, capsys):
        out = tmp_path / "bench.json"
        assert main(["bench", "-n", "4", "-T", "32", "--budget-max", "2", "-o", str(out)]) == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["summary"]["count"] == 4
        assert "single-digit" in capsys.readouterr().out
