import numpy as np
import pytest

from renyiclf.cli import main

WORKED_CSV = "x1,y\n" + "".join(
    f"{x},{y}\n" for x, y in
    [("a", 1)] * 4 + [("a", 0)] + [("b", 1)] + [("b", 0)] * 4
)


@pytest.fixture
def worked_csv(csv_factory):
    return csv_factory("train.csv", WORKED_CSV)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_kv(out):
    pairs = {}
    for line in out.strip().splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            pairs[key] = value
    return pairs


class TestTrain:
    def test_worked_instance_output(self, capsys, worked_csv, tmp_path):
        model_path = tmp_path / "m.json"
        code, out, _ = run_cli(capsys, "train", "--data", worked_csv,
                               "--label", "y", "--out", str(model_path))
        assert code == 0
        kv = parse_kv(out)
        assert float(kv["gamma"]) == pytest.approx(0.16, abs=1e-12)
        assert float(kv["error_upper_bound"]) == pytest.approx(0.32, abs=1e-12)
        assert kv["separable"] == "true"
        assert float(kv["hgr_lower_bound"]) == pytest.approx(0.6, abs=1e-12)
        assert model_path.exists()

    def test_negative_ridge_usage_error(self, capsys, worked_csv):
        code, _, _ = run_cli(capsys, "train", "--data", worked_csv,
                             "--label", "y", "--ridge", "-1")
        assert code == 2

    def test_pairs_flag(self, capsys, csv_factory):
        path = csv_factory("two.csv", "a,b,y\n1,1,0\n1,2,1\n2,1,1\n2,2,0\n")
        code, out, _ = run_cli(capsys, "train", "--data", path, "--label", "y", "--pairs")
        assert code == 0
        assert parse_kv(out)["total_width"] == "4"  # one pair feature, 2*2 categories

    def test_missing_label_column_exit_3(self, capsys, worked_csv):
        code, _, err = run_cli(capsys, "train", "--data", worked_csv, "--label", "nope")
        assert code == 3
        assert "error:" in err

    def test_unknown_flag_exit_2(self, capsys, worked_csv):
        code, _, _ = run_cli(capsys, "train", "--data", worked_csv,
                             "--label", "y", "--bogus")
        assert code == 2


class TestPredictEvaluate:
    @pytest.fixture
    def model_path(self, capsys, worked_csv, tmp_path):
        path = tmp_path / "m.json"
        run_cli(capsys, "train", "--data", worked_csv, "--label", "y",
                "--out", str(path))
        return str(path)

    def test_predict_labels(self, capsys, model_path, csv_factory):
        data = csv_factory("test.csv", "x1\na\nb\na\n")
        code, out, _ = run_cli(capsys, "predict", "--model", model_path, "--data", data)
        assert code == 0
        assert out == "1\n0\n1\n"

    def test_predict_out_file(self, capsys, model_path, csv_factory, tmp_path):
        data = csv_factory("test.csv", "x1\na\nb\n")
        out = tmp_path / "preds.txt"
        code, stdout, _ = run_cli(capsys, "predict", "--model", model_path,
                                  "--data", data, "--out", str(out))
        assert code == 0
        assert stdout == ""
        assert out.read_text() == "1\n0\n"

    def test_predict_with_label_column_present(self, capsys, model_path, worked_csv):
        code, out, _ = run_cli(capsys, "predict", "--model", model_path,
                               "--data", worked_csv, "--label", "y")
        assert code == 0
        assert out.splitlines() == ["1"] * 5 + ["0"] * 5

    def test_evaluate_map(self, capsys, model_path, worked_csv):
        code, out, _ = run_cli(capsys, "evaluate", "--model", model_path,
                               "--data", worked_csv, "--label", "y")
        assert code == 0
        kv = parse_kv(out)
        assert float(kv["error_rate"]) == pytest.approx(0.2)

    def test_evaluate_analytic(self, capsys, model_path, worked_csv):
        code, out, _ = run_cli(capsys, "evaluate", "--model", model_path,
                               "--data", worked_csv, "--label", "y",
                               "--mode", "randomized-analytic")
        assert code == 0
        assert float(parse_kv(out)["error_rate"]) == pytest.approx(4 / 17, abs=1e-9)

    def test_strict_unseen_category_exit_3(self, capsys, model_path, csv_factory):
        data = csv_factory("unseen.csv", "x1\nc\n")
        code, _, err = run_cli(capsys, "predict", "--model", model_path,
                               "--data", data, "--strict")
        assert code == 3
        assert "x1" in err and "row 1" in err

    def test_permissive_unseen_category(self, capsys, model_path, csv_factory):
        data = csv_factory("unseen.csv", "x1\nc\n")
        code, out, _ = run_cli(capsys, "predict", "--model", model_path, "--data", data)
        assert code == 0
        assert out == "0\n"  # zero score, tie broken by the balanced prior to 0

    def test_sampled_reproducible(self, capsys, model_path, worked_csv):
        _, out_a, _ = run_cli(capsys, "evaluate", "--model", model_path,
                              "--data", worked_csv, "--label", "y",
                              "--mode", "randomized-sampled", "--seed", "42")
        _, out_b, _ = run_cli(capsys, "evaluate", "--model", model_path,
                              "--data", worked_csv, "--label", "y",
                              "--mode", "randomized-sampled", "--seed", "42")
        assert out_a == out_b


class TestSelect:
    def test_huge_lambda_selects_none(self, capsys, worked_csv):
        code, out, _ = run_cli(capsys, "select", "--data", worked_csv,
                               "--label", "y", "--lambda", "10")
        assert code == 0
        assert parse_kv(out)["selected"] == "(none)"

    def test_lambda_zero_usage_error(self, capsys, worked_csv):
        code, _, _ = run_cli(capsys, "select", "--data", worked_csv,
                             "--label", "y", "--lambda", "0")
        assert code == 2

    def test_path_sweep(self, capsys, csv_factory):
        rng = np.random.default_rng(0)
        lines = ["a,b,y"]
        for _ in range(200):
            a = rng.choice(["u", "v"])
            b = rng.choice(["p", "q"])
            y = a == "u" if rng.random() < 0.9 else a != "u"
            lines.append(f"{a},{b},{int(y)}")
        path = csv_factory("sweep.csv", "\n".join(lines) + "\n")
        code, out, _ = run_cli(capsys, "select", "--data", path, "--label", "y",
                               "--path", "1e-6:1:8")
        assert code == 0
        rows = out.strip().splitlines()
        assert len(rows) == 8
        # the informative feature a persists longest along the path
        selected = [line.split(" selected=")[1] for line in rows]
        assert selected[0].startswith("a")
        last_nonempty = [s for s in selected if s != "(none)"][-1]
        assert "a" in last_nonempty and "b" not in last_nonempty


class TestOracle:
    def test_estar_on_fixture(self, capsys, worked_joint, tmp_path):
        inst = tmp_path / "inst.txt"
        inst.write_text(worked_joint.dump())
        code, out, _ = run_cli(capsys, "oracle", "estar", "--instance", str(inst))
        assert code == 0
        assert float(parse_kv(out)["e_star"]) == pytest.approx(0.2, abs=1e-9)

    def test_theta_on_fixture(self, capsys, worked_joint, tmp_path):
        inst = tmp_path / "inst.txt"
        inst.write_text(worked_joint.dump())
        code, out, _ = run_cli(capsys, "oracle", "theta", "--instance", str(inst))
        assert code == 0
        assert float(parse_kv(out)["theta"]) == pytest.approx(0.16, abs=1e-7)

    def test_hgr_random_instance(self, capsys):
        code, out, _ = run_cli(capsys, "oracle", "hgr", "--random", "3,2,2,generic")
        assert code == 0
        kv = parse_kv(out)
        assert abs(float(kv["hgr_binary"]) - float(kv["hgr_bruteforce"])) <= 1e-8

    def test_worst_case_chain(self, capsys):
        code, out, _ = run_cli(capsys, "oracle", "worst-case", "--random", "5,2,2,generic")
        assert code == 0
        kv = parse_kv(out)
        assert float(kv["theta"]) <= float(kv["wce_renyi"]) + 1e-6
        assert float(kv["wce_renyi"]) <= 2 * float(kv["theta"]) + 1e-6
        assert float(kv["e_star"]) <= float(kv["wce_map"]) + 1e-6

    def test_verify_small(self, capsys):
        code, out, _ = run_cli(capsys, "oracle", "verify", "--trials", "5")
        assert code == 0
        assert "status=ok" in out and "FAIL" not in out

    def test_requires_exactly_one_source(self, capsys):
        code, _, _ = run_cli(capsys, "oracle", "estar")
        assert code == 2


class TestExperimentCommand:
    def test_small_scale_deterministic(self, capsys):
        args = ["experiment-synthetic", "--d", "60", "--n", "30", "--runs", "4",
                "--ridge", "5", "--seed", "9"]
        code, out_a, _ = run_cli(capsys, *args)
        assert code == 0
        code, out_b, _ = run_cli(capsys, *args)
        assert out_a == out_b
        kv = parse_kv(out_a)
        assert kv["runs"] == "4"
        assert 0.0 <= float(kv["mean_map_error"]) <= 1.0

    def test_bad_train_frac(self, capsys):
        code, _, _ = run_cli(capsys, "experiment-synthetic", "--train-frac", "1.5",
                             "--runs", "1", "--d", "5", "--n", "4")
        assert code == 2


class TestReproducibility:
    def test_train_output_byte_identical(self, capsys, worked_csv):
        _, out_a, _ = run_cli(capsys, "train", "--data", worked_csv, "--label", "y")
        _, out_b, _ = run_cli(capsys, "train", "--data", worked_csv, "--label", "y")
        assert out_a.encode() == out_b.encode()

    def test_verify_output_byte_identical(self, capsys):
        _, out_a, _ = run_cli(capsys, "oracle", "verify", "--trials", "3")
        _, out_b, _ = run_cli(capsys, "oracle", "verify", "--trials", "3")
        assert out_a.encode() == out_b.encode()
