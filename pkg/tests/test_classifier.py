import numpy as np
import pytest

import renyiclf as rc
from renyiclf.classifier import prediction_from_score
from renyiclf.errors import CorruptModel, FormatVersionMismatch, IndexOutOfAlphabet


@pytest.fixture
def worked_model(worked_dataset):
    return rc.train_model(worked_dataset)


class TestPredictConditional:
    def test_worked_instance(self, worked_model):
        pred = rc.predict_conditional(worked_model, (1,))
        assert pred.score == pytest.approx(0.3, abs=1e-12)
        assert pred.p1 == pytest.approx(0.8, abs=1e-12)
        assert pred.p0 == pytest.approx(0.2, abs=1e-12)
        assert pred.map_label == 1
        assert pred.prob_predict_0 == pytest.approx(0.04 / 0.68, abs=1e-10)

    def test_zero_coefficients(self, worked_dataset):
        model = rc.train_model(worked_dataset, ridge_lambda=1e12)
        pred = rc.predict_conditional(model, (1,))
        assert pred.p0 == pytest.approx(0.5, abs=1e-9)
        assert pred.prob_predict_0 == pytest.approx(0.5, abs=1e-9)

    def test_clipping_when_score_escapes(self, binary_schema):
        model = rc.RenyiModel(schema=binary_schema, z=np.array([0.7, -0.7]),
                              ridge_lambda=0.0, gamma=0.1, separable=False,
                              h_plus=0.7, h_minus=0.7, q0=0.5, train_n=1)
        pred = rc.predict_conditional(model, (1,))
        assert pred.p1 == 1.0
        assert pred.p0 == 0.0
        assert pred.prob_predict_0 == 0.0
        assert pred.p0 + pred.p1 == 1.0

    def test_strict_rejects_unseen(self, worked_model):
        with pytest.raises(IndexOutOfAlphabet):
            rc.predict_conditional(worked_model, (0,), strict=True)

    def test_permissive_unseen_scores_zero(self, worked_model):
        pred = rc.predict_conditional(worked_model, (0,), strict=False)
        assert pred.score == 0.0

    def test_out_of_range_always_rejected(self, worked_model):
        with pytest.raises(IndexOutOfAlphabet):
            rc.predict_conditional(worked_model, (3,), strict=False)


class TestDecideMap:
    def test_sign_rule(self, worked_model):
        assert rc.decide_map(worked_model, (1,)) == 1
        assert rc.decide_map(worked_model, (2,)) == 0

    def test_tie_break_prior(self):
        assert prediction_from_score(0.0, q0=0.7).map_label == 0
        assert prediction_from_score(0.0, q0=0.3).map_label == 1
        assert prediction_from_score(0.0, q0=0.5).map_label == 0

    def test_scale_invariance(self):
        # the sign rule and the squared-ratio weights only see the ratio
        rng = np.random.default_rng(4)
        for _ in range(100):
            s = float(rng.uniform(-0.49, 0.49))
            base = prediction_from_score(s, q0=0.5)
            c = float(rng.uniform(0.1, 5.0))
            p0, p1 = c * base.p0, c * base.p1
            assert (p0 ** 2 / (p0 ** 2 + p1 ** 2)) == pytest.approx(
                base.prob_predict_0, abs=1e-12)


class TestDecideRandomized:
    def test_degenerate_weight_always_zero(self, binary_schema):
        model = rc.RenyiModel(schema=binary_schema, z=np.array([-0.7, 0.7]),
                              ridge_lambda=0.0, gamma=0.1, separable=False,
                              h_plus=0.7, h_minus=0.7, q0=0.5, train_n=1)
        draws = {rc.decide_randomized(model, (1,), rng_seed=s, row_index=0)
                 for s in range(50)}
        assert draws == {0}

    def test_fair_coin_frequency(self, worked_dataset):
        model = rc.train_model(worked_dataset, ridge_lambda=1e12)
        n = 100_000
        zeros = sum(1 for i in range(n)
                    if rc.decide_randomized(model, (1,), rng_seed=123, row_index=i) == 0)
        assert 0.494 <= zeros / n <= 0.506

    def test_worked_frequency_band(self, worked_model):
        n = 100_000
        zeros = sum(1 for i in range(n)
                    if rc.decide_randomized(model=worked_model, row=(1,),
                                            rng_seed=9, row_index=i) == 0)
        assert 0.0566 <= zeros / n <= 0.0611

    def test_reproducible_per_row(self, worked_model):
        a = [rc.decide_randomized(worked_model, (1,), rng_seed=5, row_index=i)
             for i in range(200)]
        b = [rc.decide_randomized(worked_model, (1,), rng_seed=5, row_index=i)
             for i in range(200)]
        assert a == b
        c = [rc.decide_randomized(worked_model, (1,), rng_seed=6, row_index=i)
             for i in range(200)]
        assert a != c


class TestEvaluate:
    def test_perfect_model_map_zero(self):
        schema = rc.CategoricalSchema.from_cardinalities([2])
        rows = np.array([[1]] * 5 + [[2]] * 5)
        labels = np.array([1] * 5 + [0] * 5)
        data = rc.Dataset(schema=schema, rows=rows, labels=labels)
        model = rc.train_model(data)
        assert rc.evaluate(model, data, mode="map").error_rate == 0.0

    def test_zero_model_analytic_half(self, worked_dataset):
        model = rc.train_model(worked_dataset, ridge_lambda=1e14)
        res = rc.evaluate(model, worked_dataset, mode="randomized-analytic")
        assert res.error_rate == pytest.approx(0.5, abs=1e-9)

    def test_worked_analytic_error(self, worked_model, worked_dataset):
        res = rc.evaluate(worked_model, worked_dataset, mode="randomized-analytic")
        assert res.error_rate == pytest.approx(4.0 / 17.0, abs=1e-10)

    def test_sampled_reproducible(self, worked_model, worked_dataset):
        a = rc.evaluate(worked_model, worked_dataset, mode="randomized-sampled", seed=3)
        b = rc.evaluate(worked_model, worked_dataset, mode="randomized-sampled", seed=3)
        assert a == b

    def test_per_class_errors(self, worked_model, worked_dataset):
        res = rc.evaluate(worked_model, worked_dataset, mode="map")
        # the sign rule is right on 4/5 of each class in the worked data
        assert res.per_class == (pytest.approx(0.2), pytest.approx(0.2))
        assert res.error_rate == pytest.approx(0.2)


class TestErrorUpperBound:
    def test_worked_value(self, worked_model):
        assert worked_model.error_upper_bound() == pytest.approx(0.32, abs=1e-12)

    def test_independent_is_half(self, binary_schema):
        p = rc.JointDistribution(schema=binary_schema, p=np.full(4, 0.25))
        marg = rc.from_joint(p)
        sol = rc.solve_population(marg)
        assert 2.0 * sol.gamma == pytest.approx(0.5)

    def test_bound_dominates_oracle_error(self, worked_model, worked_joint):
        cons = rc.build_constraints(rc.from_joint(worked_joint))
        wce = rc.worst_case_error(cons, rc.renyi_rule_of(worked_joint))
        assert wce <= worked_model.error_upper_bound() + 1e-12


class TestModelIo:
    def test_round_trip(self, worked_model, tmp_path):
        path = tmp_path / "model.json"
        rc.save_model(worked_model, path)
        loaded = rc.load_model(path)
        assert loaded.schema == worked_model.schema
        np.testing.assert_array_equal(loaded.z, worked_model.z)
        for attr in ("ridge_lambda", "gamma", "separable", "h_plus", "h_minus",
                     "q0", "train_n", "smoothing_alpha", "clip_epsilon"):
            assert getattr(loaded, attr) == getattr(worked_model, attr), attr

    def test_version_gate(self, worked_model, tmp_path):
        path = tmp_path / "model.json"
        rc.save_model(worked_model, path)
        text = path.read_text().replace('"version": "1"', '"version": "0"')
        path.write_text(text)
        with pytest.raises(FormatVersionMismatch):
            rc.load_model(path)

    def test_truncated_file(self, worked_model, tmp_path):
        path = tmp_path / "model.json"
        rc.save_model(worked_model, path)
        path.write_text(path.read_text()[: 40])
        with pytest.raises(CorruptModel):
            rc.load_model(path)
