import json

import numpy as np
import pytest

from pglmc.core import Dataset, class_means, decision_scores, LinearModel
from pglmc.errors import DegenerateDirection, DegenerateMeans, MissingClass
from pglmc.train import (
    EMPTY_SUPPORT_FLAG,
    TrainConfig,
    config_with,
    load_model,
    margin_piling_fraction,
    model_from_dict,
    model_to_dict,
    save_model,
    train_pglmc,
    train_svm,
)


def random_dataset(rng, n_per_class=5, d=3, spread=1.0):
    x_plus = rng.standard_normal((n_per_class, d)) + spread
    x_minus = rng.standard_normal((n_per_class, d)) - spread
    features = np.vstack([x_plus, x_minus])
    labels = np.concatenate([np.ones(n_per_class), -np.ones(n_per_class)]).astype(int)
    return Dataset(features, labels)


class TestKnownSolutions:
    def test_opposing_unit_points(self):
        data = Dataset(np.array([[1.0], [-1.0]]), np.array([1, -1]))
        model = train_pglmc(data, TrainConfig(tol=1e-10))
        assert model.lam == pytest.approx(0.5, abs=1e-10)
        assert np.allclose(model.alpha, 0.0, atol=1e-10)
        assert model.w[0] == pytest.approx(1.0, abs=1e-10)
        assert model.b == pytest.approx(0.0, abs=1e-12)
        assert model.flags == (EMPTY_SUPPORT_FLAG,)

    def test_opposing_points_at_distance_two(self):
        data = Dataset(np.array([[2.0], [-2.0]]), np.array([1, -1]))
        model = train_pglmc(data, TrainConfig(tol=1e-10))
        assert model.lam == pytest.approx(0.125, abs=1e-10)
        assert model.w[0] == pytest.approx(0.5, abs=1e-10)
        assert model.b == pytest.approx(0.0, abs=1e-12)

    def test_svm_on_vertical_pair(self):
        data = Dataset(np.array([[0.0, 1.0], [0.0, -1.0]]), np.array([1, -1]))
        model = train_svm(data, TrainConfig(tol=1e-10))
        assert np.allclose(model.w, [0.0, 1.0], atol=1e-10)
        assert model.b == pytest.approx(0.0, abs=1e-10)
        assert np.allclose(model.alpha, [0.5, 0.5], atol=1e-10)
        assert list(model.support_indices) == [0, 1]
        assert model.lam == 0.0
        assert model.flags == ()


class TestTrainedModelInvariants:
    def test_population_gap_is_enforced(self):
        rng = np.random.default_rng(71)
        for _ in range(12):
            data = random_dataset(rng, n_per_class=int(rng.integers(3, 8)))
            config = TrainConfig(c0=float(rng.choice([0.5, 1.0, 10.0])), tol=1e-8)
            model = train_pglmc(data, config)
            m_plus, m_minus = class_means(data)
            gap = float((m_plus - m_minus) @ model.w)
            assert gap >= config.c_const - 1e-5
            assert model.lam >= 0.0
            assert np.all(model.alpha >= -1e-12)
            assert np.all(model.alpha <= config.c0 + 1e-12)

    def test_margin_samples_score_one(self):
        rng = np.random.default_rng(72)
        for train in (train_pglmc, train_svm):
            for _ in range(6):
                data = random_dataset(rng, n_per_class=6, spread=0.6)
                model = train(data, TrainConfig(tol=1e-10))
                if model.support_indices.size == 0:
                    continue
                sub = data.subset(model.support_indices)
                margins = sub.labels * decision_scores(model, sub)
                assert np.allclose(margins, 1.0, atol=1e-6)

    def test_frozen_population_reduces_to_svm(self):
        rng = np.random.default_rng(73)
        for _ in range(8):
            data = random_dataset(rng)
            config = TrainConfig(tol=1e-10)
            frozen = train_pglmc(data, config, freeze_population=True)
            svm = train_svm(data, config)
            assert frozen.lam == 0.0
            assert np.allclose(frozen.alpha, svm.alpha, atol=1e-10)
            assert np.allclose(frozen.w, svm.w, atol=1e-10)
            assert frozen.b == pytest.approx(svm.b, abs=1e-10)

    def test_training_is_deterministic(self):
        rng = np.random.default_rng(74)
        data = random_dataset(rng)
        first = train_pglmc(data)
        second = train_pglmc(data)
        assert np.array_equal(first.w, second.w)
        assert first.b == second.b
        assert np.array_equal(first.alpha, second.alpha)


class TestMarginPiling:
    def make_model(self):
        return LinearModel(
            w=np.array([1.0, 0.0]),
            b=0.0,
            alpha=np.zeros(3),
            lam=0.0,
            support_indices=np.array([], dtype=np.intp),
            c0=1.0,
            c_const=2.0,
            flags=(),
        )

    def test_counts_unit_margin_samples(self):
        data = Dataset(
            np.array([[1.0, 0.0], [2.0, 0.0], [-1.0, 0.0]]), np.array([1, 1, -1])
        )
        assert margin_piling_fraction(self.make_model(), data) == pytest.approx(2 / 3)

    def test_tolerance_widens_the_band(self):
        data = Dataset(
            np.array([[1.0, 0.0], [2.0, 0.0], [-1.0, 0.0]]), np.array([1, 1, -1])
        )
        assert margin_piling_fraction(self.make_model(), data, tolerance=1.5) == 1.0


class TestSerialization:
    def test_dict_round_trip_is_exact(self):
        rng = np.random.default_rng(75)
        model = train_pglmc(random_dataset(rng), TrainConfig(c0=0.7, c_const=3.0))
        clone = model_from_dict(model_to_dict(model))
        assert np.array_equal(clone.w, model.w)
        assert clone.b == model.b
        assert np.array_equal(clone.alpha, model.alpha)
        assert clone.lam == model.lam
        assert np.array_equal(clone.support_indices, model.support_indices)
        assert clone.c0 == model.c0
        assert clone.c_const == model.c_const
        assert clone.flags == model.flags

    def test_json_file_round_trip_is_exact(self, tmp_path):
        rng = np.random.default_rng(76)
        model = train_svm(random_dataset(rng))
        path = tmp_path / "model.json"
        save_model(model, path)
        clone = load_model(path)
        assert np.array_equal(clone.w, model.w)
        assert clone.b == model.b
        assert np.array_equal(clone.alpha, model.alpha)

    def test_saved_file_is_indented_json_with_newline(self, tmp_path):
        rng = np.random.default_rng(77)
        model = train_svm(random_dataset(rng))
        path = tmp_path / "model.json"
        save_model(model, path)
        text = path.read_text(encoding="utf-8")
        assert text.endswith("\n")
        assert json.loads(text)["schema_version"] == 1

    def test_unknown_schema_version_is_rejected(self):
        rng = np.random.default_rng(78)
        payload = model_to_dict(train_svm(random_dataset(rng)))
        payload["schema_version"] = 99
        with pytest.raises(ValueError, match="schema"):
            model_from_dict(payload)


class TestFailureModes:
    def test_zero_features_give_no_direction(self):
        data = Dataset(np.zeros((4, 2)), np.array([1, 1, -1, -1]))
        with pytest.raises(DegenerateDirection):
            train_svm(data)

    def test_zero_features_have_no_population_direction(self):
        data = Dataset(np.zeros((4, 2)), np.array([1, 1, -1, -1]))
        with pytest.raises(DegenerateMeans):
            train_pglmc(data)

    def test_single_class_data_is_rejected(self):
        data = Dataset(np.ones((3, 2)), np.array([1, 1, 1]))
        with pytest.raises(MissingClass):
            train_pglmc(data)
        with pytest.raises(MissingClass):
            train_svm(data)


class TestConfig:
    def test_field_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(c0=0.0)
        with pytest.raises(ValueError):
            TrainConfig(c_const=-1.0)
        with pytest.raises(ValueError):
            TrainConfig(tol=0.0)
        with pytest.raises(ValueError):
            TrainConfig(max_iter=0)
        with pytest.raises(ValueError):
            TrainConfig(support_threshold_rel=0.5)

    def test_config_with_replaces_fields(self):
        base = TrainConfig()
        changed = config_with(base, c0=10.0)
        assert changed.c0 == 10.0
        assert changed.c_const == base.c_const
        assert base.c0 == 1.0
