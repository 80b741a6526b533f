import numpy as np
import pytest

import hybridfl as hf


def small_config(seed=3):
    c = hf.ExperimentConfig.preset("amlsim")
    c.seed = seed
    c.n_transactions = 1500
    c.accounts_per_bank = 60
    c.max_rounds = 3
    c.learning_rate = 5e-3
    c.embedding_dim = 4
    return c


@pytest.fixture(scope="module")
def data():
    return hf.prepare_data(small_config())


def test_metrics_examples():
    assert hf.auprc([0.9, 0.8, 0.3], [1, 0, 1]) == pytest.approx(5 / 6, abs=1e-12)
    assert hf.pr_curve([0.9, 0.8, 0.3], [1, 0, 1])[:2] == [(0.5, 1.0), (0.5, 0.5)]
    assert hf.prf_at_threshold([0.9, 0.7, 0.2], [1, 0, 1]) == pytest.approx((0.5, 0.5, 0.5))
    with pytest.raises(hf.UndefinedMetricError):
        hf.auprc([0.1, 0.2], [0, 0])
    with pytest.raises(hf.ShapeError):
        hf.auprc([0.1], [1, 0])


def test_losses():
    assert hf.bce_loss([0.5], [1]) == pytest.approx(np.log(2))
    assert hf.focal_loss([0.5], [1], 0.99, 2.0) == pytest.approx(0.99 * 0.25 * np.log(2))


def test_config_roundtrip():
    c = small_config()
    assert c.preset_name == "amlsim"
    again = hf.ExperimentConfig.parse(c.to_json())
    assert again.hash() == c.hash()
    assert hf.ExperimentConfig.preset("swift").n_banks == 10
    with pytest.raises(hf.ConfigError):
        hf.ExperimentConfig.parse('{"preset": "amlsim", "train": {"bogus": 1}}')


def test_prepared_data(data):
    assert data.n_transactions == 1500
    assert data.positives == 450
    assert len(data.bank_ids) == 2
    sizes = [len(data.split_ids(s)) for s in ("train", "validation", "test")]
    assert sum(sizes) == 1500
    assert set(data.labels("test")) <= {0, 1}


def test_train_three_modes(data):
    c = small_config()
    results = {m: hf.train(c, data, m) for m in ("hybrid", "central", "local")}
    for mode, r in results.items():
        assert len(r.history) == 3
        assert 1 <= r.best_round <= 3
        rep = hf.evaluate(r, data, "test")
        assert 0.0 < rep["auprc"] <= 1.0
        s = hf.score(r, data, "test")
        assert isinstance(s, np.ndarray) and s.shape == (len(data.split_ids("test")),)
        assert hf.auprc(s, data.labels("test")) == pytest.approx(rep["auprc"])
    assert results["hybrid"].history[0]["messages"] > 0
    assert results["local"].history[0]["messages"] == 0
    assert results["hybrid"].sync_events == 3


def test_same_seed_same_history(data):
    c = small_config()
    a = hf.train(c, data, "hybrid").history
    b = hf.train(c, data, "hybrid").history
    assert [h["train_loss"] for h in a] == [h["train_loss"] for h in b]
