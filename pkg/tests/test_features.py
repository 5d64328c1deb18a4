"""Test the random feature cascade."""
import unittest
import os

import numpy as np

from pyiol import features
from pyiol.errors import ArityError, ConfigError, DomainError, ShapeError


def make(L=3, N=16, k=8, activation="sigmoid", **kwargs):
    cfg = features.EdRvflConfig(L=L, N=N, activation=activation, **kwargs)
    return cfg, features.init_random_weights(cfg, k)


class TestConfig(unittest.TestCase):
    """Test network configuration."""

    def test_lambda_broadcast(self):
        """> A single lambda is shared by every layer."""
        cfg = features.EdRvflConfig(L=3, lambdas=0.5)
        self.assertEqual(cfg.lambdas, (0.5, 0.5, 0.5))

    def test_lambda_count(self):
        """> One lambda per layer or one in total."""
        with self.assertRaises(ConfigError):
            features.EdRvflConfig(L=3, lambdas=(1.0, 2.0))

    def test_lambda_positive(self):
        """> Lambdas must be positive."""
        with self.assertRaises(DomainError):
            features.EdRvflConfig(L=2, lambdas=(1.0, 0.0))

    def test_bad_enums(self):
        """> Unknown activation or init is rejected."""
        with self.assertRaises(ConfigError):
            features.EdRvflConfig(activation="gelu")
        with self.assertRaises(ConfigError):
            features.EdRvflConfig(weight_init="orthogonal")
        with self.assertRaises(ConfigError):
            features.EdRvflConfig(L=0)


class TestWeights(unittest.TestCase):
    """Test the random weights."""

    def test_shapes(self):
        """> k=8, N=16, L=3 weight shapes."""
        _, weights = make()
        self.assertEqual(weights.w1.shape, (8, 16))
        self.assertEqual([w.shape for w in weights.wl], [(24, 16)] * 2)

    def test_deterministic(self):
        """> Same seed, same weights."""
        _, a = make(seed=4)
        _, b = make(seed=4)
        _, c = make(seed=5)
        np.testing.assert_array_equal(a.w1, b.w1)
        np.testing.assert_array_equal(a.wl[1], b.wl[1])
        self.assertFalse(np.array_equal(a.w1, c.w1))
        self.assertEqual(a.w1.shape, c.w1.shape)

    def test_standard_normal_moments(self):
        """> 10^4 standard normal draws have mean ~0, std ~1."""
        _, weights = make(L=1, N=100, k=100)
        self.assertLess(abs(weights.w1.mean()), 0.05)
        self.assertLess(abs(weights.w1.std() - 1), 0.05)

    def test_xavier(self):
        """> Xavier uses std sqrt(2 / (fan_in + fan_out))."""
        _, weights = make(L=1, N=100, k=100, weight_init="xavier")
        self.assertAlmostEqual(weights.w1.std(), 0.1, delta=0.005)

    def test_kaiming_scale(self):
        """> Kaiming std sqrt(2 / fan_in) times the scale factor."""
        _, weights = make(L=1, N=100, k=200, weight_init="kaiming",
                          scale=2.0)
        self.assertAlmostEqual(weights.w1.std(), 0.2, delta=0.01)

    def test_frozen(self):
        """> Weights are read-only."""
        _, weights = make()
        with self.assertRaises(ValueError):
            weights.w1[0, 0] = 1.0

    def test_save_load(self):
        """> Weight snapshots round-trip."""
        tmp_file = "/tmp/iol_weights.json"
        _, weights = make(seed=9)
        features.save_weights(weights, tmp_file)
        loaded = features.load_weights(tmp_file)

        np.testing.assert_array_equal(loaded.w1, weights.w1)
        np.testing.assert_array_equal(loaded.wl[0], weights.wl[0])
        self.assertEqual(loaded.meta["seed"], 9)
        os.remove(tmp_file)


class TestExtract(unittest.TestCase):
    """Test feature extraction."""

    def test_shapes(self):
        """> b=4, k=8, N=16, L=3 gives three 4x24 matrices."""
        cfg, weights = make()
        out = features.extract_features(weights, cfg, np.ones((4, 8)))
        self.assertEqual([d.shape for d in out.d], [(4, 24)] * 3)

    def test_zero_relu(self):
        """> Zero input under relu gives all-zero features."""
        cfg, weights = make(activation="relu")
        out = features.extract_features(weights, cfg, np.zeros((4, 8)))
        for d in out.d:
            np.testing.assert_array_equal(d, np.zeros((4, 24)))

    def test_zero_sigmoid(self):
        """> Zero input under sigmoid gives H_1 = 0.5."""
        cfg, weights = make()
        out = features.extract_features(weights, cfg, np.zeros((4, 8)))
        np.testing.assert_array_equal(out[0][:, :16], np.full((4, 16), 0.5))

    def test_residual_input(self):
        """> The last k columns of every D_l are the raw batch."""
        cfg, weights = make(activation="swish")
        x = np.random.default_rng(0).standard_normal((5, 8))
        for d in features.extract_features(weights, cfg, x).d:
            np.testing.assert_array_equal(d[:, 16:], x)

    def test_cascade(self):
        """> Layer 2 reads [H_1 | x]."""
        cfg, weights = make(activation="tanh")
        x = np.random.default_rng(1).standard_normal((3, 8))
        out = features.extract_features(weights, cfg, x)
        expected = np.tanh(out[0] @ weights.wl[0])
        np.testing.assert_allclose(out[1][:, :16], expected)

    def test_pure(self):
        """> Repeated calls are bit-identical."""
        cfg, weights = make()
        x = np.random.default_rng(2).standard_normal((3, 8))
        a = features.extract_features(weights, cfg, x)
        b = features.extract_features(weights, cfg, x)
        for da, db in zip(a.d, b.d):
            np.testing.assert_array_equal(da, db)

    def test_shape_error(self):
        """> Wrong width names the layer."""
        cfg, weights = make()
        with self.assertRaises(ShapeError) as ctx:
            features.extract_features(weights, cfg, np.ones((2, 7)))
        self.assertIn("Layer 1", str(ctx.exception))

    def test_network(self):
        """> Network wraps weights and config."""
        net = features.Network.build(features.EdRvflConfig(L=2, N=5), 3)
        self.assertEqual(net.feature_dim, 8)
        self.assertEqual(net.n_layers, 2)
        self.assertEqual(len(net.featurize(np.ones((2, 3)))), 2)

    def test_linear_map(self):
        """> LinearMap features are the raw batch."""
        net = features.LinearMap(0.5, 3)
        x = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(net.featurize(x)[0], x)
        with self.assertRaises(DomainError):
            features.LinearMap(0, 3)


class TestEnsemble(unittest.TestCase):
    """Test ensemble aggregation."""

    def test_identical(self):
        """> Identical predictions aggregate to themselves."""
        pred = np.array([[0.2, 1.5], [3.0, -1.0]])
        for task in ("regression_mean", "regression_median"):
            out = features.ensemble_predict([pred] * 3, task)
            np.testing.assert_allclose(out, pred)

        out = features.ensemble_predict([pred] * 3,
                                        "classification_softmax_mean")
        single = features.ensemble_predict([pred],
                                           "classification_softmax_mean")
        np.testing.assert_allclose(out, single)

    def test_median(self):
        """> Median of {1, 2, 9} is 2."""
        preds = [np.array([[1.0]]), np.array([[2.0]]), np.array([[9.0]])]
        out = features.ensemble_predict(preds, "regression_median")
        self.assertEqual(out[0, 0], 2.0)

    def test_softmax_mean(self):
        """> Logits (2,0) and (0,2) average to (0.5, 0.5)."""
        preds = [np.array([[2.0, 0.0]]), np.array([[0.0, 2.0]])]
        out = features.ensemble_predict(preds, "classification_softmax_mean")
        np.testing.assert_allclose(out, [[0.5, 0.5]], atol=1e-12)

    def test_softmax_rows(self):
        """> Softmax-mean rows are probability vectors."""
        rng = np.random.default_rng(3)
        preds = [rng.standard_normal((6, 4)) * 5 for _ in range(3)]
        out = features.ensemble_predict(preds, "classification_softmax_mean")
        self.assertTrue((out >= 0).all())
        np.testing.assert_allclose(out.sum(axis=1), np.ones(6), atol=1e-12)

    def test_empty(self):
        """> No predictions is an arity error."""
        with self.assertRaises(ArityError):
            features.ensemble_predict([])

    def test_classify(self):
        """> Argmax decoding with lowest-index ties."""
        out = features.classify(np.array([[0.1, 0.7, 0.2], [0.5, 0.5, 0.0]]))
        np.testing.assert_array_equal(out, [1, 0])

    def test_classify_one_hot(self):
        """> One-hot rows decode to their labels."""
        labels = np.array([2, 0, 1, 1])
        np.testing.assert_array_equal(features.classify(np.eye(3)[labels]),
                                      labels)


if __name__ == "__main__":
    unittest.main()
