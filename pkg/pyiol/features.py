"""
Frozen random edRVFL feature cascade and ensemble aggregation.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, softmax

from .errors import ArityError, ConfigError, DomainError, ShapeError
from .settings import __snapshot_version__
from . import util


def relu(z):
    """Rectified linear unit."""
    return np.maximum(z, 0.0)


def swish(z):
    """Swish with unit slope, z * sigmoid(z)."""
    return z * expit(z)


ACTIVATIONS = {
    "sigmoid": expit,
    "relu": relu,
    "swish": swish,
    "tanh": np.tanh,
}

WEIGHT_INITS = ("standard_normal", "xavier", "kaiming")

TASKS = ("regression_mean", "regression_median",
         "classification_softmax_mean")


@dataclass(frozen=True)
class EdRvflConfig:
    """Architecture of the stacked random layers."""
    L: int = 1
    N: int = 16
    activation: str = "sigmoid"
    weight_init: str = "standard_normal"
    lambdas: tuple = (1.0,)
    seed: int = 0
    scale: float = 1.0
    rng: str = util.DEFAULT_RNG

    def __post_init__(self):
        if self.L < 1 or self.N < 1:
            raise ConfigError("Network needs L >= 1 and N >= 1.")

        if self.activation not in ACTIVATIONS:
            raise ConfigError("Unknown activation '%s'." % self.activation)

        if self.weight_init not in WEIGHT_INITS:
            raise ConfigError("Unknown weight_init '%s'." % self.weight_init)

        lambdas = np.atleast_1d(np.asarray(self.lambdas, dtype=float))
        if len(lambdas) == 1:
            lambdas = np.repeat(lambdas, self.L)

        if len(lambdas) != self.L:
            raise ConfigError("Got %s lambdas for %s layers."
                              % (len(lambdas), self.L))

        if (lambdas <= 0).any():
            raise DomainError("Every lambda must be > 0.")

        object.__setattr__(self, "lambdas", tuple(float(l) for l in lambdas))


@dataclass(frozen=True)
class RandomWeights:
    """Hidden weights W_1 (k x N) and W_l ((k+N) x N), never trained."""
    w1: np.ndarray
    wl: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "w1", util.frozen(self.w1))
        object.__setattr__(self, "wl", tuple(util.frozen(w) for w in self.wl))

        k, n = self.w1.shape
        for i, w in enumerate(self.wl):
            if w.shape != (k + n, n):
                raise ShapeError("Layer %s weights are %s, expected %s."
                                 % (i + 2, w.shape, (k + n, n)))

    @property
    def input_dim(self):
        """Raw feature width k."""
        return self.w1.shape[0]

    @property
    def layers(self):
        """All hidden matrices in cascade order."""
        return (self.w1,) + self.wl


def init_std(method, fan_in, fan_out):
    """Standard deviation of the normal draw for an init scheme."""
    if method == "xavier":
        return np.sqrt(2.0 / (fan_in + fan_out))

    if method == "kaiming":
        return np.sqrt(2.0 / fan_in)

    return 1.0


def init_random_weights(cfg, k):
    """Draw the hidden weights of every layer from one seeded generator.

    standard_normal draws N(0, 1); xavier uses std sqrt(2 / (fan_in +
    fan_out)) and kaiming std sqrt(2 / fan_in). All are multiplied by
    cfg.scale.
    """
    if k < 1:
        raise ConfigError("Input dimension must be >= 1.")

    rng = util.make_rng(cfg.seed, cfg.rng)
    shapes = [(k, cfg.N)] + [(k + cfg.N, cfg.N)] * (cfg.L - 1)
    layers = [rng.standard_normal(shape)
              * init_std(cfg.weight_init, *shape) * cfg.scale
              for shape in shapes]

    meta = {"seed": cfg.seed, "weight_init": cfg.weight_init,
            "activation": cfg.activation, "scale": cfg.scale, "rng": cfg.rng}
    return RandomWeights(layers[0], tuple(layers[1:]), meta)


@dataclass(frozen=True)
class LayerFeatures:
    """Per-layer design matrices D_l = [H_l | X]."""
    d: tuple

    def __len__(self):
        return len(self.d)

    def __getitem__(self, index):
        return self.d[index]


def extract_features(weights, cfg, x):
    """Run the cascade on a batch and return [H_l | x] for every layer."""
    x = np.asarray(x, dtype=float)
    g = ACTIVATIONS[cfg.activation]

    if x.ndim != 2:
        raise ShapeError("Batch must be a matrix, got %s dims." % x.ndim)

    layer_in = x
    d = []

    for l, w in enumerate(weights.layers, start=1):
        if layer_in.shape[1] != w.shape[0]:
            raise ShapeError("Layer %s expects %s input columns, got %s."
                             % (l, w.shape[0], layer_in.shape[1]))

        h = g(layer_in @ w)
        d.append(np.hstack((h, x)))
        layer_in = d[-1]

    return LayerFeatures(tuple(d))


class Network:
    """Config plus frozen weights, callable on batches."""

    def __init__(self, cfg, weights):
        self.cfg = cfg
        self.weights = weights

    @classmethod
    def build(cls, cfg, k):
        """Draw weights for input width k."""
        return cls(cfg, init_random_weights(cfg, k))

    @property
    def lambdas(self):
        return self.cfg.lambdas

    @property
    def n_layers(self):
        return self.cfg.L

    @property
    def feature_dim(self):
        """Width N + k of each D_l."""
        return self.cfg.N + self.weights.input_dim

    def featurize(self, x):
        return extract_features(self.weights, self.cfg, x)


class LinearMap:
    """Single learner reading the raw batch, D = X."""

    def __init__(self, lam, k):
        if lam <= 0:
            raise DomainError("lambda must be > 0, got %s." % lam)

        self.lambdas = (float(lam),)
        self.n_layers = 1
        self.feature_dim = k

    def featurize(self, x):
        x = np.asarray(x, dtype=float)

        if x.ndim != 2 or x.shape[1] != self.feature_dim:
            raise ShapeError("Layer 1 expects %s input columns, got %s."
                             % (self.feature_dim, x.shape))

        return LayerFeatures((x,))


def ensemble_predict(per_layer_preds, task="regression_mean"):
    """Aggregate sub-learner outputs into one prediction."""
    if not per_layer_preds:
        raise ArityError("No predictions to aggregate.")

    if task not in TASKS:
        raise ConfigError("Unknown ensemble task '%s'." % task)

    preds = np.stack([np.asarray(p, dtype=float) for p in per_layer_preds])

    if task == "regression_mean":
        return preds.mean(axis=0)

    if task == "regression_median":
        return np.median(preds, axis=0)

    return softmax(preds, axis=-1).mean(axis=0)


def classify(ensemble_output):
    """Per-row argmax, ties go to the lowest class index."""
    return np.argmax(np.asarray(ensemble_output), axis=1)


def save_weights(weights, export_file):
    """Write a weight snapshot as versioned JSON."""
    data = {
        "version": __snapshot_version__,
        "meta": weights.meta,
        "w1": util.encode_array(weights.w1),
        "wl": [util.encode_array(w) for w in weights.wl],
    }
    util.save_file_json(data, export_file)
    logging.info("Saved weights to %s.", export_file)


def load_weights(input_file):
    """Read a weight snapshot written by save_weights()."""
    data = util.read_file_json(input_file)

    if data.get("version") != __snapshot_version__:
        raise ConfigError("Unsupported snapshot version %r in '%s'."
                          % (data.get("version"), input_file))

    return RandomWeights(util.decode_array(data["w1"]),
                         tuple(util.decode_array(w) for w in data["wl"]),
                         data.get("meta", {}))
