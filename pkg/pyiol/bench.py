"""
Config-driven experiments: simulations, dataset baselines and ablations.
"""
import copy
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError
from .features import EdRvflConfig, LinearMap, Network, classify, \
                      ensemble_predict
from .iol import Hook, STYLES, run_iol
from .metrics import metric_accuracy, metric_per_class_accuracy, metric_rmse
from .regret import BoundParams, RegretTracker, forward_bound, ridge_bound
from .settings import DATA_DIR, __version__
from . import stream as streams
from . import util


TASKS = ("synthetic_single", "synthetic_batch", "regression_csv",
         "classification_csv")
METRICS = ("rmse", "accuracy", "per_class_accuracy")
LABEL_METRICS = ("accuracy", "per_class_accuracy")
AXES = ("N", "L", "lambda", "b", "normalization")

DEFAULT_NETWORK = {
    "kind": "edrvfl",
    "L": 1,
    "N": 16,
    "activation": "sigmoid",
    "weight_init": "standard_normal",
    "lambda": 1.0,
    "seed": 0,
    "scale": 1.0,
}

DEFAULT_NORMALIZATION = {
    "method": "zscore",
    "stats_source": "global",
    "prefix_batches": 1,
    "include_targets": False,
}

DEFAULT_FOLDS = {
    "n_folds": 5,
    "holdout_fraction": 0.0,
    "seed": 0,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment."""
    name: str
    task: str
    network: dict
    stream: dict
    normalization: dict = field(default_factory=dict)
    folds: dict = field(default_factory=dict)
    styles: tuple = STYLES
    reps: int = 1
    seed: int = 0
    rng: str = "PCG64"
    lookahead: str = "repeat_last"
    metrics: tuple = ()
    aggregate: str = ""
    clip: bool = True
    max_batch_rows: int = None
    workers: int = 1

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError("Unknown task '%s'." % self.task)

        styles = tuple(self.styles)
        if not styles or any(s not in STYLES for s in styles):
            raise ConfigError("styles must be a non-empty subset of %s."
                              % (STYLES,))

        if self.reps < 1:
            raise ConfigError("reps must be >= 1.")

        metrics = tuple(self.metrics) or (
            ("accuracy",) if self.classification else ("rmse",))
        if any(m not in METRICS for m in metrics):
            raise ConfigError("Unknown metric in %s." % (metrics,))

        labels = [m for m in metrics if m in LABEL_METRICS]
        if labels and not self.classification:
            raise ConfigError("%s only apply to classification_csv."
                              % (LABEL_METRICS,))

        aggregate = self.aggregate or ("classification_softmax_mean"
                                       if self.classification
                                       else "regression_mean")

        object.__setattr__(self, "styles", styles)
        object.__setattr__(self, "metrics", metrics)
        object.__setattr__(self, "aggregate", aggregate)
        object.__setattr__(self, "network",
                           {**DEFAULT_NETWORK, **self.network})
        object.__setattr__(self, "normalization",
                           {**DEFAULT_NORMALIZATION, **self.normalization})
        object.__setattr__(self, "folds", {**DEFAULT_FOLDS, **self.folds})

        if self.synthetic:
            streams.SyntheticConfig(**self.synthetic_args(0))
            if self.network["kind"] == "linear":
                LinearMap(self.lambdas(), 1)
            else:
                self.network_config(0)
        else:
            self.validate_csv()

    @property
    def synthetic(self):
        return self.task.startswith("synthetic")

    @property
    def classification(self):
        return self.task == "classification_csv"

    @property
    def data_path(self):
        """CSV path, relative ones resolved against the data directory."""
        return os.path.join(DATA_DIR, os.path.expanduser(self.stream["path"]))

    def validate_csv(self):
        for key in ("path", "target_columns", "batch_fraction"):
            if key not in self.stream:
                raise ConfigError("stream.%s is required for %s."
                                  % (key, self.task))

        if not os.path.isfile(self.data_path):
            raise ConfigError("Dataset '%s' not found, see "
                              "scripts/fetch_datasets.py." % self.data_path)

        self.network_config(0)

    def horizon(self):
        """Number of batches, known up front for synthetic streams only."""
        return self.stream.get("T", 1000) if self.synthetic else None

    def lambdas(self):
        """Regularization factor(s) of the network section."""
        net = self.network

        if "log2_inv_lambda" in net:
            return float(2.0 ** -net["log2_inv_lambda"])

        lam = net["lambda"]
        if lam == "1/T":
            if not self.synthetic:
                raise ConfigError("lambda '1/T' needs a synthetic horizon.")
            return 1.0 / self.horizon()

        return tuple(lam) if isinstance(lam, list) else float(lam)

    def network_config(self, rep):
        """EdRvflConfig for a repetition."""
        net = self.network
        return EdRvflConfig(L=net["L"], N=net["N"],
                            activation=net["activation"],
                            weight_init=net["weight_init"],
                            lambdas=self.lambdas(), seed=net["seed"] + rep,
                            scale=net["scale"], rng=self.rng)

    def synthetic_args(self, rep):
        """SyntheticConfig keyword arguments for a repetition."""
        keys = ("T", "b", "k", "oracle_mean", "oracle_std", "noise_factor",
                "noise_mode")
        args = {key: self.stream[key] for key in keys if key in self.stream}

        if self.task == "synthetic_single":
            args["b"] = 1

        return {**args, "seed": self.seed + rep, "rng": self.rng}

    @classmethod
    def from_dict(cls, data):
        """Build a config from a parsed JSON tree."""
        data = dict(data)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}

        if unknown:
            raise ConfigError("Unknown config keys: %s."
                              % ", ".join(sorted(unknown)))

        for key in ("name", "task", "network", "stream"):
            if key not in data:
                raise ConfigError("Config is missing '%s'." % key)

        try:
            return cls(**data)
        except TypeError as err:
            raise ConfigError("Bad config: %s" % err) from None

    def to_dict(self):
        data = asdict(self)
        data["styles"] = list(self.styles)
        data["metrics"] = list(self.metrics)
        return data

    def with_value(self, path, value):
        """Copy with one nested key replaced, e.g. ("network", "N")."""
        data = copy.deepcopy(self.to_dict())
        section, key = path

        if section is None:
            data[key] = value
        else:
            data[section][key] = value

        return ExperimentConfig.from_dict(data)

    def run_id(self):
        """Short content hash of the config."""
        raw = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(raw).hexdigest()[:12]


@dataclass
class RunRecord:
    """Series of one (style, repetition) pair on a shared time axis."""
    style: str
    rep: int
    series: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    step_seconds: list = field(default_factory=list)


@dataclass
class ExperimentReport:
    """All runs of an experiment."""
    run_id: str
    config: dict
    records: list = field(default_factory=list)
    version: str = __version__

    def styles(self):
        return sorted({r.style for r in self.records},
                      key=lambda s: STYLES.index(s))

    def select(self, style):
        return [r for r in self.records if r.style == style]

    def aggregate(self, style):
        """Mean and std across repetitions of every series of a style."""
        records = self.select(style)
        names = sorted({name for r in records for name in r.series})
        out = {}

        for name in names:
            stack = np.vstack([r.series[name] for r in records
                               if name in r.series])
            with np.errstate(invalid="ignore"):
                out[name] = (nan_stat(np.nanmean, stack),
                             nan_stat(np.nanstd, stack))

        return out

    def scalar(self, style, name):
        """Per-repetition values of one scalar."""
        return np.array([r.scalars[name] for r in self.select(style)])

    def final(self, style, name):
        """Mean over repetitions of a series' last value."""
        return float(np.mean([r.series[name][-1] for r in self.select(style)]))

    def below(self, style, other, name):
        """Share of repetitions where `style` ends under `other` on a scalar.

        Repetitions pair up by index, both styles saw the same stream.
        """
        return float(np.mean(self.scalar(style, name)
                             < self.scalar(other, name)))


def nan_stat(func, stack):
    """Column statistic that leaves all-NaN columns as NaN silently."""
    out = np.full(stack.shape[1], np.nan)
    seen = ~np.isnan(stack).all(axis=0)
    out[seen] = func(stack[:, seen], axis=0)
    return out


def box_stats(values):
    """min / q1 / median / q3 / max / mean of per-layer values."""
    q = np.percentile(values, [0, 25, 50, 75, 100])
    return dict(zip(("min", "q1", "median", "q3", "max"), q),
                mean=float(np.mean(values)))


class Evaluator(Hook):
    """Record train-batch and held-out metrics along a run.

    Test metrics are taken at t=0 and after every update; train-batch
    metrics use the learner before it sees the batch. Per-class accuracy
    is a held-out series only.
    """

    def __init__(self, metrics, aggregate, test=None, n_classes=None,
                 oracle=None):
        self.metrics = [m for m in metrics if m != "per_class_accuracy"]
        self.per_class = "per_class_accuracy" in metrics
        self.aggregate = aggregate
        self.test = test
        self.n_classes = n_classes
        self.oracle = oracle
        self.series = {}
        self.step_seconds = []
        self.max_resident = 0

    def append(self, name, value):
        self.series.setdefault(name, []).append(value)

    def score(self, metric, pred, truth):
        if metric == "rmse":
            return metric_rmse(pred, truth)

        return metric_accuracy(classify(pred), classify(truth))

    def start(self, learner, network, stream):
        if self.test is not None:
            self.test_features = network.featurize(self.test[0])
            self.test_labels = classify(self.test[1])

        for metric in self.metrics:
            self.append("train_" + metric, np.nan)
        self.evaluate(learner)

    def step(self, event):
        pred = event.before.predict(event.features)
        for metric in self.metrics:
            self.append("train_" + metric,
                        self.score(metric, pred, event.batch.y))
        self.step_seconds.append(event.seconds)
        self.max_resident = max(self.max_resident, len(event.resident))
        self.evaluate(event.after)

    def evaluate(self, learner):
        if self.oracle is not None:
            beta = learner.states[0].beta
            self.append("oracle_distance",
                        float(np.sum((beta - self.oracle) ** 2)))

        if self.test is None:
            return

        layer_preds = learner.predict_layers(self.test_features)
        ensemble = ensemble_predict(layer_preds, self.aggregate)
        truth = self.test[1]

        for metric in self.metrics:
            self.append("test_" + metric, self.score(metric, ensemble, truth))

            layers = [self.score(metric, p, truth) for p in layer_preds]
            for stat, value in box_stats(layers).items():
                self.append("layer_%s_%s" % (metric, stat), value)

        if self.per_class:
            per_class = metric_per_class_accuracy(classify(ensemble),
                                                  self.test_labels,
                                                  self.n_classes)
            for c, value in enumerate(per_class):
                self.append("class_accuracy_%02d" % c, value)

    def finish(self, learner):
        for metric in self.metrics:
            name = "test_" + metric
            if name in self.series:
                values = np.asarray(self.series[name])
                self.series[name + "_cummean"] = \
                    list(np.cumsum(values) / np.arange(1, len(values) + 1))


def ledger_series(ledger):
    """Step-indexed ledger series on the state axis (NaN at 0)."""
    return {name: np.concatenate(([np.nan], values))
            for name, values in ledger.series().items()}


def bound_series(ledger, k, style):
    """Regret bound evaluated on the measured prefix at every step."""
    values = [np.nan]

    for t in range(len(ledger)):
        # Zero-valued prefixes make the bound degenerate.
        if ledger.y_m[t] <= 0 or ledger.d_m[t] <= 0:
            values.append(0.0)
            continue

        p = BoundParams(ledger.y_m[t], ledger.d_m[t],
                        max(ledger.batch_sizes[:t + 1]), 0, k, t + 1,
                        ledger.lam)
        values.append(ridge_bound(p) if style == "ridge"
                      else forward_bound(p)[0])

    return np.array(values)


def build_synthetic(cfg, rep):
    """Synthetic stream, oracle weights and the single linear learner."""
    stream, oracle = streams.generate_synthetic_stream(
        streams.SyntheticConfig(**cfg.synthetic_args(rep)))

    if cfg.network["kind"] == "linear":
        network = LinearMap(cfg.lambdas(), stream.feature_dim)
    else:
        network = Network.build(cfg.network_config(rep), stream.feature_dim)

    return stream, oracle, network


def build_csv(cfg, rep):
    """Training stream, normalized held-out rows and network for a rep."""
    stream_cfg = cfg.stream
    task = "classification" if cfg.classification else "regression"
    x, y, meta = streams.read_csv_table(
        cfg.data_path, list(stream_cfg["target_columns"]), task)

    folds = streams.partition_folds(len(x), cfg.folds["n_folds"],
                                    cfg.folds["holdout_fraction"],
                                    cfg.folds["seed"], cfg.rng)
    fold = folds[rep % len(folds)]
    train = fold.train

    if stream_cfg.get("shuffle", True):
        order = util.make_rng(cfg.seed + rep, cfg.rng).permutation(
            len(train))
        train = train[order]
    else:
        train = np.sort(train)

    stream = streams.chunk_rows(x[train], y[train],
                                stream_cfg["batch_fraction"], meta)
    stream = streams.split_batches(stream, cfg.max_batch_rows)

    norm = cfg.normalization
    stream = streams.normalize(stream, norm["method"], norm["stats_source"],
                               norm["prefix_batches"],
                               False if cfg.classification
                               else norm["include_targets"])

    stats = stream.meta["normalization"]
    test = (streams.apply_stats(x[fold.test], stats, "x"),
            streams.apply_stats(y[fold.test], stats, "y"))

    network = Network.build(cfg.network_config(rep), stream.feature_dim)
    digest = streams.rows_digest(x[train], y[train])
    return stream, test, network, digest


def build_stream(cfg, rep):
    """Training stream a repetition sees, as it enters run_iol."""
    if cfg.synthetic:
        return build_synthetic(cfg, rep)[0]

    return build_csv(cfg, rep)[0]


def run_rep(cfg, style, rep):
    """One repetition of one style."""
    record = RunRecord(style, rep)
    hooks = []

    if cfg.synthetic:
        stream, oracle, network = build_synthetic(cfg, rep)
        linear = isinstance(network, LinearMap)
        evaluator = Evaluator(("rmse",), cfg.aggregate,
                              oracle=oracle.reshape(-1, 1) if linear else None)
        hooks.append(evaluator)

        if linear:
            tracker = RegretTracker(oracle=oracle, clip=cfg.clip)
            hooks.append(tracker)

        record.meta["rows_digest"] = stream.digest()

    else:
        stream, test, network, digest = build_csv(cfg, rep)
        evaluator = Evaluator(cfg.metrics, cfg.aggregate, test,
                              stream.target_dim)
        hooks.append(evaluator)
        record.meta["rows_digest"] = digest

    trajectory = run_iol(network, stream, style, hooks, task=cfg.aggregate,
                         lookahead=cfg.lookahead, lookahead_seed=cfg.seed + rep,
                         keep="final")

    record.series = {name: np.asarray(values, dtype=float)
                     for name, values in evaluator.series.items()}
    record.step_seconds = evaluator.step_seconds
    record.scalars["max_resident_batches"] = evaluator.max_resident
    record.scalars["steps"] = trajectory[-1].t

    if cfg.synthetic and linear:
        ledger = tracker.ledger
        record.series.update(ledger_series(ledger))
        record.series["cr_bound"] = bound_series(ledger, stream.feature_dim,
                                                 style)
        record.scalars["final_oracle_distance"] = \
            record.series["oracle_distance"][-1]
        record.scalars["final_cr"] = ledger.cr[-1]
        record.scalars["final_bound"] = record.series["cr_bound"][-1]

    for name in ("test_rmse", "test_accuracy"):
        if name in record.series:
            record.scalars["final_" + name] = record.series[name][-1]

    logging.info("%s rep %s (%s): %s", cfg.name, rep, style,
                 {k: round(v, 4) for k, v in record.scalars.items()
                  if k.startswith("final_")})
    return record


def run_experiment(cfg):
    """Run every style and repetition of a config."""
    jobs = [(style, rep) for style in cfg.styles for rep in range(cfg.reps)]
    logging.info("Running %s: %s job(s), %s worker(s).",
                 cfg.name, len(jobs), cfg.workers)

    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            records = list(pool.map(run_rep, [cfg] * len(jobs),
                                    *zip(*jobs)))
    else:
        records = [run_rep(cfg, style, rep) for style, rep in jobs]

    return ExperimentReport(cfg.run_id(), cfg.to_dict(), records)


def simulate(cfg):
    """Run a synthetic experiment and log the oracle distances."""
    if not cfg.synthetic:
        raise ConfigError("simulate needs a synthetic task, got '%s'."
                          % cfg.task)

    report = run_experiment(cfg)

    for style in report.styles():
        if "final_oracle_distance" in report.select(style)[0].scalars:
            dist = report.scalar(style, "final_oracle_distance")
            logging.info("%s: mean |beta_final - beta_o|^2 = %.4f (std %.4f)",
                         style, dist.mean(), dist.std())

    if len(report.styles()) == 2 and "final_cr" in report.records[0].scalars:
        for name in ("final_oracle_distance", "final_cr"):
            logging.info("forward below ridge on %s in %.1f%% of reps.", name,
                         100 * report.below("forward", "ridge", name))

    return report


def axis_path(cfg, axis):
    """Config key an ablation axis varies."""
    if axis not in AXES:
        raise ConfigError("Unknown ablation axis '%s'." % axis)

    if axis == "lambda":
        return ("network", "lambda")

    if axis == "b":
        return ("stream", "b" if cfg.synthetic else "batch_fraction")

    if axis == "normalization":
        return ("normalization", "method")

    return ("network", axis)


def ablation_sweep(base, axis, values):
    """One report per axis value, everything else (seeds included) fixed."""
    path = axis_path(base, axis)
    reports = []

    for value in values:
        cfg = base.with_value(path, value)

        if axis == "lambda":
            # Explicit lambdas replace the preset's log scale.
            data = cfg.to_dict()
            data["network"].pop("log2_inv_lambda", None)
            cfg = ExperimentConfig.from_dict(data)

        logging.info("Ablation %s=%s.", axis, value)
        reports.append(run_experiment(cfg))

    return reports
