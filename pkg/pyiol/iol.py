"""
Incremental online learning recursions (ridge and forward) and the
closed-form offline experts they are checked against.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from .errors import ConditioningError, ConfigError, DomainError, \
                    ShapeError, UsageError
from .features import ensemble_predict
from .settings import RCOND_WARN, __snapshot_version__
from . import util


STYLES = ("ridge", "forward")
LOOKAHEADS = ("repeat_last", "random_seen", "none")


@dataclass(frozen=True)
class LearnerState:
    """Readout weights and matrix learning rate of one sub-learner."""
    beta: np.ndarray
    eta: np.ndarray
    t: int
    style: str
    beta0: np.ndarray
    lam: float

    def __post_init__(self):
        for name in ("beta", "eta", "beta0"):
            object.__setattr__(self, name, util.frozen(getattr(self, name)))

    def predict(self, d):
        return np.asarray(d) @ self.beta


@dataclass(frozen=True)
class EnsembleLearner:
    """Cluster of per-layer learners sharing one time index."""
    states: tuple
    style: str
    task: str = "regression_mean"

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))

        if len({s.t for s in self.states}) > 1:
            raise UsageError("Layer states are out of step.")

    @property
    def t(self):
        return self.states[0].t

    def predict_layers(self, features):
        """Per-layer predictions D_l . beta_l."""
        return [state.predict(d) for state, d in zip(self.states, features)]

    def predict(self, features):
        return ensemble_predict(self.predict_layers(features), self.task)


def init_learner(lam, feature_dim, target_dim, style="ridge", beta0=None):
    """Start a learner from beta0 (zeros by default) with eta = I / lambda."""
    if not lam > 0:
        raise DomainError("lambda must be > 0, got %s." % lam)

    if style not in STYLES:
        raise ConfigError("Unknown style '%s'." % style)

    if beta0 is None:
        beta0 = np.zeros((feature_dim, target_dim))

    beta0 = np.asarray(beta0, dtype=float)
    if beta0.shape != (feature_dim, target_dim):
        raise ShapeError("beta0 is %s, expected %s."
                         % (beta0.shape, (feature_dim, target_dim)))

    return LearnerState(beta0, np.eye(feature_dim) / lam, 0, style,
                        beta0, float(lam))


def smw_rate_update(eta, d):
    """Return (eta^-1 + d^T d)^-1 through a b x b Cholesky solve."""
    eta = np.asarray(eta, dtype=float)
    d = np.atleast_2d(np.asarray(d, dtype=float))

    if d.shape[1] != eta.shape[0]:
        raise ShapeError("Features have %s columns, learning rate is %s."
                         % (d.shape[1], eta.shape))

    ed = eta @ d.T
    inner = np.eye(d.shape[0]) + d @ ed

    try:
        factor = linalg.cho_factor(inner)
    except linalg.LinAlgError:
        raise ConditioningError("Inner %sx%s system is not positive "
                                "definite." % inner.shape) from None

    rcond, _ = lapack.dpocon(factor[0], np.linalg.norm(inner, 1),
                             uplo="L" if factor[1] else "U")
    logging.debug("SMW inner rcond %.3e", rcond)

    if rcond < RCOND_WARN:
        logging.warning("SMW inner matrix is ill-conditioned "
                        "(rcond %.3e).", rcond)

    new = eta - ed @ linalg.cho_solve(factor, ed.T)
    return (new + new.T) / 2


def check_batch(state, d, y=None):
    """Validate batch shapes against a learner."""
    d = np.atleast_2d(np.asarray(d, dtype=float))

    if d.shape[1] != state.beta.shape[0]:
        raise ShapeError("Features have %s columns, learner expects %s."
                         % (d.shape[1], state.beta.shape[0]))

    if y is None:
        return d, None

    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y.reshape(-1, 1)

    if y.shape != (d.shape[0], state.beta.shape[1]):
        raise ShapeError("Targets are %s, expected %s."
                         % (y.shape, (d.shape[0], state.beta.shape[1])))

    return d, y


def ridge_step(state, d_t, y_t):
    """One ridge update, absorbing batch t into eta then correcting beta."""
    if state.style != "ridge":
        raise UsageError("ridge_step on a %s learner." % state.style)

    d_t, y_t = check_batch(state, d_t, y_t)
    eta = smw_rate_update(state.eta, d_t)
    beta = state.beta - eta @ (d_t.T @ (d_t @ state.beta - y_t))

    return replace(state, beta=beta, eta=eta, t=state.t + 1)


def prime_lookahead(state, d_first):
    """Absorb the first batch's features into a forward learner's eta."""
    if state.style != "forward":
        raise UsageError("Only forward learners look ahead.")

    d_first, _ = check_batch(state, d_first)
    return replace(state, eta=smw_rate_update(state.eta, d_first))


def forward_step(state, d_t, y_t, d_next):
    """One forward update with the next batch's features as lookahead."""
    if state.style != "forward":
        raise UsageError("forward_step on a %s learner." % state.style)

    d_t, y_t = check_batch(state, d_t, y_t)
    d_next, _ = check_batch(state, d_next)

    eta = smw_rate_update(state.eta, d_next)
    beta = state.beta - eta @ (d_next.T @ (d_next @ state.beta) - d_t.T @ y_t)

    if state.beta0.any():
        # Zero when d_next equals d_t.
        shift = d_next.T @ (d_next @ state.beta0) - d_t.T @ (d_t @ state.beta0)
        beta = beta + eta @ shift

    return replace(state, beta=beta, eta=eta, t=state.t + 1)


def ridge_primal(d, r, lam):
    """(D^T D + lambda I)^-1 D^T R."""
    gram = d.T @ d + lam * np.eye(d.shape[1])
    return linalg.solve(gram, d.T @ r, assume_a="pos")


def ridge_dual(d, r, lam):
    """D^T (D D^T + lambda I)^-1 R."""
    gram = d @ d.T + lam * np.eye(d.shape[0])
    return d.T @ linalg.solve(gram, r, assume_a="pos")


def offline_ridge_solve(d_stack, y_stack, lam, beta0=None, form="auto"):
    """Closed-form minimizer of the regularized stacked least squares."""
    if not lam > 0:
        raise DomainError("lambda must be > 0, got %s." % lam)

    d = np.atleast_2d(np.asarray(d_stack, dtype=float))
    y = np.asarray(y_stack, dtype=float)
    if y.ndim == 1:
        y = y.reshape(-1, 1)

    if d.shape[0] != y.shape[0]:
        raise ShapeError("D has %s rows, Y has %s." % (d.shape[0], y.shape[0]))

    if beta0 is None:
        beta0 = np.zeros((d.shape[1], y.shape[1]))

    r = y - d @ beta0

    if form == "auto":
        form = "dual" if d.shape[0] < d.shape[1] else "primal"

    if form == "primal":
        return beta0 + ridge_primal(d, r, lam)

    if form == "dual":
        return beta0 + ridge_dual(d, r, lam)

    raise ConfigError("Unknown solve form '%s'." % form)


def offline_forward_solve(d_stack, y_stack, d_next, lam, beta0=None):
    """Minimizer of the ridge objective plus the lookahead penalty
    1/2 |d_next (beta - beta0)|^2."""
    if not lam > 0:
        raise DomainError("lambda must be > 0, got %s." % lam)

    d = np.atleast_2d(np.asarray(d_stack, dtype=float))
    d_next = np.atleast_2d(np.asarray(d_next, dtype=float))
    y = np.asarray(y_stack, dtype=float)
    if y.ndim == 1:
        y = y.reshape(-1, 1)

    if beta0 is None:
        beta0 = np.zeros((d.shape[1], y.shape[1]))

    hessian = lam * np.eye(d.shape[1]) + d.T @ d + d_next.T @ d_next
    return beta0 + linalg.solve(hessian, d.T @ (y - d @ beta0),
                                assume_a="pos")


@dataclass(frozen=True)
class StepEvent:
    """What a hook sees after each update."""
    t: int
    batch: object
    features: object
    next_features: object
    before: EnsembleLearner
    after: EnsembleLearner
    seconds: float
    resident: tuple


class Hook:
    """Observer of a run_iol trajectory."""

    def start(self, learner, network, stream):
        """Called once with the initial learner."""

    def step(self, event):
        """Called after every update."""

    def finish(self, learner):
        """Called with the final learner."""


def init_ensemble(network, target_dim, style, task="regression_mean",
                  beta0=None):
    """One learner per layer, all at t = 0."""
    states = [init_learner(lam, network.feature_dim, target_dim, style, beta0)
              for lam in network.lambdas]
    return EnsembleLearner(states, style, task)


def step_layers(pool, func, states, *per_layer):
    """Apply a step to every layer, in a thread pool when given."""
    args = list(zip(states, *per_layer))

    if pool is None:
        return [func(*arg) for arg in args]

    return list(pool.map(lambda arg: func(*arg), args))


def run_iol(network, stream, style="ridge", hooks=(), task="regression_mean",
            beta0=None, lookahead="repeat_last", lookahead_seed=0,
            keep="all", workers=1):
    """Feed a stream through an ensemble learner, one batch at a time.

    Returns the learner snapshots after 0, 1, ... batches (keep="all") or
    only the final one (keep="final"). Forward learners see the features of
    batch t+1 while stepping on batch t; the final step uses a surrogate
    chosen by `lookahead`.
    """
    if style not in STYLES:
        raise ConfigError("Unknown style '%s'." % style)

    if lookahead not in LOOKAHEADS:
        raise ConfigError("Unknown lookahead policy '%s'." % lookahead)

    if keep not in ("all", "final"):
        raise ConfigError("keep must be 'all' or 'final'.")

    if len(stream) == 0:
        raise ConfigError("Empty stream.")

    learner = init_ensemble(network, stream.target_dim, style, task, beta0)
    features = network.featurize(stream[0].x)

    if style == "forward":
        learner = replace(learner, states=[prime_lookahead(s, d) for s, d
                                           in zip(learner.states, features)])

    for hook in hooks:
        hook.start(learner, network, stream)

    trajectory = [learner]
    rng = util.make_rng(lookahead_seed)
    pool = ThreadPoolExecutor(workers) if workers > 1 else None

    try:
        for t, batch in enumerate(stream):
            resident = (t,)
            next_features = None
            started = time.perf_counter()

            if style == "ridge":
                states = step_layers(pool, ridge_step, learner.states,
                                     features, [batch.y] * network.n_layers)

            else:
                if t + 1 < len(stream):
                    source = t + 1
                elif lookahead == "repeat_last":
                    source = t
                elif lookahead == "random_seen":
                    source = int(rng.integers(0, t + 1))
                else:
                    logging.warning("Skipping final forward step at t=%s.", t)
                    break

                next_features = features if source == t else \
                    network.featurize(stream[source].x)
                resident = tuple(sorted({t, source}))

                states = step_layers(pool, forward_step, learner.states,
                                     features, [batch.y] * network.n_layers,
                                     next_features)

            seconds = time.perf_counter() - started
            before, learner = learner, replace(learner, states=states)
            logging.debug("Step %s took %.4fs.", t, seconds)

            event = StepEvent(t, batch, features, next_features, before,
                              learner, seconds, resident)
            for hook in hooks:
                hook.step(event)

            if keep == "all":
                trajectory.append(learner)

            if next_features is not None:
                features = next_features
            elif t + 1 < len(stream):
                features = network.featurize(stream[t + 1].x)

    finally:
        if pool is not None:
            pool.shutdown()

    for hook in hooks:
        hook.finish(learner)

    return trajectory if keep == "all" else [learner]


def save_snapshot(learner, export_file):
    """Write a learner snapshot (row-major little-endian float64)."""
    data = {
        "version": __snapshot_version__,
        "style": learner.style,
        "task": learner.task,
        "t": learner.t,
        "layers": [{"lam": s.lam,
                    "beta": util.encode_array(s.beta),
                    "eta": util.encode_array(s.eta),
                    "beta0": util.encode_array(s.beta0)}
                   for s in learner.states],
    }
    util.save_file_json(data, export_file)
    logging.info("Saved snapshot at t=%s to %s.", learner.t, export_file)


def load_snapshot(input_file):
    """Read a snapshot written by save_snapshot()."""
    data = util.read_file_json(input_file)

    if data.get("version") != __snapshot_version__:
        raise ConfigError("Unsupported snapshot version %r in '%s'."
                          % (data.get("version"), input_file))

    states = [LearnerState(util.decode_array(layer["beta"]),
                           util.decode_array(layer["eta"]),
                           data["t"], data["style"],
                           util.decode_array(layer["beta0"]),
                           layer["lam"])
              for layer in data["layers"]]
    return EnsembleLearner(states, data["style"], data["task"])
