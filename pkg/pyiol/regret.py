"""
Online-to-offline regrets, their telescoping decompositions and the
closed-form cumulative regret bounds.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from .errors import ArityError, ConfigError, DomainError, UsageError
from .iol import Hook, offline_forward_solve, offline_ridge_solve


EXPERT_KINDS = ("ridge", "forward", "oracle")
VARIANTS = ("regularized", "unregularized", "final_shifted")


def batch_loss(d, beta, y):
    """Squared loss 1/2 |D beta - Y|^2, summed over target columns."""
    residual = np.asarray(d) @ beta - np.asarray(y).reshape(len(d), -1)
    return 0.5 * float(np.sum(residual ** 2))


def bregman(beta, beta0, lam):
    """1/2 (beta - beta0)^T lambda I (beta - beta0)."""
    return 0.5 * lam * float(np.sum((np.asarray(beta) - beta0) ** 2))


def immediate_regret(learner_loss, oracle_loss):
    """Doubled per-step loss gap between learner and comparator."""
    return 2.0 * (learner_loss - oracle_loss)


def quad_form(v, eta):
    """trace(v^T eta v)."""
    return float(np.sum(v * (eta @ v)))


def regret_term_ridge(d, beta, y, eta):
    """(D beta - Y)^T D eta D^T (D beta - Y)."""
    d = np.asarray(d)
    residual = d @ beta - np.asarray(y).reshape(len(d), -1)
    return quad_form(d.T @ residual, eta)


def regret_terms_forward(d_t, y_t, d_next, beta_next, eta):
    """Both forward regret terms and their difference."""
    d_t = np.asarray(d_t)
    d_next = np.asarray(d_next)
    term1 = quad_form(d_t.T @ np.asarray(y_t).reshape(len(d_t), -1), eta)
    term2 = quad_form(d_next.T @ (d_next @ beta_next), eta)
    return term1, term2, term1 - term2


@dataclass
class RegretLedger:
    """Per-step regret record of one sub-learner."""
    style: str
    lam: float
    layer: int = 0
    batch_sizes: list = field(default_factory=list)
    learner_loss: list = field(default_factory=list)
    oracle_loss: list = field(default_factory=list)
    ir: list = field(default_factory=list)
    irt: list = field(default_factory=list)
    irt_term1: list = field(default_factory=list)
    irt_term2: list = field(default_factory=list)
    irt_term1_before: list = field(default_factory=list)
    irt_term2_before: list = field(default_factory=list)
    cr: list = field(default_factory=list)
    d_m: list = field(default_factory=list)
    y_m: list = field(default_factory=list)
    final_beta: np.ndarray = None

    def __len__(self):
        return len(self.learner_loss)

    def cumulative_oracle(self):
        """Running sum of learner minus oracle loss."""
        return np.cumsum(np.subtract(self.learner_loss, self.oracle_loss))

    def series(self):
        """Non-empty per-step series keyed by name."""
        names = ("learner_loss", "oracle_loss", "ir", "irt", "irt_term1",
                 "irt_term2", "irt_term1_before", "irt_term2_before", "cr",
                 "d_m", "y_m")
        return {name: list(getattr(self, name)) for name in names
                if getattr(self, name)}


class RegretTracker(Hook):
    """Fill a RegretLedger for one layer while run_iol executes.

    With `oracle` the oracle loss and immediate regret are recorded. With
    `clip` the learner's predictions are clipped to the largest target
    magnitude seen so far before the loss is taken. The running cumulative
    regret is measured against the ridge offline expert on the seen prefix,
    kept through sufficient statistics so no batch is retained.
    """

    def __init__(self, layer=0, oracle=None, clip=False, track_expert=True):
        self.layer = layer
        self.oracle = oracle
        self.clip = clip
        self.track_expert = track_expert
        self.ledger = None

    def start(self, learner, network, stream):
        state = learner.states[self.layer]
        p, m = state.beta.shape

        if self.oracle is not None:
            self.oracle = np.asarray(self.oracle, dtype=float).reshape(p, -1)

        self.ledger = RegretLedger(learner.style, state.lam, self.layer)
        self.gram = np.zeros((p, p))
        self.cross = np.zeros((p, m))
        self.yy = 0.0
        self.total = 0.0
        self.y_max = 0.0
        self.d_max = 0.0
        self.target_max = 0.0

    def step(self, event):
        ledger = self.ledger
        before = event.before.states[self.layer]
        after = event.after.states[self.layer]
        d = event.features[self.layer]
        y = event.batch.y

        self.target_max = max(self.target_max, float(np.abs(y).max()))
        pred = d @ before.beta

        if self.clip:
            pred = np.clip(pred, -self.target_max, self.target_max)

        loss = 0.5 * float(np.sum((pred - y) ** 2))
        self.total += loss

        self.d_max = max(self.d_max, float(np.abs(d).max()))
        self.y_max = max(self.y_max, self.target_max, float(np.abs(pred).max()))

        ledger.batch_sizes.append(len(d))
        ledger.learner_loss.append(loss)
        ledger.d_m.append(self.d_max)
        ledger.y_m.append(self.y_max)

        if self.oracle is not None:
            oracle_loss = batch_loss(d, self.oracle, y)
            ledger.oracle_loss.append(oracle_loss)
            ledger.ir.append(immediate_regret(loss, oracle_loss))

        if ledger.style == "ridge":
            ledger.irt.append(regret_term_ridge(d, before.beta, y, after.eta))

        else:
            d_next = event.next_features[self.layer]
            term1, term2, diff = regret_terms_forward(d, y, d_next,
                                                      after.beta, after.eta)
            ledger.irt_term1.append(term1)
            ledger.irt_term2.append(term2)
            ledger.irt.append(diff)

            term1, term2, _ = regret_terms_forward(d, y, d_next, after.beta,
                                                   before.eta)
            ledger.irt_term1_before.append(term1)
            ledger.irt_term2_before.append(term2)

        if self.track_expert:
            self.gram += d.T @ d
            self.cross += d.T @ y
            self.yy += float(np.sum(y ** 2))
            ledger.cr.append(self.total - self.expert_objective(before))

    def expert_objective(self, state):
        """Regularized objective of the ridge expert on the seen prefix."""
        hessian = state.lam * np.eye(len(self.gram)) + self.gram
        beta0 = state.beta0
        beta = linalg.solve(hessian, state.lam * beta0 + self.cross,
                            assume_a="pos")

        losses = 0.5 * float(np.sum(beta * (self.gram @ beta))) \
            - float(np.sum(beta * self.cross)) + 0.5 * self.yy
        return bregman(beta, beta0, state.lam) + losses

    def finish(self, learner):
        self.ledger.final_beta = np.array(learner.states[self.layer].beta)


@dataclass(frozen=True)
class OfflineExpert:
    """Comparator weights and the objective that produced them."""
    beta: np.ndarray
    kind: str = "ridge"

    def __post_init__(self):
        if self.kind not in EXPERT_KINDS:
            raise ConfigError("Unknown expert kind '%s'." % self.kind)

    @classmethod
    def ridge(cls, features, targets, lam, beta0=None):
        return cls(offline_ridge_solve(np.vstack(features),
                                       np.vstack(targets), lam, beta0),
                   "ridge")

    @classmethod
    def forward(cls, features, targets, d_next, lam, beta0=None):
        return cls(offline_forward_solve(np.vstack(features),
                                         np.vstack(targets), d_next, lam,
                                         beta0), "forward")

    @classmethod
    def oracle(cls, beta):
        beta = np.asarray(beta, dtype=float)
        return cls(beta.reshape(len(beta), -1), "oracle")


def cumulative_regret(ledger, expert, stream_prefix, style, lam, beta0=None,
                      variant="regularized"):
    """Learner's total loss minus the expert's objective over a prefix.

    regularized: sum L_t(beta_t) - [1/2 lambda |b - beta0|^2 + sum L_t(b)]
    unregularized: the regularizer dropped, the only form valid against
    the oracle.
    final_shifted: regularized plus 1/2 lambda |beta_final - beta0|^2.
    """
    if variant not in VARIANTS:
        raise ConfigError("Unknown regret variant '%s'." % variant)

    if ledger.style != style:
        raise UsageError("Ledger holds a %s run, asked for %s."
                         % (ledger.style, style))

    if expert.kind == "forward" and style != "forward":
        raise UsageError("A forward expert only pairs with a forward run.")

    if expert.kind == "oracle" and variant != "unregularized":
        raise UsageError("The oracle has no regularizer, use the "
                         "unregularized variant.")

    prefix = list(stream_prefix)
    if len(prefix) > len(ledger):
        raise UsageError("Prefix has %s batches, ledger only %s."
                         % (len(prefix), len(ledger)))

    beta = expert.beta
    if beta0 is None:
        beta0 = np.zeros_like(beta)

    learner = float(np.sum(ledger.learner_loss[:len(prefix)]))
    expert_loss = sum(batch_loss(d, beta, y) for d, y in prefix)

    if variant == "unregularized":
        return learner - expert_loss

    regret = learner - (bregman(beta, beta0, lam) + expert_loss)

    if variant == "final_shifted":
        if ledger.final_beta is None:
            raise UsageError("Ledger has no final weights.")
        regret += bregman(ledger.final_beta, beta0, lam)

    return regret


def dense_path(features, targets, lam, beta0, lookahead=None):
    """Minimizers of every prefix objective, by direct solves."""
    betas = [beta0]

    for t in range(1, len(features) + 1):
        d = np.vstack(features[:t])
        y = np.vstack(targets[:t])

        if lookahead is None:
            betas.append(offline_ridge_solve(d, y, lam, beta0))
        else:
            betas.append(offline_forward_solve(d, y, lookahead[t], lam, beta0))

    return betas


def ridge_regret_decomposition(features, targets, lam, beta0=None,
                               expert=None):
    """Both sides of the ridge online-to-offline identity.

    left = sum L_t(beta_t) - [1/2 lambda |b - beta0|^2 + sum L_t(b)]
    right = sum 1/2 delta_t^T H_{t+1} delta_t
            - 1/2 (b - beta_n)^T H_n (b - beta_n)
    where beta_t minimizes the regularized objective on the first t
    batches and H_t is its Hessian.
    """
    features = [np.atleast_2d(d) for d in features]
    targets = [np.asarray(y).reshape(len(d), -1)
               for d, y in zip(features, targets)]
    p, m = features[0].shape[1], targets[0].shape[1]
    beta0 = np.zeros((p, m)) if beta0 is None else np.asarray(beta0)

    betas = dense_path(features, targets, lam, beta0)
    if expert is None:
        expert = betas[-1]

    hessian = lam * np.eye(p)
    terms = []

    for t, d in enumerate(features):
        hessian = hessian + d.T @ d
        delta = betas[t + 1] - betas[t]
        terms.append(0.5 * quad_form(delta, hessian))

    gap = expert - betas[-1]
    learner = sum(batch_loss(d, betas[t], y)
                  for t, (d, y) in enumerate(zip(features, targets)))
    comparator = bregman(expert, beta0, lam) + \
        sum(batch_loss(d, expert, y) for d, y in zip(features, targets))

    return {"left": learner - comparator,
            "right": sum(terms) - 0.5 * quad_form(gap, hessian),
            "terms": terms}


def forward_regret_decomposition(features, targets, lam, beta0=None,
                                 expert=None, surrogate=None):
    """Both sides of the forward online-to-offline identity.

    left = sum L_t(beta_t) - [1/2 lambda |b - beta0|^2 + sum L_t(b)]
    right = sum [1/2 delta_t^T H_{t+1} delta_t - P_{t+1}(beta_t)
                 + P_t(beta_t)]
            - 1/2 (b - beta_n)^T H_n (b - beta_n) + P_n(b)
    with P_t(beta) = 1/2 |D_t (beta - beta0)|^2 the lookahead penalty, the
    final lookahead being `surrogate` (the last batch by default). The
    expert defaults to the ridge optimum on all batches.
    """
    features = [np.atleast_2d(d) for d in features]
    targets = [np.asarray(y).reshape(len(d), -1)
               for d, y in zip(features, targets)]
    p, m = features[0].shape[1], targets[0].shape[1]
    beta0 = np.zeros((p, m)) if beta0 is None else np.asarray(beta0)

    if surrogate is None:
        surrogate = features[-1]

    lookahead = features + [np.atleast_2d(surrogate)]
    betas = dense_path(features, targets, lam, beta0, lookahead)

    if expert is None:
        expert = offline_ridge_solve(np.vstack(features), np.vstack(targets),
                                     lam, beta0)

    def penalty(t, beta):
        return 0.5 * float(np.sum((lookahead[t] @ (beta - beta0)) ** 2))

    hessian = lam * np.eye(p) + lookahead[0].T @ lookahead[0]
    terms = []

    for t in range(len(features)):
        hessian = hessian + lookahead[t + 1].T @ lookahead[t + 1]
        delta = betas[t + 1] - betas[t]
        terms.append(0.5 * quad_form(delta, hessian)
                     - penalty(t + 1, betas[t]) + penalty(t, betas[t]))

    n = len(features)
    gap = expert - betas[-1]
    learner = sum(batch_loss(d, betas[t], y)
                  for t, (d, y) in enumerate(zip(features, targets)))
    comparator = bregman(expert, beta0, lam) + \
        sum(batch_loss(d, expert, y) for d, y in zip(features, targets))

    return {"left": learner - comparator,
            "right": sum(terms) - 0.5 * quad_form(gap, hessian)
                     + penalty(n, expert),
            "terms": terms}


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the cumulative regret bounds."""
    y_m: float
    d_m: float
    b: float
    N: int
    k: int
    T: float
    lam: float
    s: float = 1.0

    def __post_init__(self):
        if min(self.y_m, self.d_m, self.b, self.k, self.T, self.lam,
               self.s) <= 0 or self.N < 0:
            raise DomainError("Bound parameters must be positive: %s" % self)

    @property
    def width(self):
        return self.N + self.k

    def lambda_scaled(self):
        """Amplify lambda with the batch size, s = b."""
        return replace(self, s=self.b)

    @classmethod
    def from_ledger(cls, ledger, N, k, s=1.0):
        """Measured D_m, Y_m and the largest batch size b_m."""
        if not len(ledger):
            raise UsageError("Empty ledger.")

        return cls(ledger.y_m[-1], ledger.d_m[-1], max(ledger.batch_sizes),
                   N, k, len(ledger), ledger.lam, s)


def bound_base(p):
    """Y_m^2 b (N + k) ln(1 + T D_m^2 b / (lambda s))."""
    a2 = p.d_m ** 2 * p.b / (p.lam * p.s)
    return p.y_m ** 2 * p.b * p.width * np.log1p(p.T * a2)


def ridge_bound(p):
    """Cumulative regret bound of a ridge learner."""
    return 2.0 * bound_base(p)


def forward_bound(p):
    """Cumulative regret bound of a forward learner.

    Returns the two-log form and the looser single-log form, a quarter of
    the ridge bound.
    """
    if p.T < 1:
        raise DomainError("The forward bound needs T >= 1.")

    single = 0.5 * bound_base(p)
    shrink = p.d_m ** 2 * p.b / (p.lam * p.s + 2 * p.d_m ** 2 * p.b)
    second = 0.5 * p.y_m ** 2 * p.b * p.width * np.log1p((p.T - 1) * shrink)
    return single - second, single


def bound_derivative_curves(p, t):
    """Growth rates of both bounds over a time grid."""
    t = np.asarray(t, dtype=float)
    a1 = 2 * p.y_m ** 2 * p.b * p.width
    a2 = p.d_m ** 2 * p.b / (p.lam * p.s)

    ridge = a1 * a2 / (1 + a2 * t)
    forward = a1 / 4 * (a2 / (1 + a2 * t) - a2 / (1 + a2 + a2 * t))
    return ridge, forward


def ensemble_bound(per_learner_params, style="ridge"):
    """Bound of the whole ensemble from extremized learner parameters."""
    if not per_learner_params:
        raise ArityError("No learners to bound.")

    params = list(per_learner_params)
    worst = BoundParams(
        y_m=max(p.y_m for p in params),
        d_m=max(p.d_m for p in params),
        b=max(p.b for p in params),
        N=max(p.N for p in params),
        k=max(p.k for p in params),
        T=max(p.T for p in params),
        lam=min(p.lam for p in params),
        s=min(p.s for p in params),
    )
    logging.debug("Ensemble bound parameters: %s", worst)

    if style == "ridge":
        return ridge_bound(worst)

    return forward_bound(worst)[0]
