#!/usr/bin/env python
"""
Contains the LinearClassifier class definition and the downstream fit and
predict functions working on frozen embeddings.

Please note that this module is private. The LinearClassifier class is
available in the main ``cafin`` namespace - use that instead.
"""
import logging
import numpy as np
from scipy import optimize
from scipy.special import expit, logsumexp, softmax

from . import utils
from .constants import *
from .errors import ArgumentError, DegenerateDataError, ConfigurationError

__all__ = ['LinearClassifier', 'edge_feature', 'edge_features', 'fit', 'predict', 'objective']

logger = logging.getLogger(__name__)

_MAGIC = b'CAFINLC1'
MODES = (MULTINOMIAL, ONE_VS_REST, BINARY)


class LinearClassifier:
    """
        Logistic regression on embeddings: one score row per class
        ({MULTINOMIAL}, {ONE_VS_REST}) or a single score row ({BINARY}).
    """
    def __init__(self, weights, bias, mode, reg=DEFAULT_REG, classes=None, multilabel=False, seed=None) -> None:
        """
            Parameters
            ----------
            weights : array-like shape (rows, dim)
            bias : array-like shape (rows,)
            mode : str
                One of {MODES}
            reg : float
                L2 regularization strength the classifier was fitted with
            classes : array-like
                Class id of every score row. Default to 0..rows-1 ([0, 1] in
                {BINARY} mode)
            multilabel : bool
                Whether predictions are per-class binary decisions
            seed : int
                Seed recorded with the fit
        """
        if mode not in MODES:
            raise ConfigurationError(f"Unknown classifier mode {mode!r}, expected one of {MODES}")
        self.__weights = np.atleast_2d(np.array(weights, dtype=FLOAT_DTYPE))
        self.__bias = np.array(bias, dtype=FLOAT_DTYPE).reshape(-1)
        if self.__bias.shape != (self.__weights.shape[0],):
            raise ConfigurationError(f"Bias shaped {self.__bias.shape} for weights shaped {self.__weights.shape}")
        if mode == BINARY and self.__weights.shape[0] != 1:
            raise ConfigurationError("Binary classifiers hold a single score row")
        if not (np.all(np.isfinite(self.__weights)) and np.all(np.isfinite(self.__bias))):
            raise ConfigurationError("Classifier weights must be finite")
        self.__mode = mode
        self.__reg = float(reg)
        default = [0, 1] if mode == BINARY else np.arange(self.__weights.shape[0])
        self.__classes = np.asarray(default if classes is None else classes, dtype=np.int64)
        self.__multilabel = bool(multilabel)
        self.__seed = seed

    __init__.__doc__ = __init__.__doc__.format(MODES=MODES, BINARY=BINARY)

    @property
    def weights(self):
        return self.__weights

    @property
    def bias(self):
        return self.__bias

    @property
    def mode(self):
        return self.__mode

    @property
    def reg(self):
        return self.__reg

    @property
    def classes(self):
        return self.__classes

    @property
    def multilabel(self):
        return self.__multilabel

    @property
    def seed(self):
        return self.__seed

    @property
    def dim(self):
        return self.__weights.shape[1]

    def decision_function(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=FLOAT_DTYPE))
        if X.shape[1] != self.dim:
            raise ArgumentError(f"Inputs of dimension {X.shape[1]} for a classifier of dimension {self.dim}")
        return X @ self.__weights.T + self.__bias

    def predict(self, X):
        """
            Class ids, argmax of the scores with ties going to the lower row,
            or binary matrix of sigmoid scores >= 0.5 for multi-label
            classifiers. Binary classifiers return 1 for sigmoid scores >= 0.5.
        """
        scores = self.decision_function(X)
        if self.mode == BINARY:
            return np.where(scores[:, 0] >= 0., self.classes[1], self.classes[0])
        if self.multilabel:
            return (scores >= 0.).astype(np.int64)
        return self.classes[np.argmax(scores, axis=1)]

    def save(self, path):
        header = {'mode': self.mode, 'reg': self.reg, 'multilabel': self.multilabel, 'seed': self.seed}
        utils.write_container(path, _MAGIC, header, [self.weights, self.bias, self.classes])

    @classmethod
    def load(cls, path):
        header, (weights, bias, classes) = utils.read_container(path, _MAGIC)
        return cls(weights, bias, header['mode'], header['reg'], classes, header['multilabel'], header['seed'])

    def __repr__(self):
        return f"{self.__class__.__name__}(mode={self.mode!r}, rows={self.weights.shape[0]}, dim={self.dim})"

LinearClassifier.__doc__ = LinearClassifier.__doc__.format(MULTINOMIAL=MULTINOMIAL, ONE_VS_REST=ONE_VS_REST,
                                                           BINARY=BINARY)


def edge_feature(z_u, z_v):
    """
        Hadamard product of the two endpoint embeddings, symmetric in its
        arguments. Works row-wise on (m, d) matrices.
    """
    z_u, z_v = np.asarray(z_u, dtype=FLOAT_DTYPE), np.asarray(z_v, dtype=FLOAT_DTYPE)
    if z_u.shape != z_v.shape:
        raise ArgumentError(f"Endpoint embeddings shaped {z_u.shape} and {z_v.shape}")
    return z_u * z_v


def edge_features(embeddings, pairs):
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return edge_feature(embeddings[pairs[:, 0]], embeddings[pairs[:, 1]])


def _targets(y, mode):
    """
        Target matrix, row ids and multi-label flag of raw labels.
    """
    y = np.asarray(y)
    if y.ndim == 2:
        if mode == MULTINOMIAL:
            raise ConfigurationError("Multi-label targets need the one-vs-rest mode")
        if y.size == 0 or y.min() == y.max():
            raise DegenerateDataError("Multi-label targets hold a single value")
        return y.astype(FLOAT_DTYPE), np.arange(y.shape[1]), True
    classes = np.unique(y)
    if mode == BINARY:
        if not np.all(np.isin(classes, (0, 1))):
            raise ArgumentError(f"Binary targets must be 0 or 1, got {classes.tolist()}")
        if len(classes) < 2:
            raise DegenerateDataError("Binary targets hold a single class")
        return y.astype(FLOAT_DTYPE)[:, None], np.array([0, 1]), False
    if len(classes) < 2:
        raise DegenerateDataError(f"Downstream data holds a single class {classes.tolist()}")
    return (y[:, None] == classes[None, :]).astype(FLOAT_DTYPE), classes, False


def objective(theta, X, targets, mode, reg):
    """
        Mean negative log-likelihood plus (reg/2)*|W|^2 (bias left out) and
        its gradient, with theta the flattened [W | b] matrix.
    """
    n, dim = X.shape
    rows = targets.shape[1]
    params = theta.reshape(rows, dim + 1)
    weights, bias = params[:, :dim], params[:, dim]
    scores = X @ weights.T + bias
    if mode == MULTINOMIAL:
        log_norm = logsumexp(scores, axis=1)
        value = np.sum(log_norm - np.sum(scores * targets, axis=1)) / n
        d_scores = (softmax(scores, axis=1) - targets) / n
    else:
        value = np.sum(np.logaddexp(0., scores) - targets * scores) / n
        d_scores = (expit(scores) - targets) / n
    value += 0.5 * reg * np.sum(weights**2)
    grad = np.column_stack([d_scores.T @ X + reg * weights, d_scores.sum(axis=0)])
    return value, grad.ravel()


def fit(X, y, mode=MULTINOMIAL, reg=DEFAULT_REG, seed=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """
        L2-regularized logistic regression, full batch, from zero weights.

        Parameters
        ----------
        X : array-like shape (n, dim)
        y : array-like
            Class ids (n,), or binary label matrix (n, classes) in
            {ONE_VS_REST} mode
        mode : str
            {MULTINOMIAL} (softmax), {ONE_VS_REST} (one sigmoid per class)
            or {BINARY}
        reg : float
            L2 strength. Default to {DEFAULT_REG}
        seed : int
            Recorded with the classifier, the solver itself is deterministic
        tol : float
            Gradient tolerance. Default to {DEFAULT_TOL}
        max_iter : int
            Iteration cap. Default to {DEFAULT_MAX_ITER}

        Returns
        -------
        classifier : LinearClassifier
    """
    X = np.atleast_2d(np.asarray(X, dtype=FLOAT_DTYPE))
    if mode not in MODES:
        raise ConfigurationError(f"Unknown classifier mode {mode!r}, expected one of {MODES}")
    if len(X) != len(y):
        raise ArgumentError(f"Got {len(X)} rows for {len(y)} labels")
    targets, classes, multilabel = _targets(y, mode)
    theta = np.zeros(targets.shape[1] * (X.shape[1] + 1))
    result = optimize.minimize(objective, theta, args=(X, targets, mode, reg), jac=True, method='L-BFGS-B',
                               options={'gtol': tol, 'ftol': 1e-15, 'maxiter': max_iter, 'maxcor': 20})
    grad_norm = float(np.linalg.norm(result.jac))
    if grad_norm > tol:
        logger.info("Solver stopped at gradient norm %.3g after %d iterations: %s", grad_norm, result.nit,
                    result.message)
    params = result.x.reshape(targets.shape[1], X.shape[1] + 1)
    return LinearClassifier(params[:, :-1], params[:, -1], mode, reg, classes, multilabel, seed)

fit.__doc__ = fit.__doc__.format(MULTINOMIAL=MULTINOMIAL, ONE_VS_REST=ONE_VS_REST, BINARY=BINARY,
                                 DEFAULT_REG=DEFAULT_REG, DEFAULT_TOL=DEFAULT_TOL, DEFAULT_MAX_ITER=DEFAULT_MAX_ITER)


def predict(c: LinearClassifier, X):
    return c.predict(X)
