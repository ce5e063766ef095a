#!/usr/bin/env python
"""
Contains the TrainingConfig and TrainingResult class definitions and the
minibatch gradient-descent training loop of the encoder.

Please note that this module is private. The train function is available
in the main ``cafin`` namespace - use that instead.
"""
from __future__ import annotations
from typing import TYPE_CHECKING
from dataclasses import dataclass, asdict, replace
import hashlib
import logging
import pathlib
import numpy as np
import pandas as pd
from tqdm.auto import tqdm

from . import utils
from .constants import *
from .errors import ConfigurationError, TrainingError
from .Losses import LossConfig, TrainTriple, TrainingContext, sample_positive, sample_negatives, total_loss
from .SageEncoder import SageConfig, SageParams, sample_computation_graph, forward_cached, backward_cached

if TYPE_CHECKING:
    from .Graph import Graph
    from .DistanceOracle import DistanceOracle

__all__ = ['TrainingConfig', 'TrainingResult', 'step_schedule', 'generate_triples', 'train']

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['epoch', 'lr', 'L', 'L_o', 'L_f', 'skipped', 'triples']


@dataclass
class TrainingConfig:
    """
        Optimizer settings: plain gradient descent on minibatches of
        {DEFAULT_BATCH_SIZE} triples, learning rate {DEFAULT_LR} multiplied
        by {DEFAULT_GAMMA} every {DEFAULT_STEP_SIZE} epochs, {DEFAULT_EPOCHS}
        epochs by default.
    """
    epochs: int = DEFAULT_EPOCHS
    lr: float = DEFAULT_LR
    step_size: int = DEFAULT_STEP_SIZE
    gamma: float = DEFAULT_GAMMA
    batch_size: int = DEFAULT_BATCH_SIZE
    progress: bool = True

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigurationError(f"epochs must be non-negative, got {self.epochs}")
        if self.lr <= 0 or self.gamma <= 0:
            raise ConfigurationError("lr and gamma must be positive")
        if self.step_size < 1 or self.batch_size < 1:
            raise ConfigurationError("step_size and batch_size must be positive")

    @property
    def schedule(self):
        return step_schedule(self.lr, self.step_size, self.gamma)

    def to_dict(self):
        return asdict(self)

TrainingConfig.__doc__ = TrainingConfig.__doc__.format(DEFAULT_BATCH_SIZE=DEFAULT_BATCH_SIZE, DEFAULT_LR=DEFAULT_LR,
                                                       DEFAULT_GAMMA=DEFAULT_GAMMA, DEFAULT_STEP_SIZE=DEFAULT_STEP_SIZE,
                                                       DEFAULT_EPOCHS=DEFAULT_EPOCHS)


def step_schedule(lr, step_size=DEFAULT_STEP_SIZE, gamma=DEFAULT_GAMMA):
    """
        Learning rate of a 0-based epoch: lr * gamma**(epoch // step_size).
    """
    def schedule(epoch):
        return lr * gamma ** (epoch // step_size)
    return schedule


@dataclass
class TrainingResult:
    """
        Trained parameters with the per-epoch loss trace, the SHA-256 hash of
        the triple sequence and the training wall-time.
    """
    params: SageParams
    trace: pd.DataFrame
    triples_hash: str
    seconds: float
    missing_positives: int = 0

    def save_trace(self, path):
        path = pathlib.Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.trace.to_csv(path, index=False)


def generate_triples(g1: Graph, oracle: DistanceOracle, loss_cfg: LossConfig, rng):
    """
        One epoch of triples: every node once as an anchor, in shuffled
        order. Anchors without a positive sample are left out.

        Returns
        -------
        triple : TrainTriple
            Arrays u (m,), v (m,) and negatives (m, Q)
        missing : int
            Number of anchors left out
    """
    rng = utils.make_rng(rng)
    us, vs, negatives = [], [], []
    for u in rng.permutation(g1.node_count):
        v = sample_positive(g1, u, loss_cfg.walk_length, rng)
        if v is None:
            continue
        negs = sample_negatives(g1, u, oracle, loss_cfg, rng)
        if any(neg is None for neg in negs):
            continue
        us.append(u)
        vs.append(v)
        negatives.append(negs)
    triple = TrainTriple(np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64),
                         np.array(negatives, dtype=np.int64).reshape(len(us), loss_cfg.Q))
    return triple, g1.node_count - len(us)


def _batch_step(params, g1, triple, sage_cfg, loss_cfg, context, rng):
    u, v, negatives = triple.u, triple.v, triple.negatives
    size, Q = len(u), negatives.shape[1]
    cg = sample_computation_graph(g1, np.concatenate([u, v, negatives.ravel()]), sage_cfg, rng)
    out, cache = forward_cached(params, cg, g1.features)
    dim = out.shape[1]
    embeddings = out[:size], out[size:2 * size], out[2 * size:].reshape(size, Q, dim)
    loss = total_loss(triple, embeddings, loss_cfg, context)
    upstream = np.vstack([loss.grad_u, loss.grad_v, loss.grad_negs.reshape(-1, dim)]) / size
    grads = backward_cached(params, cache, upstream)
    return loss, grads


def train(g1: Graph, oracle: DistanceOracle, sage_cfg: SageConfig, loss_cfg: LossConfig,
          epochs=DEFAULT_EPOCHS, lr=DEFAULT_LR, schedule=None, seed=0,
          batch_size=DEFAULT_BATCH_SIZE, progress=False):
    """
        Train the encoder on g1.

        The seed is split into three independent streams: triples (anchor
        order, positives and negatives), neighborhood sampling and parameter
        initialization. None of them depends on the loss variant, so every
        variant trained from the same seed sees the same triples and starts
        from the same parameters.

        Parameters
        ----------
        g1 : Graph
            Training graph
        oracle : DistanceOracle
            Hop distances of g1
        sage_cfg : SageConfig
        loss_cfg : LossConfig
        epochs : int
            Default to {DEFAULT_EPOCHS}
        lr : float
            Initial learning rate. Default to {DEFAULT_LR}
        schedule : callable [int --> float]
            Learning rate of each epoch. Default to step_schedule(lr)
        seed : int
        batch_size : int
            Triples per gradient step. Default to {DEFAULT_BATCH_SIZE}
        progress : bool
            Show a progress bar over epochs

        Returns
        -------
        result : TrainingResult
    """
    triple_seed, sampling_seed, init_seed = utils.spawn_seeds(seed, 3)
    triple_rng, sampling_rng = utils.make_rng(triple_seed), utils.make_rng(sampling_seed)
    schedule = step_schedule(lr) if schedule is None else schedule
    context = TrainingContext.from_graph(g1, oracle)
    params = SageParams.initialize(g1.feature_dim, replace(sage_cfg, seed=init_seed))
    digest = hashlib.sha256()
    rows, missing = [], 0
    with utils.Timer() as timer:
        for epoch in tqdm(range(epochs), desc=f"train {loss_cfg.effective_variant}",
                          disable=None if progress else True):
            rate = schedule(epoch)
            triples, epoch_missing = generate_triples(g1, oracle, loss_cfg, triple_rng)
            missing += epoch_missing
            digest.update(utils.hash_arrays(triples.u, triples.v, triples.negatives).encode())
            totals, bases, fairness, skipped = [], [], [], 0
            for start in range(0, len(triples.u), batch_size):
                batch = TrainTriple(*(array[start:start + batch_size] for array in
                                      (triples.u, triples.v, triples.negatives)))
                loss, grads = _batch_step(params, g1, batch, sage_cfg, loss_cfg, context, sampling_rng)
                if not np.all(np.isfinite(loss.total)) or not grads.is_finite():
                    raise TrainingError(epoch, "non-finite loss or gradient")
                params.add_(grads, -rate)
                totals.append(loss.total)
                bases.append(loss.base)
                fairness.append(loss.fairness)
                skipped += loss.skipped
            rows.append(_trace_row(epoch, rate, totals, bases, fairness, skipped))
            logger.debug("Epoch %d: %s", epoch, rows[-1])
    trace = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    result = TrainingResult(params, trace, digest.hexdigest(), timer.seconds, missing)
    logger.info("Trained %s for %d epochs in %.2fs, triples hash %s", loss_cfg.effective_variant, epochs,
                result.seconds, result.triples_hash)
    return result

train.__doc__ = train.__doc__.format(DEFAULT_EPOCHS=DEFAULT_EPOCHS, DEFAULT_LR=DEFAULT_LR,
                                     DEFAULT_BATCH_SIZE=DEFAULT_BATCH_SIZE)


def _trace_row(epoch, rate, totals, bases, fairness, skipped):
    if not totals:
        return [epoch, rate, np.nan, np.nan, np.nan, skipped, 0]
    totals, bases, fairness = (np.concatenate(values) for values in (totals, bases, fairness))
    return [epoch, rate, float(totals.mean()), float(bases.mean()), float(fairness.mean()), skipped, len(totals)]
