#!/usr/bin/env python
"""
Contains the TrainTriple, LossConfig and TrainingContext class definitions,
the positive/negative sampling and the loss family: the contrastive base
loss, the centrality-aware fairness term and their joint objective.

Please note that this module is private. The loss functions are available
in the main ``cafin`` namespace - use that instead.
"""
from __future__ import annotations
from typing import TYPE_CHECKING, NamedTuple
from dataclasses import dataclass, asdict
import logging
import numpy as np
from scipy.special import expit

from . import utils
from .constants import *
from .errors import ConfigurationError, ArgumentError

if TYPE_CHECKING:
    from .Graph import Graph
    from .DistanceOracle import DistanceOracle

__all__ = ['TrainTriple', 'LossConfig', 'TrainingContext', 'BaseLoss', 'FairnessTerm', 'LossBreakdown',
           'sample_positive', 'sample_negative', 'sample_negatives', 'base_loss', 'fairness_term', 'total_loss']

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainTriple:
    """
        Anchor u, positive v and the Q negatives. Fields may also hold
        same-length arrays (negatives shaped (B, Q)) for a batch of triples.
    """
    u: object
    v: object
    negatives: object

    @property
    def v_n(self):
        return np.asarray(self.negatives)[..., 0]


@dataclass
class LossConfig:
    """
        Joint loss hyperparameters.

        alpha : balance factor of the fairness term. Default to {DEFAULT_ALPHA}
        k : embedding distance normalizer. Default to {DEFAULT_K}
        Q : negatives per triple. Default to {DEFAULT_Q}
        variant : one of {VARIANTS}
        min_neg_threshold : smallest hop distance of a negative. Default to {DEFAULT_MIN_NEG_THRESHOLD}
        walk_length : random walk length of the positive sampling. Default to {DEFAULT_WALK_LENGTH}
        neg_retries : candidates drawn before falling back to the farthest one. Default to {DEFAULT_NEG_RETRIES}
    """
    alpha: float = DEFAULT_ALPHA
    k: float = DEFAULT_K
    Q: int = DEFAULT_Q
    variant: str = CAFIN_FULL
    min_neg_threshold: int = DEFAULT_MIN_NEG_THRESHOLD
    walk_length: int = DEFAULT_WALK_LENGTH
    neg_retries: int = DEFAULT_NEG_RETRIES

    def __post_init__(self):
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be non-negative, got {self.alpha}")
        if self.k <= 0:
            raise ConfigurationError(f"k must be positive, got {self.k}")
        if self.Q < 1:
            raise ConfigurationError(f"Q must be at least 1, got {self.Q}")
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"Unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.walk_length < 1 or self.neg_retries < 1 or self.min_neg_threshold < 1:
            raise ConfigurationError("walk_length, neg_retries and min_neg_threshold must be positive")

    @property
    def effective_variant(self):
        """
            A zero balance factor turns every variant into the baseline.
        """
        return BASELINE if self.alpha == 0 else self.variant

    def to_dict(self):
        return asdict(self)

LossConfig.__doc__ = LossConfig.__doc__.format(DEFAULT_ALPHA=DEFAULT_ALPHA, DEFAULT_K=DEFAULT_K, DEFAULT_Q=DEFAULT_Q,
                                               VARIANTS=VARIANTS, DEFAULT_MIN_NEG_THRESHOLD=DEFAULT_MIN_NEG_THRESHOLD,
                                               DEFAULT_WALK_LENGTH=DEFAULT_WALK_LENGTH,
                                               DEFAULT_NEG_RETRIES=DEFAULT_NEG_RETRIES)


@dataclass(frozen=True)
class TrainingContext:
    """
        Graph statistics the fairness term needs: degrees and largest degree
        of the training graph, its distance oracle and diameter.
    """
    degrees: np.ndarray
    oracle: object
    diameter: int
    max_degree: int

    @classmethod
    def from_graph(cls, g: Graph, oracle: DistanceOracle):
        if oracle.node_count != g.node_count:
            raise ArgumentError(f"Oracle built on {oracle.node_count} nodes for a graph of {g.node_count} nodes")
        return cls(g.degrees, oracle, oracle.diameter, g.max_degree)


class BaseLoss(NamedTuple):
    value: np.ndarray
    grad_u: np.ndarray
    grad_v: np.ndarray
    grad_negs: np.ndarray


class FairnessTerm(NamedTuple):
    value: np.ndarray
    grad_u: np.ndarray
    grad_v: np.ndarray
    skipped: np.ndarray


class LossBreakdown(NamedTuple):
    total: np.ndarray
    base: np.ndarray
    fairness: np.ndarray
    grad_u: np.ndarray
    grad_v: np.ndarray
    grad_negs: np.ndarray
    skipped: int


def sample_positive(g: Graph, u, walk_length, rng):
    """
        Uniform choice among the nodes visited by a random walk of
        walk_length steps from u, u itself excluded.

        Returns
        -------
        v : int or None
            None when u is isolated and no positive exists
    """
    rng = utils.make_rng(rng)
    if g.degrees[u] == 0:
        return None
    current, visited = u, []
    for _ in range(walk_length):
        neighbors = g.neighbors(current)
        current = neighbors[rng.integers(len(neighbors))]
        visited.append(current)
    candidates = np.unique(visited)
    candidates = candidates[candidates != u]
    return int(rng.choice(candidates))


def sample_negative(g: Graph, u, oracle: DistanceOracle, cfg: LossConfig, rng):
    """
        Draw uniform candidates other than u until one lies at least
        cfg.min_neg_threshold hops away (unreachable counts as far), at most
        cfg.neg_retries times, then fall back to the farthest candidate.

        Returns
        -------
        v_n : int or None
            None when the graph has no other node than u
    """
    rng = utils.make_rng(rng)
    if g.node_count < 2:
        return None
    candidates = rng.integers(0, g.node_count - 1, size=cfg.neg_retries)
    candidates = candidates + (candidates >= u)
    distances = oracle.query_many(np.full(len(candidates), u), candidates)
    admissible = np.flatnonzero((distances >= cfg.min_neg_threshold) | (distances == oracle.sentinel))
    if admissible.size:
        return int(candidates[admissible[0]])
    return int(candidates[np.argmax(distances)])


def sample_negatives(g: Graph, u, oracle: DistanceOracle, cfg: LossConfig, rng):
    """
        cfg.Q negatives of u, see sample_negative.
    """
    return [sample_negative(g, u, oracle, cfg, rng) for _ in range(cfg.Q)]


def base_loss(z_u, z_v, z_negs, Q=None):
    """
        Contrastive loss -log(sigmoid(z_u.z_v)) - Q * mean_n log(sigmoid(-z_u.z_n))
        with its analytic gradients, computed through softplus so saturated
        scores stay finite.

        Parameters
        ----------
        z_u, z_v : ndarray shape (..., d)
        z_negs : ndarray shape (..., Q, d)
        Q : int
            Number of negatives, checked against z_negs when given

        Returns
        -------
        loss : BaseLoss
    """
    z_u, z_v, z_negs = (np.asarray(z, dtype=FLOAT_DTYPE) for z in (z_u, z_v, z_negs))
    if Q is not None and z_negs.shape[-2] != Q:
        raise ArgumentError(f"Expected {Q} negatives, got {z_negs.shape[-2]}")
    if z_u.shape[-1] != z_v.shape[-1] or z_u.shape[-1] != z_negs.shape[-1]:
        raise ArgumentError("Embeddings must share their dimension")
    positive = np.sum(z_u * z_v, axis=-1)
    negative = np.einsum('...d,...qd->...q', z_u, z_negs)
    value = np.logaddexp(0., -positive) + np.logaddexp(0., negative).sum(axis=-1)
    d_positive = expit(positive) - 1.
    d_negative = expit(negative)
    grad_u = d_positive[..., None] * z_v + np.einsum('...q,...qd->...d', d_negative, z_negs)
    grad_v = d_positive[..., None] * z_u
    grad_negs = d_negative[..., None] * z_u[..., None, :]
    return BaseLoss(value, grad_u, grad_v, grad_negs)


def fairness_term(u, v, z_u, z_v, degrees, oracle: DistanceOracle, diameter, max_degree, k=DEFAULT_K):
    """
        Centrality-aware fairness term

            (max_degree / deg(u)) * log^2( (D(z_u, z_v) / k) * (diameter / d(u, v)) )

        with D the euclidean embedding distance and d the hop distance.
        Pairs at hop distance 0, unreachable pairs and isolated anchors are
        skipped (zero value and gradient); D is clamped at {EPSILON}.

        Parameters
        ----------
        u, v : int or ndarray
            Node ids
        z_u, z_v : ndarray shape (..., d)
            Their embeddings
        degrees : ndarray
            Degrees of the training graph
        oracle : DistanceOracle
        diameter : int
        max_degree : int
        k : float

        Returns
        -------
        term : FairnessTerm
            value, gradients with respect to z_u and z_v and the skip mask
    """
    u, v = np.broadcast_arrays(np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64))
    z_u, z_v = np.asarray(z_u, dtype=FLOAT_DTYPE), np.asarray(z_v, dtype=FLOAT_DTYPE)
    hops = oracle.query_many(u.ravel(), v.ravel()).reshape(u.shape)
    degree = np.asarray(degrees)[u]
    skipped = (hops == 0) | (hops == oracle.sentinel) | (degree == 0) | (diameter <= 0)
    difference = z_u - z_v
    distance = np.linalg.norm(difference, axis=-1)
    clamped = distance < EPSILON
    ratio = (np.maximum(distance, EPSILON) / k) * (diameter / np.where(skipped, 1, hops))
    weight = max_degree / np.where(skipped, 1, degree)
    log_ratio = np.log(np.where(skipped, 1., ratio))
    value = np.where(skipped, 0., weight * log_ratio**2)
    scale = np.where(skipped | clamped, 0., 2. * weight * log_ratio / np.where(clamped, 1., distance)**2)
    grad_u = scale[..., None] * difference
    return FairnessTerm(value, grad_u, -grad_u, skipped)

fairness_term.__doc__ = fairness_term.__doc__.format(EPSILON=EPSILON)


def total_loss(triple: TrainTriple, embeddings, cfg: LossConfig, context: TrainingContext):
    """
        Joint loss L_o + alpha * L_f of a triple (or batch of triples) for the
        configured variant:

            {BASELINE} : L_o
            {CAFIN_FULL} : L_o + alpha * (f(u, v) + f(u, v_n))
            {CAFIN_P} : L_o + alpha * f(u, v)
            {CAFIN_N} : L_o + alpha * f(u, v_n)

        With Q > 1 negatives f(u, v_n) is averaged over them.

        Parameters
        ----------
        triple : TrainTriple
        embeddings : tuple (z_u, z_v, z_negs)
            Shapes (..., d), (..., d) and (..., Q, d)
        cfg : LossConfig
        context : TrainingContext

        Returns
        -------
        loss : LossBreakdown
            Total, base and unweighted fairness values, gradients with
            respect to the three embeddings and the number of skipped
            fairness pairs
    """
    z_u, z_v, z_negs = embeddings
    base = base_loss(z_u, z_v, z_negs)
    variant = cfg.effective_variant
    fairness = np.zeros_like(base.value)
    grad_u, grad_v, grad_negs = base.grad_u, base.grad_v, base.grad_negs
    skipped = 0
    if variant in (CAFIN_FULL, CAFIN_P):
        positive = fairness_term(triple.u, triple.v, z_u, z_v, context.degrees, context.oracle,
                                 context.diameter, context.max_degree, cfg.k)
        fairness = fairness + positive.value
        grad_u = grad_u + cfg.alpha * positive.grad_u
        grad_v = grad_v + cfg.alpha * positive.grad_v
        skipped += int(np.sum(positive.skipped))
    if variant in (CAFIN_FULL, CAFIN_N):
        negatives = np.asarray(triple.negatives, dtype=np.int64)
        count = negatives.shape[-1]
        negative = fairness_term(np.asarray(triple.u)[..., None], negatives, np.asarray(z_u)[..., None, :], z_negs,
                                 context.degrees, context.oracle, context.diameter, context.max_degree, cfg.k)
        fairness = fairness + negative.value.mean(axis=-1)
        grad_u = grad_u + cfg.alpha * negative.grad_u.sum(axis=-2) / count
        grad_negs = grad_negs + cfg.alpha * negative.grad_v / count
        skipped += int(np.sum(negative.skipped))
    return LossBreakdown(base.value + cfg.alpha * fairness, base.value, fairness, grad_u, grad_v, grad_negs, skipped)

total_loss.__doc__ = total_loss.__doc__.format(BASELINE=BASELINE, CAFIN_FULL=CAFIN_FULL, CAFIN_P=CAFIN_P, CAFIN_N=CAFIN_N)
