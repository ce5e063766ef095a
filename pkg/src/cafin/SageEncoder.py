#!/usr/bin/env python
"""
Contains the SageConfig, SageParams and ComputationGraph class definitions
together with the neighbor sampling, forward and backward passes of the
mean-aggregator encoder.

Please note that this module is private. The encoder classes are available
in the main ``cafin`` namespace - use that instead.
"""
from __future__ import annotations
from typing import TYPE_CHECKING
from dataclasses import dataclass, field, asdict
import logging
import numpy as np
from scipy import sparse

from . import utils
from .constants import *
from .errors import ConfigurationError, ArgumentError

if TYPE_CHECKING:
    from .Graph import Graph

__all__ = ['SageConfig', 'SageParams', 'ComputationGraph', 'sample_computation_graph', 'forward', 'backward',
           'forward_cached', 'backward_cached', 'embed']

logger = logging.getLogger(__name__)

_MAGIC = b'CAFINSG1'
_INIT_SCHEME = 'glorot_uniform'


@dataclass
class SageConfig:
    """
        Encoder hyperparameters. fanouts[j] caps the number of neighbors
        sampled at hop j+1 and defaults to {DEFAULT_FANOUT} at every hop.
    """
    num_layers: int = DEFAULT_NUM_LAYERS
    hidden_dim: int = DEFAULT_HIDDEN_DIM
    fanouts: list = field(default=None)
    seed: int = 0
    activation: str = 'relu'

    def __post_init__(self):
        if self.fanouts is None:
            self.fanouts = [DEFAULT_FANOUT] * self.num_layers
        self.fanouts = [int(fanout) for fanout in self.fanouts]
        if self.num_layers < 1 or self.hidden_dim < 1:
            raise ConfigurationError("Encoder needs at least one layer and a positive hidden dimension")
        if len(self.fanouts) != self.num_layers:
            raise ConfigurationError(f"Got {len(self.fanouts)} fanouts for {self.num_layers} layers")
        if min(self.fanouts) < 1:
            raise ConfigurationError("Fanouts must be positive")
        if self.activation != 'relu':
            raise ConfigurationError("Only the 'relu' activation is supported")

    def to_dict(self):
        return asdict(self)

SageConfig.__doc__ = SageConfig.__doc__.format(DEFAULT_FANOUT=DEFAULT_FANOUT)


class SageParams:
    """
        Per-layer weights W_k shaped (out_dim, 2*in_dim), applied to the
        concatenation of a node representation and of its neighbor mean,
        and biases b_k shaped (out_dim,).
    """
    def __init__(self, weights, biases, seed=None, init=_INIT_SCHEME) -> None:
        self.__weights = [np.array(weight, dtype=FLOAT_DTYPE) for weight in weights]
        self.__biases = [np.array(bias, dtype=FLOAT_DTYPE) for bias in biases]
        self.__seed = seed
        self.__init = init
        self._check_shapes()

    def _check_shapes(self):
        if len(self.__weights) != len(self.__biases) or not self.__weights:
            raise ConfigurationError("Need one weight matrix and one bias per layer")
        in_dim = self.__weights[0].shape[1] // 2
        for weight, bias in zip(self.__weights, self.__biases):
            if weight.ndim != 2 or weight.shape[1] != 2 * in_dim or bias.shape != (weight.shape[0],):
                raise ConfigurationError(f"Layer shapes do not chain: weight {weight.shape}, bias {bias.shape}, input {in_dim}")
            in_dim = weight.shape[0]

    @classmethod
    def initialize(cls, feature_dim, cfg: SageConfig):
        """
            Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)) and zero
            biases, drawn from cfg.seed.
        """
        rng = utils.make_rng(cfg.seed)
        dims = [feature_dim] + [cfg.hidden_dim] * cfg.num_layers
        weights, biases = [], []
        for in_dim, out_dim in zip(dims[:-1], dims[1:]):
            bound = np.sqrt(6. / (2 * in_dim + out_dim))
            weights.append(rng.uniform(-bound, bound, size=(out_dim, 2 * in_dim)))
            biases.append(np.zeros(out_dim))
        return cls(weights, biases, seed=cfg.seed)

    @classmethod
    def zeros_like(cls, params: SageParams):
        return cls([np.zeros_like(weight) for weight in params.weights],
                   [np.zeros_like(bias) for bias in params.biases], seed=params.seed, init='zeros')

    @property
    def weights(self):
        return self.__weights

    @property
    def biases(self):
        return self.__biases

    @property
    def seed(self):
        return self.__seed

    @property
    def init(self):
        return self.__init

    @property
    def num_layers(self):
        return len(self.__weights)

    @property
    def dims(self):
        return tuple([self.__weights[0].shape[1] // 2] + [weight.shape[0] for weight in self.__weights])

    @property
    def arrays(self):
        """
            Weights and biases interleaved layer by layer.
        """
        return [array for pair in zip(self.__weights, self.__biases) for array in pair]

    def add_(self, other: SageParams, factor=1.):
        for array, update in zip(self.arrays, other.arrays):
            array += factor * update
        return self

    def is_finite(self):
        return all(np.all(np.isfinite(array)) for array in self.arrays)

    def equals(self, other: SageParams):
        return all(np.array_equal(a, b) for a, b in zip(self.arrays, other.arrays))

    def save(self, path, config_hash=None):
        header = {'dims': list(self.dims), 'seed': self.seed, 'config_hash': config_hash, 'init': self.init}
        utils.write_container(path, _MAGIC, header, self.arrays)

    @classmethod
    def load(cls, path):
        header, arrays = utils.read_container(path, _MAGIC)
        params = cls(arrays[0::2], arrays[1::2], seed=header['seed'], init=header['init'])
        if list(params.dims) != header['dims']:
            raise ConfigurationError(f"Checkpoint {path} declares dims {header['dims']} but holds {list(params.dims)}")
        return params

    def __repr__(self):
        return f"{self.__class__.__name__}(dims={self.dims}, seed={self.seed})"


@dataclass(frozen=True)
class ComputationGraph:
    """
        Sampled multi-hop neighborhood trees of one or several roots.

        layers[0] holds the roots, layers[j] the node ids of the tree
        instances at hop j and offsets[j] (a CSR offsets array over
        layers[j]) delimits the children each hop-j instance owns in
        layers[j+1].
    """
    layers: tuple
    offsets: tuple
    single: bool = False

    @property
    def depth(self):
        return len(self.offsets)

    def mean_operator(self, depth):
        """
            Sparse (len(layers[depth]), len(layers[depth+1])) matrix
            averaging children rows, zero rows for childless instances.
        """
        offsets = self.offsets[depth]
        counts = np.diff(offsets)
        data = np.repeat(1. / np.maximum(counts, 1), counts)
        return sparse.csr_matrix((data, np.arange(offsets[-1]), offsets),
                                 shape=(len(counts), len(self.layers[depth + 1])))


def sample_computation_graph(g: Graph, node, cfg: SageConfig, rng):
    """
        Sample the neighborhood trees of one or several roots.

        Parameters
        ----------
        g : Graph
        node : int or array-like
            Root node id(s)
        cfg : SageConfig
            fanouts[j] caps the children of every hop-j instance. Nodes with
            fewer neighbors keep all of them once
        rng : numpy Generator or seed

        Returns
        -------
        cg : ComputationGraph
    """
    rng = utils.make_rng(rng)
    single = np.ndim(node) == 0
    roots = np.atleast_1d(np.asarray(node, dtype=np.int64))
    if roots.size and (roots.min() < 0 or roots.max() >= g.node_count):
        raise ArgumentError(f"Root ids must lie in [0, {g.node_count})")
    layers, offsets = [roots], []
    for fanout in cfg.fanouts:
        current = layers[-1]
        degrees = g.degrees[current]
        counts = np.minimum(degrees, fanout)
        child_offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        children = np.empty(child_offsets[-1], dtype=np.int64)
        complete = np.flatnonzero(degrees <= fanout)
        sources, _ = utils.csr_ranges(g.csr_offsets, current[complete])
        targets, _ = utils.csr_ranges(child_offsets, complete)
        children[targets] = g.csr_neighbors[sources]
        for instance in np.flatnonzero(degrees > fanout):
            start = child_offsets[instance]
            children[start:start + fanout] = rng.choice(g.neighbors(current[instance]), size=fanout, replace=False)
        layers.append(children)
        offsets.append(child_offsets)
    return ComputationGraph(tuple(layers), tuple(offsets), single=single)


def _check_inputs(params: SageParams, cg: ComputationGraph, features):
    if features.ndim != 2 or features.shape[1] != params.dims[0]:
        raise ConfigurationError(f"Features shaped {features.shape} for an encoder expecting {params.dims[0]} inputs")
    if cg.depth != params.num_layers:
        raise ConfigurationError(f"Computation graph of depth {cg.depth} for a {params.num_layers}-layer encoder")


def forward_cached(params: SageParams, cg: ComputationGraph, features, normalize=True):
    """
        Forward pass keeping the intermediate values needed by
        backward_cached.

        Returns
        -------
        embeddings : ndarray shape (len(cg.layers[0]), out_dim)
        cache : dict
    """
    features = np.asarray(features, dtype=FLOAT_DTYPE)
    _check_inputs(params, cg, features)
    L = params.num_layers
    unique, inverse = np.unique(np.concatenate(cg.layers), return_inverse=True)
    bounds = np.cumsum([0] + [len(layer) for layer in cg.layers])
    index = [inverse[start:stop] for start, stop in zip(bounds[:-1], bounds[1:])]
    means = [cg.mean_operator(j) for j in range(L)]
    x_unique = features[unique]
    in_dim = params.dims[0]
    weight = params.weights[0]
    # projecting the unique rows first, mean aggregation commutes with the linear map
    self_proj, neigh_proj = x_unique @ weight[:, :in_dim].T, x_unique @ weight[:, in_dim:].T
    pre = [[self_proj[index[j]] + means[j] @ neigh_proj[index[j + 1]] + params.biases[0] for j in range(L)]]
    hidden = [np.maximum(z, 0.) for z in pre[0]]
    inputs = [None]
    for k in range(1, L):
        weight, in_dim = params.weights[k], params.dims[k]
        layer_inputs, layer_pre = [], []
        for j in range(L - k):
            own, neigh = hidden[j], means[j] @ hidden[j + 1]
            layer_inputs.append((own, neigh))
            layer_pre.append(own @ weight[:, :in_dim].T + neigh @ weight[:, in_dim:].T + params.biases[k])
        inputs.append(layer_inputs)
        pre.append(layer_pre)
        hidden = [np.maximum(z, 0.) for z in layer_pre]
    h = hidden[0]
    norms = np.linalg.norm(h, axis=1)
    if normalize:
        out = np.divide(h, norms[:, None], out=np.zeros_like(h), where=norms[:, None] > 0)
    else:
        out = h
    cache = {'index': index, 'means': means, 'x_unique': x_unique, 'unique_count': len(unique), 'pre': pre,
             'inputs': inputs, 'norms': norms, 'out': out, 'normalize': normalize}
    return out, cache


def backward_cached(params: SageParams, cache, upstream):
    """
        Reverse-mode pass through a cached forward.

        Parameters
        ----------
        params : SageParams
        cache : dict
            Second output of forward_cached
        upstream : ndarray shaped like the embeddings
            Gradient of a scalar with respect to the embeddings

        Returns
        -------
        grads : SageParams
            Gradient with respect to every weight and bias
    """
    out, norms = cache['out'], cache['norms']
    upstream = np.asarray(upstream, dtype=FLOAT_DTYPE)
    if upstream.size != out.size:
        raise ConfigurationError(f"Upstream gradient must be shaped {out.shape}")
    if cache['normalize']:
        # Jacobian of h/|h| is (I - z z^T)/|h|
        radial = np.sum(out * upstream, axis=1, keepdims=True)
        d_hidden = np.divide(upstream - out * radial, norms[:, None], out=np.zeros_like(out), where=norms[:, None] > 0)
    else:
        d_hidden = upstream
    L, index, means = params.num_layers, cache['index'], cache['means']
    grads = SageParams.zeros_like(params)
    d_layer = [d_hidden]
    for k in range(L - 1, -1, -1):
        weight, in_dim = params.weights[k], params.dims[k]
        depth = L - k
        if k > 0:
            d_previous = [np.zeros((len(index[j]), in_dim)) for j in range(depth + 1)]
        else:
            d_self = np.zeros((cache['unique_count'], weight.shape[0]))
            d_neigh = np.zeros_like(d_self)
        for j in range(depth):
            d_pre = d_layer[j] * (cache['pre'][k][j] > 0)
            grads.biases[k] += d_pre.sum(axis=0)
            if k > 0:
                own, neigh = cache['inputs'][k][j]
                grads.weights[k][:, :in_dim] += d_pre.T @ own
                grads.weights[k][:, in_dim:] += d_pre.T @ neigh
                d_previous[j] += d_pre @ weight[:, :in_dim]
                d_previous[j + 1] += means[j].T @ (d_pre @ weight[:, in_dim:])
            else:
                d_self += _scatter(index[j], cache['unique_count']) @ d_pre
                d_neigh += _scatter(index[j + 1], cache['unique_count']) @ (means[j].T @ d_pre)
        if k > 0:
            d_layer = d_previous
        else:
            grads.weights[0][:, :in_dim] += d_self.T @ cache['x_unique']
            grads.weights[0][:, in_dim:] += d_neigh.T @ cache['x_unique']
    return grads


def _scatter(index, size):
    return sparse.csr_matrix((np.ones(len(index)), (index, np.arange(len(index)))), shape=(size, len(index)))


def forward(params: SageParams, cg: ComputationGraph, features, normalize=True):
    """
        Embeddings of the computation graph roots: h^0 are the raw features,
        h^k = relu(W_k [h^(k-1) || mean of h^(k-1) over sampled children]
        + b_k), and the output is h^L scaled to unit norm (zero stays zero).

        Returns
        -------
        embedding : ndarray
            Vector for a single-root graph, (roots, out_dim) matrix
            otherwise
    """
    out, _ = forward_cached(params, cg, features, normalize=normalize)
    return out[0] if cg.single else out


def backward(params: SageParams, cg: ComputationGraph, features, upstream, normalize=True):
    """
        Gradient of <upstream, forward(params, cg, features)> with respect to
        the parameters.
    """
    _, cache = forward_cached(params, cg, features, normalize=normalize)
    return backward_cached(params, cache, upstream)


def embed(params: SageParams, g: Graph, cfg: SageConfig, seed, nodes=None, batch_size=1024):
    """
        Embeddings of the nodes of g, neighborhoods sampled from seed.

        Parameters
        ----------
        params : SageParams
        g : Graph
        cfg : SageConfig
        seed : int
        nodes : array-like
            Nodes to embed. Default to every node of g
        batch_size : int
            Roots per forward pass

        Returns
        -------
        embeddings : ndarray shape (len(nodes), out_dim)
    """
    rng = utils.make_rng(seed)
    nodes = np.arange(g.node_count) if nodes is None else np.asarray(nodes, dtype=np.int64)
    blocks = [np.zeros((0, params.dims[-1]))]
    for start in range(0, len(nodes), batch_size):
        cg = sample_computation_graph(g, nodes[start:start + batch_size], cfg, rng)
        blocks.append(forward_cached(params, cg, g.features)[0])
    return np.vstack(blocks)
