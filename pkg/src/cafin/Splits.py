#!/usr/bin/env python
"""
Contains the NodeSplitBundle and EdgeSplitBundle class definitions and the
functions building the inductive train/evaluation splits.

Please note that this module is private. The split classes are available
in the main ``cafin`` namespace - use that instead.
"""
from __future__ import annotations
from dataclasses import dataclass
from warnings import warn
import logging
import pathlib
import numpy as np

from . import utils
from .constants import *
from .errors import ArgumentError, CapacityError, ParseError
from .Graph import Graph, induced_subgraph

__all__ = ['NodeSplitBundle', 'EdgeSplitBundle', 'node_split', 'edge_split', 'allocate', 'write_manifest', 'read_manifest']

logger = logging.getLogger(__name__)

_MANIFEST_TITLE = '# cafin split manifest'


def allocate(total, ratios):
    """
        Split a total count along ratios: floor every share, then hand the
        remainder out by decreasing fractional part (earlier shares first on
        ties).
    """
    exact = np.asarray(ratios, dtype=np.float64) * total
    sizes = np.floor(exact + 1e-9).astype(np.int64)
    remainder = total - int(sizes.sum())
    order = np.argsort(-(exact - sizes), kind='stable')
    sizes[order[:remainder]] += 1
    return [int(size) for size in sizes]


def _write_sections(path, task, seed, sections):
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as out:
        out.write(f"{_MANIFEST_TITLE}\ntask {task}\nseed {seed}\n")
        for name, values in sections.items():
            out.write(f"[{name}]\n")
            values = np.asarray(values)
            for row in (values.reshape(len(values), -1) if len(values) else []):
                out.write(' '.join(map(str, row)) + '\n')


def _read_sections(path):
    header, sections, current = {}, {}, None
    with open(path) as stream:
        for line_number, line in enumerate(stream, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            if line.startswith('[') and line.endswith(']'):
                current = line[1:-1]
                sections[current] = []
            elif current is None:
                key, _, value = line.partition(' ')
                header[key] = value
            else:
                try:
                    sections[current].append([int(token) for token in line.split()])
                except ValueError:
                    raise ParseError(path, line_number, f"expected integer ids, got {line!r}") from None
    return header, sections


@dataclass(frozen=True)
class NodeSplitBundle:
    """
        Vertex-induced subgraphs for node classification: g1 trains the
        encoder, g2 the downstream classifier, g3 evaluates it. Each
        subgraph records its parent node ids in parent_ids.
    """
    g1: Graph
    g2: Graph
    g3: Graph
    seed: int = None

    @property
    def graphs(self):
        return self.g1, self.g2, self.g3

    def to_manifest(self, path):
        _write_sections(path, NODE_CLASSIFICATION, self.seed,
                        {name: graph.parent_ids for name, graph in zip(('g1', 'g2', 'g3'), self.graphs)})


@dataclass(frozen=True)
class EdgeSplitBundle:
    """
        Edge splits for link prediction: g1 holds the training edges over all
        nodes, the positive and negative pairs of g2 train the downstream
        classifier and those of g3 evaluate it.
    """
    g1: Graph
    g2_pos: np.ndarray
    g2_neg: np.ndarray
    g3_pos: np.ndarray
    g3_neg: np.ndarray
    seed: int = None

    def pairs(self, part):
        """
            Pairs and binary targets of part 'g2' or 'g3', positives first.
        """
        pos, neg = (self.g2_pos, self.g2_neg) if part == 'g2' else (self.g3_pos, self.g3_neg)
        return np.vstack([pos, neg]), np.concatenate([np.ones(len(pos), dtype=np.int64), np.zeros(len(neg), dtype=np.int64)])

    def to_manifest(self, path):
        _write_sections(path, LINK_PREDICTION, self.seed,
                        {'g1': self.g1.edges(), 'g2_pos': self.g2_pos, 'g2_neg': self.g2_neg,
                         'g3_pos': self.g3_pos, 'g3_neg': self.g3_neg})


def write_manifest(bundle, path):
    bundle.to_manifest(path)


def read_manifest(g: Graph, path):
    """
        Rebuild the split bundle recorded in a manifest for graph g.
    """
    header, sections = _read_sections(path)
    seed = None if header.get('seed') in (None, 'None') else int(header['seed'])
    edges = {name: np.array(rows, dtype=np.int64).reshape(-1, 2) for name, rows in sections.items()}
    if header.get('task') == NODE_CLASSIFICATION:
        parts = [induced_subgraph(g, np.array(sections[name], dtype=np.int64).ravel())[0] for name in ('g1', 'g2', 'g3')]
        return NodeSplitBundle(*parts, seed=seed)
    g1 = Graph.from_edges(g.node_count, edges['g1'], g.features, g.labels, parent_ids=np.arange(g.node_count))
    return EdgeSplitBundle(g1, edges['g2_pos'], edges['g2_neg'], edges['g3_pos'], edges['g3_neg'], seed=seed)


def _check_label_coverage(bundle: NodeSplitBundle):
    if bundle.g2.labels is None or bundle.g2.is_multilabel:
        return
    missing = np.setdiff1d(np.unique(bundle.g3.labels), np.unique(bundle.g2.labels))
    if missing.size:
        warn(f"Classes {missing.tolist()} appear in g3 but not in g2", UserWarning, stacklevel=3)


def node_split(g: Graph, seed, ratios=DEFAULT_SPLIT_RATIOS):
    """
        Random 60/30/10 node partition into vertex-induced subgraphs.

        Parameters
        ----------
        g : Graph
            Graph with at least 10 nodes
        seed : int
            Seed of the partition
        ratios : tuple of 3 floats
            Shares of g1, g2 and g3. Default to {DEFAULT_SPLIT_RATIOS}

        Returns
        -------
        bundle : NodeSplitBundle
    """
    if g.node_count < 10:
        raise ArgumentError(f"Node split needs at least 10 nodes, got {g.node_count}")
    sizes = allocate(g.node_count, ratios)
    permutation = utils.make_rng(seed).permutation(g.node_count)
    bounds = np.cumsum([0] + sizes)
    parts = [induced_subgraph(g, permutation[start:stop])[0] for start, stop in zip(bounds[:-1], bounds[1:])]
    bundle = NodeSplitBundle(*parts, seed=seed)
    _check_label_coverage(bundle)
    logger.info("Node split %s with seed %s", sizes, seed)
    return bundle

node_split.__doc__ = node_split.__doc__.format(DEFAULT_SPLIT_RATIOS=DEFAULT_SPLIT_RATIOS)


def _sample_non_edges(g: Graph, count, rng, max_trials):
    n = g.node_count
    available = n * (n - 1) // 2 - g.edge_count
    if available < count:
        raise CapacityError(f"Graph holds {available} non-adjacent pairs, {count} negative pairs requested",
                            hint="use a sparser graph")
    chosen, keys = [], set()
    trials = 0
    while len(chosen) < count:
        if trials >= max_trials:
            raise CapacityError(f"Found {len(chosen)} of {count} negative pairs after {trials} trials",
                                hint="the graph is too dense for rejection sampling")
        batch = max(2 * (count - len(chosen)), 16)
        pairs = np.sort(rng.integers(0, n, size=(batch, 2)), axis=1)
        trials += batch
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        pairs = pairs[~g.has_edge(pairs[:, 0], pairs[:, 1])]
        for u, v in pairs:
            key = int(u) * n + int(v)
            if key not in keys:
                keys.add(key)
                chosen.append((int(u), int(v)))
                if len(chosen) == count:
                    break
    return np.array(chosen, dtype=np.int64).reshape(-1, 2)


def edge_split(g: Graph, seed, train_ratio=DEFAULT_EDGE_TRAIN_RATIO, trials_factor=DEFAULT_NEG_TRIALS_FACTOR):
    """
        Random edge split for link prediction: 60% of the undirected edges
        train the encoder, the rest is split equally into the positive pairs
        of g2 and g3, each matched by as many sampled non-adjacent pairs.

        Parameters
        ----------
        g : Graph
            Graph with at least 10 edges
        seed : int
            Seed of the split and of the negative sampling
        train_ratio : float
            Share of edges kept in g1. Default to {DEFAULT_EDGE_TRAIN_RATIO}
        trials_factor : int
            Negative sampling gives up after trials_factor times the number
            of requested pairs

        Returns
        -------
        bundle : EdgeSplitBundle
    """
    held_out = (1. - train_ratio) / 2
    sizes = allocate(g.edge_count, (train_ratio, held_out, held_out))
    # complete graphs fail on the missing non-edges whatever their size
    if g.node_count * (g.node_count - 1) // 2 - g.edge_count < sizes[1] + sizes[2]:
        raise CapacityError(f"Graph is too dense to sample {sizes[1] + sizes[2]} non-adjacent pairs",
                            hint="use a sparser graph")
    if g.edge_count < 10:
        raise ArgumentError(f"Edge split needs at least 10 edges, got {g.edge_count}")
    rng = utils.make_rng(seed)
    edges = g.edges()[rng.permutation(g.edge_count)]
    bounds = np.cumsum([0] + sizes)
    train, g2_pos, g3_pos = (edges[start:stop] for start, stop in zip(bounds[:-1], bounds[1:]))
    negatives = _sample_non_edges(g, len(g2_pos) + len(g3_pos), rng, trials_factor * (len(g2_pos) + len(g3_pos)))
    g1 = Graph.from_edges(g.node_count, train, g.features, g.labels, parent_ids=np.arange(g.node_count))
    bundle = EdgeSplitBundle(g1, g2_pos, negatives[:len(g2_pos)], g3_pos, negatives[len(g2_pos):], seed=seed)
    logger.info("Edge split %s with seed %s", sizes, seed)
    return bundle

edge_split.__doc__ = edge_split.__doc__.format(DEFAULT_EDGE_TRAIN_RATIO=DEFAULT_EDGE_TRAIN_RATIO)
