#!/usr/bin/env python
"""
Contains the Graph and GroupAssignment class definitions, together with
the graph loading, centrality and subgraph functions.

Please note that this module is private. The Graph class is available in
the main ``cafin`` namespace - use that instead.
"""
from __future__ import annotations
from warnings import warn
import logging
import pathlib
import numpy as np
import pandas as pd
from scipy import sparse

from . import utils
from .constants import *
from .errors import ParseError, ConsistencyError, ArgumentError, ArtifactError

__all__ = ['Graph', 'GroupAssignment', 'load_edge_list', 'degree_centrality', 'median_group_split',
           'induced_subgraph']

logger = logging.getLogger(__name__)


class Graph:
    """
        Immutable undirected simple graph stored in CSR form, with a dense
        node feature matrix and optional labels.
    """
    def __init__(self, csr_offsets, csr_neighbors, features, labels=None, parent_ids=None, metadata=None) -> None:
        """
            Parameters
            ----------
            csr_offsets : array-like shape (node_count+1,)
                Offsets of each node neighbor list in csr_neighbors

            csr_neighbors : array-like
                Concatenated sorted neighbor lists

            features : array-like shape (node_count, feature_dim)
                Dense real-valued node features

            labels : array-like shape (node_count,) or (node_count, class_count)
                Optional class id per node, or binary label matrix for
                multi-label data

            parent_ids : array-like shape (node_count,)
                Ids of the nodes in the graph this one was extracted from, if
                any

            metadata : dict
                Loading statistics and free-form annotations
        """
        self.__csr_offsets = self.__freeze(np.array(csr_offsets, dtype=np.int64))
        self.__csr_neighbors = self.__freeze(np.array(csr_neighbors, dtype=np.int64))
        self.__features = self.__freeze(np.atleast_2d(np.array(features, dtype=FLOAT_DTYPE)))
        self.__labels = None if labels is None else self.__freeze(np.array(labels, dtype=np.int64))
        self.__parent_ids = None if parent_ids is None else self.__freeze(np.array(parent_ids, dtype=np.int64))
        self.__metadata = dict(metadata or {})
        self.__degrees = None
        self.__adjacency = None
        self._check_invariants()

    @staticmethod
    def __freeze(array):
        array.flags.writeable = False
        return array

    @classmethod
    def from_edges(cls, node_count, edges, features, labels=None, **kwargs):
        """
            Build a graph out of an undirected edge array, symmetrizing it
            and dropping self-loops and duplicates.

            Parameters
            ----------
            node_count : int
                Number of nodes
            edges : array-like shape (m, 2)
                Edge endpoints, in any direction
            features, labels
                See constructor

            Returns
            -------
            graph : Graph
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= node_count):
            raise ArgumentError(f"Edge endpoints must lie in [0, {node_count})")
        edges = edges[edges[:, 0] != edges[:, 1]]
        pairs = np.unique(np.sort(edges, axis=1), axis=0)
        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        order = np.lexsort((cols, rows))
        offsets = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=node_count))])
        return cls(offsets, cols[order], features, labels, **kwargs)

    def _check_invariants(self):
        offsets, neighbors = self.csr_offsets, self.csr_neighbors
        if offsets.ndim != 1 or len(offsets) < 1 or offsets[0] != 0:
            raise ConsistencyError("CSR offsets must be a 1-d array starting at 0")
        if np.any(np.diff(offsets) < 0):
            raise ConsistencyError("CSR offsets must be non-decreasing")
        if offsets[-1] != len(neighbors):
            raise ConsistencyError("Last CSR offset must equal the number of neighbor entries")
        n = self.node_count
        if neighbors.size and (neighbors.min() < 0 or neighbors.max() >= n):
            raise ConsistencyError("Neighbor ids out of range")
        if self.features.shape[0] != n:
            raise ConsistencyError(f"Feature matrix has {self.features.shape[0]} rows for {n} nodes")
        if self.labels is not None and self.labels.shape[0] != n:
            raise ConsistencyError(f"Labels hold {self.labels.shape[0]} rows for {n} nodes")
        if self.parent_ids is not None and self.parent_ids.shape != (n,):
            raise ConsistencyError("Parent ids must hold one id per node")
        rows = np.repeat(np.arange(n), self.degrees)
        if np.any(rows == neighbors):
            raise ConsistencyError("Graph must not hold self-loops")
        if neighbors.size:
            same_row = rows[1:] == rows[:-1]
            if np.any(neighbors[1:][same_row] <= neighbors[:-1][same_row]):
                raise ConsistencyError("Neighbor lists must be sorted without duplicates")
        asymmetry = self.adjacency - self.adjacency.T
        if asymmetry.count_nonzero():
            raise ConsistencyError("Graph must be undirected")

    @property
    def node_count(self):
        return len(self.__csr_offsets) - 1

    @property
    def csr_offsets(self):
        return self.__csr_offsets

    @property
    def csr_neighbors(self):
        return self.__csr_neighbors

    @property
    def features(self):
        return self.__features

    @property
    def feature_dim(self):
        return self.features.shape[1]

    @property
    def labels(self):
        return self.__labels

    @property
    def is_multilabel(self):
        return self.labels is not None and self.labels.ndim == 2

    @property
    def class_count(self):
        if self.labels is None:
            return 0
        if self.is_multilabel:
            return self.labels.shape[1]
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def parent_ids(self):
        return self.__parent_ids

    @property
    def metadata(self):
        return self.__metadata

    @property
    def degrees(self):
        if self.__degrees is None:
            self.__degrees = self.__freeze(np.diff(self.csr_offsets))
        return self.__degrees

    @property
    def max_degree(self):
        return int(self.degrees.max()) if self.node_count else 0

    @property
    def edge_count(self):
        """
            Number of undirected edges
        """
        return len(self.csr_neighbors) // 2

    @property
    def adjacency(self):
        """
            scipy CSR adjacency matrix with unit entries
        """
        if self.__adjacency is None:
            n = self.node_count
            self.__adjacency = sparse.csr_matrix(
                (np.ones(len(self.csr_neighbors), dtype=np.int8), self.csr_neighbors.copy(), self.csr_offsets.copy()), shape=(n, n))
        return self.__adjacency

    def neighbors(self, node):
        return self.csr_neighbors[self.csr_offsets[node]:self.csr_offsets[node + 1]]

    def edges(self):
        """
            Undirected edges as an (m, 2) array with u < v, sorted.
        """
        rows = np.repeat(np.arange(self.node_count), self.degrees)
        mask = rows < self.csr_neighbors
        return np.column_stack([rows[mask], self.csr_neighbors[mask]])

    def has_edge(self, u, v):
        """
            Vectorized adjacency test.
        """
        u, v = np.broadcast_arrays(np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64))
        if u.size == 0:
            return np.zeros(u.shape, dtype=bool)
        found = np.asarray(self.adjacency[u.ravel(), v.ravel()]).ravel() != 0
        return found.reshape(u.shape) if u.ndim else bool(found[0])

    def summary(self):
        return {'nodes': self.node_count,
                'edges': int(len(self.csr_neighbors)),
                'features': self.feature_dim,
                'classes': self.class_count,
                'multilabel': self.is_multilabel}

    def __repr__(self):
        return f"{self.__class__.__name__}(nodes={self.node_count}, edges={self.edge_count}, features={self.feature_dim})"


class GroupAssignment:
    """
        Split of the nodes into popular and unpopular groups around the
        median centrality.
    """
    def __init__(self, centrality, median) -> None:
        self.__centrality = np.asarray(centrality, dtype=FLOAT_DTYPE)
        self.__centrality.flags.writeable = False
        self.__median = float(median)
        self.__popular = self.__centrality >= self.__median
        self.__popular.flags.writeable = False

    @property
    def centrality(self):
        return self.__centrality

    @property
    def median(self):
        return self.__median

    @property
    def popular(self):
        """
            Boolean mask of the popular nodes
        """
        return self.__popular

    @property
    def group(self):
        return np.where(self.popular, POPULAR, UNPOPULAR)

    @property
    def popular_count(self):
        return int(self.popular.sum())

    @property
    def unpopular_count(self):
        return len(self) - self.popular_count

    def __len__(self):
        return len(self.__centrality)

    def to_frame(self):
        return pd.DataFrame({'node': np.arange(len(self)), 'centrality': self.centrality, 'group': self.group})


def _check_exists(path, key):
    if not path.is_file():
        raise ArtifactError(f"Missing {key} file {path} (check the {key} entry of the [data] section)")
    return path


def _read_rows(path, dtype):
    rows = []
    with open(path) as stream:
        for line_number, line in enumerate(stream, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            tokens = line.replace(',', ' ').split()
            try:
                row = np.array(tokens, dtype=np.float64)
            except ValueError:
                raise ParseError(path, line_number, f"cannot parse {line!r} as numbers") from None
            if np.issubdtype(dtype, np.integer) and not np.all(row == np.round(row)):
                raise ParseError(path, line_number, f"expected integers, got {line!r}")
            if rows and len(row) != len(rows[0]):
                raise ParseError(path, line_number, f"expected {len(rows[0])} values, got {len(row)}")
            rows.append(row)
    if not rows:
        return np.zeros((0, 0), dtype=dtype)
    return np.array(rows).astype(dtype)


def _read_edges(path):
    edges = []
    with open(path) as stream:
        for line_number, line in enumerate(stream, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise ParseError(path, line_number, f"expected 2 node ids, got {line!r}")
            try:
                u, v = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise ParseError(path, line_number, f"node ids must be integers, got {line!r}") from None
            if u < 0 or v < 0:
                raise ParseError(path, line_number, "node ids must be non-negative")
            edges.append((u, v))
    return np.array(edges, dtype=np.int64).reshape(-1, 2)


def load_edge_list(path, feature_path, label_path=None):
    """
        Load a graph out of text files.

        Parameters
        ----------
        path : path-like
            Edge list file, one whitespace-separated pair of 0-based node ids
            per line
        feature_path : path-like
            Dense feature matrix, one comma- or whitespace-separated row per
            node
        label_path : path-like
            Optional labels, one integer per row or one binary row per node
            for multi-label data

        Returns
        -------
        graph : Graph
            The symmetrized graph, with self-loops and duplicate edges
            dropped. Their counts are stored in graph.metadata
    """
    path = _check_exists(pathlib.Path(path), 'edges')
    feature_path = _check_exists(pathlib.Path(feature_path), 'features')
    if label_path is not None:
        label_path = _check_exists(pathlib.Path(label_path), 'labels')
    edges = _read_edges(path)
    features = _read_rows(feature_path, FLOAT_DTYPE)
    node_count = features.shape[0]
    if edges.size and edges.max() >= node_count:
        raise ConsistencyError(f"Edge list {path} references node {int(edges.max())} "
                               f"but {feature_path} only holds {node_count} feature rows")
    labels = None
    if label_path is not None:
        labels = _read_rows(label_path, np.int64)
        if labels.shape[0] != node_count:
            raise ConsistencyError(f"Label file {label_path} holds {labels.shape[0]} rows for {node_count} nodes")
        if labels.shape[1] == 1:
            labels = labels[:, 0]
    self_loops = int(np.sum(edges[:, 0] == edges[:, 1]))
    directed = edges[edges[:, 0] != edges[:, 1]]
    duplicates = len(directed) - len(np.unique(directed, axis=0))
    metadata = {'source': str(path), 'self_loops_dropped': self_loops, 'duplicates_dropped': int(duplicates)}
    if self_loops or duplicates:
        warn(f"Dropped {self_loops} self-loop(s) and {duplicates} duplicate edge(s) from {path}", UserWarning, stacklevel=2)
    graph = Graph.from_edges(node_count, directed, features, labels, metadata=metadata)
    logger.info("Loaded %r from %s", graph, path)
    return graph


def degree_centrality(g: Graph):
    """
        Degree of every node, one pass over the CSR offsets.
    """
    return np.diff(g.csr_offsets)


def median_group_split(centrality):
    """
        Assign nodes with centrality at or above the median to the popular
        group and the others to the unpopular group.

        Parameters
        ----------
        centrality : array-like
            Non-negative centrality per node

        Returns
        -------
        groups : GroupAssignment
    """
    centrality = np.asarray(centrality, dtype=FLOAT_DTYPE)
    if centrality.ndim != 1 or centrality.size == 0:
        raise ArgumentError("Centrality must be a non-empty vector")
    return GroupAssignment(centrality, np.median(centrality))


def induced_subgraph(g: Graph, nodes):
    """
        Vertex-induced subgraph.

        Parameters
        ----------
        g : Graph
        nodes : array-like
            Node ids to keep

        Returns
        -------
        subgraph : Graph
            Nodes renumbered by increasing parent id, parent ids recorded in
            subgraph.parent_ids
        old_to_new : ndarray shape (g.node_count,)
            New id of every parent node, -1 for dropped nodes
    """
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    if nodes.size and (nodes[0] < 0 or nodes[-1] >= g.node_count):
        raise ArgumentError(f"Subgraph node ids must lie in [0, {g.node_count})")
    old_to_new = np.full(g.node_count, -1, dtype=np.int64)
    old_to_new[nodes] = np.arange(len(nodes))
    positions, counts = utils.csr_ranges(g.csr_offsets, nodes)
    rows = np.repeat(np.arange(len(nodes)), counts)
    cols = old_to_new[g.csr_neighbors[positions]]
    keep = cols >= 0
    offsets = np.concatenate([[0], np.cumsum(np.bincount(rows[keep], minlength=len(nodes)))])
    labels = None if g.labels is None else g.labels[nodes]
    parent_ids = nodes if g.parent_ids is None else g.parent_ids[nodes]
    subgraph = Graph(offsets, cols[keep], g.features[nodes], labels, parent_ids=parent_ids)
    return subgraph, old_to_new
