#!/usr/bin/env python
"""
Contains the DistanceOracle class definition and the functions building it.

Please note that this module is private. The DistanceOracle class is
available in the main ``cafin`` namespace - use that instead.
"""
from __future__ import annotations
from typing import TYPE_CHECKING
from concurrent.futures import ProcessPoolExecutor
import logging
import numpy as np
from scipy.sparse import csgraph

from . import utils
from .constants import *
from .errors import ArgumentError, CapacityError, ConsistencyError

if TYPE_CHECKING:
    from .Graph import Graph

__all__ = ['DistanceOracle', 'bfs_sssp', 'build_exact', 'build_landmark', 'query']

logger = logging.getLogger(__name__)

_MAGIC = b'CAFINDO1'
_ROWS_PER_TASK = 256


class DistanceOracle:
    """
        Answer hop-distance queries out of an exact all-pairs table or out of
        landmark-to-node distances.
    """
    def __init__(self, mode, node_count, exact_table=None, landmark_ids=None, landmark_dists=None,
                 diameter=None, sentinel=SENTINEL) -> None:
        """
            Parameters
            ----------
            mode : str
                Either '{EXACT}' or '{LANDMARK}'

            node_count : int
                Number of nodes of the graph the oracle was built on

            exact_table : array-like shape (n, n)
                Hop distances, exact mode only

            landmark_ids : array-like shape (l,)
            landmark_dists : array-like shape (l, n)
                Landmark ids and their hop distances to every node, landmark
                mode only

            diameter : int
                Largest finite distance of the tables. Computed if not given

            sentinel : int
                Value flagging unreachable pairs. Default to {SENTINEL}
        """
        self.__mode = mode
        self.__node_count = int(node_count)
        self.__sentinel = int(sentinel)
        if mode == EXACT:
            if exact_table is None:
                raise ArgumentError("Exact mode requires an exact table")
            self.__table = np.asarray(exact_table, dtype=DISTANCE_DTYPE)
            if self.__table.shape != (self.__node_count, self.__node_count):
                raise ConsistencyError(f"Exact table shaped {self.__table.shape} for {node_count} nodes")
            self.__landmark_ids = self.__landmark_dists = None
        elif mode == LANDMARK:
            if landmark_ids is None or landmark_dists is None:
                raise ArgumentError("Landmark mode requires landmark ids and distances")
            self.__table = None
            self.__landmark_ids = np.asarray(landmark_ids, dtype=np.int64)
            self.__landmark_dists = np.asarray(landmark_dists, dtype=DISTANCE_DTYPE)
            if self.__landmark_dists.shape != (len(self.__landmark_ids), self.__node_count):
                raise ConsistencyError(f"Landmark table shaped {self.__landmark_dists.shape} "
                                       f"for {len(self.__landmark_ids)} landmarks and {node_count} nodes")
        else:
            raise ArgumentError(f"Unknown oracle mode {mode!r}")
        self.__diameter = self._max_finite() if diameter is None else int(diameter)

    __init__.__doc__ = __init__.__doc__.format(EXACT=EXACT, LANDMARK=LANDMARK, SENTINEL=SENTINEL)

    def _max_finite(self):
        table = self.__table if self.mode == EXACT else self.__landmark_dists
        finite = table[table != self.sentinel]
        return int(finite.max()) if finite.size else 0

    @property
    def mode(self):
        return self.__mode

    @property
    def node_count(self):
        return self.__node_count

    @property
    def exact_table(self):
        return self.__table

    @property
    def landmark_ids(self):
        return self.__landmark_ids

    @property
    def landmark_dists(self):
        return self.__landmark_dists

    @property
    def landmark_count(self):
        return 0 if self.__landmark_ids is None else len(self.__landmark_ids)

    @property
    def diameter(self):
        return self.__diameter

    @property
    def sentinel(self):
        return self.__sentinel

    @property
    def nbytes(self):
        if self.mode == EXACT:
            return self.__table.nbytes
        return self.__landmark_dists.nbytes + self.__landmark_ids.nbytes

    def query(self, u, v):
        return int(self.query_many(np.array([u]), np.array([v]))[0])

    def query_many(self, us, vs):
        """
            Vectorized hop-distance queries.

            Parameters
            ----------
            us, vs : array-like
                Same-length arrays of node ids

            Returns
            -------
            distances : ndarray of int64
                Distances, sentinel for unreachable pairs or pairs without a
                finite landmark bound
        """
        us, vs = np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)
        if us.size and (min(us.min(), vs.min()) < 0 or max(us.max(), vs.max()) >= self.node_count):
            raise ArgumentError(f"Node ids must lie in [0, {self.node_count})")
        if self.mode == EXACT:
            distances = self.__table[us, vs].astype(np.int64)
        else:
            to_u = self.__landmark_dists[:, us].astype(np.int64)
            to_v = self.__landmark_dists[:, vs].astype(np.int64)
            reachable = (to_u != self.sentinel) & (to_v != self.sentinel)
            bounds = np.where(reachable, to_u + to_v, np.iinfo(np.int64).max)
            distances = bounds.min(axis=0) if len(self.__landmark_ids) else np.full(us.shape, self.sentinel)
            distances = np.where(distances >= self.sentinel, self.sentinel, distances)
        return np.where(us == vs, 0, distances)

    def save(self, path):
        header = {'mode': self.mode, 'n': self.node_count, 'l': self.landmark_count,
                  'diameter': self.diameter, 'sentinel': self.sentinel}
        arrays = [self.__table] if self.mode == EXACT else [self.__landmark_ids, self.__landmark_dists]
        utils.write_container(path, _MAGIC, header, arrays)

    @classmethod
    def load(cls, path):
        header, arrays = utils.read_container(path, _MAGIC)
        if header['mode'] == EXACT:
            return cls(EXACT, header['n'], exact_table=arrays[0], diameter=header['diameter'], sentinel=header['sentinel'])
        return cls(LANDMARK, header['n'], landmark_ids=arrays[0], landmark_dists=arrays[1],
                   diameter=header['diameter'], sentinel=header['sentinel'])

    @classmethod
    def from_landmarks(cls, g: Graph, landmark_ids):
        """
            Build a landmark oracle out of an explicit set of landmarks.
        """
        landmark_ids = np.asarray(landmark_ids, dtype=np.int64)
        if landmark_ids.size and (landmark_ids.min() < 0 or landmark_ids.max() >= g.node_count):
            raise ArgumentError(f"Landmark ids must lie in [0, {g.node_count})")
        if len(np.unique(landmark_ids)) != len(landmark_ids):
            raise ArgumentError("Landmarks must be distinct")
        dists = _bfs_rows(g.adjacency, landmark_ids)
        return cls(LANDMARK, g.node_count, landmark_ids=landmark_ids, landmark_dists=dists)

    def __repr__(self):
        extra = f", l={self.landmark_count}" if self.mode == LANDMARK else ""
        return f"{self.__class__.__name__}(mode={self.mode!r}, n={self.node_count}{extra}, diameter={self.diameter})"


def _to_hops(distances):
    unreachable = ~np.isfinite(distances)
    if np.any(distances[~unreachable] >= SENTINEL):
        raise CapacityError(f"Hop distances exceed the {DISTANCE_DTYPE.__name__} storage")
    hops = np.where(unreachable, SENTINEL, distances)
    return hops.astype(DISTANCE_DTYPE)


def _bfs_rows(adjacency, sources):
    if len(sources) == 0:
        return np.zeros((0, adjacency.shape[0]), dtype=DISTANCE_DTYPE)
    distances = csgraph.shortest_path(adjacency, method='D', directed=False, unweighted=True, indices=sources)
    return _to_hops(np.atleast_2d(distances))


def bfs_sssp(g: Graph, source):
    """
        Hop distances from a single source, sentinel {SENTINEL} for
        unreachable nodes.
    """
    if not 0 <= source < g.node_count:
        raise ArgumentError(f"Source {source} out of range [0, {g.node_count})")
    return _bfs_rows(g.adjacency, np.array([source]))[0]

bfs_sssp.__doc__ = bfs_sssp.__doc__.format(SENTINEL=SENTINEL)


def build_exact(g: Graph, workers=1, memory_budget=DEFAULT_MEMORY_BUDGET):
    """
        Exact all-pairs hop distances, one BFS per node.

        Parameters
        ----------
        g : Graph
        workers : int
            Number of worker processes sharing the BFS sources. Tables are
            identical for every worker count
        memory_budget : int
            Largest table size in bytes. Default to {DEFAULT_MEMORY_BUDGET}

        Returns
        -------
        oracle : DistanceOracle
    """
    n = g.node_count
    required = n * n * np.dtype(DISTANCE_DTYPE).itemsize
    if required > memory_budget:
        raise CapacityError(f"Exact distance table needs {required} bytes, over the budget of {memory_budget}",
                            hint="switch to landmark mode")
    chunks = [chunk for chunk in np.array_split(np.arange(n), max(1, -(-n // _ROWS_PER_TASK))) if len(chunk)]
    adjacency = g.adjacency
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            blocks = list(executor.map(_bfs_rows, [adjacency] * len(chunks), chunks))
    else:
        blocks = [_bfs_rows(adjacency, chunk) for chunk in chunks]
    table = np.vstack(blocks) if blocks else np.zeros((0, 0), dtype=DISTANCE_DTYPE)
    oracle = DistanceOracle(EXACT, n, exact_table=table)
    logger.info("Built %r with %d worker(s)", oracle, workers)
    return oracle

build_exact.__doc__ = build_exact.__doc__.format(DEFAULT_MEMORY_BUDGET=DEFAULT_MEMORY_BUDGET)


def build_landmark(g: Graph, l=DEFAULT_LANDMARKS, seed=None, strategy=RANDOM_LANDMARKS):
    """
        Landmark distances, one BFS per landmark.

        Parameters
        ----------
        g : Graph
        l : int
            Number of landmarks, between 1 and the node count. Default to
            {DEFAULT_LANDMARKS}
        seed : int or numpy Generator
            Seed of the landmark selection
        strategy : str
            '{RANDOM_LANDMARKS}' samples landmarks uniformly without
            replacement, '{DEGREE_LANDMARKS}' picks the highest-degree nodes
            (ties broken by node id)

        Returns
        -------
        oracle : DistanceOracle
    """
    if not 1 <= l <= g.node_count:
        raise ArgumentError(f"Landmark count {l} out of range [1, {g.node_count}]")
    if strategy == RANDOM_LANDMARKS:
        landmarks = utils.make_rng(seed).choice(g.node_count, size=l, replace=False)
    elif strategy == DEGREE_LANDMARKS:
        landmarks = np.lexsort((np.arange(g.node_count), -g.degrees))[:l]
    else:
        raise ArgumentError(f"Unknown landmark strategy {strategy!r}")
    oracle = DistanceOracle.from_landmarks(g, landmarks)
    logger.info("Built %r (%s landmarks)", oracle, strategy)
    return oracle

build_landmark.__doc__ = build_landmark.__doc__.format(DEFAULT_LANDMARKS=DEFAULT_LANDMARKS,
                                                       RANDOM_LANDMARKS=RANDOM_LANDMARKS,
                                                       DEGREE_LANDMARKS=DEGREE_LANDMARKS)


def query(o: DistanceOracle, u, v):
    return o.query(u, v)
