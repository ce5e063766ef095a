import numpy as np
import pytest

from cafin import Graph


def _graph(n, edges, feature_dim=4, seed=0, labels=None):
    features = np.random.default_rng(seed).normal(size=(n, feature_dim))
    return Graph.from_edges(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2), features, labels)


def _random_connected(n, extra_edges, rng, feature_dim=4):
    rng = np.random.default_rng(rng)
    tree = [(int(rng.integers(v)), v) for v in range(1, n)]
    extra = rng.integers(0, n, size=(extra_edges, 2))
    return _graph(n, np.vstack([np.array(tree, dtype=np.int64).reshape(-1, 2), extra]), feature_dim,
                  seed=int(rng.integers(2**31)))


def _sbm(n=100, p_in=0.2, p_out=0.01, seed=0, noise=0.1):
    rng = np.random.default_rng(seed)
    block = np.arange(n) % 2
    same = block[:, None] == block[None, :]
    draws = rng.random((n, n)) < np.where(same, p_in, p_out)
    u, v = np.nonzero(np.triu(draws, 1))
    tree = [(v - 2, v) for v in range(2, n)]  # keeps each block connected
    edges = np.vstack([np.column_stack([u, v]), np.array(tree)])
    features = np.eye(2)[block] + noise * rng.normal(size=(n, 2))
    return Graph.from_edges(n, edges, features, labels=block)


def _relabel(g, permutation):
    """
        Copy of g where node i becomes node permutation[i].
    """
    permutation = np.asarray(permutation)
    features, labels = np.empty_like(g.features), None
    features[permutation] = g.features
    if g.labels is not None:
        labels = np.empty_like(g.labels)
        labels[permutation] = g.labels
    return Graph.from_edges(g.node_count, permutation[g.edges()], features, labels)


@pytest.fixture
def make_graph():
    return _graph


@pytest.fixture
def random_connected():
    return _random_connected


@pytest.fixture
def sbm():
    return _sbm


@pytest.fixture
def relabel():
    return _relabel


@pytest.fixture
def triangle():
    return _graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path5():
    return _graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])


@pytest.fixture
def star():
    return _graph(6, [(0, leaf) for leaf in range(1, 6)])


@pytest.fixture
def two_components():
    return _graph(5, [(0, 1), (1, 2), (0, 2), (3, 4)])


def write_dataset(directory, graph, multilabel=False):
    """
        Write a graph as edge, feature and label files.
    """
    directory.mkdir(parents=True, exist_ok=True)
    np.savetxt(directory / 'edges.txt', graph.edges(), fmt='%d')
    np.savetxt(directory / 'features.txt', graph.features, delimiter=',')
    labels = graph.labels
    if multilabel:
        labels = np.column_stack([labels, 1 - labels])
    np.savetxt(directory / 'labels.txt', labels, fmt='%d')
    return directory / 'edges.txt', directory / 'features.txt', directory / 'labels.txt'


@pytest.fixture
def toy_dataset(tmp_path):
    return write_dataset(tmp_path / 'data', _sbm(n=200, p_in=0.08, p_out=0.01, seed=3))


@pytest.fixture
def dataset_writer():
    return write_dataset
