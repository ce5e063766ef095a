import numpy as np
import pytest

from cafin import (DistanceOracle, LossConfig, TrainTriple, TrainingContext, SageConfig, SageParams,
                   sample_positive, sample_negative, base_loss, fairness_term, total_loss, build_exact,
                   sample_computation_graph, backward, ConfigurationError)
from cafin.Losses import sample_negatives
from cafin.SageEncoder import forward_cached
from cafin.constants import EXACT, BASELINE, CAFIN_FULL, CAFIN_P, CAFIN_N, VARIANTS
from cafin.utils import numerical_gradient, relative_error


def _oracle(table, diameter=None):
    table = np.asarray(table)
    return DistanceOracle(EXACT, len(table), exact_table=table, diameter=diameter)


def test_loss_config_validation():
    assert LossConfig().alpha == 0.05 and LossConfig().k == 2.0 and LossConfig().Q == 1
    for kwargs in ({'alpha': -1}, {'k': 0}, {'Q': 0}, {'variant': 'Other'}):
        with pytest.raises(ConfigurationError):
            LossConfig(**kwargs)
    assert LossConfig(alpha=0, variant=CAFIN_FULL).effective_variant == BASELINE


def test_positive_on_a_path_is_forced(make_graph):
    g = make_graph(2, [(0, 1)])
    assert all(sample_positive(g, 0, 5, seed) == 1 for seed in range(5))


def test_positive_support(triangle, star):
    rng = np.random.default_rng(0)
    assert {sample_positive(triangle, 0, 5, rng) for _ in range(50)} == {1, 2}
    assert all(sample_positive(star, 0, 5, rng) in range(1, 6) for _ in range(20))


def test_isolated_anchor_has_no_positive(make_graph):
    g = make_graph(3, [(0, 1)])
    assert sample_positive(g, 2, 5, 0) is None


def test_negative_respects_the_threshold(path5):
    oracle = build_exact(path5)
    cfg = LossConfig(min_neg_threshold=3, neg_retries=40)
    rng = np.random.default_rng(0)
    for _ in range(30):
        assert sample_negative(path5, 0, oracle, cfg, rng) in (3, 4)


def test_threshold_one_accepts_any_other_node(path5):
    oracle = build_exact(path5)
    cfg = LossConfig(min_neg_threshold=1)
    draws = {sample_negative(path5, 2, oracle, cfg, seed) for seed in range(60)}
    assert draws == {0, 1, 3, 4}


def test_unreachable_nodes_are_admissible(two_components):
    oracle = build_exact(two_components)
    cfg = LossConfig(min_neg_threshold=3, neg_retries=40)
    rng = np.random.default_rng(1)
    assert all(sample_negative(two_components, 0, oracle, cfg, rng) in (3, 4) for _ in range(20))


def test_negative_falls_back_to_the_farthest_candidate(triangle):
    oracle = build_exact(triangle)
    cfg = LossConfig(min_neg_threshold=3, neg_retries=4)
    assert sample_negative(triangle, 0, oracle, cfg, 0) in (1, 2)
    assert len(sample_negatives(triangle, 0, oracle, LossConfig(Q=3), 0)) == 3


def test_base_loss_values():
    zero = np.zeros(3)
    loss = base_loss(zero, zero, zero[None, :], Q=1)
    assert loss.value == pytest.approx(2 * np.log(2))
    big = 50 * np.ones(1)
    saturated = base_loss(big, big, -big[None, :])
    assert saturated.value == pytest.approx(0., abs=1e-12)
    overflow = base_loss(1e4 * np.ones(1), -1e4 * np.ones(1), 1e4 * np.ones((1, 1)))
    assert np.isfinite(overflow.value) and np.all(np.isfinite(overflow.grad_u))


def test_base_loss_gradients():
    rng = np.random.default_rng(0)
    for _ in range(10):
        z_u, z_v, z_negs = rng.normal(size=4), rng.normal(size=4), rng.normal(size=(3, 4))
        loss = base_loss(z_u, z_v, z_negs, Q=3)
        for analytic, point in ((loss.grad_u, z_u), (loss.grad_v, z_v), (loss.grad_negs, z_negs)):
            numeric = numerical_gradient(lambda _: float(base_loss(z_u, z_v, z_negs).value), point)
            assert relative_error(analytic, numeric) < 1e-6


def test_fairness_worked_example():
    oracle = _oracle([[0, 1], [1, 0]], diameter=4)
    degrees = np.array([2, 2])
    term = fairness_term(0, 1, np.zeros(2), np.array([1., 0.]), degrees, oracle, 4, 10, k=2.)
    assert term.value == pytest.approx(5 * np.log(2)**2)
    assert term.value == pytest.approx(2.4023, abs=1e-4)


def test_fairness_zero_point_and_symmetry():
    oracle = _oracle([[0, 2], [2, 0]], diameter=4)
    degrees = np.array([3, 3])
    at_zero = fairness_term(0, 1, np.zeros(2), np.array([1., 0.]), degrees, oracle, 4, 6, k=2.)
    assert at_zero.value == pytest.approx(0., abs=1e-15)
    assert np.allclose(at_zero.grad_u, 0.)
    doubled = fairness_term(0, 1, np.zeros(2), np.array([2., 0.]), degrees, oracle, 4, 6, k=2.)
    halved = fairness_term(0, 1, np.zeros(2), np.array([.5, 0.]), degrees, oracle, 4, 6, k=2.)
    assert doubled.value == pytest.approx(halved.value)


def test_fairness_decreases_with_degree():
    oracle = _oracle([[0, 1], [1, 0]], diameter=3)
    values = [fairness_term(0, 1, np.zeros(2), np.array([.3, .4]), np.array([degree, 1]), oracle, 3, 20).value
              for degree in range(1, 21)]
    assert np.all(np.diff(values) < 0)


def test_fairness_skips():
    oracle = _oracle([[0, 1, 65535], [1, 0, 65535], [65535, 65535, 0]], diameter=1)
    z = np.array([[1., 0.], [0., 1.], [1., 1.]])
    same = fairness_term(0, 0, z[0], z[0], np.array([1, 1, 0]), oracle, 1, 1)
    unreachable = fairness_term(0, 2, z[0], z[2], np.array([1, 1, 0]), oracle, 1, 1)
    isolated = fairness_term(2, 0, z[2], z[0], np.array([1, 1, 0]), oracle, 1, 1)
    for term in (same, unreachable, isolated):
        assert term.skipped and term.value == 0. and not term.grad_u.any()
    batch = fairness_term(np.array([0, 0, 1]), np.array([1, 2, 0]), z[[0, 0, 1]], z[[1, 2, 0]],
                          np.array([1, 1, 0]), oracle, 1, 1)
    assert batch.skipped.tolist() == [False, True, False]


def test_fairness_clamps_coincident_embeddings():
    oracle = _oracle([[0, 1], [1, 0]], diameter=2)
    term = fairness_term(0, 1, np.ones(2), np.ones(2), np.array([1, 1]), oracle, 2, 1)
    assert np.isfinite(term.value) and term.value > 0
    assert not term.grad_u.any()


def test_fairness_gradients():
    rng = np.random.default_rng(3)
    oracle = _oracle([[0, 2], [2, 0]], diameter=5)
    for _ in range(10):
        z_u, z_v = rng.normal(size=3), rng.normal(size=3)
        term = fairness_term(0, 1, z_u, z_v, np.array([2, 4]), oracle, 5, 7)
        for analytic, point in ((term.grad_u, z_u), (term.grad_v, z_v)):
            numeric = numerical_gradient(
                lambda _: float(fairness_term(0, 1, z_u, z_v, np.array([2, 4]), oracle, 5, 7).value), point)
            assert relative_error(analytic, numeric) < 1e-6


@pytest.fixture
def context(path5):
    oracle = build_exact(path5)
    return TrainingContext.from_graph(path5, oracle)


def _embeddings(rng, batch=4, Q=2, dim=3):
    return rng.normal(size=(batch, dim)), rng.normal(size=(batch, dim)), rng.normal(size=(batch, Q, dim))


def test_zero_alpha_is_the_baseline(context):
    rng = np.random.default_rng(0)
    triple = TrainTriple(np.array([0, 1, 2, 3]), np.array([1, 2, 3, 4]), np.array([[3, 4], [4, 4], [0, 0], [0, 1]]))
    embeddings = _embeddings(rng)
    baseline = total_loss(triple, embeddings, LossConfig(variant=BASELINE, Q=2), context)
    for variant in VARIANTS:
        loss = total_loss(triple, embeddings, LossConfig(alpha=0., variant=variant, Q=2), context)
        assert np.array_equal(loss.total, baseline.total)
        assert np.array_equal(loss.grad_u, baseline.grad_u)


def test_partial_variants_add_up(context):
    rng = np.random.default_rng(1)
    triple = TrainTriple(np.array([0, 1, 4]), np.array([1, 3, 2]), np.array([[3, 4], [4, 4], [0, 1]]))
    embeddings = _embeddings(rng, batch=3)
    parts = {variant: total_loss(triple, embeddings, LossConfig(variant=variant, Q=2), context)
             for variant in VARIANTS}
    assert np.allclose(parts[CAFIN_P].fairness + parts[CAFIN_N].fairness, parts[CAFIN_FULL].fairness)
    assert np.allclose(parts[BASELINE].fairness, 0.)
    assert np.allclose(parts[CAFIN_FULL].total, parts[BASELINE].total + 0.05 * parts[CAFIN_FULL].fairness)


@pytest.mark.parametrize('variant', VARIANTS)
def test_joint_loss_gradient_with_respect_to_the_encoder(random_connected, variant):
    rng = np.random.default_rng(VARIANTS.index(variant))
    for _ in range(20):
        n = int(rng.integers(6, 30))
        g = random_connected(n, int(rng.integers(0, n)), rng, feature_dim=3)
        context = TrainingContext.from_graph(g, build_exact(g))
        cfg = SageConfig(num_layers=2, hidden_dim=int(rng.integers(2, 9)), fanouts=[3, 3],
                         seed=int(rng.integers(1000)))
        params = SageParams.initialize(g.feature_dim, cfg)
        for bias in params.biases:
            bias += 0.1
        loss_cfg = LossConfig(alpha=0.5, variant=variant)
        u = rng.choice(n, size=3)
        triple = TrainTriple(u, np.array([g.neighbors(x)[0] for x in u]), rng.choice(n, size=(3, 1)))
        cg = sample_computation_graph(g, np.concatenate([triple.u, triple.v, triple.negatives.ravel()]), cfg, rng)

        def split(out):
            return out[:3], out[3:6], out[6:].reshape(3, 1, -1)

        def value(_):
            out, _ = forward_cached(params, cg, g.features)
            return float(total_loss(triple, split(out), loss_cfg, context).total.sum())

        out, _ = forward_cached(params, cg, g.features)
        loss = total_loss(triple, split(out), loss_cfg, context)
        upstream = np.vstack([loss.grad_u, loss.grad_v, loss.grad_negs.reshape(3, -1)])
        analytic = backward(params, cg, g.features, upstream)
        numeric = [numerical_gradient(value, array, h=1e-6) for array in params.arrays]
        assert relative_error(np.concatenate([grad.ravel() for grad in analytic.arrays]),
                              np.concatenate([grad.ravel() for grad in numeric])) < 1e-4
