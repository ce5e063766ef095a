import json
import math

import numpy as np
import pytest

from cafin import (FairnessReport, imparity_nc, imparity_nc_multilabel, imparity_lp, edge_group, ii, ca, cv,
                   t_overhead, degree_accuracy_slope, degree_accuracy_table, median_group_split,
                   UndefinedMetricError, ArgumentError, ConsistencyError)
from cafin.Metrics import imparity_nc_details, link_prediction_accuracies, slope_from_table, format_value
from cafin.constants import PP, PUP, UPUP, INF_MARKER


def _group_block(label, count, correct, popular):
    truth = np.full(count, label)
    pred = truth.copy()
    pred[correct:] = 1 - label
    return pred, truth, np.full(count, popular)


def _worked_example():
    blocks = [_group_block(0, 10, 9, True), _group_block(0, 10, 8, False),
              _group_block(1, 10, 7, True), _group_block(1, 10, 8, False)]
    return tuple(np.concatenate(parts) for parts in zip(*blocks))


def test_imparity_nc_worked_example():
    pred, truth, popular = _worked_example()
    assert imparity_nc(pred, truth, popular, [6, 4], 10) == pytest.approx(0.10)


def test_imparity_nc_equal_groups_is_zero():
    pred, truth, popular = _worked_example()
    assert imparity_nc(truth, truth, popular, [6, 4], 10) == 0.


def test_imparity_nc_table():
    pred, truth, popular = _worked_example()
    value, table = imparity_nc_details(pred, truth, popular, [6, 4, 1], 11)
    assert list(table.columns) == ['weight', 'acc_popular', 'acc_unpopular', 'contribution']
    assert table.loc[0, 'acc_popular'] == pytest.approx(0.9)
    assert table.loc[2, 'contribution'] == 0.
    assert value == pytest.approx(table['contribution'].sum())


def _imparity_by_loops(pred, truth, popular, class_freq, total):
    value = 0.
    for c, freq in enumerate(class_freq):
        in_popular = [pred[i] == c for i in range(len(truth)) if truth[i] == c and popular[i]]
        in_unpopular = [pred[i] == c for i in range(len(truth)) if truth[i] == c and not popular[i]]
        if in_popular and in_unpopular:
            value += freq / total * abs(np.mean(in_popular) - np.mean(in_unpopular))
    return value


def test_imparity_nc_matches_a_direct_evaluation():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n, classes = int(rng.integers(10, 80)), int(rng.integers(2, 6))
        truth, pred = rng.integers(0, classes, size=n), rng.integers(0, classes, size=n)
        popular = rng.random(n) < 0.5
        popular[:2] = [True, False]
        truth[:2] = 0
        class_freq = np.bincount(truth, minlength=classes) * 3
        expected = _imparity_by_loops(pred, truth, popular, class_freq, 3 * n)
        assert imparity_nc(pred, truth, popular, class_freq, 3 * n) == pytest.approx(expected)


def test_imparity_nc_accepts_group_assignments():
    groups = median_group_split([1, 1, 5, 5])
    assert imparity_nc([0, 0, 0, 1], [0, 1, 0, 1], groups, [2, 2], 4) == pytest.approx(0.5)


def test_imparity_nc_undefined():
    with pytest.raises(UndefinedMetricError):
        imparity_nc([], [], np.zeros(0, dtype=bool), [1], 1)
    with pytest.raises(UndefinedMetricError):
        imparity_nc([0, 1], [0, 1], [True, False], [1, 1], 2)
    with pytest.raises(ArgumentError):
        imparity_nc([0], [0, 1], [True, False], [1, 1], 2)


def test_imparity_nc_multilabel():
    truth = np.array([[1, 1], [1, 1], [1, 0], [1, 1], [1, 0]])
    pred = np.array([[1, 1], [1, 0], [1, 1], [1, 0], [1, 1]])
    popular = np.array([True, True, True, False, False])
    assert imparity_nc_multilabel(pred, truth, popular) == pytest.approx(0.25)
    with pytest.raises(UndefinedMetricError):
        imparity_nc_multilabel(pred, truth, np.ones(5, dtype=bool))


def _macro_f1_by_counts(pred, truth):
    scores = []
    for c in range(truth.shape[1]):
        tp = np.sum((pred[:, c] == 1) & (truth[:, c] == 1))
        fp = np.sum((pred[:, c] == 1) & (truth[:, c] == 0))
        fn = np.sum((pred[:, c] == 0) & (truth[:, c] == 1))
        scores.append(0. if tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn))
    return np.mean(scores)


def test_imparity_nc_multilabel_matches_a_direct_evaluation():
    rng = np.random.default_rng(1)
    for _ in range(30):
        n, classes = int(rng.integers(4, 50)), int(rng.integers(2, 5))
        truth, pred = rng.integers(0, 2, size=(n, classes)), rng.integers(0, 2, size=(n, classes))
        popular = rng.random(n) < 0.5
        popular[:2] = [True, False]
        expected = abs(_macro_f1_by_counts(pred[popular], truth[popular])
                       - _macro_f1_by_counts(pred[~popular], truth[~popular]))
        assert imparity_nc_multilabel(pred, truth, popular) == pytest.approx(expected, abs=1e-12)


def test_imparity_lp_matches_a_direct_evaluation():
    rng = np.random.default_rng(2)
    for _ in range(30):
        n = int(rng.integers(4, 50))
        popular = rng.random(n) < 0.5
        popular[:2] = [True, False]
        pairs = np.vstack([[0, 0], [0, 1], [1, 1], rng.integers(0, n, size=(n, 2))])
        pred, truth = rng.integers(0, 2, size=len(pairs)), rng.integers(0, 2, size=len(pairs))
        accuracies, _ = link_prediction_accuracies(pred, truth, pairs, popular)
        by_category = {PP: [], PUP: [], UPUP: []}
        for (u, v), p, t in zip(pairs, pred, truth):
            by_category[edge_group(u, v, popular)].append(p == t)
        means = [np.mean(by_category[name]) for name in (PP, PUP, UPUP)]
        mean = sum(means) / 3
        expected = math.sqrt(sum((value - mean)**2 for value in means) / 3)
        assert imparity_lp(accuracies[PP], accuracies[PUP], accuracies[UPUP]) == pytest.approx(expected, abs=1e-12)


def test_imparity_lp():
    assert imparity_lp(0.9, 0.8, 0.7) == pytest.approx(0.08165, abs=1e-5)
    assert imparity_lp(0.6, 0.6, 0.6) == 0.
    with pytest.raises(UndefinedMetricError, match=UPUP):
        imparity_lp(0.9, 0.8, None)
    with pytest.raises(UndefinedMetricError, match=PP):
        imparity_lp(float('nan'), 0.8, 0.7)


def test_edge_group():
    popular = np.array([True, False])
    assert edge_group(0, 0, popular) == PP
    assert edge_group(0, 1, popular) == PUP
    assert edge_group(1, 0, popular) == PUP
    assert edge_group(1, 1, popular) == UPUP


def test_link_prediction_accuracies():
    popular = np.array([True, True, False, False])
    pairs = np.array([[0, 1], [0, 1], [0, 2], [1, 3]])
    accuracies, counts = link_prediction_accuracies([1, 0, 1, 1], [1, 1, 1, 0], pairs, popular)
    assert accuracies[PP] == 0.5 and accuracies[PUP] == 0.5
    assert math.isnan(accuracies[UPUP])
    assert counts == {PP: 2, PUP: 2, UPUP: 0}
    with pytest.raises(ConsistencyError):
        link_prediction_accuracies([1, 0], [1, 1, 1, 0], pairs, popular)


def test_ii_and_ca():
    assert ii(0.10, 0.08) == pytest.approx(20.0)
    assert ii(0.10, 0.10) == 0.
    assert ii(0.10, 0.12) < 0
    with pytest.raises(UndefinedMetricError):
        ii(0., 0.1)
    assert ca(0.70, 0.725) == pytest.approx(-2.5)
    assert ca(0.8, 0.8) == 0.


def test_cv():
    assert cv([1, 1, 1]) == 0.
    assert cv([2, 4]) == pytest.approx(33.333, abs=1e-3)
    assert cv([-2, -4]) == pytest.approx(cv([20, 40]))
    with pytest.raises(ArgumentError):
        cv([1.])
    with pytest.raises(UndefinedMetricError):
        cv([-1, 1])


def test_t_overhead():
    assert t_overhead(5., 0., 10.) == pytest.approx(0.5)
    assert t_overhead(2., 3., 10.) == pytest.approx(0.5)
    assert t_overhead(5., 0., -3.) == math.inf
    assert t_overhead(5., 0., 0.) == math.inf
    assert t_overhead(0., 0., 4.) == 0.
    with pytest.raises(ArgumentError):
        t_overhead(-1., 0., 4.)


def test_degree_accuracy_slope():
    correct = np.array([0, 1] + [1] * 9 + [0])
    degrees = np.array([1, 1] + [3] * 10)
    assert degree_accuracy_slope(correct, degrees) == pytest.approx(0.2)
    table = degree_accuracy_table(correct, degrees)
    assert table.to_dict('list') == {'degree': [1, 3], 'accuracy': [0.5, 0.9], 'count': [2, 10]}
    assert slope_from_table(table) == pytest.approx(0.2)
    assert degree_accuracy_slope([1, 1, 1], [1, 2, 5]) == pytest.approx(0.)
    with pytest.raises(UndefinedMetricError):
        degree_accuracy_slope([1, 0], [2, 2])


def test_format_value():
    assert format_value(math.inf) == INF_MARKER
    assert format_value(float('nan')) is None
    assert format_value({'a': [np.float64(0.5), np.int64(3)]}) == {'a': [0.5, 3]}


def test_fairness_report():
    report = FairnessReport('NC', 'CafinFull', 0, imparity=0.08, overall_accuracy=0.7, ii_percent=-3.,
                            t_seconds_per_point=math.inf)
    assert report.ok
    document = json.loads(json.dumps(report.to_json()))
    assert document['t_seconds_per_point'] == INF_MARKER
    assert report.to_row()['error'] is None
    failure = FairnessReport.failure('NC', 'CafinFull', 1, ValueError("boom"))
    assert not failure.ok and failure.error == "ValueError: boom"
    with pytest.raises(ArgumentError):
        FairnessReport('NC', 'Baseline', 0, imparity=-0.1)
