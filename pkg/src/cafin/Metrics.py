#!/usr/bin/env python
"""
Contains the FairnessReport class definition and the fairness and cost
metrics: imparity for node classification and link prediction,
improvement in imparity, change in accuracy, coefficient of variation, time
overhead and the degree-vs-accuracy slope.

Please note that this module is private. The metric functions are
available in the main ``cafin`` namespace - use that instead.
"""
from __future__ import annotations
from dataclasses import dataclass, field, asdict
import math
import logging
import numpy as np
import pandas as pd
from scipy import stats
from sklearn.metrics import f1_score

from . import utils
from .constants import *
from .errors import UndefinedMetricError, ArgumentError
from .Graph import GroupAssignment

__all__ = ['FairnessReport', 'imparity_nc', 'imparity_nc_details', 'imparity_nc_multilabel', 'imparity_lp',
           'link_prediction_accuracies', 'edge_group', 'edge_groups', 'ii', 'ca', 'cv', 't_overhead',
           'degree_accuracy_table', 'degree_accuracy_slope', 'slope_from_table', 'format_value']

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['task', 'variant', 'seed', 'status', 'imparity', 'overall_accuracy', 'ii_percent', 'ca_points',
                  'cv_percent', 't_seconds_per_point', 'slope', 'config_hash', 'triples_hash', 'error']


@dataclass
class FairnessReport:
    """
        Outcome of one variant on one seed. Relative metrics (ii_percent,
        ca_points, cv_percent, t_seconds_per_point) are None without a
        baseline to compare with. cv_percent is the spread of ii_percent
        over the seeds of the run and t_seconds_per_point is only set, to
        infinity, when the variant does not improve imparity. Finite
        overheads depend on wall-time and live in the timings.
    """
    task: str
    variant: str
    seed: int
    imparity: float = None
    overall_accuracy: float = None
    ii_percent: float = None
    ca_points: float = None
    cv_percent: float = None
    t_seconds_per_point: float = None
    slope: float = None
    config_hash: str = None
    triples_hash: str = None
    status: str = 'ok'
    error: str = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.imparity is not None and self.imparity < 0:
            raise ArgumentError(f"Imparity must be non-negative, got {self.imparity}")

    @classmethod
    def failure(cls, task, variant, seed, error, config_hash=None):
        return cls(task, variant, seed, status='failed', error=f"{type(error).__name__}: {error}",
                   config_hash=config_hash)

    @property
    def ok(self):
        return self.status == 'ok'

    def to_row(self):
        """
            Flat CSV row, details left out.
        """
        return {column: getattr(self, column) for column in REPORT_COLUMNS}

    def to_json(self):
        return {key: format_value(value) for key, value in asdict(self).items()}


def format_value(value):
    """
        JSON-friendly value: infinities become the {INF_MARKER} marker, NaN
        becomes None and numpy scalars plain python values.
    """
    if isinstance(value, dict):
        return {str(key): format_value(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [format_value(item) for item in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and math.isinf(value):
        return INF_MARKER if value > 0 else f"-{INF_MARKER}"
    if isinstance(value, float) and math.isnan(value):
        return None
    return value

format_value.__doc__ = format_value.__doc__.format(INF_MARKER=INF_MARKER)


def _popular_mask(groups, size):
    popular = groups.popular if isinstance(groups, GroupAssignment) else np.asarray(groups, dtype=bool)
    if popular.shape != (size,):
        raise ArgumentError(f"Group mask of shape {popular.shape} for {size} predictions")
    return popular


def imparity_nc_details(pred, truth, groups, class_freq, total_nodes):
    """
        Weighted per-class accuracy gap between popular and unpopular nodes

            sum_c (f_c / |V|) * |a_c(popular) - a_c(unpopular)|

        Parameters
        ----------
        pred, truth : array-like
            Predicted and true class ids of the evaluated nodes
        groups : GroupAssignment or boolean array
            Popular flag of each evaluated node
        class_freq : array-like
            Node count of every class in the full input graph
        total_nodes : int
            Node count of the full input graph

        Returns
        -------
        imparity : float
        table : pandas.DataFrame
            Per-class weight, group accuracies and contribution. Classes
            without a member in one of the groups contribute 0
    """
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape:
        raise ArgumentError(f"Predictions shaped {pred.shape} for truths shaped {truth.shape}")
    if truth.size == 0:
        raise UndefinedMetricError("No evaluated node, imparity is undefined")
    popular = _popular_mask(groups, len(truth))
    frame = pd.DataFrame({'truth': truth, 'popular': popular, 'correct': (pred == truth).astype(FLOAT_DTYPE)})
    accuracy = frame.groupby(['truth', 'popular'])['correct'].mean().unstack('popular')
    accuracy = accuracy.reindex(index=np.arange(len(class_freq)), columns=[True, False])
    table = pd.DataFrame({'weight': np.asarray(class_freq, dtype=FLOAT_DTYPE) / total_nodes,
                          'acc_popular': accuracy[True].to_numpy(),
                          'acc_unpopular': accuracy[False].to_numpy()},
                         index=pd.Index(np.arange(len(class_freq)), name='class'))
    defined = table['acc_popular'].notna() & table['acc_unpopular'].notna()
    if not defined.any():
        raise UndefinedMetricError("No class holds nodes of both groups, imparity is undefined")
    table['contribution'] = np.where(defined, table['weight'] * (table['acc_popular'] - table['acc_unpopular']).abs(), 0.)
    present = table.index.isin(np.unique(truth))
    empty = table.index[present & ~defined].tolist()
    if empty:
        logger.info("Classes %s lack members in one group and contribute 0 to the imparity", empty)
    return float(table['contribution'].sum()), table


def imparity_nc(pred, truth, groups, class_freq, total_nodes):
    return imparity_nc_details(pred, truth, groups, class_freq, total_nodes)[0]

imparity_nc.__doc__ = imparity_nc_details.__doc__


def imparity_nc_multilabel(pred, truth, groups):
    """
        Absolute gap between the macro-F1 of the popular and of the unpopular
        nodes, per-class F1 of 0/0 counted as 0.

        Returns
        -------
        imparity : float
    """
    pred, truth = np.atleast_2d(np.asarray(pred)), np.atleast_2d(np.asarray(truth))
    if pred.shape != truth.shape:
        raise ArgumentError(f"Predictions shaped {pred.shape} for truths shaped {truth.shape}")
    popular = _popular_mask(groups, len(truth))
    scores = []
    for mask, name in ((popular, POPULAR), (~popular, UNPOPULAR)):
        if not mask.any():
            raise UndefinedMetricError(f"The {name} group is empty, imparity is undefined")
        scores.append(f1_score(truth[mask], pred[mask], average='macro', zero_division=0))
    return float(abs(scores[0] - scores[1]))


def imparity_lp(acc_pp, acc_pup, acc_upup):
    """
        Population standard deviation of the accuracies of the three edge
        categories. A None or NaN accuracy flags an empty category.
    """
    accuracies = {PP: acc_pp, PUP: acc_pup, UPUP: acc_upup}
    for name, value in accuracies.items():
        if value is None or np.isnan(value):
            raise UndefinedMetricError(f"Edge category {name} is empty, imparity is undefined")
    return float(np.std(list(accuracies.values())))


def edge_group(u, v, groups: GroupAssignment):
    popular = groups.popular if isinstance(groups, GroupAssignment) else np.asarray(groups, dtype=bool)
    return EDGE_GROUPS[2 - int(popular[u]) - int(popular[v])]


def edge_groups(pairs, groups):
    """
        Category of every pair of an (m, 2) array.
    """
    popular = groups.popular if isinstance(groups, GroupAssignment) else np.asarray(groups, dtype=bool)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return np.asarray(EDGE_GROUPS)[2 - popular[pairs[:, 0]].astype(int) - popular[pairs[:, 1]].astype(int)]


def link_prediction_accuracies(pred, truth, pairs, groups):
    """
        Accuracy of the link predictions within each edge category, NaN for
        empty categories.

        Returns
        -------
        accuracies : dict
            {PP, PUP, UPUP} --> accuracy
        counts : dict
            {PP, PUP, UPUP} --> number of pairs
    """
    utils.confirm_equal_length_arrays_in_dict({'pred': np.ravel(pred), 'truth': np.ravel(truth),
                                               'pairs': np.reshape(pairs, (-1, 2))}, 'link predictions')
    frame = pd.DataFrame({'category': edge_groups(pairs, groups),
                          'correct': (np.asarray(pred) == np.asarray(truth)).astype(FLOAT_DTYPE)})
    grouped = frame.groupby('category')['correct'].agg(['mean', 'size']).reindex(list(EDGE_GROUPS))
    accuracies = {name: float(grouped.loc[name, 'mean']) for name in EDGE_GROUPS}
    counts = {name: int(np.nan_to_num(grouped.loc[name, 'size'])) for name in EDGE_GROUPS}
    return accuracies, counts


def ii(i_original, i_current):
    """
        Improvement in imparity, in percent of the original imparity.
    """
    if i_original <= 0:
        raise UndefinedMetricError("Improvement in imparity is undefined for an original imparity of 0")
    return (i_original - i_current) / i_original * 100.


def ca(acc_current, acc_original):
    """
        Change in overall accuracy, in percentage points.
    """
    return (acc_current - acc_original) * 100.


def cv(samples):
    """
        Coefficient of variation sigma/|mu|*100 in percent, population
        standard deviation.
    """
    samples = np.asarray(samples, dtype=FLOAT_DTYPE)
    if samples.size < 2:
        raise ArgumentError(f"Coefficient of variation needs at least 2 samples, got {samples.size}")
    mean = samples.mean()
    if mean == 0:
        raise UndefinedMetricError("Coefficient of variation is undefined for a zero mean")
    return float(np.std(samples) / abs(mean) * 100.)


def t_overhead(t_preprocess_sec, t_train_delta_sec, ii_percent):
    """
        Seconds spent per point of imparity improvement, infinite when the
        imparity did not improve.
    """
    if t_preprocess_sec < 0 or t_train_delta_sec < 0:
        raise ArgumentError("Times must be non-negative")
    if ii_percent <= 0:
        return math.inf
    return (t_preprocess_sec + t_train_delta_sec) / ii_percent


def degree_accuracy_table(correct, degrees):
    """
        Mean correctness per distinct degree.

        Returns
        -------
        table : pandas.DataFrame
            Columns degree, accuracy and count, sorted by degree
    """
    correct, degrees = np.asarray(correct, dtype=FLOAT_DTYPE), np.asarray(degrees, dtype=np.int64)
    if correct.shape != degrees.shape:
        raise ArgumentError(f"Correctness shaped {correct.shape} for degrees shaped {degrees.shape}")
    frame = pd.DataFrame({'degree': degrees, 'correct': correct})
    table = frame.groupby('degree')['correct'].agg(accuracy='mean', count='size').reset_index()
    return table


def degree_accuracy_slope(correct, degrees):
    """
        Least-squares slope of the per-degree mean accuracy against the
        degree, one point per distinct degree.
    """
    return slope_from_table(degree_accuracy_table(correct, degrees))


def slope_from_table(table):
    """
        Slope of an exported degree_accuracy_table.
    """
    if len(table) < 2:
        raise UndefinedMetricError("Slope needs at least 2 distinct degrees")
    return float(stats.linregress(table['degree'].to_numpy(dtype=FLOAT_DTYPE), table['accuracy'].to_numpy()).slope)
