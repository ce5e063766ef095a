#!/usr/bin/env python
"""
Contains the EvaluationDriver class definition

Please note that this module is private. The EvaluationDriver class is
available in the main ``cafin`` namespace - use that instead.
"""
from __future__ import annotations
from typing import TYPE_CHECKING
from dataclasses import dataclass, field
import logging
import numpy as np
import pandas as pd
from sklearn.metrics import f1_score

from .constants import *
from .errors import UndefinedMetricError
from .SageEncoder import embed
from .LinearClassifier import LinearClassifier, fit, edge_features
from .Metrics import (imparity_nc_details, imparity_nc_multilabel, imparity_lp, link_prediction_accuracies,
                      degree_accuracy_table, slope_from_table)

if TYPE_CHECKING:
    from .Cafin import Cafin
    from .SageEncoder import SageParams
    from .Splits import NodeSplitBundle, EdgeSplitBundle

__all__ = ['EvaluationDriver', 'Evaluation']

logger = logging.getLogger(__name__)


@dataclass
class Evaluation:
    """
        Downstream outcome of one trained encoder.
    """
    imparity: float
    overall_accuracy: float
    classifier: LinearClassifier
    degree_table: pd.DataFrame
    slope: float = None
    details: dict = field(default_factory=dict)


class EvaluationDriver:
    """
        Embed the evaluation graphs with a trained encoder, fit the
        downstream classifier and measure imparity and accuracy.
    """
    def __init__(self, cafin: Cafin) -> None:
        """
            Parameters
            ----------
            cafin : Cafin object
                The Cafin object that utilizes this EvaluationDriver object
        """
        self.__cafin = cafin

    def evaluate(self, params: SageParams, bundle, seed):
        """
            Parameters
            ----------
            params : SageParams
                Trained encoder
            bundle : NodeSplitBundle or EdgeSplitBundle
                Splits of the seed, matching the configured task
            seed : int
                Seed of the neighborhood sampling of the embeddings

            Returns
            -------
            evaluation : Evaluation
        """
        if self.cafin.config.task == NODE_CLASSIFICATION:
            return self._evaluate_nodes(params, bundle, seed)
        return self._evaluate_links(params, bundle, seed)

    def _fit(self, X, y, mode, seed):
        cfg = self.cafin.config.downstream
        return fit(X, y, mode=mode, reg=cfg.reg, seed=seed, tol=cfg.tol, max_iter=cfg.max_iter)

    def _evaluate_nodes(self, params, bundle: NodeSplitBundle, seed):
        encoder = self.cafin.config.encoder
        train_graph, test_graph = bundle.g2, bundle.g3
        X_train = embed(params, train_graph, encoder, seed)
        X_test = embed(params, test_graph, encoder, seed)
        multilabel = train_graph.is_multilabel
        classifier = self._fit(X_train, train_graph.labels, ONE_VS_REST if multilabel else MULTINOMIAL, seed)
        pred, truth = classifier.predict(X_test), test_graph.labels
        popular = self.groups.popular[test_graph.parent_ids]
        if multilabel:
            imparity = imparity_nc_multilabel(pred, truth, popular)
            accuracy = float(f1_score(truth, pred, average='macro', zero_division=0))
            correct = np.mean(pred == truth, axis=1)
            details = {'popular_nodes': int(popular.sum()), 'unpopular_nodes': int((~popular).sum())}
        else:
            imparity, table = imparity_nc_details(pred, truth, popular, self.class_freq, self.graph.node_count)
            accuracy = float(np.mean(pred == truth))
            correct = (pred == truth).astype(FLOAT_DTYPE)
            details = {'per_class': table.reset_index().to_dict(orient='list')}
        return self._finish(imparity, accuracy, classifier, correct, self.degrees[test_graph.parent_ids], details)

    def _evaluate_links(self, params, bundle: EdgeSplitBundle, seed):
        embeddings = embed(params, bundle.g1, self.cafin.config.encoder, seed)
        train_pairs, train_targets = bundle.pairs('g2')
        test_pairs, test_targets = bundle.pairs('g3')
        classifier = self._fit(edge_features(embeddings, train_pairs), train_targets, BINARY, seed)
        pred = classifier.predict(edge_features(embeddings, test_pairs))
        accuracies, counts = link_prediction_accuracies(pred, test_targets, test_pairs, self.groups)
        imparity = imparity_lp(accuracies[PP], accuracies[PUP], accuracies[UPUP])
        correct = (pred == test_targets).astype(FLOAT_DTYPE)
        degrees = np.minimum(self.degrees[test_pairs[:, 0]], self.degrees[test_pairs[:, 1]])
        details = {'accuracies': accuracies, 'counts': counts}
        return self._finish(imparity, float(np.mean(correct)), classifier, correct, degrees, details)

    def _finish(self, imparity, accuracy, classifier, correct, degrees, details):
        table = degree_accuracy_table(correct, degrees)
        try:
            slope = slope_from_table(table)
        except UndefinedMetricError as error:
            logger.info("No degree-accuracy slope: %s", error)
            slope = None
        return Evaluation(imparity, accuracy, classifier, table, slope, details)

    @property
    def cafin(self):
        return self.__cafin

    @property
    def graph(self):
        return self.cafin.graph

    @property
    def groups(self):
        return self.cafin.groups

    @property
    def degrees(self):
        return self.cafin.degrees

    @property
    def class_freq(self):
        return self.cafin.class_freq
