#!/usr/bin/env python
"""
Contains the PreprocessingDriver class definition

Please note that this module is private. The PreprocessingDriver class is
available in the main ``cafin`` namespace - use that instead.
"""
from __future__ import annotations
from typing import TYPE_CHECKING
import json
import logging
import pathlib
import numpy as np

from . import utils
from .constants import *
from .Graph import degree_centrality, median_group_split
from .DistanceOracle import build_exact, build_landmark

if TYPE_CHECKING:
    from .Cafin import Cafin
    from .Graph import Graph

__all__ = ['PreprocessingDriver']

logger = logging.getLogger(__name__)


class PreprocessingDriver:
    """
        Build the distance oracles and hold the centrality-based groups of
        the input graph.
    """
    _oracle_file = 'oracle.bin'
    _centrality_file = 'centrality.csv'
    _summary_file = 'preprocess.json'

    def __init__(self, cafin: Cafin) -> None:
        """
            Parameters
            ----------
            cafin : Cafin object
                The Cafin object that utilizes this PreprocessingDriver object
        """
        self.__cafin = cafin
        self.__groups = None

    def build_oracle(self, g: Graph, seed=None, workers=1):
        """
            Distance oracle of g following the oracle configuration.

            Parameters
            ----------
            g : Graph
            seed : int
                Seed of the landmark selection
            workers : int
                Worker processes of the exact all-pairs build

            Returns
            -------
            oracle : DistanceOracle
            seconds : float
                Wall-time of the build
        """
        with utils.Timer() as timer:
            if self.oracle_config.mode == EXACT:
                oracle = build_exact(g, workers=workers, memory_budget=self.oracle_config.memory_budget)
            else:
                oracle = build_landmark(g, min(self.oracle_config.landmarks, g.node_count), seed=seed,
                                        strategy=self.oracle_config.strategy)
        return oracle, timer.seconds

    def write(self, directory, workers=1):
        """
            Write the oracle of the full input graph, its centrality and group
            manifest and a summary with the build wall-time.

            Returns
            -------
            summary : dict
        """
        directory = pathlib.Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        oracle, seconds = self.build_oracle(self.graph, seed=0, workers=workers)
        oracle.save(directory / self._oracle_file)
        self.groups.to_frame().to_csv(directory / self._centrality_file, index=False)
        summary = {'graph': self.graph.summary(), 'metadata': self.graph.metadata, 'oracle': repr(oracle),
                   'mode': oracle.mode, 'diameter': oracle.diameter, 'oracle_bytes': int(oracle.nbytes),
                   'median_degree': self.groups.median, 'popular': self.groups.popular_count,
                   'unpopular': self.groups.unpopular_count, 'seconds': seconds}
        with open(directory / self._summary_file, 'w') as out:
            json.dump(summary, out, indent=2, sort_keys=True, default=str)
        logger.info("Preprocessed %r in %.2fs into %s", self.graph, seconds, directory)
        return summary

    @property
    def cafin(self):
        return self.__cafin

    @property
    def graph(self):
        return self.cafin.graph

    @property
    def oracle_config(self):
        return self.cafin.config.oracle

    @property
    def degrees(self):
        return degree_centrality(self.graph)

    @property
    def groups(self):
        """
            Popular and unpopular groups of the full input graph.
        """
        if self.__groups is None:
            self.__groups = median_group_split(self.degrees)
        return self.__groups

    @property
    def class_freq(self):
        labels = self.graph.labels
        if labels is None:
            return None
        if self.graph.is_multilabel:
            return labels.sum(axis=0)
        return np.bincount(labels, minlength=self.graph.class_count)
