#!/usr/bin/env python
"""
Contains the Cafin class definition

Please note that this module is private. The Cafin class is
available in the main ``cafin`` namespace - use that instead.
"""
from __future__ import annotations
from dataclasses import dataclass, field, replace
import logging
import math
import pathlib

from . import utils
from .constants import *
from .errors import UndefinedMetricError
from .config import ExperimentConfig
from .Graph import Graph, load_edge_list
from .Splits import node_split, edge_split, write_manifest
from .Trainer import train
from .Metrics import FairnessReport, ii, ca, t_overhead
from .PreprocessingDriver import PreprocessingDriver
from .EvaluationDriver import EvaluationDriver

__all__ = ['Cafin', 'SeedOutcome']

logger = logging.getLogger(__name__)


@dataclass
class SeedOutcome:
    """
        Everything one seed produced. A failed seed holds one failure report
        per variant and the error.
    """
    seed: int
    reports: list
    timings: list = field(default_factory=list)
    traces: dict = field(default_factory=dict)
    degree_tables: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    classifiers: dict = field(default_factory=dict)
    bundle: object = None
    error: str = None

    @property
    def ok(self):
        return self.error is None

    def write(self, directory):
        """
            Write the split manifest and the per-variant loss traces,
            per-degree accuracies and checkpoints under directory/seed_<seed>.
        """
        directory = pathlib.Path(directory) / f"seed_{self.seed}"
        directory.mkdir(parents=True, exist_ok=True)
        if self.bundle is not None:
            write_manifest(self.bundle, directory / 'splits.txt')
        for variant, trace in self.traces.items():
            (directory / variant).mkdir(exist_ok=True)
            trace.to_csv(directory / variant / 'loss_trace.csv', index=False)
        for variant, table in self.degree_tables.items():
            table.to_csv(directory / variant / 'degree_accuracy.csv', index=False)
        for variant, params in self.params.items():
            params.save(directory / variant / 'encoder.bin', config_hash=self.reports[0].config_hash)
        for variant, classifier in self.classifiers.items():
            classifier.save(directory / variant / 'classifier.bin')
        return directory


class Cafin:
    """
        Represents a single cafin experiment: one input graph, one task and a
        set of loss variants compared across seeds.
    """
    def __init__(self, graph: Graph, config: ExperimentConfig, name=None) -> None:
        """
            Parameters
            ----------
            graph : Graph
                Full input graph, with labels for node classification

            config : ExperimentConfig
                Task, variants, seeds and hyperparameters

            name : str
                Name for the experiment. Default to the edge file stem
        """
        self.__graph = graph
        self.__config = config
        self.__name = pathlib.Path(config.edges).stem if name is None else name
        self.__preprocessingdriver_proxy = self._prepare_preprocessingdriver_proxy()
        self.__evaluationdriver_proxy = self._prepare_evaluationdriver_proxy()

    def _prepare_preprocessingdriver_proxy(self):
        return PreprocessingDriver(self)

    def _prepare_evaluationdriver_proxy(self):
        return EvaluationDriver(self)

    @classmethod
    def from_config(cls, config: ExperimentConfig):
        return cls(load_edge_list(config.edges, config.features, config.labels), config)

    def preprocess(self, directory=None, workers=None):
        """
            Build the oracle, the centralities and the groups of the full
            input graph and write them out.

            Returns
            -------
            summary : dict
        """
        directory = pathlib.Path(self.config.output_dir) / 'preprocess' if directory is None else directory
        return self._preprocessingdriver_proxy.write(directory, self.config.workers if workers is None else workers)

    def split(self, seed):
        if self.config.task == NODE_CLASSIFICATION:
            return node_split(self.graph, seed)
        return edge_split(self.graph, seed)

    def run_seed(self, seed, directory=None, workers=1):
        """
            Method to run every variant on one seed: split, build the oracle
            of g1, train, evaluate and compare with the baseline. Errors are
            caught and turned into failure reports.

            Parameters
            ----------
            seed : int
            directory : path-like
                Optional run directory the seed artifacts are written to
            workers : int
                Processes building the oracle of g1

            Returns
            -------
            outcome : SeedOutcome
        """
        try:
            outcome = self._run_seed(seed, workers)
        except Exception as error:
            logger.exception("Seed %d failed", seed)
            reports = [FairnessReport.failure(self.config.task, variant, seed, error, self.config_hash)
                       for variant in self.config.ordered_variants]
            outcome = SeedOutcome(seed, reports, error=f"{type(error).__name__}: {error}")
        if directory is not None:
            outcome.write(directory)
        return outcome

    def _run_seed(self, seed, workers=1):
        config = self.config
        bundle = self.split(seed)
        oracle, t_p = self._preprocessingdriver_proxy.build_oracle(bundle.g1, seed=seed, workers=workers)
        train_seed, embed_seed = utils.spawn_seeds(seed, 2)
        outcome = SeedOutcome(seed, [], bundle=bundle)
        seconds = {}
        for variant in config.ordered_variants:
            result = train(bundle.g1, oracle, config.encoder, replace(config.loss, variant=variant),
                           epochs=config.training.epochs, schedule=config.training.schedule, seed=train_seed,
                           batch_size=config.training.batch_size, progress=config.training.progress)
            evaluation = self._evaluationdriver_proxy.evaluate(result.params, bundle, embed_seed)
            outcome.reports.append(FairnessReport(config.task, variant, seed, evaluation.imparity,
                                                  evaluation.overall_accuracy, slope=evaluation.slope,
                                                  config_hash=self.config_hash, triples_hash=result.triples_hash,
                                                  details=evaluation.details))
            outcome.traces[variant] = result.trace
            outcome.degree_tables[variant] = evaluation.degree_table
            outcome.params[variant] = result.params
            outcome.classifiers[variant] = evaluation.classifier
            seconds[variant] = result.seconds
        self._compare(outcome, t_p, seconds)
        return outcome

    def _compare(self, outcome: SeedOutcome, t_p, seconds):
        reports = {report.variant: report for report in outcome.reports}
        baseline = reports.get(BASELINE)
        for variant, report in reports.items():
            timing = {'seed': outcome.seed, 'variant': variant, 't_p': t_p, 't_train': seconds[variant],
                      't_t': None, 'T': None}
            if baseline is not None and variant != BASELINE:
                try:
                    report.ii_percent = ii(baseline.imparity, report.imparity)
                except UndefinedMetricError as error:
                    logger.warning("Seed %d, %s: %s", outcome.seed, variant, error)
                report.ca_points = ca(report.overall_accuracy, baseline.overall_accuracy)
                timing['t_t'] = max(0., seconds[variant] - seconds[BASELINE])
                if report.ii_percent is not None:
                    timing['T'] = t_overhead(t_p, timing['t_t'], report.ii_percent)
                    if report.ii_percent <= 0:
                        report.t_seconds_per_point = math.inf
            outcome.timings.append(timing)
        if len({report.triples_hash for report in reports.values()}) > 1:
            logger.warning("Seed %d: variants trained on different triple sequences", outcome.seed)

    @property
    def _preprocessingdriver_proxy(self):
        return self.__preprocessingdriver_proxy

    @property
    def _evaluationdriver_proxy(self):
        return self.__evaluationdriver_proxy

    @property
    def graph(self):
        return self.__graph

    @property
    def config(self):
        return self.__config

    @property
    def config_hash(self):
        return self.config.config_hash

    @property
    def name(self):
        return self.__name

    @property
    def groups(self):
        return self._preprocessingdriver_proxy.groups

    @property
    def degrees(self):
        return self._preprocessingdriver_proxy.degrees

    @property
    def class_freq(self):
        return self._preprocessingdriver_proxy.class_freq

    def __repr__(self):
        return f"{self.__class__.__name__}(name={self.name!r}, task={self.config.task!r}, graph={self.graph!r})"
