#!/usr/bin/env python
"""
cafin
=====

Provides centrality-aware fairness for unsupervised node embeddings: a
sampled mean-aggregator encoder trained with a contrastive loss plus a
degree-weighted distance-consistency term, the hop-distance oracles it
needs, inductive splits, downstream logistic regression and the imparity
metrics comparing popular and unpopular nodes.

How to use
----------

cafin comes with the class Cafin running whole experiments, and with the
`cafin` command line (preprocess, run, report). Please refer to their
documentation for further help.
"""
from .__metadata__ import *
from .constants import *
from .errors import *
from .Graph import *
from .DistanceOracle import *
from .Splits import *
from .SageEncoder import *
from .Losses import *
from .Trainer import *
from .LinearClassifier import *
from .Metrics import *
from .config import *
from .Cafin import *

__all__ = ['Cafin', 'SeedOutcome', 'ExperimentConfig', 'OracleConfig', 'DownstreamConfig', 'read_config',
           'write_config', 'Graph', 'GroupAssignment', 'load_edge_list', 'degree_centrality', 'median_group_split',
           'induced_subgraph', 'DistanceOracle', 'bfs_sssp', 'build_exact', 'build_landmark', 'query',
           'NodeSplitBundle', 'EdgeSplitBundle', 'node_split', 'edge_split', 'write_manifest', 'read_manifest',
           'SageConfig', 'SageParams', 'ComputationGraph', 'sample_computation_graph', 'forward', 'backward',
           'embed', 'TrainTriple', 'LossConfig', 'TrainingContext', 'sample_positive', 'sample_negative',
           'base_loss', 'fairness_term', 'total_loss', 'TrainingConfig', 'TrainingResult', 'step_schedule', 'train',
           'LinearClassifier', 'edge_feature', 'edge_features', 'fit', 'predict', 'FairnessReport', 'imparity_nc',
           'imparity_nc_multilabel', 'imparity_lp', 'edge_group', 'ii', 'ca', 'cv', 't_overhead',
           'degree_accuracy_slope', 'degree_accuracy_table', 'CafinError', 'ParseError',
           'ConsistencyError', 'ArgumentError', 'ConfigurationError', 'CapacityError', 'UndefinedMetricError',
           'DegenerateDataError', 'TrainingError', 'ArtifactError']


if __name__ == '__main__':
    pass
