#!/usr/bin/env python
"""
Contains the cafin module constants.
"""
import numpy as np

__all__ = ['NAME', 'SRC_DIR', 'LOG_DIR', 'SENTINEL', 'DISTANCE_DTYPE', 'FLOAT_DTYPE',
           'POPULAR', 'UNPOPULAR', 'EXACT', 'LANDMARK', 'RANDOM_LANDMARKS', 'DEGREE_LANDMARKS',
           'BASELINE', 'CAFIN_FULL', 'CAFIN_P', 'CAFIN_N', 'VARIANTS',
           'NODE_CLASSIFICATION', 'LINK_PREDICTION', 'TASKS',
           'PP', 'PUP', 'UPUP', 'EDGE_GROUPS',
           'MULTINOMIAL', 'ONE_VS_REST', 'BINARY',
           'DEFAULT_NUM_LAYERS', 'DEFAULT_HIDDEN_DIM', 'DEFAULT_FANOUT',
           'DEFAULT_ALPHA', 'DEFAULT_K', 'DEFAULT_Q', 'DEFAULT_MIN_NEG_THRESHOLD', 'DEFAULT_WALK_LENGTH',
           'DEFAULT_NEG_RETRIES', 'DEFAULT_EPOCHS', 'DEFAULT_LR', 'DEFAULT_STEP_SIZE', 'DEFAULT_GAMMA',
           'DEFAULT_BATCH_SIZE', 'DEFAULT_LANDMARKS', 'DEFAULT_MEMORY_BUDGET', 'DEFAULT_REG',
           'DEFAULT_TOL', 'DEFAULT_MAX_ITER', 'DEFAULT_SEEDS', 'DEFAULT_SPLIT_RATIOS',
           'DEFAULT_EDGE_TRAIN_RATIO', 'DEFAULT_NEG_TRIALS_FACTOR', 'EPSILON',
           'ENV_OUTPUT_DIR', 'ENV_WORKERS', 'INF_MARKER']

NAME = 'cafin'
SRC_DIR = 'src'
LOG_DIR = 'log'

# hop distances are stored on 16 bits, the largest value flags unreachable pairs
DISTANCE_DTYPE = np.uint16
SENTINEL = int(np.iinfo(DISTANCE_DTYPE).max)
FLOAT_DTYPE = np.float64

POPULAR = 'Popular'
UNPOPULAR = 'Unpopular'

EXACT = 'exact'
LANDMARK = 'landmark'
RANDOM_LANDMARKS = 'random'
DEGREE_LANDMARKS = 'degree'

BASELINE = 'Baseline'
CAFIN_FULL = 'CafinFull'
CAFIN_P = 'CafinP'
CAFIN_N = 'CafinN'
VARIANTS = (BASELINE, CAFIN_FULL, CAFIN_P, CAFIN_N)

NODE_CLASSIFICATION = 'NC'
LINK_PREDICTION = 'LP'
TASKS = (NODE_CLASSIFICATION, LINK_PREDICTION)

PP = 'PP'
PUP = 'PUP'
UPUP = 'UPUP'
EDGE_GROUPS = (PP, PUP, UPUP)

MULTINOMIAL = 'Multinomial'
ONE_VS_REST = 'OneVsRest'
BINARY = 'Binary'

# encoder
DEFAULT_NUM_LAYERS = 3
DEFAULT_HIDDEN_DIM = 256
DEFAULT_FANOUT = 10

# loss and sampling
DEFAULT_ALPHA = 0.05
DEFAULT_K = 2.0  # largest euclidean distance between unit vectors
DEFAULT_Q = 1
DEFAULT_MIN_NEG_THRESHOLD = 3
DEFAULT_WALK_LENGTH = 5
DEFAULT_NEG_RETRIES = 10
EPSILON = 1e-9

# training
DEFAULT_EPOCHS = 100
DEFAULT_LR = 0.0025
DEFAULT_STEP_SIZE = 40
DEFAULT_GAMMA = 0.5
DEFAULT_BATCH_SIZE = 256

# distances
DEFAULT_LANDMARKS = 100
DEFAULT_MEMORY_BUDGET = 2 * 1024**3  # bytes allowed for the exact table

# downstream
DEFAULT_REG = 1e-4
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 5000

# splits
DEFAULT_SPLIT_RATIOS = (0.6, 0.3, 0.1)
DEFAULT_EDGE_TRAIN_RATIO = 0.6
DEFAULT_NEG_TRIALS_FACTOR = 100

# experiments
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
ENV_OUTPUT_DIR = 'CAFIN_OUTPUT_DIR'
ENV_WORKERS = 'CAFIN_WORKERS'
INF_MARKER = 'INF'
