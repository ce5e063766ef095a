#!/usr/bin/env python
"""
Experiment configuration: value objects, INI reading and writing,
environment overrides and the configuration hash.
"""
from __future__ import annotations
from dataclasses import dataclass, field, asdict
import os
import logging
import pathlib
import configparser

from . import utils
from .constants import *
from .errors import ConfigurationError, ArtifactError
from .SageEncoder import SageConfig
from .Losses import LossConfig
from .Trainer import TrainingConfig

__all__ = ['OracleConfig', 'DownstreamConfig', 'ExperimentConfig', 'read_config', 'write_config']

logger = logging.getLogger(__name__)


@dataclass
class OracleConfig:
    """
        Distance oracle settings: '{EXACT}' all-pairs table or '{LANDMARK}'
        bounds out of `landmarks` landmarks picked by `strategy`.
    """
    mode: str = EXACT
    landmarks: int = DEFAULT_LANDMARKS
    strategy: str = RANDOM_LANDMARKS
    memory_budget: int = DEFAULT_MEMORY_BUDGET

    def __post_init__(self):
        if self.mode not in (EXACT, LANDMARK):
            raise ConfigurationError(f"Unknown oracle mode {self.mode!r}")
        if self.strategy not in (RANDOM_LANDMARKS, DEGREE_LANDMARKS):
            raise ConfigurationError(f"Unknown landmark strategy {self.strategy!r}")
        if self.landmarks < 1 or self.memory_budget < 1:
            raise ConfigurationError("landmarks and memory_budget must be positive")

OracleConfig.__doc__ = OracleConfig.__doc__.format(EXACT=EXACT, LANDMARK=LANDMARK)


@dataclass
class DownstreamConfig:
    reg: float = DEFAULT_REG
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.reg < 0 or self.tol <= 0 or self.max_iter < 1:
            raise ConfigurationError("Downstream needs reg >= 0, tol > 0 and max_iter >= 1")


@dataclass
class ExperimentConfig:
    """
        Everything a run needs: dataset paths, task, variants, seeds and the
        hyperparameters of every stage.
    """
    edges: str
    features: str
    labels: str = None
    task: str = NODE_CLASSIFICATION
    variants: list = field(default_factory=lambda: [BASELINE, CAFIN_FULL])
    seeds: list = field(default_factory=lambda: list(DEFAULT_SEEDS))
    output_dir: str = 'cafin_output'
    workers: int = 1
    oracle: OracleConfig = field(default_factory=OracleConfig)
    encoder: SageConfig = field(default_factory=SageConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    downstream: DownstreamConfig = field(default_factory=DownstreamConfig)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigurationError(f"Unknown task {self.task!r}, expected one of {TASKS}")
        if not self.seeds:
            raise ConfigurationError("At least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError(f"Seeds must be distinct, got {self.seeds}")
        unknown = [variant for variant in self.variants if variant not in VARIANTS]
        if unknown or not self.variants:
            raise ConfigurationError(f"Variants must be a non-empty subset of {VARIANTS}, got {self.variants}")
        if len(set(self.variants)) != len(self.variants):
            raise ConfigurationError(f"Variants must be distinct, got {self.variants}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be positive, got {self.workers}")
        if self.task == NODE_CLASSIFICATION and self.labels is None:
            raise ConfigurationError("Node classification needs a label file")
        if BASELINE not in self.variants:
            logger.warning("No %s variant: relative metrics (II, CA, T) will not be reported", BASELINE)

    @property
    def ordered_variants(self):
        """
            Variants in canonical order, baseline first.
        """
        return [variant for variant in VARIANTS if variant in self.variants]

    def to_dict(self):
        return asdict(self)

    @property
    def config_hash(self):
        """
            SHA-256 of the canonical JSON dump, output directory and worker
            count left out since they do not change results.
        """
        content = self.to_dict()
        content.pop('output_dir')
        content.pop('workers')
        return utils.hash_mapping(content)


def _as_list(value, cast):
    return [cast(token.strip()) for token in value.split(',') if token.strip()]


_SECTIONS = {
    'data': {'edges': str, 'features': str, 'labels': str},
    'experiment': {'task': str, 'variants': lambda value: _as_list(value, str),
                   'seeds': lambda value: _as_list(value, int), 'output_dir': str, 'workers': int},
    'oracle': {'mode': str, 'landmarks': int, 'strategy': str, 'memory_budget': int},
    'encoder': {'num_layers': int, 'hidden_dim': int, 'fanouts': lambda value: _as_list(value, int)},
    'loss': {'alpha': float, 'k': float, 'Q': int, 'min_neg_threshold': int, 'walk_length': int,
             'neg_retries': int},
    'training': {'epochs': int, 'lr': float, 'step_size': int, 'gamma': float, 'batch_size': int,
                 'progress': 'boolean'},
    'downstream': {'reg': float, 'tol': float, 'max_iter': int},
}


def _read_section(parser, name):
    if not parser.has_section(name):
        return {}
    section = parser[name]
    converters = _SECTIONS[name]
    utils.compare_given_and_required(section.keys(), optional=converters.keys(),
                                     error_message=f"Invalid keys in section [{name}]")
    values = {}
    for key in section:
        try:
            values[key] = section.getboolean(key) if converters[key] == 'boolean' else converters[key](section[key])
        except ValueError as error:
            raise ConfigurationError(f"[{name}] {key} = {section[key]!r}: {error}") from None
    return values


def read_config(path, environ=None):
    """
        Read an experiment configuration file.

        Parameters
        ----------
        path : path-like
            INI file with sections {sections}. Unknown sections or keys are
            errors, lists are comma-separated and relative dataset paths are
            resolved against the file directory
        environ : mapping
            Environment, {ENV_OUTPUT_DIR} and {ENV_WORKERS} override the file.
            Default to os.environ

        Returns
        -------
        config : ExperimentConfig
    """
    path = pathlib.Path(path)
    environ = os.environ if environ is None else environ
    if not path.exists():
        raise ArtifactError(f"Missing configuration file {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path)
    except configparser.Error as error:
        raise ConfigurationError(f"Cannot parse {path}: {error}") from None
    utils.compare_given_and_required(parser.sections(), required={'data'}, optional=_SECTIONS.keys(),
                                     error_message=f"Invalid sections in {path}")
    data = _read_section(parser, 'data')
    utils.compare_given_and_required(data, required={'edges', 'features'}, optional={'labels'},
                                     error_message="Invalid [data] section")
    for key, value in data.items():
        data[key] = str((path.parent / value).resolve())
    experiment = _read_section(parser, 'experiment')
    if ENV_OUTPUT_DIR in environ:
        experiment['output_dir'] = environ[ENV_OUTPUT_DIR]
    if ENV_WORKERS in environ:
        try:
            experiment['workers'] = int(environ[ENV_WORKERS])
        except ValueError:
            raise ConfigurationError(f"{ENV_WORKERS} must be an integer, got {environ[ENV_WORKERS]!r}") from None
    config = ExperimentConfig(**data, **experiment,
                              oracle=OracleConfig(**_read_section(parser, 'oracle')),
                              encoder=SageConfig(**_read_section(parser, 'encoder')),
                              loss=LossConfig(**_read_section(parser, 'loss')),
                              training=TrainingConfig(**_read_section(parser, 'training')),
                              downstream=DownstreamConfig(**_read_section(parser, 'downstream')))
    logger.info("Read configuration %s (hash %s)", path, config.config_hash[:12])
    return config

read_config.__doc__ = read_config.__doc__.format(sections=', '.join(f'[{name}]' for name in _SECTIONS),
                                                 ENV_OUTPUT_DIR=ENV_OUTPUT_DIR, ENV_WORKERS=ENV_WORKERS)


def write_config(config: ExperimentConfig, path):
    """
        Write the resolved configuration back as an INI file readable by
        read_config.
    """
    content = config.to_dict()
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    sections = {'data': {key: content[key] for key in ('edges', 'features', 'labels')},
                'experiment': {key: content[key] for key in ('task', 'variants', 'seeds', 'output_dir', 'workers')},
                'oracle': content['oracle'],
                'encoder': {key: content['encoder'][key] for key in _SECTIONS['encoder']},
                'loss': {key: content['loss'][key] for key in _SECTIONS['loss']},
                'training': content['training'],
                'downstream': content['downstream']}
    for name, values in sections.items():
        parser[name] = {key: ', '.join(map(str, value)) if isinstance(value, list) else str(value)
                        for key, value in values.items() if value is not None}
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as out:
        parser.write(out)
