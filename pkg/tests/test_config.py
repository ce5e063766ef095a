from dataclasses import replace

import pytest

from cafin import ExperimentConfig, OracleConfig, read_config, write_config, SageConfig, LossConfig
from cafin import ConfigurationError, ArtifactError
from cafin.Trainer import TrainingConfig
from cafin.constants import BASELINE, CAFIN_FULL, CAFIN_P, CAFIN_N, LANDMARK, LINK_PREDICTION, ENV_OUTPUT_DIR, ENV_WORKERS


def _ini(directory, text):
    path = directory / 'experiment.ini'
    path.write_text(text)
    return path


BASIC = """
[data]
edges = data/edges.txt
features = data/features.txt
labels = data/labels.txt

[experiment]
variants = CafinFull, Baseline
seeds = 3, 4
"""


def test_defaults():
    config = ExperimentConfig('edges.txt', 'features.txt', 'labels.txt')
    assert config.variants == [BASELINE, CAFIN_FULL] and config.seeds == [0, 1, 2, 3, 4]
    assert config.encoder.num_layers == 3 and config.encoder.hidden_dim == 256
    assert config.loss.alpha == 0.05
    assert config.training.epochs == 100 and config.training.lr == 0.0025


def test_read_resolves_paths_against_the_file(tmp_path):
    config = read_config(_ini(tmp_path, BASIC), environ={})
    assert config.edges == str((tmp_path / 'data' / 'edges.txt').resolve())
    assert config.seeds == [3, 4]
    assert config.ordered_variants == [BASELINE, CAFIN_FULL]


def test_round_trip(tmp_path):
    data = (tmp_path / 'data').resolve()
    config = ExperimentConfig(str(data / 'edges.txt'), str(data / 'features.txt'), None, task=LINK_PREDICTION,
                              variants=[BASELINE, CAFIN_P, CAFIN_N], seeds=[7], workers=2,
                              oracle=OracleConfig(mode=LANDMARK, landmarks=12),
                              encoder=SageConfig(num_layers=2, hidden_dim=16, fanouts=[5, 3]),
                              loss=LossConfig(alpha=0.1, Q=2),
                              training=TrainingConfig(epochs=3, lr=0.01, progress=False))
    write_config(config, tmp_path / 'out' / 'config.ini')
    assert read_config(tmp_path / 'out' / 'config.ini', environ={}) == config


def test_unknown_keys_and_sections(tmp_path):
    with pytest.raises(ConfigurationError, match="unknown"):
        read_config(_ini(tmp_path, BASIC + "\n[loss]\nbeta = 1\n"), environ={})
    with pytest.raises(ConfigurationError, match="unknown"):
        read_config(_ini(tmp_path, BASIC + "\n[plots]\ncolor = red\n"), environ={})
    with pytest.raises(ConfigurationError, match="missing"):
        read_config(_ini(tmp_path, "[experiment]\nseeds = 1\n"), environ={})


def test_bad_values(tmp_path):
    with pytest.raises(ConfigurationError):
        read_config(_ini(tmp_path, BASIC + "\n[training]\nepochs = many\n"), environ={})
    with pytest.raises(ConfigurationError):
        read_config(_ini(tmp_path, BASIC + "\n[encoder]\nnum_layers = 2\nfanouts = 5\n"), environ={})


def test_missing_file(tmp_path):
    with pytest.raises(ArtifactError):
        read_config(tmp_path / 'nothing.ini')


def test_environment_overrides(tmp_path):
    environ = {ENV_OUTPUT_DIR: str(tmp_path / 'elsewhere'), ENV_WORKERS: '3'}
    config = read_config(_ini(tmp_path, BASIC), environ=environ)
    assert config.output_dir == str(tmp_path / 'elsewhere') and config.workers == 3
    with pytest.raises(ConfigurationError):
        read_config(_ini(tmp_path, BASIC), environ={ENV_WORKERS: 'all'})


def test_config_hash(tmp_path):
    config = read_config(_ini(tmp_path, BASIC), environ={})
    assert config.config_hash == read_config(_ini(tmp_path, BASIC), environ={}).config_hash
    assert replace(config, output_dir='x', workers=4).config_hash == config.config_hash
    assert replace(config, seeds=[3]).config_hash != config.config_hash
    assert replace(config, loss=LossConfig(alpha=0.)).config_hash != config.config_hash


def test_validation(caplog):
    with pytest.raises(ConfigurationError):
        ExperimentConfig('e', 'f')
    with pytest.raises(ConfigurationError):
        ExperimentConfig('e', 'f', 'l', seeds=[1, 1])
    with pytest.raises(ConfigurationError):
        ExperimentConfig('e', 'f', 'l', variants=['Other'])
    with pytest.raises(ConfigurationError):
        ExperimentConfig('e', 'f', 'l', task='Ranking')
    ExperimentConfig('e', 'f', task=LINK_PREDICTION, variants=[CAFIN_FULL])
    assert "No Baseline variant" in caplog.text
