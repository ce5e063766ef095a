import importlib
import json
import math

import numpy as np
import pandas as pd
import pytest

from cafin import (ExperimentConfig, OracleConfig, SageConfig, LossConfig, Cafin, SeedOutcome, FairnessReport,
                   write_config, build_exact, ArtifactError)
from cafin.Trainer import TrainingConfig
from cafin.Reporting import REPORT_FILES, write_run, load_run
from cafin.cli import cmd_preprocess, cmd_run, cmd_report, main
from cafin.constants import BASELINE, CAFIN_FULL, CAFIN_P, LANDMARK, LINK_PREDICTION, NODE_CLASSIFICATION


def _config(dataset, output_dir, **kwargs):
    edges, features, labels = dataset
    settings = dict(seeds=[0, 1], output_dir=str(output_dir),
                    encoder=SageConfig(num_layers=2, hidden_dim=8, fanouts=[5, 5]),
                    training=TrainingConfig(epochs=2, lr=0.01, batch_size=64, progress=False))
    settings.update(kwargs)
    settings.setdefault('labels', None if labels is None else str(labels))
    return ExperimentConfig(str(edges), str(features), **settings)


def _reports(directory):
    return pd.read_csv(directory / 'reports.csv')


def test_run_writes_the_run_directory(toy_dataset, tmp_path):
    run = tmp_path / 'run'
    assert cmd_run(_config(toy_dataset, run)) == 0
    for name in REPORT_FILES + ('config.ini',):
        assert (run / name).exists(), name
    for seed in (0, 1):
        assert (run / f'seed_{seed}' / 'splits.txt').exists()
        for variant in (BASELINE, CAFIN_FULL):
            for name in ('loss_trace.csv', 'degree_accuracy.csv', 'encoder.bin', 'classifier.bin'):
                assert (run / f'seed_{seed}' / variant / name).exists()
    reports = _reports(run)
    assert len(reports) == 4 and (reports['status'] == 'ok').all()
    assert reports['variant'].tolist() == [BASELINE, CAFIN_FULL] * 2
    assert reports['imparity'].ge(0).all()
    assert reports.loc[reports['variant'] == BASELINE, 'ca_points'].isna().all()
    assert reports.loc[reports['variant'] == CAFIN_FULL, 'ca_points'].notna().all()
    assert reports['triples_hash'].iloc[0] == reports['triples_hash'].iloc[1]
    timings = json.loads((run / 'timings.json').read_text())
    assert len(timings['per_seed']) == 4
    aggregate = pd.read_csv(run / 'aggregate.csv')
    assert aggregate['seeds'].tolist() == [2, 2]


def test_reruns_are_byte_identical(toy_dataset, tmp_path):
    for name in ('first', 'second'):
        assert cmd_run(_config(toy_dataset, tmp_path / name, variants=[BASELINE, CAFIN_P])) == 0
    for name in ('reports.csv', 'reports.json', 'aggregate.csv', 'aggregate.json'):
        assert (tmp_path / 'first' / name).read_bytes() == (tmp_path / 'second' / name).read_bytes()
    assert cmd_report(tmp_path / 'first') == cmd_report(tmp_path / 'second')


def test_zero_alpha_matches_the_baseline(toy_dataset, tmp_path):
    run = tmp_path / 'run'
    assert cmd_run(_config(toy_dataset, run, seeds=[3], loss=LossConfig(alpha=0.))) == 0
    baseline, full = _reports(run).to_dict('records')
    assert full['imparity'] == baseline['imparity']
    assert full['overall_accuracy'] == baseline['overall_accuracy']
    assert full['ca_points'] == 0.
    assert pd.isna(full['ii_percent']) or full['ii_percent'] == 0.


def test_baseline_only_run_has_no_relative_metrics(toy_dataset, tmp_path):
    run = tmp_path / 'run'
    assert cmd_run(_config(toy_dataset, run, seeds=[0], variants=[BASELINE])) == 0
    reports = _reports(run)
    assert reports['ii_percent'].isna().all() and reports['ca_points'].isna().all()
    assert pd.read_csv(run / 'timings.csv')['T'].isna().all()


def test_failed_seed_sets_the_exit_status(toy_dataset, tmp_path):
    run = tmp_path / 'run'
    config = _config(toy_dataset, run, seeds=[0], oracle=OracleConfig(memory_budget=1))
    assert cmd_run(config) == 1
    reports = _reports(run)
    assert (reports['status'] == 'failed').all()
    assert reports['error'].str.contains('CapacityError').all()
    assert "failed" in cmd_report(run)


def test_report_exports_degree_accuracies(toy_dataset, tmp_path):
    run = tmp_path / 'run'
    assert cmd_run(_config(toy_dataset, run)) == 0
    text = cmd_report(run)
    assert "II (CV)" in text and (run / 'report.txt').read_text() == text
    degrees = pd.read_csv(run / 'degree_accuracy.csv')
    assert list(degrees.columns) == ['seed', 'variant', 'degree', 'accuracy', 'count']
    slopes = pd.read_csv(run / 'degree_slopes.csv')
    merged = slopes.merge(_reports(run), on=['seed', 'variant'], suffixes=('_exported', '_run'))
    assert len(merged) == 4
    assert np.allclose(merged['slope_exported'], merged['slope_run'], equal_nan=True)


def test_report_of_an_empty_directory(tmp_path):
    with pytest.raises(ArtifactError, match="reports.csv"):
        cmd_report(tmp_path)
    assert main(['report', str(tmp_path)]) == 2


def test_main_run(toy_dataset, tmp_path, capsys):
    config = _config(toy_dataset, tmp_path / 'run', seeds=[0])
    write_config(config, tmp_path / 'experiment.ini')
    assert main(['-q', 'run', str(tmp_path / 'experiment.ini')]) == 0
    assert main(['-q', 'report', str(tmp_path / 'run')]) == 0
    assert "II (CV)" in capsys.readouterr().out
    with pytest.raises(SystemExit):
        main(['--version'])


def test_link_prediction(toy_dataset, tmp_path):
    edges, features, _ = toy_dataset
    run = tmp_path / 'run'
    config = _config((edges, features, None), run, seeds=[0], task=LINK_PREDICTION)
    assert cmd_run(config) == 0
    report = json.loads((run / 'reports.json').read_text())[1]
    assert report['task'] == LINK_PREDICTION
    assert set(report['details']['accuracies']) == {'PP', 'PUP', 'UPUP'}


def test_landmark_oracle_run(toy_dataset, tmp_path):
    config = _config(toy_dataset, tmp_path / 'run', seeds=[0], oracle=OracleConfig(mode=LANDMARK, landmarks=10))
    assert cmd_run(config) == 0


def test_multilabel_node_classification(dataset_writer, sbm, tmp_path):
    dataset = dataset_writer(tmp_path / 'data', sbm(n=200, p_in=0.08, p_out=0.01, seed=3), multilabel=True)
    run = tmp_path / 'run'
    assert cmd_run(_config(dataset, run, seeds=[0])) == 0
    assert (_reports(run)['overall_accuracy'].between(0, 1)).all()


def test_workers_do_not_change_the_reports(toy_dataset, tmp_path):
    assert cmd_run(_config(toy_dataset, tmp_path / 'serial')) == 0
    assert cmd_run(_config(toy_dataset, tmp_path / 'parallel', workers=2)) == 0
    for name in ('reports.csv', 'aggregate.csv'):
        assert (tmp_path / 'serial' / name).read_bytes() == (tmp_path / 'parallel' / name).read_bytes()


def test_preprocess(toy_dataset, tmp_path):
    config = _config(toy_dataset, tmp_path / 'run')
    summary = cmd_preprocess(config)
    directory = tmp_path / 'run' / 'preprocess'
    for name in ('oracle.bin', 'centrality.csv', 'preprocess.json'):
        assert (directory / name).exists()
    assert summary['graph']['nodes'] == 200
    assert summary['popular'] + summary['unpopular'] == 200
    cafin = Cafin.from_config(config)
    assert cafin.config.task == NODE_CLASSIFICATION
    assert cafin.class_freq.sum() == 200


def test_missing_input_files_exit_with_status_2(toy_dataset, tmp_path):
    edges, _, labels = toy_dataset
    config = _config((edges, tmp_path / 'missing.txt', labels), tmp_path / 'run', seeds=[0])
    write_config(config, tmp_path / 'experiment.ini')
    with pytest.raises(ArtifactError, match="features"):
        cmd_preprocess(config)
    assert main(['-q', 'preprocess', str(tmp_path / 'experiment.ini')]) == 2
    assert main(['-q', 'run', str(tmp_path / 'experiment.ini')]) == 2


def test_overhead_is_infinite_without_improvement(sbm):
    config = ExperimentConfig('edges.txt', 'features.txt', labels='labels.txt',
                              variants=[BASELINE, CAFIN_FULL, CAFIN_P])
    cafin = Cafin(sbm(n=20), config)
    reports = [FairnessReport(NODE_CLASSIFICATION, variant, 0, imparity=imparity, overall_accuracy=0.5)
               for variant, imparity in ((BASELINE, 0.1), (CAFIN_FULL, 0.12), (CAFIN_P, 0.05))]
    outcome = SeedOutcome(0, reports)
    cafin._compare(outcome, 1., {BASELINE: 2., CAFIN_FULL: 3., CAFIN_P: 4.})
    baseline, full, partial = outcome.reports
    assert baseline.ii_percent is None and baseline.t_seconds_per_point is None
    assert full.ii_percent < 0 and full.t_seconds_per_point == math.inf
    assert partial.ii_percent == pytest.approx(50.) and partial.t_seconds_per_point is None
    timings = {timing['variant']: timing for timing in outcome.timings}
    assert timings[CAFIN_FULL]['T'] == math.inf
    assert timings[CAFIN_P]['T'] == pytest.approx((1. + 2.) / 50.)


def test_reports_carry_the_spread_over_seeds(tmp_path):
    reports, timings = [], []
    for seed, (imparity, ii_percent) in enumerate(((0.05, 50.), (0.12, -20.))):
        reports.append(FairnessReport(NODE_CLASSIFICATION, BASELINE, seed, imparity=0.1, overall_accuracy=0.5))
        reports.append(FairnessReport(NODE_CLASSIFICATION, CAFIN_FULL, seed, imparity=imparity, overall_accuracy=0.5,
                                      ii_percent=ii_percent, ca_points=0.,
                                      t_seconds_per_point=math.inf if ii_percent <= 0 else None))
        timings += [{'seed': seed, 'variant': BASELINE, 't_p': 1., 't_train': 2., 't_t': None, 'T': None},
                    {'seed': seed, 'variant': CAFIN_FULL, 't_p': 1., 't_train': 3., 't_t': 1.,
                     'T': 2. / ii_percent if ii_percent > 0 else math.inf}]
    aggregated = write_run(tmp_path, reports, timings)
    spread = aggregated.loc[aggregated['variant'] == CAFIN_FULL, 'ii_cv_percent'].iloc[0]
    assert spread == pytest.approx(35. / 15. * 100.)
    assert [report.cv_percent for report in reports] == [None, spread, None, spread]
    rows, _ = load_run(tmp_path)
    assert rows['cv_percent'].isna().tolist() == [True, False, True, False]
    assert rows['t_seconds_per_point'].isna().tolist() == [True, True, True, False]
    assert rows['t_seconds_per_point'].iloc[3] == math.inf
    assert json.loads((tmp_path / 'reports.json').read_text())[3]['t_seconds_per_point'] == 'INF'


def test_serial_seeds_build_the_oracle_with_every_worker(toy_dataset, tmp_path, monkeypatch):
    requested = []

    def recording_build_exact(g, workers=1, **kwargs):
        requested.append(workers)
        return build_exact(g, workers=1, **kwargs)

    monkeypatch.setattr(importlib.import_module('cafin.PreprocessingDriver'), 'build_exact', recording_build_exact)
    assert cmd_run(_config(toy_dataset, tmp_path / 'run', seeds=[0], workers=2)) == 0
    assert requested == [2]
