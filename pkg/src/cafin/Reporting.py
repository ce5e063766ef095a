#!/usr/bin/env python
"""
Report tables of a run: per-seed rows, aggregation across seeds, timings
and their rendering.
"""
import json
import math
import logging
import pathlib
import numpy as np
import pandas as pd

from .constants import *
from .errors import ArtifactError, ArgumentError, UndefinedMetricError
from .Metrics import REPORT_COLUMNS, cv, t_overhead, format_value, slope_from_table

__all__ = ['reports_frame', 'timings_frame', 'aggregate', 'aggregate_timings', 'write_run', 'load_run',
           'degree_accuracy_frame', 'render']

logger = logging.getLogger(__name__)

REPORT_FILES = ('reports.csv', 'reports.json', 'aggregate.csv', 'aggregate.json', 'timings.csv', 'timings.json')
TIMING_COLUMNS = ['seed', 'variant', 't_p', 't_train', 't_t', 'T']
_VARIANT_ORDER = {variant: rank for rank, variant in enumerate(VARIANTS)}


def _sorted(frame):
    if frame.empty:
        return frame
    order = frame['variant'].map(_VARIANT_ORDER)
    return frame.assign(_order=order).sort_values(['seed', '_order'], kind='stable').drop(columns='_order') \
                .reset_index(drop=True)


def reports_frame(reports):
    return _sorted(pd.DataFrame([report.to_row() for report in reports], columns=REPORT_COLUMNS))


def timings_frame(timings):
    return _sorted(pd.DataFrame(list(timings), columns=TIMING_COLUMNS))


def _mean(values):
    values = pd.to_numeric(values, errors='coerce').dropna()
    return float(values.mean()) if len(values) else None


def _cv(values):
    values = pd.to_numeric(values, errors='coerce').dropna()
    try:
        return cv(values.to_numpy())
    except (ArgumentError, UndefinedMetricError):
        return None


def aggregate(reports: pd.DataFrame):
    """
        One row per variant over the successful seeds: mean imparity and
        accuracy, mean improvement in imparity with its coefficient of
        variation, mean change in accuracy and mean slope.
    """
    rows = []
    for variant in [variant for variant in VARIANTS if variant in set(reports['variant'])]:
        rows_of = reports[reports['variant'] == variant]
        ok = rows_of[rows_of['status'] == 'ok']
        rows.append({'task': rows_of['task'].iloc[0], 'variant': variant, 'seeds': len(ok),
                     'failed': len(rows_of) - len(ok), 'imparity': _mean(ok['imparity']),
                     'overall_accuracy': _mean(ok['overall_accuracy']), 'ii_percent': _mean(ok['ii_percent']),
                     'ii_cv_percent': _cv(ok['ii_percent']), 'ca_points': _mean(ok['ca_points']),
                     'slope': _mean(ok['slope'])})
    return pd.DataFrame(rows, columns=['task', 'variant', 'seeds', 'failed', 'imparity', 'overall_accuracy',
                                       'ii_percent', 'ii_cv_percent', 'ca_points', 'slope'])


def aggregate_timings(timings: pd.DataFrame, aggregated: pd.DataFrame):
    """
        Mean and coefficient of variation of the preprocessing and extra
        training times per variant, and the time overhead per point of
        improvement computed from the means.
    """
    rows = []
    for variant in aggregated['variant']:
        rows_of = timings[timings['variant'] == variant]
        t_p, t_t = _mean(rows_of['t_p']), _mean(rows_of['t_t'])
        mean_ii = aggregated.loc[aggregated['variant'] == variant, 'ii_percent'].iloc[0]
        overhead = None
        if t_p is not None and t_t is not None and mean_ii is not None and not pd.isna(mean_ii):
            overhead = t_overhead(t_p, t_t, mean_ii)
        rows.append({'variant': variant, 't_p': t_p, 't_p_cv_percent': _cv(rows_of['t_p']), 't_t': t_t,
                     't_t_cv_percent': _cv(rows_of['t_t']), 'T': overhead})
    return pd.DataFrame(rows, columns=['variant', 't_p', 't_p_cv_percent', 't_t', 't_t_cv_percent', 'T'])


def _fill_spread(reports):
    for variant in {report.variant for report in reports}:
        improved = [report for report in reports if report.variant == variant and report.ok
                    and report.ii_percent is not None]
        spread = _cv(pd.Series([report.ii_percent for report in improved], dtype=float))
        for report in improved:
            report.cv_percent = spread


def _with_markers(frame):
    return frame.apply(lambda column: column.map(lambda value: format_value(value) if isinstance(value, float)
                                                 and math.isinf(value) else value))


def _write_json(path, records):
    with open(path, 'w') as out:
        json.dump(format_value(records), out, indent=2, sort_keys=True)
        out.write('\n')


def write_run(directory, reports, timings):
    """
        Write the report files of a run. reports.* and aggregate.* only hold
        deterministic values, wall-times go to timings.*.

        Parameters
        ----------
        directory : path-like
        reports : list of FairnessReport
        timings : list of dict

        Returns
        -------
        aggregated : pandas.DataFrame
    """
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _fill_spread(reports)
    rows = reports_frame(reports)
    _with_markers(rows).to_csv(directory / 'reports.csv', index=False)
    ordered = sorted(reports, key=lambda report: (report.seed, _VARIANT_ORDER[report.variant]))
    _write_json(directory / 'reports.json', [report.to_json() for report in ordered])
    aggregated = aggregate(rows)
    aggregated.to_csv(directory / 'aggregate.csv', index=False)
    _write_json(directory / 'aggregate.json', aggregated.to_dict(orient='records'))
    times = timings_frame(timings)
    _with_markers(times).to_csv(directory / 'timings.csv', index=False)
    _write_json(directory / 'timings.json', {'per_seed': times.to_dict(orient='records'),
                                             'aggregate': aggregate_timings(times, aggregated).to_dict(orient='records')})
    logger.info("Wrote reports of %d seed(s) to %s", rows['seed'].nunique(), directory)
    return aggregated


def load_run(directory):
    """
        Read back the per-seed reports and timings of a run directory.

        Returns
        -------
        reports : pandas.DataFrame
        timings : pandas.DataFrame
    """
    directory = pathlib.Path(directory)
    missing = [name for name in REPORT_FILES if not (directory / name).exists()]
    if missing:
        raise ArtifactError(f"Run directory {directory} lacks {', '.join(missing)} "
                            f"(expected {', '.join(REPORT_FILES)} and seed_<seed>/ directories)")
    try:
        reports = pd.read_csv(directory / 'reports.csv')
        timings = pd.read_csv(directory / 'timings.csv')
    except (ValueError, pd.errors.ParserError) as error:
        raise ArtifactError(f"Corrupt report files in {directory}: {error}") from None
    reports['t_seconds_per_point'] = pd.to_numeric(reports['t_seconds_per_point'].replace(INF_MARKER, np.inf),
                                                  errors='coerce')
    timings['T'] = pd.to_numeric(timings['T'].replace(INF_MARKER, np.inf), errors='coerce')
    return reports, timings


def degree_accuracy_frame(directory):
    """
        Per-degree accuracies of every seed and variant of a run, with the
        slope recomputed from each exported table.
    """
    frames, slopes = [], []
    for path in sorted(pathlib.Path(directory).glob('seed_*/*/degree_accuracy.csv')):
        seed, variant = int(path.parent.parent.name.split('_', 1)[1]), path.parent.name
        table = pd.read_csv(path)
        frames.append(table.assign(seed=seed, variant=variant))
        try:
            slopes.append({'seed': seed, 'variant': variant, 'slope': slope_from_table(table)})
        except UndefinedMetricError:
            slopes.append({'seed': seed, 'variant': variant, 'slope': None})
    columns = ['seed', 'variant', 'degree', 'accuracy', 'count']
    table = pd.concat(frames, ignore_index=True)[columns] if frames else pd.DataFrame(columns=columns)
    if not table.empty:
        table = table.assign(_order=table['variant'].map(_VARIANT_ORDER)) \
                     .sort_values(['seed', '_order', 'degree'], kind='stable').drop(columns='_order')
    return table.reset_index(drop=True), _sorted(pd.DataFrame(slopes, columns=['seed', 'variant', 'slope']))


def _fmt(value, digits=4):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return '-'
    if isinstance(value, float) and math.isinf(value):
        return INF_MARKER
    return f"{value:.{digits}f}"


def render(reports: pd.DataFrame, timings: pd.DataFrame):
    """
        Human-readable results table, improvement in imparity shown as
        `II (CV)`.
    """
    aggregated = aggregate(reports)
    times = aggregate_timings(timings, aggregated)
    table = pd.DataFrame({
        'variant': aggregated['variant'],
        'seeds': [f"{ok}/{ok + failed}" for ok, failed in zip(aggregated['seeds'], aggregated['failed'])],
        'imparity': aggregated['imparity'].map(_fmt),
        'accuracy': aggregated['overall_accuracy'].map(_fmt),
        'II (CV)': [f"{_fmt(value, 2)} ({_fmt(spread, 2)})" for value, spread in
                    zip(aggregated['ii_percent'], aggregated['ii_cv_percent'])],
        'CA': aggregated['ca_points'].map(lambda value: _fmt(value, 2)),
        'T': times['T'].map(lambda value: _fmt(value, 3)),
        'slope': aggregated['slope'].map(_fmt),
    })
    task = aggregated['task'].iloc[0] if len(aggregated) else '-'
    failures = reports[reports['status'] != 'ok']
    lines = [f"task {task}", table.to_string(index=False)]
    for _, row in failures.iterrows():
        lines.append(f"seed {row['seed']} {row['variant']} failed: {row['error']}")
    return '\n'.join(lines) + '\n'
