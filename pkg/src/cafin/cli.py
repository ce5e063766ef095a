#!/usr/bin/env python
"""
Command line interface: the preprocess, run and report verbs.
"""
from concurrent.futures import ProcessPoolExecutor
import sys
import json
import logging
import pathlib
import argparse

from .__metadata__ import __version__
from .constants import *
from .errors import CafinError
from .config import ExperimentConfig, read_config, write_config
from .Cafin import Cafin
from .Reporting import write_run, load_run, render, degree_accuracy_frame

__all__ = ['main', 'cmd_preprocess', 'cmd_run', 'cmd_report']

logger = logging.getLogger(__name__)


def _run_seed_job(cafin: Cafin, seed, directory, workers=1):
    outcome = cafin.run_seed(seed, directory, workers)
    return outcome.reports, outcome.timings, outcome.error


def cmd_preprocess(config: ExperimentConfig, workers=None):
    """
        Build the oracle, centralities and groups of the input graph into
        <output_dir>/preprocess.

        Returns
        -------
        summary : dict
    """
    cafin = Cafin.from_config(config)
    return cafin.preprocess(workers=workers)


def cmd_run(config: ExperimentConfig):
    """
        Run every seed, write the run directory and return the exit status:
        0 when every seed succeeded, 1 otherwise.
    """
    directory = pathlib.Path(config.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    write_config(config, directory / 'config.ini')
    cafin = Cafin.from_config(config)
    logger.info("Running %r on seeds %s with %d worker(s)", cafin, config.seeds, config.workers)
    jobs = len(config.seeds)
    if config.workers > 1 and jobs > 1:
        with ProcessPoolExecutor(max_workers=min(config.workers, jobs)) as executor:
            results = list(executor.map(_run_seed_job, [cafin] * jobs, config.seeds, [directory] * jobs))
    else:
        results = [_run_seed_job(cafin, seed, directory, config.workers) for seed in config.seeds]
    reports = [report for seed_reports, _, _ in results for report in seed_reports]
    timings = [timing for _, seed_timings, _ in results for timing in seed_timings]
    write_run(directory, reports, timings)
    failed = [seed for seed, (_, _, error) in zip(config.seeds, results) if error is not None]
    if failed:
        logger.error("Seed(s) %s failed, see the failure rows of %s", failed, directory / 'reports.csv')
    return 1 if failed else 0


def cmd_report(run_directory):
    """
        Render the results table of a run directory into report.txt and
        export the per-degree accuracies to degree_accuracy.csv and their
        slopes to degree_slopes.csv.

        Returns
        -------
        text : str
    """
    run_directory = pathlib.Path(run_directory)
    reports, timings = load_run(run_directory)
    text = render(reports, timings)
    (run_directory / 'report.txt').write_text(text)
    degrees, slopes = degree_accuracy_frame(run_directory)
    degrees.to_csv(run_directory / 'degree_accuracy.csv', index=False)
    slopes.to_csv(run_directory / 'degree_slopes.csv', index=False)
    return text


def _configure_logging(verbose, quiet):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.captureWarnings(True)


def _parser():
    parser = argparse.ArgumentParser(prog=NAME, description="Degree-fair node embedding experiments: "
                                                            "preprocess, run and report.")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help="debug logging")
    verbosity.add_argument('-q', '--quiet', action='store_true', help="warnings and errors only")
    commands = parser.add_subparsers(dest='command', required=True)
    preprocess = commands.add_parser('preprocess', help="build the distance oracle and the degree groups")
    preprocess.add_argument('config', help="experiment configuration file")
    run = commands.add_parser('run', help="train and evaluate every variant on every seed")
    run.add_argument('config', help="experiment configuration file")
    report = commands.add_parser('report', help="render the tables of a run directory")
    report.add_argument('run_directory', help="output directory of a previous run")
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    try:
        if args.command == 'preprocess':
            summary = cmd_preprocess(read_config(args.config))
            print(json.dumps(summary, indent=2, sort_keys=True, default=str))
            return 0
        if args.command == 'run':
            return cmd_run(read_config(args.config))
        print(cmd_report(args.run_directory), end='')
        return 0
    except CafinError as error:
        logger.error("%s", error)
        return 2


if __name__ == '__main__':
    sys.exit(main())
