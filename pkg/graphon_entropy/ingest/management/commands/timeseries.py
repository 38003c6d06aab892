import logging

from django.core.management.base import BaseCommand

from entropy_main.runconfig import (
    add_estimator_arguments, add_output_arguments, command_error, run_config_from_options,
)
from estimators.estimates import LOG2
from estimators.registry import EstimatorOptions
from graphons.conf import engine_setting
from graphons.exceptions import GraphonEntropyError
from ingest.parsing import parse_edge_list
from ingest.snapshots import MODES, build_snapshots, parse_window
from ingest.timeseries import entropy_timeseries, write_timeseries_csv

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Estimate the entropy of each snapshot of a timestamped edge list'

    def add_arguments(self, parser):
        parser.add_argument('--input', required=True, help='Edge list file with a timestamp column')
        parser.add_argument('--timestamps', action='store_true',
                            help='Read the third column of each line as its timestamp')
        parser.add_argument('--window', default='yearly',
                            help='monthly, yearly, or comma-separated window end boundaries '
                                 '(default: %(default)s)')
        parser.add_argument('--mode', choices=MODES, default='cumulative',
                            help='cumulative keeps every earlier edge, windowed only the window\'s '
                                 '(default: %(default)s)')
        add_estimator_arguments(parser, default_estimators='h3')
        parser.add_argument('--seed', type=int, default=0, help='Seed of the H3 label fit (default: %(default)s)')
        add_output_arguments(parser)

    def handle(self, *args, **options):
        try:
            config = run_config_from_options('timeseries', options)
            parsed = parse_edge_list(config.input_path, has_timestamps=config.timestamps)
            series = build_snapshots(parsed.records, window=parse_window(config.window), mode=config.mode)
        except GraphonEntropyError as exc:
            raise command_error(exc) from exc

        estimator_options = EstimatorOptions(
            k=config.k,
            eta=config.eta,
            normalization=config.normalization,
            restarts=engine_setting('FIT_RESTARTS'),
            fit_seed=config.seed,
            max_sweeps=engine_setting('FIT_MAX_SWEEPS'),
            epsilon=engine_setting('CLIP_EPSILON'),
            tol=engine_setting('USVT_TOLERANCE'),
        )
        per_estimator = [
            entropy_timeseries(series, estimator_id, estimator_options)
            for estimator_id in config.estimators
        ]
        rows = [row for snapshot_rows in zip(*per_estimator) for row in snapshot_rows]

        header = config.describe() + [
            ('restarts', estimator_options.restarts),
            ('max_sweeps', estimator_options.max_sweeps),
            ('restrict_active', True),
            ('universe', len(series.universe)),
            ('self_loops_dropped', parsed.self_loops),
            ('duplicates_dropped', parsed.duplicates),
        ]
        config.out_dir.mkdir(parents=True, exist_ok=True)
        path = write_timeseries_csv(rows, config.out_dir / 'timeseries.csv', header=header)
        logger.info("Timeseries of %s written to %s", config.input_path, path)

        for row in rows:
            if row.flag and row.entropy is None:
                self.stdout.write(self.style.WARNING(f"{row.timestamp} {row.estimator}: {row.flag}"))
                continue
            line = f"{row.timestamp} {row.estimator}: n_active={row.n_active} entropy={row.entropy:.6f} nats"
            if config.bits:
                line += f" ({row.entropy / LOG2:.6f} bits)"
            self.stdout.write(line)
        self.stdout.write(self.style.SUCCESS(f"{len(series)} snapshots written to {path}"))
