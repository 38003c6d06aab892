import dataclasses
import logging

from django.core.management.base import BaseCommand
from django.db import DatabaseError, transaction

from entropy_main.runconfig import (
    add_estimator_arguments, add_graphon_arguments, add_output_arguments, command_error,
    default_threads, run_config_from_options,
)
from estimators.registry import EstimatorOptions
from graphons.conf import engine_setting
from graphons.exceptions import DomainError, GraphonEntropyError
from simharness.batches import run_batch, write_batch_csv, write_summary_csv, write_sweep_csv
from simharness.models import BatchSummary, BenchmarkRun

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Monte-Carlo bias, variance, RMSE and sRMSE of the entropy estimators'

    def add_arguments(self, parser):
        add_graphon_arguments(parser)
        parser.add_argument('--n', default='600',
                            help='Node count, or increasing comma-separated counts for a sweep '
                                 '(default: %(default)s)')
        parser.add_argument('--trials', type=int, default=100, help='Trials per batch (default: %(default)s)')
        parser.add_argument('--threads', type=int, default=default_threads(),
                            help='Worker processes (default: available CPUs, %(default)s here)')
        add_estimator_arguments(parser, default_estimators='h1,h2,h3')
        add_output_arguments(parser)

    def handle(self, *args, **options):
        try:
            config = run_config_from_options('benchmark', options)
            if config.trials < 2:
                raise DomainError(f"--trials must be at least 2, got {config.trials}")
            n_values = config.n_values
            if any(later <= earlier for earlier, later in zip(n_values, n_values[1:])):
                raise DomainError(f"--n values must increase, got {','.join(map(str, n_values))}")
            spec = config.graphon_spec()
            estimator_options = EstimatorOptions(
                k=config.k,
                eta=config.eta,
                normalization=config.normalization,
                restarts=engine_setting('FIT_RESTARTS'),
                max_sweeps=engine_setting('FIT_MAX_SWEEPS'),
                epsilon=engine_setting('CLIP_EPSILON'),
                tol=engine_setting('USVT_TOLERANCE'),
            )
            batches = []
            for n in n_values:
                result = run_batch(
                    spec, config.estimators, n, config.trials, config.seed,
                    options=estimator_options,
                    threads=config.threads,
                    regime=config.regime,
                    spec_id=config.graphon,
                    quad_points=engine_setting('QUAD_POINTS'),
                    sparse_exponent=engine_setting('SPARSE_LOG_EXPONENT'),
                )
                batches.extend(result.values())
        except GraphonEntropyError as exc:
            raise command_error(exc) from exc

        config.out_dir.mkdir(parents=True, exist_ok=True)
        write_batch_csv(batches, config.out_dir / 'batch.csv')
        summary_path = write_summary_csv(batches, config.out_dir / 'summary.csv')
        sweep_path = write_sweep_csv(batches, config.out_dir / 'sweep.csv', config.regime)
        self._record(config, estimator_options, batches)

        for batch in batches:
            self.stdout.write(
                f"{batch.estimator_id} n={batch.n}: mean={batch.mean:.6f} truth={batch.truth:.6f} "
                f"bias2={batch.bias_squared:.3e} var={batch.variance:.3e} rmse={batch.rmse:.3e} "
                f"srmse={batch.srmse:.3e}"
            )
            if batch.failures:
                self.stdout.write(self.style.WARNING(f"  {batch.failures} failed trials excluded"))
        self.stdout.write(self.style.SUCCESS(f"Summaries written to {summary_path} and {sweep_path}"))

    def _record(self, config, estimator_options, batches):
        try:
            with transaction.atomic():
                run = BenchmarkRun.objects.create(
                    graphon=config.graphon,
                    regime=config.regime,
                    n_values=list(config.n_values),
                    trials=config.trials,
                    master_seed=config.seed,
                    options=dataclasses.asdict(estimator_options),
                )
                BatchSummary.objects.bulk_create([BatchSummary.from_batch(run, batch) for batch in batches])
        except DatabaseError as exc:
            logger.warning("Could not record the benchmark run: %s", exc)
