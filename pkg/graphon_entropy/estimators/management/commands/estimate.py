import logging

from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError

from entropy_main.runconfig import (
    add_estimator_arguments, add_output_arguments, command_error, run_config_from_options,
)
from estimators.models import EstimateRecord
from estimators.registry import EstimatorOptions, apply_estimator, write_estimates_csv
from graphons.conf import engine_setting
from graphons.exceptions import DomainError, GraphonEntropyError
from ingest.parsing import load_graph

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Estimate the graphon entropy of an observed graph with H1-H4'

    def add_arguments(self, parser):
        parser.add_argument('--input', required=True, help='Edge list file to estimate from')
        add_estimator_arguments(parser)
        parser.add_argument('--seed', type=int, default=0, help='Seed of the H3 label fit (default: %(default)s)')
        add_output_arguments(parser)

    def handle(self, *args, **options):
        try:
            config = run_config_from_options('estimate', options)
            graph = load_graph(config.input_path)
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
        estimates, failures = [], []
        for estimator_id in config.estimators:
            try:
                estimates.append(apply_estimator(estimator_id, graph, estimator_options))
            except DomainError as exc:
                raise command_error(exc) from exc
            except GraphonEntropyError as exc:
                failures.append(estimator_id)
                self.stderr.write(self.style.WARNING(f"{estimator_id} failed: {exc}"))

        config.out_dir.mkdir(parents=True, exist_ok=True)
        path = write_estimates_csv(estimates, config.out_dir / 'estimates.csv')
        self._record(estimates, config.input_path)

        for estimate in estimates:
            line = f"{estimate.estimator}: {estimate.value:.6f} nats"
            if config.bits:
                line += f" ({estimate.in_bits():.6f} bits)"
            if estimate.degenerate:
                line += " [degenerate]"
            self.stdout.write(line)
        self.stdout.write(f"n={graph.n} rho_hat={graph.edge_count / max(1, graph.n * (graph.n - 1) // 2):.6f}")

        if failures:
            raise CommandError(f"estimators {', '.join(failures)} failed; see {path}", returncode=1)
        self.stdout.write(self.style.SUCCESS(f"Estimates written to {path}"))

    def _record(self, estimates, source):
        try:
            EstimateRecord.objects.bulk_create(
                [EstimateRecord.from_estimate(estimate, source) for estimate in estimates]
            )
        except DatabaseError as exc:
            logger.warning("Could not record estimates in the registry: %s", exc)
