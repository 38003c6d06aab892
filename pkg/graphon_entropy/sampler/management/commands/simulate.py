import logging

import numpy as np
from django.core.management.base import BaseCommand

from entropy_main.runconfig import (
    add_graphon_arguments, add_output_arguments, command_error, run_config_from_options,
)
from graphons.conf import engine_setting
from graphons.exceptions import GraphonEntropyError
from sampler.sampling import derive_seed, rho_schedule, sample_graph, sample_latents

logger = logging.getLogger(__name__)

LATENT_STREAM = 0
EDGE_STREAM = 1


class Command(BaseCommand):
    help = 'Sample one exchangeable graph from a graphon and write its edge list and latents'

    def add_arguments(self, parser):
        add_graphon_arguments(parser)
        parser.add_argument('--n', type=int, default=600, help='Number of nodes (default: %(default)s)')
        add_output_arguments(parser)

    def handle(self, *args, **options):
        try:
            config = run_config_from_options('simulate', options)
            spec = config.graphon_spec()
            rho = rho_schedule(config.n, config.regime, spec.rho_n,
                               exponent=engine_setting('SPARSE_LOG_EXPONENT'))
            spec = spec.with_rho(rho)
            latents = sample_latents(config.n, derive_seed(config.seed, 0, LATENT_STREAM))
            graph = sample_graph(spec, latents, derive_seed(config.seed, 0, EDGE_STREAM))
        except GraphonEntropyError as exc:
            raise command_error(exc) from exc

        config.out_dir.mkdir(parents=True, exist_ok=True)
        edges_path = graph.write_edge_list(config.out_dir / 'graph.edges')
        latents_path = config.out_dir / 'latents.txt'
        np.savetxt(latents_path, latents.xi, fmt='%.17g')
        logger.info("Wrote %s and %s", edges_path, latents_path)

        rho_hat = graph.edge_count / (config.n * (config.n - 1) / 2) if config.n > 1 else 0.0
        self.stdout.write(f"n={config.n} edges={graph.edge_count} rho_hat={rho_hat:.6f}")
        self.stdout.write(self.style.SUCCESS(f"Graph written to {edges_path}"))
