"""
Shared command-line options of the management commands.

Each command declares the flags it uses through the helpers below and turns
the parsed options into a RunConfig, so defaults live in one place and
``--help`` shows them the same way for every subcommand.
"""
import dataclasses
import os
from pathlib import Path

from django.core.management.base import CommandError

from graphons.conf import engine_setting
from graphons.exceptions import DomainError
from graphons.forms import KIND_CHOICES, graphon_from_options

ESTIMATOR_IDS = ('H1', 'H2', 'H3', 'H4')


def parse_estimators(value):
    """'h1,h3' -> ('H1', 'H3'), order kept, duplicates dropped."""
    chosen = []
    for token in value.split(','):
        token = token.strip().upper()
        if not token:
            continue
        if token not in ESTIMATOR_IDS:
            raise DomainError(f"unknown estimator '{token}', choose from {', '.join(ESTIMATOR_IDS)}")
        if token not in chosen:
            chosen.append(token)
    if not chosen:
        raise DomainError("at least one estimator is required")
    return tuple(chosen)


def parse_n_list(value):
    """'200,400' -> (200, 400); a single number gives a 1-tuple."""
    try:
        values = tuple(int(token) for token in str(value).split(',') if token.strip())
    except ValueError as exc:
        raise DomainError(f"--n expects integers, got '{value}'") from exc
    if not values or any(n < 1 for n in values):
        raise DomainError(f"--n values must be positive, got '{value}'")
    return values


def parse_k(value):
    if value is None or str(value).lower() == 'auto':
        return None
    try:
        k = int(value)
    except ValueError as exc:
        raise DomainError(f"--k expects a positive integer or 'auto', got '{value}'") from exc
    if k < 1:
        raise DomainError(f"--k must be at least 1, got {k}")
    return k


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs, with every field defaulted."""
    subcommand: str
    graphon: str = 'f1'
    rho: float | None = None
    regime: str = 'dense'
    n_values: tuple = (600,)
    trials: int = 100
    seed: int = 0
    estimators: tuple = ESTIMATOR_IDS
    k: int | None = None
    eta: float = 0.01
    normalization: str = 'configuration'
    input_path: Path | None = None
    timestamps: bool = False
    window: str = 'yearly'
    mode: str = 'cumulative'
    out_dir: Path = Path('output')
    threads: int = 1
    bits: bool = False

    @property
    def n(self):
        return self.n_values[0]

    def engine_defaults(self):
        """Fallback graphon parameters taken from the engine settings."""
        return {
            'a0': engine_setting('F2_A0'),
            'a1': engine_setting('F2_A1'),
            'alpha1': engine_setting('F2_ALPHA1'),
            'grid_points': engine_setting('GRID_POINTS'),
        }

    def graphon_spec(self):
        return graphon_from_options(self.graphon, rho=self.rho, defaults=self.engine_defaults())

    def describe(self):
        """Option name/value pairs for CSV headers."""
        return [
            (field.name, getattr(self, field.name))
            for field in dataclasses.fields(self)
            if field.name != 'subcommand'
        ]


def add_graphon_arguments(parser):
    parser.add_argument('--graphon', default='f1',
                        help=f"Graphon kind ({'|'.join(k for k, _ in KIND_CHOICES)}) "
                             "or path to a graphon config file (default: %(default)s)")
    parser.add_argument('--rho', type=float, default=None,
                        help='Sparsity scale rho_n in (0, 1] (default: per-kind default)')
    parser.add_argument('--regime', choices=['dense', 'sparse'], default='dense',
                        help='dense keeps --rho fixed, sparse uses min(--rho, (log n)^3.5/n), which only drops below '
                             '--rho once n is large: about n > 750 at --rho 1 and n > 9100 at 0.25 '
                             '(default: %(default)s)')
    parser.add_argument('--seed', type=int, default=0, help='Master seed (default: %(default)s)')


def add_estimator_arguments(parser, default_estimators='h1,h2,h3,h4'):
    parser.add_argument('--estimators', default=default_estimators,
                        help='Comma-separated estimators among h1,h2,h3,h4 (default: %(default)s)')
    parser.add_argument('--k', default='auto',
                        help="Blocks for H3, or 'auto' for round(sqrt(n)) (default: %(default)s)")
    parser.add_argument('--eta', type=float, default=None,
                        help=f"USVT threshold slack for H4 (default: {engine_setting('USVT_ETA')})")
    parser.add_argument('--ghat-norm', dest='ghat_norm', choices=['paper', 'configuration'],
                        default=None,
                        help=f"Degree normalization for H2 (default: {engine_setting('GHAT_NORMALIZATION')})")


def add_output_arguments(parser):
    parser.add_argument('--out', default=None,
                        help=f"Output directory (default: {engine_setting('OUTPUT_DIR')})")
    parser.add_argument('--bits', action='store_true',
                        help='Also display entropies in bits (CSV values stay in nats)')


def default_threads():
    return os.cpu_count() or 1


def run_config_from_options(subcommand, options):
    """Build a RunConfig from a management command's parsed options."""
    values = {'subcommand': subcommand}
    for name in ('graphon', 'rho', 'regime', 'trials', 'seed', 'timestamps', 'window', 'mode',
                 'threads', 'bits'):
        if options.get(name) is not None:
            values[name] = options[name]
    if options.get('n') is not None:
        values['n_values'] = parse_n_list(options['n'])
    if options.get('estimators') is not None:
        values['estimators'] = parse_estimators(options['estimators'])
    if 'k' in options:
        values['k'] = parse_k(options['k'])
    values['eta'] = options.get('eta') if options.get('eta') is not None else engine_setting('USVT_ETA')
    values['normalization'] = options.get('ghat_norm') or engine_setting('GHAT_NORMALIZATION')
    if options.get('input'):
        values['input_path'] = Path(options['input'])
    values['out_dir'] = Path(options.get('out') or engine_setting('OUTPUT_DIR'))
    if values.get('seed', 0) < 0:
        raise DomainError(f"--seed must be nonnegative, got {values['seed']}")
    if values.get('threads', 1) < 1:
        raise DomainError(f"--threads must be at least 1, got {values['threads']}")
    return RunConfig(**values)


def command_error(exc):
    """Map a toolkit error onto CommandError with the exit code convention."""
    returncode = 2 if isinstance(exc, DomainError) else 1
    return CommandError(str(exc), returncode=returncode)
