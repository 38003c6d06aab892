"""
Graphon configuration: the key=value file grammar and its validation.

A config file holds one ``key=value`` pair per line; ``#`` at the start of a line or after whitespace starts a comment.
Matrices are either inline (``theta=0.2,0.5;0.5,0.8``) or read from a
whitespace-separated text file (``grid_file=f.txt``). Validation goes through
``GraphonConfigForm`` so that every error message names the violated bound.
"""
import logging
import re
from pathlib import Path

import numpy as np
from django import forms

from .exceptions import DomainError
from .specs import GraphonKind, GraphonSpec, make_f1, make_f2

logger = logging.getLogger(__name__)

COMMENT = re.compile(r'(?:^|\s)#.*')

KIND_CHOICES = [
    ('constant', 'Constant (Erdos-Renyi)'),
    ('separable', 'Separable g(x)g(y)'),
    ('block', 'Block-constant (stochastic block model)'),
    ('lowrank', 'Low rank sum of separable terms'),
    ('grid', 'Symmetric function on a lattice'),
    ('f1', 'Test graphon 4xy'),
    ('f2', 'Test graphon with flat marginal'),
]

# Sparsity scale used when neither the command line nor the file sets one.
KIND_DEFAULT_RHO = {
    'constant': 0.25,
    'separable': 0.25,
    'block': 1.0,
    'lowrank': 0.25,
    'grid': 1.0,
    'f1': 0.25,
    'f2': 1.0,
}

CONFIG_KEYS = (
    'kind', 'rho', 'level', 'theta', 'fractions', 'g', 'g_file', 'lambdas',
    'components_file', 'grid_file', 'holder', 'a0', 'a1', 'alpha1', 'grid_points',
)


def parse_vector(text):
    """Parse '0.1, 0.2 0.3' into a float array."""
    tokens = text.replace(',', ' ').split()
    if not tokens:
        raise DomainError("empty vector")
    try:
        return np.array([float(token) for token in tokens])
    except ValueError as exc:
        raise DomainError(f"not a number in vector '{text}'") from exc


def parse_matrix(text):
    """Parse 'a,b;c,d' (rows separated by semicolons) into a 2-d array."""
    rows = [parse_vector(row) for row in text.split(';') if row.strip()]
    if not rows or len({row.size for row in rows}) != 1:
        raise DomainError(f"matrix rows must have equal lengths in '{text}'")
    return np.vstack(rows)


def read_matrix(path):
    """Read a whitespace-separated matrix file."""
    try:
        return np.loadtxt(path, ndmin=2)
    except OSError as exc:
        raise DomainError(f"cannot read matrix file {path}: {exc}") from exc
    except ValueError as exc:
        raise DomainError(f"malformed matrix file {path}: {exc}") from exc


def read_graphon_config(path):
    """
    Read a config file into a dict of raw string values.

    Unknown keys and lines without '=' are errors.
    """
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DomainError(f"cannot read graphon config {path}: {exc}") from exc
    values = {}
    for line_number, raw in enumerate(lines, start=1):
        line = COMMENT.sub('', raw, count=1).strip()
        if not line:
            continue
        if '=' not in line:
            raise DomainError(f"{path}:{line_number}: expected key=value, got '{raw}'")
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in CONFIG_KEYS:
            raise DomainError(f"{path}:{line_number}: unknown key '{key}'")
        values[key] = value
    return values


class GraphonConfigForm(forms.Form):
    """
    Validates graphon parameters and builds the GraphonSpec.

    ``defaults`` supplies values for keys the data leaves out (f2 parameters,
    lattice size); ``base_dir`` resolves relative matrix file paths.
    """
    kind = forms.ChoiceField(choices=KIND_CHOICES)
    rho = forms.FloatField(required=False)
    level = forms.FloatField(required=False)
    theta = forms.CharField(required=False)
    fractions = forms.CharField(required=False)
    g = forms.CharField(required=False)
    g_file = forms.CharField(required=False)
    lambdas = forms.CharField(required=False)
    components_file = forms.CharField(required=False)
    grid_file = forms.CharField(required=False)
    holder = forms.FloatField(required=False)
    a0 = forms.FloatField(required=False)
    a1 = forms.FloatField(required=False)
    alpha1 = forms.FloatField(required=False)
    grid_points = forms.IntegerField(required=False, min_value=2)

    def __init__(self, data=None, defaults=None, base_dir=None, **kwargs):
        super().__init__(data, **kwargs)
        self.defaults = defaults or {}
        self.base_dir = Path(base_dir) if base_dir else Path.cwd()

    def clean_rho(self):
        rho = self.cleaned_data.get('rho')
        if rho is not None and not 0.0 < rho <= 1.0:
            raise forms.ValidationError(f"rho must lie in (0, 1], got {rho}")
        return rho

    def clean_level(self):
        level = self.cleaned_data.get('level')
        if level is not None and not 0.0 < level <= 1.0:
            raise forms.ValidationError(f"level must lie in (0, 1], got {level}")
        return level

    def _value(self, name, fallback=None):
        value = self.cleaned_data.get(name)
        if value in (None, ''):
            value = self.defaults.get(name, fallback)
        return value

    def _matrix_file(self, name):
        path = Path(self.cleaned_data[name])
        if not path.is_absolute():
            path = self.base_dir / path
        return read_matrix(path)

    def clean(self):
        cleaned = super().clean()
        if self.errors:
            return cleaned
        try:
            cleaned['spec'] = self._build_spec()
        except DomainError as exc:
            raise forms.ValidationError(str(exc)) from exc
        return cleaned

    def _build_spec(self):
        kind = self.cleaned_data['kind']
        rho = self._value('rho', KIND_DEFAULT_RHO[kind])
        grid_points = int(self._value('grid_points', 513))
        if kind == 'constant':
            return GraphonSpec.constant(self._value('level', 1.0), rho_n=rho)
        if kind == 'separable':
            if self.cleaned_data.get('g'):
                g = parse_vector(self.cleaned_data['g'])
            elif self.cleaned_data.get('g_file'):
                g = self._matrix_file('g_file').ravel()
            else:
                g = 2.0 * np.linspace(0.0, 1.0, 257)
            return GraphonSpec.separable(g, rho_n=rho)
        if kind == 'block':
            theta = parse_matrix(self.cleaned_data['theta']) if self.cleaned_data.get('theta') \
                else np.array([[0.8, 0.1], [0.1, 0.8]])
            if self.cleaned_data.get('fractions'):
                fractions = parse_vector(self.cleaned_data['fractions'])
            else:
                fractions = np.full(theta.shape[0], 1.0 / theta.shape[0])
            return GraphonSpec.block_constant(theta, fractions, rho_n=rho)
        if kind == 'lowrank':
            if self.cleaned_data.get('components_file'):
                components = self._matrix_file('components_file')
                lambdas = parse_vector(self.cleaned_data['lambdas']) if self.cleaned_data.get('lambdas') \
                    else np.ones(components.shape[0])
            else:
                lattice = np.linspace(0.0, 1.0, 257)
                components = np.vstack([2.0 * lattice, 2.0 * (1.0 - lattice)])
                lambdas = np.array([0.5, 0.5])
            return GraphonSpec.low_rank(lambdas, components, rho_n=rho)
        if kind == 'grid':
            if not self.cleaned_data.get('grid_file'):
                raise DomainError("grid graphon requires grid_file in a config file")
            return GraphonSpec.analytic_grid(self._matrix_file('grid_file'), rho_n=rho,
                                             holder_exponent=self.cleaned_data.get('holder'))
        if kind == 'f1':
            return make_f1(rho_n=rho, grid_points=grid_points)
        return make_f2(self._value('a0'), self._value('a1'), self._value('alpha1'),
                       rho_n=rho, grid_points=grid_points)


def _spec_from_form(form):
    if not form.is_valid():
        messages = []
        for field, errors in form.errors.items():
            prefix = '' if field == '__all__' else f"{field}: "
            messages.extend(f"{prefix}{error}" for error in errors)
        raise DomainError('; '.join(messages))
    return form.cleaned_data['spec']


def load_graphon_config(path, defaults=None, overrides=None):
    """
    Build a GraphonSpec from a config file.

    Args:
        path: Config file path; relative matrix files resolve against its folder
        defaults: Values for keys the file omits
        overrides: Values that replace the file's own

    Returns:
        Validated GraphonSpec
    """
    data = read_graphon_config(path)
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})
    form = GraphonConfigForm(data, defaults=defaults, base_dir=Path(path).parent)
    spec = _spec_from_form(form)
    logger.debug("Loaded %s graphon from %s", spec.kind.value, path)
    return spec


def graphon_from_options(graphon, rho=None, defaults=None):
    """
    Resolve the ``--graphon`` option: a kind name or a path to a config file.

    Args:
        graphon: Kind name (constant, separable, block, lowrank, grid, f1, f2) or path
        rho: Sparsity scale from the command line, or None for the default
        defaults: Fallback values (f2 parameters, grid_points)

    Returns:
        Validated GraphonSpec
    """
    if graphon not in dict(KIND_CHOICES) and Path(graphon).is_file():
        return load_graphon_config(graphon, defaults=defaults, overrides={'rho': rho})
    data = {'kind': graphon}
    if rho is not None:
        data['rho'] = rho
    return _spec_from_form(GraphonConfigForm(data, defaults=defaults))


def _format_vector(values):
    return ','.join(repr(float(value)) for value in values)


def dump_graphon_config(spec, path):
    """
    Write a GraphonSpec in the config grammar.

    Grids and low-rank components go to sidecar files next to ``path``.
    """
    path = Path(path)
    lines = [f"kind={spec.kind.value}", f"rho={spec.rho_n!r}"]
    if spec.kind is GraphonKind.CONSTANT:
        lines.append(f"level={spec.constant_level!r}")
    elif spec.kind is GraphonKind.SEPARABLE:
        lines.append(f"g={_format_vector(spec.g_values)}")
    elif spec.kind is GraphonKind.BLOCK_CONSTANT:
        lines.append("theta=" + ';'.join(_format_vector(row) for row in spec.theta))
        lines.append(f"fractions={_format_vector(spec.block_fractions)}")
    elif spec.kind is GraphonKind.LOW_RANK:
        sidecar = path.with_suffix('.components.txt')
        np.savetxt(sidecar, spec.component_grids, fmt='%.17g')
        lines.append(f"lambdas={_format_vector(spec.lambdas)}")
        lines.append(f"components_file={sidecar.name}")
    else:
        sidecar = path.with_suffix('.grid.txt')
        np.savetxt(sidecar, spec.grid, fmt='%.17g')
        lines.append(f"grid_file={sidecar.name}")
        if spec.holder_exponent is not None:
            lines.append(f"holder={spec.holder_exponent!r}")
    path.write_text('\n'.join(lines) + '\n')
    return path
