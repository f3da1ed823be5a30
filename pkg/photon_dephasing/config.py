"""Scenario files: YAML parsing, validation, normalization and builders.

A scenario file is a YAML mapping. Every field has a default; parse_config
returns a fully populated ScenarioConfig and dump_config writes it back so
that parse -> dump -> parse is the identity. Validation failures raise
ConfigurationError naming the dotted path of the offending field.
"""

import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Union, cast

import numpy as np
import yaml

from .bplus import CorrelatedPFState
from .decoherence import (BiGaussianDouble, BiGaussianSingle, FrequencySpec, UniGaussian, UniGaussianMixture,
                          UniLorentzian, load_bivariate_csv, load_univariate_csv)
from .exception import ConfigurationError, PhotonDephasingException
from .generator import DT_MODES
from .operator_basis import ORDERINGS, BlochVector, HermitianBasis, to_bloch
from .presets import BPLUS_PRESETS, ROOT_HALF, bplus_preset, named_state, state_names
from .profiles import BinnedPhase, ConstantPhase, LinearPhase, PhaseProfile, StepPhase, load_phase_csv
from .settings import TOLERANCE_PROFILES, Tolerances, tolerance_profile
from .types import BPlusConfig, OutputConfig, ScenarioConfig, SpectrumConfig, TimeGridConfig

LOGGER = logging.getLogger(__name__)

MODES = ('rates', 'evolve', 'bplus', 'verify')
TOP_LEVEL_KEYS = ('mode', 'ordering', 'spectrum', 'dn', 'initial_state', 'time_grid', 'dt_mode', 'compare_exact',
                  'bplus', 'tolerance_profile', 'tolerances', 'seed', 'output')
DEFAULT_SEED = 20240611
MAX_SEED = 2 ** 64 - 1
LIST_PARAMETERS = ('means', 'sigmas', 'weights', 'edges', 'values')

# kind -> ordered parameters with defaults; None marks a required parameter
SPECTRUM_PARAMETERS: Dict[str, Dict[str, Any]] = {
    'uni_gaussian': {'mean': 0.0, 'sigma': 1.0},
    'uni_lorentzian': {'center': 0.0, 'width': 1.0},
    'uni_gaussian_mixture': {'means': None, 'sigmas': None, 'weights': None},
    'uni_tabulated': {'path': None, 'normalize': False},
    'bi_gaussian_single': {'omega0': 0.0, 'delta_omega': 0.0, 'sigma': 1.0, 'K': 0.0},
    'bi_gaussian_double': {'omega0': 0.0, 'delta_omega': 2.0, 'sigma': 1.0, 'K': 0.0},
    'bi_tabulated': {'path': None, 'normalize': False},
}

THETA_PARAMETERS: Dict[str, Dict[str, Any]] = {
    'constant': {'theta': 0.0},
    'linear': {'slope': None, 'reference': 0.0},
    'step': {'at': 0.0, 'low': None, 'high': None},
    'binned': {'edges': None, 'values': None},
    'tabulated': {'path': None},
}


# ----------------------------------------------------------------------
# Field validators --------------------------------------------------------
def _number(value: Any, field: str, positive: bool = False, minimum: Optional[float] = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(field, f'expected a number, got {value!r}')
    number = float(value)
    if not math.isfinite(number):
        raise ConfigurationError(field, f'expected a finite number, got {value!r}')
    if positive and not number > 0:
        raise ConfigurationError(field, f'must be positive, got {number!r}')
    if minimum is not None and number < minimum:
        raise ConfigurationError(field, f'must be at least {minimum!r}, got {number!r}')
    return number


def _integer(value: Any, field: str, minimum: int = 0, maximum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(field, f'expected an integer, got {value!r}')
    if value < minimum or (maximum is not None and value > maximum):
        raise ConfigurationError(field, f'{value!r} outside [{minimum}, {maximum if maximum is not None else "inf"}]')
    return int(value)


def _boolean(value: Any, field: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigurationError(field, f'expected true or false, got {value!r}')
    return value


def _choice(value: Any, field: str, options: Sequence[str]) -> str:
    if value not in options:
        raise ConfigurationError(field, f'{value!r} is not one of {list(options)}')
    return str(value)


def _mapping(value: Any, field: str) -> Mapping[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ConfigurationError(field, f'expected a mapping, got {type(value).__name__}')
    return value


def _numbers(value: Any, field: str, length: Optional[int] = None) -> List[float]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigurationError(field, f'expected a non-empty list of numbers, got {value!r}')
    if length is not None and len(value) != length:
        raise ConfigurationError(field, f'expected {length} entries, got {len(value)}')
    return [_number(item, f'{field}[{i}]') for i, item in enumerate(value)]


def _reject_unknown(section: Mapping[str, Any], allowed: Sequence[str], prefix: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigurationError(f'{prefix}{key}', 'unknown key')


def _parameters(section: Mapping[str, Any], schema: Dict[str, Any], prefix: str) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for name, default in schema.items():
        field = f'{prefix}.{name}'
        value = section.get(name, default)
        if value is None:
            raise ConfigurationError(field, 'required')
        if name == 'path':
            if not isinstance(value, str) or not value:
                raise ConfigurationError(field, 'expected a file path')
            out[name] = value
        elif name == 'normalize':
            out[name] = _boolean(value, field)
        elif name in LIST_PARAMETERS:
            out[name] = _numbers(value, field)
        else:
            out[name] = _number(value, field)
    return out


# ----------------------------------------------------------------------
# Sections ------------------------------------------------------------------
def _parse_spectrum(raw: Any) -> SpectrumConfig:
    section = _mapping(raw if raw is not None else {'kind': 'bi_gaussian_single'}, 'spectrum')
    kind = _choice(section.get('kind', 'bi_gaussian_single'), 'spectrum.kind', tuple(SPECTRUM_PARAMETERS))
    schema = SPECTRUM_PARAMETERS[kind]
    _reject_unknown(section, ('kind', *schema), 'spectrum.')
    params = _parameters(section, schema, 'spectrum')
    if kind == 'uni_gaussian':
        _number(params['sigma'], 'spectrum.sigma', positive=True)
    if kind == 'uni_lorentzian':
        _number(params['width'], 'spectrum.width', positive=True)
    if kind.startswith('bi_gaussian'):
        _number(params['sigma'], 'spectrum.sigma', positive=True)
        if not -1.0 <= params['K'] <= 1.0:
            raise ConfigurationError('spectrum.K', f'correlation coefficient {params["K"]!r} outside [-1, 1]')
    if kind == 'uni_gaussian_mixture':
        lengths = {len(params['means']), len(params['sigmas']), len(params['weights'])}
        if len(lengths) != 1:
            raise ConfigurationError('spectrum.weights', 'means, sigmas and weights must have equal length')
    return cast(SpectrumConfig, {'kind': kind, **params})


def _parse_time_grid(raw: Any) -> TimeGridConfig:
    section = _mapping(raw, 'time_grid')
    _reject_unknown(section, ('t_start', 't_end', 'n_points'), 'time_grid.')
    t_start = _number(section.get('t_start', 0.0), 'time_grid.t_start', minimum=0.0)
    t_end = _number(section.get('t_end', 3.0), 'time_grid.t_end')
    n_points = _integer(section.get('n_points', 61), 'time_grid.n_points', minimum=2)
    if not t_end > t_start:
        raise ConfigurationError('time_grid.t_end', f'must exceed t_start={t_start!r}, got {t_end!r}')
    return {'t_start': t_start, 't_end': t_end, 'n_points': n_points}


def _parse_theta(raw: Any) -> Optional[Dict[str, Any]]:
    if raw is None:
        return None
    section = _mapping(raw, 'bplus.theta')
    kind = _choice(section.get('kind'), 'bplus.theta.kind', tuple(THETA_PARAMETERS))
    schema = THETA_PARAMETERS[kind]
    _reject_unknown(section, ('kind', *schema), 'bplus.theta.')
    params = _parameters(section, schema, 'bplus.theta')
    if kind == 'binned' and len(params['values']) != len(params['edges']) + 1:
        raise ConfigurationError('bplus.theta.values', 'binned phase needs one more value than edges')
    return {'kind': kind, **params}


def _amplitude(value: Any, field: str) -> List[float]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [_number(value, field), 0.0]
    return _numbers(value, field, length=2)


def _parse_bplus(raw: Any) -> BPlusConfig:
    section = _mapping(raw, 'bplus')
    _reject_unknown(section, ('preset', 'c_h', 'c_v', 'theta'), 'bplus.')
    preset = _choice(section.get('preset', 'markovian'), 'bplus.preset', tuple(BPLUS_PRESETS))
    c_h = _amplitude(section.get('c_h', [ROOT_HALF, 0.0]), 'bplus.c_h')
    c_v = _amplitude(section.get('c_v', [ROOT_HALF, 0.0]), 'bplus.c_v')
    norm = sum(x * x for x in (*c_h, *c_v))
    if abs(norm - 1.0) > 1e-12:
        raise ConfigurationError('bplus.c_h', f'|c_h|^2 + |c_v|^2 = {norm!r}, expected 1')
    out: Dict[str, Any] = {'preset': preset, 'c_h': c_h, 'c_v': c_v}
    theta = _parse_theta(section.get('theta'))
    if theta is not None:
        out['theta'] = theta
    return cast(BPlusConfig, out)


def _parse_tolerances(raw: Any) -> Dict[str, float]:
    section = _mapping(raw, 'tolerances')
    known = Tolerances().as_dict()
    _reject_unknown(section, tuple(known), 'tolerances.')
    return {name: _number(value, f'tolerances.{name}', positive=True) for name, value in sorted(section.items())}


def _parse_initial_state(raw: Any, dim: int) -> Union[str, List[float]]:
    if raw is None:
        return 'bell_phi_plus' if dim == 4 else 'plus_state'
    if isinstance(raw, str):
        return _choice(raw, 'initial_state', state_names(dim))
    return _numbers(raw, 'initial_state', length=dim * dim)


def spectrum_dimension(spectrum: SpectrumConfig) -> int:
    return 4 if spectrum['kind'].startswith('bi_') else 2


def parse_config(raw: Any) -> ScenarioConfig:
    section = _mapping(raw, '<root>')
    _reject_unknown(section, TOP_LEVEL_KEYS, '')
    mode = _choice(section.get('mode'), 'mode', MODES)
    spectrum = _parse_spectrum(section.get('spectrum'))
    output = _mapping(section.get('output'), 'output')
    _reject_unknown(output, ('directory', 'prefix'), 'output.')
    for key in ('directory', 'prefix'):
        if key in output and not isinstance(output[key], str):
            raise ConfigurationError(f'output.{key}', 'expected a string')
    config: ScenarioConfig = {
        'mode': mode,
        'ordering': _choice(section.get('ordering', 'gell_mann'), 'ordering', ORDERINGS),
        'spectrum': spectrum,
        'dn': _number(section.get('dn', 1.0), 'dn'),
        'initial_state': _parse_initial_state(section.get('initial_state'), spectrum_dimension(spectrum)),
        'time_grid': _parse_time_grid(section.get('time_grid')),
        'dt_mode': _choice(section.get('dt_mode', 'analytic'), 'dt_mode', DT_MODES),
        'compare_exact': _boolean(section.get('compare_exact', True), 'compare_exact'),
        'bplus': _parse_bplus(section.get('bplus')),
        'tolerance_profile': _choice(section.get('tolerance_profile', 'default'), 'tolerance_profile',
                                     tuple(TOLERANCE_PROFILES)),
        'tolerances': _parse_tolerances(section.get('tolerances')),
        'seed': _integer(section.get('seed', DEFAULT_SEED), 'seed', maximum=MAX_SEED),
        'output': cast(OutputConfig, {
            'directory': output.get('directory', 'out'),
            'prefix': output.get('prefix', mode),
        }),
    }
    if config['dn'] == 0.0:
        raise ConfigurationError('dn', 'refraction-index difference must be nonzero')
    return config


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as error:
        raise ConfigurationError('config', f'cannot read {path}: {error}') from error
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as error:
        raise ConfigurationError('config', f'{path} is not valid YAML: {error}') from error
    LOGGER.info('loaded scenario %s', path)
    return _anchor_paths(parse_config(raw), Path(path).parent)


def _anchor_paths(config: ScenarioConfig, base: Path) -> ScenarioConfig:
    """Data files named relative to a scenario file are looked up next to it."""
    sections: List[Any] = [config['spectrum']]
    if 'theta' in config['bplus']:
        sections.append(config['bplus']['theta'])
    for section in sections:
        if 'path' in section and not Path(section['path']).is_absolute():
            section['path'] = str(base / section['path'])
    return config


def dump_config(config: ScenarioConfig) -> str:
    return yaml.safe_dump(_plain(config), sort_keys=True, default_flow_style=False)


def _plain(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def with_overrides(config: ScenarioConfig, **overrides: Any) -> ScenarioConfig:
    """Re-validated copy with CLI overrides applied (None values are ignored)."""
    raw: Dict[str, Any] = yaml.safe_load(dump_config(config))
    if overrides.get('seed') is not None:
        raw['seed'] = overrides['seed']
    if overrides.get('tolerance_profile') is not None:
        raw['tolerance_profile'] = overrides['tolerance_profile']
    if overrides.get('out') is not None:
        raw['output']['directory'] = str(overrides['out'])
    return parse_config(raw)


# ----------------------------------------------------------------------
# Builders ------------------------------------------------------------------
def build_tolerances(config: ScenarioConfig) -> Tolerances:
    return tolerance_profile(config['tolerance_profile'], **config['tolerances'])


def build_time_grid(config: ScenarioConfig) -> np.ndarray:
    grid = config['time_grid']
    return np.linspace(grid['t_start'], grid['t_end'], grid['n_points'])


def _guarded(field: str, builder: Callable[[], Any]) -> Any:
    try:
        return builder()
    except OSError as error:
        raise ConfigurationError(f'{field}.path', str(error)) from error
    except (PhotonDephasingException, ValueError) as error:
        if isinstance(error, ConfigurationError):
            raise
        raise ConfigurationError(field, str(error)) from error


def build_spectrum(spectrum: SpectrumConfig) -> FrequencySpec:
    params: Dict[str, Any] = {key: value for key, value in spectrum.items() if key != 'kind'}
    kind = spectrum['kind']
    builders: Dict[str, Callable[[], FrequencySpec]] = {
        'uni_gaussian': lambda: UniGaussian(**params),
        'uni_lorentzian': lambda: UniLorentzian(**params),
        'uni_gaussian_mixture': lambda: UniGaussianMixture(**{key: tuple(value) for key, value in params.items()}),
        'uni_tabulated': lambda: load_univariate_csv(params['path'], normalize=params['normalize']),
        'bi_gaussian_single': lambda: BiGaussianSingle(**params),
        'bi_gaussian_double': lambda: BiGaussianDouble(**params),
        'bi_tabulated': lambda: load_bivariate_csv(params['path'], normalize=params['normalize']),
    }
    return cast(FrequencySpec, _guarded('spectrum', builders[kind]))


def build_phase(theta: Mapping[str, Any]) -> PhaseProfile:
    params = {key: value for key, value in theta.items() if key != 'kind'}
    builders: Dict[str, Callable[[], PhaseProfile]] = {
        'constant': lambda: ConstantPhase(**params),
        'linear': lambda: LinearPhase(**params),
        'step': lambda: StepPhase(**params),
        'binned': lambda: BinnedPhase(edges=np.asarray(params['edges']), values=np.asarray(params['values'])),
        'tabulated': lambda: load_phase_csv(params['path']),
    }
    return cast(PhaseProfile, _guarded('bplus.theta', builders[theta['kind']]))


def build_bplus_state(config: ScenarioConfig) -> CorrelatedPFState:
    section = config['bplus']
    c_h = complex(*section['c_h'])
    c_v = complex(*section['c_v'])
    state = cast(CorrelatedPFState, _guarded('bplus', lambda: bplus_preset(section['preset'], c_h, c_v)))
    if 'theta' in section:
        state = CorrelatedPFState(c_h=c_h, c_v=c_v, amplitude=state.amplitude, theta=build_phase(section['theta']))
    return state


def build_initial_state(config: ScenarioConfig, basis: HermitianBasis) -> BlochVector:
    value = config['initial_state']
    if isinstance(value, str):
        return to_bloch(named_state(value, basis.dim), basis)
    vector = np.asarray(value, dtype=float)
    expected = 1.0 / math.sqrt(basis.dim)
    if abs(vector[0] - expected) > 1e-12:
        raise ConfigurationError('initial_state', f'first component must be 1/sqrt({basis.dim}) = {expected!r}')
    return BlochVector(dim=basis.dim, r=vector)


__all__ = [
    'MODES',
    'SPECTRUM_PARAMETERS',
    'THETA_PARAMETERS',
    'build_bplus_state',
    'build_initial_state',
    'build_phase',
    'build_spectrum',
    'build_time_grid',
    'build_tolerances',
    'dump_config',
    'load_config',
    'parse_config',
    'spectrum_dimension',
    'with_overrides',
]
