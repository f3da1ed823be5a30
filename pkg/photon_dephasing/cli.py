"""Command-line front end: ``photon-dephasing rates|evolve|bplus|verify``.

Exit codes: 0 success, 1 failed verification or numerical failure, 2 configuration error.
"""

import argparse
import logging
import math
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .bplus import bplus_terms, environment_terms_on_grid, regime_summary
from .config import (MODES, build_bplus_state, build_initial_state, build_spectrum, build_time_grid, build_tolerances,
                     dump_config, load_config, parse_config, with_overrides)
from .decoherence import BiGaussianDouble, BiGaussianSingle, BiTabulated, UnivariateSpec
from .exception import ConfigurationError, DegenerateWeightError, PhotonDephasingException
from .generator import (qubit_rates, rate_matrix_appendix, rates_double_peak_analytic, rates_from_rate_matrix,
                        rates_single_peak_analytic, track_rates)
from .integrator import IntegrationOptions, cp_divisibility_report, integrate
from .map_builder import DephasingChannel
from .settings import TOLERANCE_PROFILES
from .types import ScenarioConfig
from .verify import run_checks, verification_report
from .writer import write_csv, write_json

LOGGER = logging.getLogger(__name__)

LEVEL_LABELS = {2: ('h', 'v'), 4: ('hh', 'hv', 'vh', 'vv')}
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')


def coherence_columns(dim: int) -> List[str]:
    labels = LEVEL_LABELS[dim]
    return [f'coh_{labels[j]}_{labels[k]}' for j in range(dim) for k in range(j + 1, dim)]


def _coherences(rho: np.ndarray) -> List[float]:
    dim = rho.shape[0]
    return [float(abs(rho[j, k])) for j in range(dim) for k in range(j + 1, dim)]


class ScenarioRunner:
    """Runs one validated scenario and writes its CSV/JSON files under the output directory."""

    def __init__(self, **kwargs: Any) -> None:
        self.config: ScenarioConfig = kwargs['config']
        self.tolerances = build_tolerances(self.config)
        output = self.config['output']
        self.directory = Path(kwargs.get('directory') or output['directory'])
        self.prefix: str = output['prefix']

    def run(self) -> Dict[str, Any]:
        runners = {
            'rates': self.run_rates,
            'evolve': self.run_evolve,
            'bplus': self.run_bplus,
            'verify': self.run_verify,
        }
        return runners[self.config['mode']]()

    def channel(self) -> DephasingChannel:
        return DephasingChannel(
            spectrum=build_spectrum(self.config['spectrum']),
            dn=self.config['dn'],
            tolerances=self.tolerances,
            ordering=self.config['ordering'],
        )

    def run_rates(self) -> Dict[str, Any]:
        started = time.perf_counter()
        channel = self.channel()
        times = build_time_grid(self.config)
        poles = channel.singular_times(float(times[0]), float(times[-1]))
        numeric = track_rates(channel, times, self.config['dt_mode'], self.tolerances)
        count = 1 if channel.dim == 2 else 3
        header = ['t', 't_norm']
        header += [f'gamma{i + 1}_analytic' for i in range(count)]
        header += [f'gamma{i + 1}_numeric' for i in range(count)]
        header.append('near_pole')
        rows: List[List[Any]] = []
        deviation = 0.0
        for t, decomposition in zip(times, numeric):
            analytic = self.__analytic_rates(channel, float(t), count)
            extracted = list(decomposition.rates) if decomposition is not None else [math.nan] * count
            if decomposition is not None:
                floor = self.tolerances.rate_absolute / self.tolerances.rate_relative
                for a, n in zip(analytic, extracted):
                    if math.isfinite(a):
                        deviation = max(deviation, abs(n - a) / max(abs(a), floor))
            rows.append([float(t), channel.rate_scale * float(t), *analytic, *extracted, int(decomposition is None)])
        report = cp_divisibility_report(channel, times, self.config['dt_mode'], self.tolerances)
        summary = {
            'mode': 'rates',
            'spectrum': channel.spec.describe(),
            'dn': channel.dn,
            'rate_scale': channel.rate_scale,
            'poles': list(poles),
            'pole_half_width': channel.pole_half_width if poles else 0.0,
            'max_relative_deviation': deviation,
            'cp_divisibility': report.as_dict(),
            'elapsed': time.perf_counter() - started,
        }
        LOGGER.info('rates: %d points, %d pole(s), max deviation %.3e, verdict %s', len(rows), len(poles), deviation,
                    report.verdict)
        return self.__write('rates', header, rows, summary)

    def run_evolve(self) -> Dict[str, Any]:
        started = time.perf_counter()
        channel = self.channel()
        times = build_time_grid(self.config)
        r0 = build_initial_state(self.config, channel.basis)
        options = IntegrationOptions.from_tolerances(self.tolerances, dt_mode=self.config['dt_mode'])
        trajectory = integrate(r0, channel, float(times[-1]), options, t_eval=times)
        size = channel.dim * channel.dim
        compare = self.config['compare_exact']
        header = ['t', *(f'r{i + 1}' for i in range(size)), *coherence_columns(channel.dim)]
        if compare:
            header += [f'exact_r{i + 1}' for i in range(size)]
            header.append('err_sup')
        rows: List[List[Any]] = []
        worst = 0.0
        for i, t in enumerate(trajectory.times):
            state = trajectory.states[i]
            row: List[Any] = [float(t), *state, *_coherences(channel.from_bloch(state))]
            if compare:
                exact = channel.propagate(r0, float(t)).r
                error = float(np.max(np.abs(state - exact)))
                worst = max(worst, error)
                row += [*exact, error]
            rows.append(row)
        summary = {
            'mode': 'evolve',
            'spectrum': channel.spec.describe(),
            'dn': channel.dn,
            'ordering': channel.basis.ordering,
            'initial_state': self.config['initial_state'],
            'bridges': [bridge.as_dict() for bridge in trajectory.bridges],
            'steps': int(trajectory.step_times.size),
            'max_step_error': float(np.max(trajectory.step_errors, initial=0.0)),
            'trace_drift': trajectory.trace_drift,
            'max_error_vs_exact': worst if compare else None,
            'elapsed': time.perf_counter() - started,
        }
        return self.__write('evolve', header, rows, summary)

    def run_bplus(self) -> Dict[str, Any]:
        started = time.perf_counter()
        state = build_bplus_state(self.config)
        times = build_time_grid(self.config)
        dn = self.config['dn']
        terms = bplus_terms(state, dn, times, self.tolerances)
        warnings = list(terms.warnings)
        kappa_x = self.__weighted_term(terms, 'x', warnings)
        kappa_y = self.__weighted_term(terms, 'y', warnings)
        residual = terms.residual(state)
        header = ['t', 'abs_kappa', 're_kappa', 'im_kappa', 'abs_kappa0', 'abs_kappa_x', 'abs_kappa_y', 'residual']
        rows = [
            [float(t), abs(k), k.real, k.imag, abs(k0), abs(kx), abs(ky), float(res)]
            for t, k, k0, kx, ky, res in zip(times, terms.kappa, terms.kappa0, kappa_x, kappa_y, residual)
        ]
        kernels = environment_terms_on_grid(state, tolerances=self.tolerances)
        summary = {
            'mode': 'bplus',
            'state': state.describe(),
            'dn': dn,
            'weights': terms.weights.as_dict(),
            'warnings': warnings,
            'max_residual': float(np.max(residual, initial=0.0)),
            'regime': regime_summary(terms),
            'environment': {
                name: {
                    'min_eigenvalue': kernel.min_eigenvalue,
                    'trace_error': kernel.trace_error,
                    'rank': kernel.rank(),
                }
                for name, kernel in kernels.items()
            },
            'elapsed': time.perf_counter() - started,
        }
        return self.__write('bplus', header, rows, summary)

    def run_verify(self) -> Dict[str, Any]:
        results = run_checks(self.tolerances, self.config['seed'])
        report = verification_report(results, self.config['seed'], self.config['tolerance_profile'])
        for result in results:
            if not result['passed']:
                LOGGER.warning('check %s failed: %.3e > %.3e (%s)', result['name'], result['value'],
                               result['tolerance'], result['detail'])
        path = write_json(self.directory / f'{self.prefix}.json', report)
        return {'mode': 'verify', 'passed': report['passed'], 'paths': [str(path)]}

    def __analytic_rates(self, channel: DephasingChannel, t: float, count: int) -> List[float]:
        spec = channel.spec
        try:
            if isinstance(spec, BiGaussianSingle):
                return list(rates_single_peak_analytic(spec, channel.dn, t).rates)
            if isinstance(spec, BiGaussianDouble):
                return list(rates_double_peak_analytic(spec, channel.dn, t, check_poles=False))
            if isinstance(spec, BiTabulated):
                matrix = rate_matrix_appendix(channel.decoherence, t, self.tolerances)
                return list(rates_from_rate_matrix(matrix, self.tolerances))
            if isinstance(spec, UnivariateSpec):
                return [qubit_rates(channel.decoherence, t, tolerances=self.tolerances)[0]]
        except (PhotonDephasingException, ZeroDivisionError) as error:
            LOGGER.debug('no closed-form rates at t=%g: %s', t, error)
        return [math.nan] * count

    def __weighted_term(self, terms: Any, name: str, warnings: List[str]) -> np.ndarray:
        try:
            return terms.kappa_x if name == 'x' else terms.kappa_y
        except DegenerateWeightError as error:
            warnings.append(str(error))
            return np.full(terms.times.shape, math.nan, dtype=np.complex128)

    def __write(self, mode: str, header: Sequence[str], rows: List[List[Any]],
                summary: Dict[str, Any]) -> Dict[str, Any]:
        csv_path = write_csv(self.directory / f'{self.prefix}.csv', header, rows)
        summary['config'] = dump_config(self.config)
        summary['tolerance_profile'] = self.config['tolerance_profile']
        json_path = write_json(self.directory / f'{self.prefix}.json', summary)
        return {'mode': mode, 'passed': True, 'paths': [str(csv_path), str(json_path)]}


def run_rates(config: ScenarioConfig) -> Dict[str, Any]:
    return ScenarioRunner(config=config).run_rates()


def run_evolve(config: ScenarioConfig) -> Dict[str, Any]:
    return ScenarioRunner(config=config).run_evolve()


def run_bplus(config: ScenarioConfig) -> Dict[str, Any]:
    return ScenarioRunner(config=config).run_bplus()


def run_verify(config: ScenarioConfig) -> Dict[str, Any]:
    return ScenarioRunner(config=config).run_verify()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='photon-dephasing',
                                     description='Photonic dephasing maps, rates, trajectories and B+ analyses.')
    parser.add_argument('command', choices=MODES, help='scenario to run')
    parser.add_argument('--config', type=Path, help='YAML scenario file (defaults apply when omitted)')
    parser.add_argument('--out', type=Path, help='output directory, overrides output.directory')
    parser.add_argument('--seed', type=int, help='seed for randomized verification states')
    parser.add_argument('--tolerance-profile', choices=sorted(TOLERANCE_PROFILES), help='named tolerance profile')
    parser.add_argument('--log-level', default='WARNING', choices=LOG_LEVELS, help='logging threshold')
    return parser


def resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    config = load_config(args.config) if args.config is not None else parse_config({'mode': args.command})
    if config['mode'] != args.command:
        raise ConfigurationError('mode', f'config declares mode {config["mode"]!r} but {args.command!r} was requested')
    return with_overrides(config, seed=args.seed, tolerance_profile=args.tolerance_profile, out=args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        config = resolve_config(args)
        outcome = ScenarioRunner(config=config).run()
    except ConfigurationError as error:
        LOGGER.error('configuration error: %s', error)
        print(f'configuration error: {error}', file=sys.stderr)
        return 2
    except PhotonDephasingException as error:
        LOGGER.error('%s failed: %s', args.command, error)
        print(f'{args.command} failed: {error}', file=sys.stderr)
        return 1
    for path in outcome['paths']:
        print(path)
    if not outcome['passed']:
        print('verification failed', file=sys.stderr)
        return 1
    return 0


__all__ = [
    'ScenarioRunner',
    'build_parser',
    'coherence_columns',
    'main',
    'resolve_config',
    'run_bplus',
    'run_evolve',
    'run_rates',
    'run_verify',
]
