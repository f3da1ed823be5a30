"""Bloch-space integration of dr/dt = [L_t] r and the CP-divisibility report.

Integration always starts at t = 0 with M(0) the identity. Each singular time
p of the map is bridged with the exact channel: the neighbourhood
[p - w, p + w] is skipped and the state resumes at r(p + w) = M(p + w) r(0).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate as scipy_integrate

from .exception import IntegrationError, SingularMapError
from .generator import extract_rates, find_sign_changes, generator_matrix
from .operator_basis import BlochVector, HermitianBasis, from_bloch
from .settings import DEFAULT_TOLERANCES, Tolerances
from .types import ComplexMatrix

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntegrationOptions:
    rtol: float = DEFAULT_TOLERANCES.ode_rtol
    atol: float = DEFAULT_TOLERANCES.ode_atol
    dt_mode: str = 'analytic'
    max_step: float = math.inf
    first_step: Optional[float] = None
    bridge: bool = True

    @classmethod
    def from_tolerances(cls, tolerances: Tolerances, **overrides: Any) -> 'IntegrationOptions':
        return cls(**{'rtol': tolerances.ode_rtol, 'atol': tolerances.ode_atol, **overrides})


@dataclass(frozen=True)
class BridgeEvent:
    pole: float
    t_enter: float
    t_exit: float

    def as_dict(self) -> Dict[str, float]:
        return {'pole': self.pole, 't_enter': self.t_enter, 't_exit': self.t_exit}


@dataclass(frozen=True, eq=False)
class Trajectory:
    dim: int
    times: np.ndarray
    states: np.ndarray
    bridged: np.ndarray
    step_times: np.ndarray
    step_errors: np.ndarray
    bridges: Tuple[BridgeEvent, ...] = ()

    def __len__(self) -> int:
        return int(self.times.size)

    def state(self, index: int) -> BlochVector:
        return BlochVector(dim=self.dim, r=self.states[index].copy())

    @property
    def final(self) -> BlochVector:
        return self.state(-1)

    @property
    def trace_drift(self) -> float:
        return float(np.max(np.abs(self.states[:, 0] - self.states[0, 0]), initial=0.0))

    def matrices(self, basis: HermitianBasis) -> List[ComplexMatrix]:
        return [from_bloch(row, basis) for row in self.states]


# ----------------------------------------------------------------------
# Integration ----------------------------------------------------------------
def _segments(poles: Sequence[float], width: float, t_end: float) -> List[Tuple[str, float, float, Optional[float]]]:
    """Alternating ('ode', a, b, None) and ('bridge', a, b, pole) pieces covering [0, t_end]."""
    pieces: List[Tuple[str, float, float, Optional[float]]] = []
    current = 0.0
    for pole in sorted(poles):
        enter, leave = max(0.0, pole - width), min(t_end, pole + width)
        if leave <= current:
            continue
        if enter > current:
            pieces.append(('ode', current, enter, None))
        else:
            enter = current
        if pieces and pieces[-1][0] == 'bridge' and pieces[-1][2] >= enter:
            kind, start, _, first = pieces.pop()
            pieces.append((kind, start, leave, first))
        else:
            pieces.append(('bridge', enter, leave, pole))
        current = leave
    if current < t_end:
        pieces.append(('ode', current, t_end, None))
    return pieces


class _StepRecorder:
    """Local error of every accepted step, measured against a classical RK4 step over the same interval."""

    def __init__(self, rhs: Callable, rtol: float, atol: float) -> None:
        self.rhs = rhs
        self.rtol = rtol
        self.atol = atol
        self.times: List[float] = []
        self.errors: List[float] = []
        self.__previous: Optional[np.ndarray] = None

    def begin(self, y0: np.ndarray) -> None:
        self.__previous = np.array(y0, dtype=float)

    def record(self, solver: Any) -> None:
        assert self.__previous is not None
        y_old, y_new = self.__previous, np.asarray(solver.y, dtype=float)
        estimate = y_new - self.__rk4(solver.t_old, y_old, solver.t - solver.t_old)
        scale = self.atol + self.rtol * np.maximum(np.abs(y_old), np.abs(y_new))
        self.times.append(float(solver.t))
        self.errors.append(float(np.sqrt(np.mean((estimate / scale) ** 2))))
        self.__previous = y_new.copy()

    def __rk4(self, t: float, y: np.ndarray, h: float) -> np.ndarray:
        k1 = self.rhs(t, y)
        k2 = self.rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = self.rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = self.rhs(t + h, y + h * k3)
        return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def _right_hand_side(provider: Any, opts: IntegrationOptions, tolerances: Tolerances) -> Callable:
    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        try:
            return generator_matrix(provider, t, opts.dt_mode, tolerances).L @ y
        except SingularMapError as error:
            raise IntegrationError(t, f'map is singular (smallest singular value {error.min_singular:.3e})') from error

    return rhs


def _integrate_segment(rhs: Callable, y0: np.ndarray, start: float, stop: float, outputs: np.ndarray,
                       opts: IntegrationOptions, recorder: _StepRecorder) -> Tuple[np.ndarray, Dict[int, np.ndarray]]:
    found: Dict[int, np.ndarray] = {}
    pending = [i for i in range(outputs.size) if start <= outputs[i] <= stop]
    if stop <= start:
        return y0, {i: y0.copy() for i in pending}
    solver = scipy_integrate.RK45(rhs, start, y0, stop, rtol=opts.rtol, atol=opts.atol, max_step=opts.max_step,
                                  first_step=opts.first_step, vectorized=False)
    for i in [i for i in pending if outputs[i] == start]:
        found[i] = y0.copy()
    recorder.begin(y0)
    while solver.status == 'running':
        message = solver.step()
        if solver.status == 'failed':
            raise IntegrationError(solver.t, message or 'step size underflow')
        recorder.record(solver)
        dense = solver.dense_output()
        for i in pending:
            if i not in found and solver.t_old < outputs[i] <= solver.t:
                found[i] = np.asarray(dense(outputs[i]), dtype=float)
    return np.asarray(solver.y, dtype=float), found


def integrate(r0: Union[BlochVector, Sequence[float], np.ndarray], gen_provider: Any, t_end: float,
              opts: Optional[IntegrationOptions] = None, t_eval: Optional[Sequence[float]] = None) -> Trajectory:
    """Integrate from t = 0 to t_end, reporting the states at t_eval (default: the end point only)."""
    if not t_end > 0:
        raise ValueError(f't_end must be positive, got {t_end!r}')
    tolerances: Tolerances = getattr(gen_provider, 'tolerances', DEFAULT_TOLERANCES)
    opts = opts or IntegrationOptions.from_tolerances(tolerances)
    start = np.array(r0.r if isinstance(r0, BlochVector) else r0, dtype=float)
    dim = gen_provider.basis.dim
    if start.shape != (dim * dim,):
        raise ValueError(f'expected {dim * dim} Bloch components, got {start.shape}')
    outputs = np.array(sorted({float(t) for t in (t_eval if t_eval is not None else (t_end,))}), dtype=float)
    if outputs.size and (outputs[0] < 0 or outputs[-1] > t_end):
        raise ValueError(f'output times must lie in [0, {t_end}]')

    poles = gen_provider.singular_times(0.0, t_end) if opts.bridge else ()
    pieces = _segments(poles, gen_provider.pole_half_width, t_end) if poles else [('ode', 0.0, t_end, None)]
    rhs = _right_hand_side(gen_provider, opts, tolerances)
    recorder = _StepRecorder(rhs, opts.rtol, opts.atol)
    states: Dict[int, np.ndarray] = {}
    bridged = np.zeros(outputs.size, dtype=bool)
    bridges: List[BridgeEvent] = []
    y = start
    for kind, a, b, pole in pieces:
        if kind == 'ode':
            y, found = _integrate_segment(rhs, y, a, b, outputs, opts, recorder)
            for i, value in found.items():
                states.setdefault(i, value)
            continue
        assert pole is not None
        LOGGER.warning('bridging singular time t=%.12g over [%.12g, %.12g] with the exact map', pole, a, b)
        bridges.append(BridgeEvent(pole=pole, t_enter=a, t_exit=b))
        for i in np.flatnonzero((outputs > a) & (outputs < b)):
            states.setdefault(int(i), gen_provider.map_matrix(float(outputs[i])).M @ start)
            bridged[i] = True
        y = gen_provider.map_matrix(b).M @ start
        for i in np.flatnonzero(outputs == b):
            states.setdefault(int(i), y.copy())
    LOGGER.info('integrated to t=%g in %d steps with %d bridge(s)', t_end, len(recorder.times), len(bridges))
    return Trajectory(
        dim=dim,
        times=outputs,
        states=np.array([states[i] for i in range(outputs.size)]).reshape(outputs.size, dim * dim),
        bridged=bridged,
        step_times=np.array(recorder.times),
        step_errors=np.array(recorder.errors),
        bridges=tuple(bridges),
    )


# ----------------------------------------------------------------------
# CP divisibility --------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class CPDivisibilityReport:
    times: np.ndarray
    rates: np.ndarray
    tolerance: float
    cp_divisible: bool
    semigroup: bool
    negative_intervals: Tuple[Tuple[float, float], ...] = ()
    skipped: Tuple[float, ...] = ()
    signs: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=int))

    @property
    def verdict(self) -> str:
        if self.semigroup:
            return 'semigroup'
        return 'cp-divisible' if self.cp_divisible else 'not cp-divisible'

    def as_dict(self) -> Dict[str, Any]:
        return {
            'verdict': self.verdict,
            'cp_divisible': self.cp_divisible,
            'semigroup': self.semigroup,
            'tolerance': self.tolerance,
            'negative_intervals': [list(interval) for interval in self.negative_intervals],
            'skipped_times': list(self.skipped),
            'min_rates': [float(v) for v in np.nanmin(self.rates, axis=0)] if self.rates.size else [],
        }


def _sign(values: np.ndarray, tolerance: float) -> np.ndarray:
    return np.where(values < -tolerance, -1, np.where(values > tolerance, 1, 0))


def _negative_runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    runs, start = [], None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, mask.size - 1))
    return runs


def cp_divisibility_report(gen_provider: Any, t_grid: Sequence[float], dt_mode: str = 'analytic',
                           tolerances: Optional[Tolerances] = None) -> CPDivisibilityReport:
    """Rate signs along t_grid; pole neighbourhoods are skipped and listed."""
    tolerances = tolerances or getattr(gen_provider, 'tolerances', DEFAULT_TOLERANCES)
    grid = np.asarray(t_grid, dtype=float)
    poles = gen_provider.singular_times(float(grid.min(initial=0.0)), float(grid.max(initial=0.0)))
    count = len(gen_provider.basis.diagonal_indices)
    rates = np.full((grid.size, count), np.nan)
    generators: List[np.ndarray] = []
    skipped: List[float] = []
    for i, t in enumerate(grid):
        if gen_provider.nearest_singular_time(float(t), poles) is not None:
            skipped.append(float(t))
            continue
        generator = generator_matrix(gen_provider, float(t), dt_mode, tolerances)
        generators.append(generator.L)
        rates[i] = extract_rates(generator.L, gen_provider.basis, tolerances, t=float(t)).rates
    tolerance = tolerances.rate_absolute
    sampled = ~np.isnan(rates[:, 0])
    signs = _sign(np.nan_to_num(rates), tolerance)
    negative = sampled & np.any(rates < -tolerance, axis=1)

    def smallest_rate(t: float) -> float:
        generator = generator_matrix(gen_provider, t, dt_mode, tolerances)
        return min(extract_rates(generator.L, gen_provider.basis, tolerances).rates) + tolerance

    intervals = []
    for first, last in _negative_runs(negative):
        lower, upper = float(grid[first]), float(grid[last])
        if first > 0 and sampled[first - 1] and not _straddles(poles, grid[first - 1], grid[first]):
            lower = _edge(smallest_rate, float(grid[first - 1]), lower)
        if last + 1 < grid.size and sampled[last + 1] and not _straddles(poles, grid[last], grid[last + 1]):
            upper = _edge(smallest_rate, upper, float(grid[last + 1]))
        intervals.append((lower, upper))

    semigroup = False
    if len(generators) > 1:
        stack = np.array(generators)
        scale = max(1.0, float(np.max(np.abs(stack))))
        semigroup = bool(np.max(np.abs(stack - stack[0])) <= tolerances.rate_relative * scale)
    cp_divisible = not bool(np.any(negative))
    LOGGER.info('cp-divisibility over %d times: divisible=%s semigroup=%s, %d negative interval(s), %d skipped',
                grid.size, cp_divisible, semigroup, len(intervals), len(skipped))
    return CPDivisibilityReport(
        times=grid,
        rates=rates,
        tolerance=tolerance,
        cp_divisible=cp_divisible,
        semigroup=semigroup,
        negative_intervals=tuple(intervals),
        skipped=tuple(skipped),
        signs=signs,
    )


def _straddles(poles: Sequence[float], a: float, b: float) -> bool:
    return any(a <= pole <= b for pole in poles)


def _edge(func: Callable[[float], float], a: float, b: float) -> float:
    roots = find_sign_changes(func, (a, b))
    return roots[0] if roots else a


__all__ = [
    'BridgeEvent',
    'CPDivisibilityReport',
    'IntegrationOptions',
    'Trajectory',
    'cp_divisibility_report',
    'integrate',
]
