"""Invariant and oracle checks behind the ``verify`` command.

Each check returns the worst observed deviation and the tolerance it is held
to; it passes when the deviation does not exceed the tolerance. Randomized
checks draw from a generator seeded with (seed, crc32(check name)), so the
outcome does not depend on scheduling.
"""

import logging
import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .bplus import CorrelatedPFState, bplus_terms, environment_terms_on_grid, weights
from .decoherence import (KAPPA, KAPPA_A, KAPPA_B, BiGaussianDouble, BiGaussianSingle,
                          BiTabulated, DecoherenceSet, UniGaussian, UniGaussianMixture, UniLorentzian, UniTabulated,
                          decoherence_set, kappa_correlated, single_photon_set)
from .exception import PhotonDephasingException
from .generator import (extract_rates, generator_matrix, qubit_rates, rate_matrix_appendix, rates_double_peak_analytic,
                        rates_single_peak_analytic, reference_jumps)
from .integrator import cp_divisibility_report, integrate
from .map_builder import DephasingChannel, analytic_bloch_double_peak, build_map_matrix
from .operator_basis import ORDERINGS, PAULI, SUPPORTED_DIMENSIONS, build_basis, from_bloch, to_bloch
from .presets import BPLUS_PRESETS, bplus_preset
from .profiles import ConstantPhase, StepPhase
from .settings import Tolerances
from .types import CheckResult

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class VerifyContext:
    tolerances: Tolerances
    seed: int

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(name.encode('utf-8'))])


@dataclass(frozen=True)
class Outcome:
    value: float
    tolerance: float
    detail: str = ''


CheckFunction = Callable[[VerifyContext], Outcome]
CHECKS: List[Tuple[str, CheckFunction]] = []


def check(name: str) -> Callable[[CheckFunction], CheckFunction]:
    def register(func: CheckFunction) -> CheckFunction:
        CHECKS.append((name, func))
        return func

    return register


# ----------------------------------------------------------------------
# Shared helpers ------------------------------------------------------------
def random_density_matrix(rng: np.random.Generator, dim: int, rank: Optional[int] = None) -> np.ndarray:
    columns = rank or dim
    ginibre = rng.normal(size=(dim, columns)) + 1j * rng.normal(size=(dim, columns))
    rho = ginibre @ ginibre.conj().T
    return rho / np.trace(rho).real


def random_amplitudes(rng: np.random.Generator) -> Tuple[complex, complex]:
    vector = rng.normal(size=2) + 1j * rng.normal(size=2)
    vector /= np.linalg.norm(vector)
    return complex(vector[0]), complex(vector[1])


def rate_error(numeric: Sequence[float], analytic: Sequence[float], tolerances: Tolerances) -> float:
    """Relative error, measured absolutely where the analytic value is near zero."""
    floor = tolerances.rate_absolute / tolerances.rate_relative
    return max((abs(n - a) / max(abs(a), floor) for n, a in zip(numeric, analytic)), default=0.0)


def central_difference(func: Callable[[float], complex], t: float, h: float = 1e-3) -> complex:
    return (func(t - 2 * h) - 8 * func(t - h) + 8 * func(t + h) - func(t + 2 * h)) / (12 * h)


def bivariate_gaussian_table(spec: BiGaussianSingle, half_width: float = 7.0, step: float = 0.01) -> BiTabulated:
    mean_a, mean_b = spec.means
    grid_a = mean_a + np.arange(-half_width, half_width + 0.5 * step, step) * spec.sigma
    grid_b = mean_b + np.arange(-half_width, half_width + 0.5 * step, step) * spec.sigma
    x, y = np.meshgrid((grid_a - mean_a) / spec.sigma, (grid_b - mean_b) / spec.sigma, indexing='ij')
    q = (x * x - 2 * spec.K * x * y + y * y) / (1.0 - spec.K ** 2)
    p = np.exp(-0.5 * q) / (2 * math.pi * spec.sigma ** 2 * math.sqrt(1.0 - spec.K ** 2))
    return BiTabulated.from_samples(grid_a, grid_b, p, normalize=True, source='verify')


# ----------------------------------------------------------------------
# Operator basis ------------------------------------------------------------
@check('basis_orthonormality')
def _basis_orthonormality(context: VerifyContext) -> Outcome:
    worst = 0.0
    for dim in SUPPORTED_DIMENSIONS:
        for ordering in ORDERINGS:
            basis = build_basis(dim, ordering)
            worst = max(worst, float(np.max(np.abs(basis.gram() - np.eye(len(basis))))))
            worst = max(worst, float(np.max(np.abs(basis.ops - np.conj(np.swapaxes(basis.ops, 1, 2))))))
    return Outcome(worst, context.tolerances.algebraic, 'max |Tr[F_i F_j] - delta_ij| and Hermiticity residue')


@check('bloch_round_trip')
def _bloch_round_trip(context: VerifyContext) -> Outcome:
    rng = context.rng('bloch_round_trip')
    worst = 0.0
    for dim in SUPPORTED_DIMENSIONS:
        basis = build_basis(dim)
        for _ in range(100):
            rho = random_density_matrix(rng, dim)
            components = np.einsum('aij,ji->a', basis.ops, rho)
            worst = max(worst, float(np.max(np.abs(components.imag))))
            worst = max(worst, float(np.max(np.abs(from_bloch(to_bloch(rho, basis), basis) - rho))))
    return Outcome(worst, context.tolerances.algebraic, '100 random states per dimension')


@check('diagonal_subspace')
def _diagonal_subspace(context: VerifyContext) -> Outcome:
    basis = build_basis(4)
    diagonal = basis.ops[list(basis.diagonal_indices)]
    worst = 0.0
    for target in (np.kron(PAULI[3], PAULI[0]), np.kron(PAULI[0], PAULI[3]), np.kron(PAULI[3], PAULI[3])):
        coefficients = np.einsum('aij,ji->a', diagonal, target).real
        worst = max(worst, float(np.max(np.abs(np.einsum('a,aij->ij', coefficients, diagonal) - target))))
    return Outcome(worst, context.tolerances.algebraic, 'I(x)sz, sz(x)I, sz(x)sz in the diagonal span')


# ----------------------------------------------------------------------
# Decoherence functions ---------------------------------------------------
def _closed_form_sets() -> List[DecoherenceSet]:
    return [
        single_photon_set(UniGaussian(mean=0.7, sigma=1.3), 1.0),
        single_photon_set(UniLorentzian(center=0.4, width=0.8), 1.0),
        single_photon_set(UniGaussianMixture(means=(-1.0, 1.0), sigmas=(0.2, 0.2), weights=(0.5, 0.5)), 1.0),
        decoherence_set(BiGaussianSingle(omega0=0.5, delta_omega=0.3, sigma=1.0, K=0.5), 1.0),
        decoherence_set(BiGaussianDouble(omega0=0.5, delta_omega=2.0, sigma=1.0, K=-0.3), 1.0),
    ]


@check('decoherence_normalization')
def _decoherence_normalization(context: VerifyContext) -> Outcome:
    times = np.linspace(0.0, 5.0, 101)
    worst = 0.0
    for ds in _closed_form_sets():
        for name in ds.names:
            values = np.asarray(ds.value(name, times))
            worst = max(worst, abs(complex(values[0]) - 1.0), float(np.max(np.abs(values))) - 1.0)
    return Outcome(worst, context.tolerances.normalization, 'kappa(0) = 1 and |kappa| <= 1')


@check('decoherence_conjugation')
def _decoherence_conjugation(context: VerifyContext) -> Outcome:
    times = np.linspace(0.0, 5.0, 51)
    worst = 0.0
    for ds in _closed_form_sets():
        for name in ds.names:
            worst = max(worst, float(np.max(np.abs(np.asarray(ds.value(name, -times))
                                                   - np.conj(np.asarray(ds.value(name, times)))))))
    return Outcome(worst, context.tolerances.algebraic, 'kappa(-t) = kappa(t)^*')


@check('derivative_consistency')
def _derivative_consistency(context: VerifyContext) -> Outcome:
    rng = context.rng('derivative_consistency')
    times = rng.uniform(0.1, 3.0, size=50)
    worst = 0.0
    for ds in _closed_form_sets():
        for name in ds.names:
            for t in times:
                analytic = complex(ds.derivative(name, t))
                numeric = central_difference(lambda s: complex(ds.value(name, s)), float(t))
                worst = max(worst, abs(numeric - analytic) / max(abs(analytic), 1e-3))
    return Outcome(worst, context.tolerances.rate_relative, '4th-order central differences at 50 random times')


@check('tabulated_univariate')
def _tabulated_univariate(context: VerifyContext) -> Outcome:
    spec = UniGaussian(mean=0.3, sigma=1.0)
    omega = np.linspace(spec.mean - 7.0, spec.mean + 7.0, 70001)
    table = UniTabulated.from_samples(omega, spec.density(omega), normalize=True)
    times = np.linspace(0.0, 3.0, 31)
    error = float(np.max(np.abs(np.asarray(table.kappa(1.0, times)) - np.asarray(spec.kappa(1.0, times)))))
    return Outcome(error, context.tolerances.quadrature_check, 'sampled Gaussian on +-7 sigma vs closed form')


@check('tabulated_bivariate')
def _tabulated_bivariate(context: VerifyContext) -> Outcome:
    spec = BiGaussianSingle(sigma=1.0, K=0.5)
    closed = decoherence_set(spec, 1.0)
    sampled = decoherence_set(bivariate_gaussian_table(spec), 1.0)
    worst = 0.0
    for t in np.linspace(0.0, 3.0, 16):
        for name in closed.names:
            worst = max(worst, abs(complex(sampled.value(name, t)) - complex(closed.value(name, t))))
    return Outcome(worst, context.tolerances.tabulated_check, 'sampled bivariate Gaussian (K=0.5) vs closed forms')


@check('double_peak_limit')
def _double_peak_limit(context: VerifyContext) -> Outcome:
    single = decoherence_set(BiGaussianSingle(omega0=0.4, delta_omega=0.0, sigma=1.0, K=0.2), 1.0)
    double = decoherence_set(BiGaussianDouble(omega0=0.4, delta_omega=1e-9, sigma=1.0, K=0.2), 1.0)
    times = np.linspace(0.0, 3.0, 31)
    worst = max(float(np.max(np.abs(np.asarray(single.value(n, times)) - np.asarray(double.value(n, times)))))
                for n in single.names)
    return Outcome(worst, 1e-10, 'double-peak functions as delta_omega -> 0')


@check('kappa_correlated_constant_phase')
def _kappa_correlated_constant_phase(context: VerifyContext) -> Outcome:
    spec = UniGaussian(mean=0.5, sigma=1.0)
    times = np.linspace(0.0, 3.0, 31)
    expected = np.exp(1j * math.pi / 3) * np.asarray(spec.kappa(1.0, times))
    error = float(np.max(np.abs(np.asarray(kappa_correlated(spec, ConstantPhase(math.pi / 3), 1.0, times)) - expected)))
    return Outcome(error, context.tolerances.algebraic, 'constant phase factors out')


# ----------------------------------------------------------------------
# Maps ------------------------------------------------------------------------
@check('factorization_uncorrelated')
def _factorization_uncorrelated(context: VerifyContext) -> Outcome:
    spec = BiGaussianSingle(omega0=0.6, delta_omega=0.4, sigma=1.0, K=0.0)
    ds = decoherence_set(spec, 1.0)
    joint_basis = build_basis(4, 'pauli_product')
    qubit_basis = build_basis(2, 'pauli_product')

    def local(name: str) -> DecoherenceSet:
        return DecoherenceSet(dn=1.0, functions={KAPPA: ds.functions[name]}, derivatives={KAPPA: ds.derivatives[name]})

    worst = 0.0
    for t in np.linspace(0.0, 3.0, 30):
        joint = build_map_matrix(ds, t, joint_basis).M
        product = np.kron(build_map_matrix(local(KAPPA_A), t, qubit_basis).M,
                          build_map_matrix(local(KAPPA_B), t, qubit_basis).M)
        worst = max(worst, float(np.max(np.abs(joint - product))))
    return Outcome(worst, 1e-10, 'M_joint = M_a (x) M_b at K = 0 (Pauli product ordering)')


@check('map_consistency')
def _map_consistency(context: VerifyContext) -> Outcome:
    rng = context.rng('map_consistency')
    worst = 0.0
    for spec in (BiGaussianSingle(omega0=0.5, delta_omega=0.2, sigma=1.0, K=0.4),
                 BiGaussianDouble(omega0=0.5, delta_omega=2.0, sigma=1.0, K=0.0)):
        channel = DephasingChannel(spectrum=spec, dn=1.0, tolerances=context.tolerances)
        for t in rng.uniform(0.0, 3.0, size=10):
            rho = random_density_matrix(rng, 4)
            exact = channel.evolve(rho, float(t))
            mapped = channel.from_bloch(channel.propagate(channel.to_bloch(rho), float(t)))
            worst = max(worst, float(np.max(np.abs(mapped - exact))))
            worst = max(worst, abs(float(np.trace(exact).real) - 1.0), float(np.max(np.abs(exact - exact.conj().T))))
            worst = max(worst, max(0.0, -float(linalg.eigvalsh(exact)[0]) - context.tolerances.positivity))
    return Outcome(worst, context.tolerances.hermiticity, 'entry-wise channel vs map matrix and state validity')


@check('double_peak_closed_form')
def _double_peak_closed_form(context: VerifyContext) -> Outcome:
    rng = context.rng('double_peak_closed_form')
    spec = BiGaussianDouble(omega0=0.7, delta_omega=2.0, sigma=1.0, K=0.3)
    channel = DephasingChannel(spectrum=spec, dn=1.0)
    worst = 0.0
    for t in rng.uniform(0.0, 3.0, size=10):
        r0 = channel.to_bloch(random_density_matrix(rng, 4))
        closed = analytic_bloch_double_peak(r0, spec, 1.0, float(t), channel.basis).r
        worst = max(worst, float(np.max(np.abs(closed - channel.propagate(r0, float(t)).r))))
    return Outcome(worst, context.tolerances.algebraic, 'closed-form Bloch vector vs map matrix')


# ----------------------------------------------------------------------
# Generator and rates -----------------------------------------------------
def _rate_grid(channel: DephasingChannel, times: np.ndarray) -> List[float]:
    poles = channel.singular_times(float(np.min(times)), float(np.max(times)))
    return [float(t) for t in times if channel.nearest_singular_time(float(t), poles) is None]


@check('single_peak_rates')
def _single_peak_rates(context: VerifyContext) -> Outcome:
    worst = 0.0
    for K in (-1.0, 0.0, 1.0):
        spec = BiGaussianSingle(sigma=1.0, K=K)
        channel = DephasingChannel(spectrum=spec, dn=1.0, tolerances=context.tolerances)
        for t in np.linspace(0.0, 3.0, 60):
            numeric = extract_rates(generator_matrix(channel, t).L, channel.basis, context.tolerances).rates
            worst = max(worst, rate_error(numeric, rates_single_peak_analytic(spec, 1.0, t).rates, context.tolerances))
    return Outcome(worst, context.tolerances.rate_relative, 'K in {-1, 0, 1}, 60 times on [0, 3]')


@check('double_peak_rates')
def _double_peak_rates(context: VerifyContext) -> Outcome:
    worst = 0.0
    negative = True
    for K in (-1.0, 0.0, 1.0):
        spec = BiGaussianDouble(sigma=1.0, delta_omega=2.0, K=K)
        channel = DephasingChannel(spectrum=spec, dn=1.0, tolerances=context.tolerances)
        gamma_1, gamma_3 = [], []
        for t in _rate_grid(channel, np.linspace(0.0, 3.0, 60)):
            numeric = extract_rates(generator_matrix(channel, t).L, channel.basis, context.tolerances).rates
            analytic = rates_double_peak_analytic(spec, 1.0, t, context.tolerances.pole_epsilon)
            worst = max(worst, rate_error(numeric, analytic, context.tolerances))
            gamma_1.append(numeric[0])
            gamma_3.append(numeric[2])
        negative = negative and min(gamma_1) < 0 and max(abs(g) for g in gamma_3) > 0
    if not negative:
        return Outcome(math.inf, context.tolerances.rate_relative, 'gamma_1 never negative or gamma_3 vanishes')
    return Outcome(worst, context.tolerances.rate_relative, 'delta_omega/sigma = 2, K in {-1, 0, 1}, poles excluded')


@check('jump_operators')
def _jump_operators(context: VerifyContext) -> Outcome:
    spec = BiGaussianSingle(sigma=1.0, K=0.5)
    channel = DephasingChannel(spectrum=spec, dn=1.0, tolerances=context.tolerances)
    worst = 0.0
    for t in np.linspace(0.3, 3.0, 10):
        decomposition = extract_rates(generator_matrix(channel, t).L, channel.basis, context.tolerances)
        for jump, expected in zip(decomposition.jumps[:2], reference_jumps(4)[:2]):
            worst = max(worst, float(np.linalg.norm(jump - expected)))
            worst = max(worst, abs(complex(np.trace(jump))), float(np.max(np.abs(jump - jump.conj().T))))
        for jump in decomposition.jumps:
            commutator = decomposition.H @ jump - jump @ decomposition.H
            worst = max(worst, float(np.linalg.norm(commutator)))
    return Outcome(worst, context.tolerances.rate_relative, 'non-degenerate jumps vs closed form; [H, J] = 0')


@check('appendix_rate_matrix')
def _appendix_rate_matrix(context: VerifyContext) -> Outcome:
    worst = 0.0
    for spec in (BiGaussianSingle(omega0=0.5, delta_omega=0.3, sigma=1.0, K=0.5),
                 BiGaussianDouble(omega0=0.5, delta_omega=2.0, sigma=1.0, K=0.0)):
        channel = DephasingChannel(spectrum=spec, dn=1.0, tolerances=context.tolerances)
        for t in _rate_grid(channel, np.linspace(0.1, 3.0, 20)):
            appendix = rate_matrix_appendix(channel.decoherence, t, context.tolerances)
            decomposition = extract_rates(generator_matrix(channel, t).L, channel.basis, context.tolerances)
            scale = max(1.0, float(np.max(np.abs(appendix))))
            eigenvalues = linalg.eigvalsh(0.5 * (appendix + appendix.conj().T))
            worst = max(worst, float(np.max(np.abs(eigenvalues - np.sort(decomposition.rates)))) / scale)
            worst = max(worst, float(np.max(np.abs(appendix - appendix.conj().T))) / scale)
            worst = max(worst, abs(float(np.trace(appendix).real) - decomposition.total_rate) / scale)
    return Outcome(worst, context.tolerances.appendix, 'closed-form rate matrix spectrum vs extracted rates')


@check('generator_modes')
def _generator_modes(context: VerifyContext) -> Outcome:
    rng = context.rng('generator_modes')
    worst = 0.0
    for spec in (BiGaussianSingle(omega0=0.5, delta_omega=0.3, sigma=1.0, K=0.5),
                 BiGaussianDouble(omega0=0.5, delta_omega=2.0, sigma=1.0, K=0.0)):
        channel = DephasingChannel(spectrum=spec, dn=1.0, tolerances=context.tolerances)
        for t in _rate_grid(channel, np.sort(rng.uniform(0.1, 3.0, size=50))):
            analytic = generator_matrix(channel, t, 'analytic').L
            numeric = generator_matrix(channel, t, 'finite-difference').L
            worst = max(worst, float(np.max(np.abs(analytic - numeric))) / max(float(np.max(np.abs(analytic))), 1e-12))
    return Outcome(worst, 1e-5, 'analytic vs finite-difference generator at 50 random times')


@check('qubit_rates')
def _qubit_rates(context: VerifyContext) -> Outcome:
    gaussian = single_photon_set(UniGaussian(mean=0.8, sigma=1.5), 2.0)
    lorentzian = single_photon_set(UniLorentzian(center=0.3, width=0.7), 2.0)
    worst = 0.0
    for t in np.linspace(0.0, 3.0, 31):
        gamma, nu = qubit_rates(gaussian, t)
        worst = max(worst, abs(gamma - 4.0 * 1.5 ** 2 * t), abs(nu - 2.0 * 0.8))
        gamma, nu = qubit_rates(lorentzian, t)
        worst = max(worst, abs(gamma - 0.7 * 2.0), abs(nu - 2.0 * 0.3))
    return Outcome(worst, context.tolerances.algebraic * 100, 'gamma = dn^2 sigma^2 t, nu = dn mean; gamma = width dn')


@check('cp_divisibility_verdicts')
def _cp_divisibility_verdicts(context: VerifyContext) -> Outcome:
    grid = np.linspace(0.0, 3.0, 61)
    wrong = []
    single = DephasingChannel(spectrum=BiGaussianSingle(sigma=1.0, K=0.5), dn=1.0, tolerances=context.tolerances)
    if not cp_divisibility_report(single, grid).cp_divisible:
        wrong.append('single peak')
    double = DephasingChannel(spectrum=BiGaussianDouble(sigma=1.0, delta_omega=2.0, K=0.0), dn=1.0,
                              tolerances=context.tolerances)
    report = cp_divisibility_report(double, grid)
    if report.cp_divisible or not report.negative_intervals:
        wrong.append('double peak')
    qubit = DephasingChannel(spectrum=UniLorentzian(center=0.2, width=0.5), dn=1.0, tolerances=context.tolerances)
    if not cp_divisibility_report(qubit, grid).semigroup:
        wrong.append('lorentzian semigroup')
    return Outcome(float(len(wrong)), 0.0, ', '.join(wrong) or 'all verdicts as expected')


# ----------------------------------------------------------------------
# Integration -----------------------------------------------------------------
@check('integrator_single_peak')
def _integrator_single_peak(context: VerifyContext) -> Outcome:
    rng = context.rng('integrator_single_peak')
    spec = BiGaussianSingle(omega0=0.4, delta_omega=0.2, sigma=1.0, K=0.5)
    channel = DephasingChannel(spectrum=spec, dn=1.0, tolerances=context.tolerances)
    t_end = 3.0 / (spec.sigma * 1.0)
    worst = 0.0
    for _ in range(20):
        rho = random_density_matrix(rng, 4)
        trajectory = integrate(channel.to_bloch(rho), channel, t_end)
        exact = channel.to_bloch(channel.evolve(rho, t_end)).r
        worst = max(worst, float(np.max(np.abs(trajectory.final.r - exact))), trajectory.trace_drift)
    return Outcome(worst, context.tolerances.trajectory, '20 random states vs the exact channel')


@check('integrator_double_peak')
def _integrator_double_peak(context: VerifyContext) -> Outcome:
    rng = context.rng('integrator_double_peak')
    spec = BiGaussianDouble(omega0=0.4, delta_omega=2.0, sigma=1.0, K=0.0)
    channel = DephasingChannel(spectrum=spec, dn=1.0, tolerances=context.tolerances)
    t_end = 3.0
    worst = 0.0
    bridges = 0
    for _ in range(20):
        r0 = channel.to_bloch(random_density_matrix(rng, 4))
        trajectory = integrate(r0, channel, t_end)
        bridges = max(bridges, len(trajectory.bridges))
        exact = analytic_bloch_double_peak(r0, spec, 1.0, t_end, channel.basis).r
        worst = max(worst, float(np.max(np.abs(trajectory.final.r - exact))), trajectory.trace_drift)
    if bridges == 0:
        return Outcome(math.inf, context.tolerances.trajectory, 'no singular time was bridged')
    return Outcome(worst, context.tolerances.trajectory, f'20 random states through {bridges} singular time(s)')


# ----------------------------------------------------------------------
# B+ decomposition ------------------------------------------------------------
@check('bplus_weights')
def _bplus_weights(context: VerifyContext) -> Outcome:
    half = 1.0 / math.sqrt(2.0)
    gaussian = UniGaussian(mean=0.0, sigma=1.0)
    cases = [
        (CorrelatedPFState(c_h=half, c_v=half, amplitude=gaussian, theta=ConstantPhase(0.0)), (2.0, 1.0, 1.0)),
        (CorrelatedPFState(c_h=1.0, c_v=0.0, amplitude=gaussian, theta=ConstantPhase(0.0)), (1.0, 1.0, 2.0)),
        (CorrelatedPFState(c_h=half, c_v=half, amplitude=gaussian,
                           theta=StepPhase(at=0.0, low=-0.5 * math.pi, high=0.5 * math.pi)), (1.0, 1.0, 1.0)),
    ]
    worst = 0.0
    for state, expected in cases:
        w = weights(state, context.tolerances)
        worst = max(worst, *(abs(a - b) for a, b in zip((w.w_x, w.w_y, w.w_z), expected)))
    return Outcome(worst, context.tolerances.quadrature_check, 'closed-form weights of three reference states')


@check('bplus_reconstruction')
def _bplus_reconstruction(context: VerifyContext) -> Outcome:
    rng = context.rng('bplus_reconstruction')
    names = sorted(BPLUS_PRESETS)
    times = np.linspace(0.0, 6.0, 20)
    worst = 0.0
    for i in range(20):
        c_h, c_v = random_amplitudes(rng)
        state = bplus_preset(names[i % len(names)], c_h, c_v)
        terms = bplus_terms(state, 1.0, times, context.tolerances)
        direct = np.asarray(kappa_correlated(state.amplitude, state.theta, 1.0, times, context.tolerances))
        coherence = direct * state.c_h * state.c_v.conjugate()
        worst = max(worst, float(np.max(np.abs(terms.reconstructed_coherence() - coherence))))
    return Outcome(worst, context.tolerances.quadrature_check, '20 random amplitudes over the four presets')


@check('bath_positivity')
def _bath_positivity(context: VerifyContext) -> Outcome:
    worst = 0.0
    for name in sorted(BPLUS_PRESETS):
        for kernel in environment_terms_on_grid(bplus_preset(name), 128, context.tolerances).values():
            worst = max(worst, -kernel.min_eigenvalue)
    return Outcome(max(worst, 0.0), context.tolerances.positivity, 'smallest kernel eigenvalue over the presets')


def regime_violations(tolerances: Tolerances) -> List[str]:
    times = np.linspace(0.0, 10.0, 201)
    magnitude = {name: np.abs(bplus_terms(bplus_preset(name), 1.0, times, tolerances).kappa) for name in BPLUS_PRESETS}
    problems = []
    if np.any(np.diff(magnitude['markovian']) > tolerances.algebraic):
        problems.append('markovian |kappa| increases')
    curve = magnitude['non_markovian']
    dips = [i for i in range(1, curve.size - 1) if curve[i] <= curve[i - 1] and curve[i] < curve[i + 1]]
    if not dips or max(float(np.max(curve[i:]) - curve[i]) for i in dips) < 0.05:
        problems.append('non_markovian |kappa| does not revive by 0.05')
    curve = magnitude['np_map']
    early = float(np.min(curve[times <= 0.5]))
    if float(np.max(curve)) <= early + 0.05:
        problems.append('np_map |kappa| never exceeds its early minimum by 0.05')
    curve = magnitude['coherence_trapping']
    late = float(np.max(curve[times > 0.5 * times[-1]]))
    if curve[-1] < 0.5 * late or curve[-1] <= 0.05:
        problems.append('coherence_trapping |kappa| has no plateau')
    return problems


@check('bplus_regimes')
def _bplus_regimes(context: VerifyContext) -> Outcome:
    problems = regime_violations(context.tolerances)
    return Outcome(float(len(problems)), 0.0, '; '.join(problems) or 'all four presets show their regime')


# ----------------------------------------------------------------------
# Runner --------------------------------------------------------------------
def _run_one(name: str, func: CheckFunction, context: VerifyContext) -> CheckResult:
    started = time.perf_counter()
    try:
        outcome = func(context)
        passed = bool(outcome.value <= outcome.tolerance)
        result: CheckResult = {
            'name': name,
            'passed': passed,
            'value': float(outcome.value),
            'tolerance': float(outcome.tolerance),
            'detail': outcome.detail,
            'elapsed': 0.0,
        }
    except PhotonDephasingException as error:
        LOGGER.error('check %s raised %s', name, error)
        result = {'name': name, 'passed': False, 'value': math.inf, 'tolerance': 0.0,
                  'detail': f'{type(error).__name__}: {error}', 'elapsed': 0.0}
    result['elapsed'] = time.perf_counter() - started
    LOGGER.info('check %s: %s (value %.3e, tolerance %.3e)', name, 'pass' if result['passed'] else 'FAIL',
                result['value'], result['tolerance'])
    return result


def run_checks(tolerances: Tolerances, seed: int, names: Optional[Sequence[str]] = None,
               workers: int = 4) -> List[CheckResult]:
    context = VerifyContext(tolerances=tolerances, seed=seed)
    selected = [(name, func) for name, func in CHECKS if names is None or name in names]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [pool.submit(_run_one, name, func, context) for name, func in selected]
        return [future.result() for future in futures]


def check_names() -> Tuple[str, ...]:
    return tuple(name for name, _ in CHECKS)


def verification_report(results: Sequence[CheckResult], seed: int, profile: str) -> Dict[str, object]:
    return {
        'seed': seed,
        'tolerance_profile': profile,
        'passed': all(result['passed'] for result in results),
        'failed': [result['name'] for result in results if not result['passed']],
        'checks': list(results),
        'elapsed': sum(result['elapsed'] for result in results),
    }


__all__ = [
    'CHECKS',
    'Outcome',
    'VerifyContext',
    'check',
    'check_names',
    'random_density_matrix',
    'rate_error',
    'regime_violations',
    'run_checks',
    'verification_report',
]
