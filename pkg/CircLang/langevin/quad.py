"""
Quadratures: the oscillatory constants σ and σ', the two-dimensional Fourier
inversions of the pinned transform P_ε and the direct evaluation of I_ε.
"""
import math
from typing import Callable
from typing import List
from typing import Sequence
from typing import Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy import optimize
from scipy import special

from CircLang import settings
from langevin import bridge
from langevin import specfun
from langevin.exceptions import CancellationError
from langevin.exceptions import ConvergenceError
from langevin.exceptions import DomainError
from langevin.malliavin import du0
from langevin.malliavin import zero_point
from langevin.models import PeriodSum
from langevin.models import QuadResult

# Relative level of the Gaussian envelope at the edge of the truncated Fourier box.
ENVELOPE_CUT = 1e-6
# Relative level of the I_ε integrand at which the x-range is cut.
TAIL_CUT = 1e-18


class _Counted:
    """Integrand wrapper that counts evaluations."""

    def __init__(self, fn: Callable[[float], float]):
        self.fn = fn
        self.calls = 0

    def __call__(self, x: float) -> float:
        self.calls += 1
        return self.fn(x)


# ====================== Series acceleration ======================

def wynn_epsilon(partial_sums: Sequence[float]) -> Tuple[float, float]:
    """
    Wynn's epsilon algorithm on a sequence of partial sums.

    Returns:
        Tuple[float, float]: The last even-column entry and its distance to the previous one.
    """
    sums = [float(s) for s in partial_sums]
    if len(sums) < 3:
        return sums[-1], math.inf if len(sums) < 2 else abs(sums[-1] - sums[-2])

    previous = [0.0] * (len(sums) + 1)
    current = sums
    estimates = [sums[-1]]
    column = 0
    while len(current) > 1:
        following = []
        for k in range(len(current) - 1):
            diff = current[k + 1] - current[k]
            if diff == 0.0:
                following = []
                break
            following.append(previous[k + 1] + 1.0 / diff)
        if not following:
            break
        previous, current = current, following
        column += 1
        if column % 2 == 0:
            estimates.append(current[-1])

    if len(estimates) < 2:
        return estimates[-1], abs(sums[-1] - sums[-2])
    return estimates[-1], abs(estimates[-1] - estimates[-2])


def euler_average(partial_sums: Sequence[float], depth: int = 12) -> Tuple[float, float]:
    """Repeated averaging of consecutive partial sums of an alternating series."""
    row = np.asarray(partial_sums, dtype=float)
    depth = min(depth, len(row) - 2)
    for _ in range(max(depth, 0)):
        row = 0.5 * (row[:-1] + row[1:])
    return float(row[-1]), float(abs(row[-1] - row[-2]))


def oscillatory_period_sum(g: Callable[[float], float], zeros: Callable[[int], float], tol: float,
                           method: str = "wynn", min_periods: int = 16,
                           max_periods: int = 4000) -> PeriodSum:
    """
    ∫_{zeros(0)}^∞ g as a sum of the integrals between consecutive sign changes.

    Args:
        g (Callable[[float], float]): The integrand.
        zeros (Callable[[int], float]): k ↦ the k-th zero of g, increasing in k.
        tol (float): Absolute tolerance on the accelerated sum.
        method (str): "wynn" for the epsilon algorithm, "euler" for repeated averaging.

    Returns:
        PeriodSum: The accelerated value and the raw partial sums.
    """
    match method:
        case "wynn":
            accelerate = lambda sums: wynn_epsilon(sums[-21:])
        case "euler":
            accelerate = euler_average
        case _:
            raise DomainError(f"Unknown acceleration method {method!r}.")

    counted = _Counted(g)
    partial: List[float] = []
    total = 0.0
    estimate, error, previous = math.nan, math.inf, math.nan
    left = zeros(0)
    for k in range(max_periods):
        right = zeros(k + 1)
        value, _ = integrate.quad(counted, left, right, epsabs=tol * 1e-3, epsrel=1e-13, limit=200)
        total += value
        partial.append(total)
        left = right
        if k + 1 < min_periods:
            continue
        estimate, error = accelerate(partial)
        if abs(estimate - previous) <= tol / 4.0 and error <= tol:
            return PeriodSum(value=estimate, partial_sums=tuple(partial),
                             abs_error_estimate=max(error, abs(estimate - previous)), n_evals=counted.calls)
        previous = estimate
    return PeriodSum(value=estimate, partial_sums=tuple(partial), abs_error_estimate=error, n_evals=counted.calls)


# ====================== σ ======================

def _sigma_phase(x: float) -> float:
    # θ(x) = π/8 + x - ½ arctan x, increasing with θ' ≥ 1/2
    return math.pi / 8.0 + x - 0.5 * math.atan(x)


def _sigma_phase_inverse(t: float) -> float:
    # θ(x) ∈ [x - π/8, x + π/8]
    lo = max(0.0, t - math.pi / 8.0)
    hi = t + math.pi / 8.0
    return optimize.brentq(lambda x: _sigma_phase(x) - t, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _sigma_integrand(x: float) -> float:
    return math.sin(_sigma_phase(x)) / (1.0 + x * x) ** 0.25


def _sigma_zero(k: int) -> float:
    # k-th zero of the σ integrand counted from the first one, θ = (k+1)π
    return _sigma_phase_inverse((k + 1) * math.pi)


def _sigma_amplitude(t: float) -> float:
    # dx/dt · (1 + x²)^{-1/4} at x = θ⁻¹(t)
    x = _sigma_phase_inverse(t)
    return 2.0 * (1.0 + x * x) ** 0.75 / (1.0 + 2.0 * x * x)


def sigma_const(tol: float = settings.DEFAULT_TOL, strategy: str = "period") -> QuadResult:
    """
    σ = ∫₀^∞ sin(π/8 + x - ½ arctan x) / (1 + x²)^{1/4} dx.

    Strategies:
        "period": the head up to the first zero by adaptive quadrature, then the
            half-period integrals between consecutive zeros, Wynn-accelerated.
        "phase": the substitution t = θ(x) turns the integral into
            ∫_{π/8}^∞ sin t · 2(1 + x²)^{3/4}/(1 + 2x²) dt, a Fourier integral
            handled by QUADPACK's QAWF.
    """
    if tol < 1e-10:
        raise DomainError(f"σ is computed to at best 1e-10, got tol={tol}.")
    match strategy:
        case "period":
            counted = _Counted(_sigma_integrand)
            head, head_err = integrate.quad(counted, 0.0, _sigma_zero(0), epsabs=tol * 1e-3, epsrel=1e-13)
            tail = oscillatory_period_sum(_sigma_integrand, _sigma_zero, tol)
            value = head + tail.value
            error = head_err + tail.abs_error_estimate
            n_evals = counted.calls + tail.n_evals
            extrapolated = True
        case "phase":
            counted = _Counted(_sigma_amplitude)
            value, error = integrate.quad(counted, math.pi / 8.0, np.inf, weight="sin", wvar=1.0,
                                          epsabs=tol * 1e-2, limlst=200)
            n_evals = counted.calls
            extrapolated = True
        case _:
            raise DomainError(f"Unknown σ strategy {strategy!r}.")
    return QuadResult(value=value, abs_error_estimate=abs(error), n_evals=n_evals, converged=abs(error) <= tol,
                      tail_extrapolated=extrapolated, strategy=strategy)


def sigma_tail(radius: float, tol: float = settings.DEFAULT_TOL) -> Tuple[float, float]:
    """
    ∫_R^∞ of the σ integrand, with R moved to the nearest point where cos θ(R) = 0.

    At those points the tail behaves like ±½R^{-3/2}.

    Returns:
        Tuple[float, float]: The snapped radius and the tail integral.
    """
    k = round((_sigma_phase(radius) - math.pi / 2.0) / math.pi)
    snapped = _sigma_phase_inverse(math.pi / 2.0 + k * math.pi)
    first_zero = _sigma_phase_inverse((k + 1) * math.pi)
    head, _ = integrate.quad(_sigma_integrand, snapped, first_zero, epsabs=tol * 1e-3, epsrel=1e-13)
    periods = oscillatory_period_sum(_sigma_integrand, lambda j: _sigma_phase_inverse((k + 1 + j) * math.pi), tol)
    return snapped, head + periods.value


# ====================== σ' ======================

SIGMA_PRIME_PHASE = 3.0 * math.pi / 16.0
# First zero of sin(3π/16 + x).
SIGMA_PRIME_FIRST_ZERO = math.pi - SIGMA_PRIME_PHASE


def sigma_prime_closed_form() -> float:
    """Γ(3/4) sin(9π/16), the value of ∫₀^∞ sin(3π/16 + x) x^{-1/4} dx."""
    return float(special.gamma(0.75) * math.sin(9.0 * math.pi / 16.0))


def _sigma_prime_integrand(x: float) -> float:
    return math.sin(SIGMA_PRIME_PHASE + x) / x ** 0.25


def _sigma_prime_head(tol: float) -> Tuple[float, float, int]:
    # x = t⁴ on [0, first zero] removes the x^{-1/4} singularity
    counted = _Counted(lambda t: 4.0 * t * t * math.sin(SIGMA_PRIME_PHASE + t ** 4))
    value, error = integrate.quad(counted, 0.0, SIGMA_PRIME_FIRST_ZERO ** 0.25, epsabs=tol * 1e-3, epsrel=1e-13)
    return value, error, counted.calls


def sigma_prime_period_sum(tol: float = settings.DEFAULT_TOL, method: str = "wynn") -> PeriodSum:
    """Half-period integrals of the σ' integrand beyond its first zero."""
    return oscillatory_period_sum(_sigma_prime_integrand, lambda k: SIGMA_PRIME_FIRST_ZERO + k * math.pi, tol,
                                  method=method, min_periods=40 if method == "euler" else 16)


def sigma_prime_const(tol: float = settings.DEFAULT_TOL, strategy: str = "period") -> QuadResult:
    """
    σ' = ∫₀^∞ sin(3π/16 + x) / x^{1/4} dx.

    Strategies:
        "period": Wynn-accelerated half-period sums.
        "euler": the same sums with repeated averaging.
        "fourier": QAWF on x^{-1/4} against sin x and cos x.
    """
    if tol < 1e-10:
        raise DomainError(f"σ' is computed to at best 1e-10, got tol={tol}.")
    head, head_err, n_evals = _sigma_prime_head(tol)
    match strategy:
        case "period" | "euler":
            tail = sigma_prime_period_sum(tol, method="wynn" if strategy == "period" else "euler")
            value = head + tail.value
            error = head_err + tail.abs_error_estimate
            n_evals += tail.n_evals
        case "fourier":
            counted = _Counted(lambda x: x ** -0.25)
            sin_part, sin_err = integrate.quad(counted, SIGMA_PRIME_FIRST_ZERO, np.inf, weight="sin", wvar=1.0,
                                               epsabs=tol * 1e-2, limlst=200)
            cos_part, cos_err = integrate.quad(counted, SIGMA_PRIME_FIRST_ZERO, np.inf, weight="cos", wvar=1.0,
                                               epsabs=tol * 1e-2, limlst=200)
            value = head + math.cos(SIGMA_PRIME_PHASE) * sin_part + math.sin(SIGMA_PRIME_PHASE) * cos_part
            error = head_err + abs(sin_err) + abs(cos_err)
            n_evals += counted.calls
        case _:
            raise DomainError(f"Unknown σ' strategy {strategy!r}.")
    return QuadResult(value=value, abs_error_estimate=abs(error), n_evals=n_evals, converged=abs(error) <= tol,
                      tail_extrapolated=True, strategy=strategy)


# ====================== Fourier inversion of P_ε ======================

def _log_density_prefactor(eps: float, w: float) -> float:
    # log[e^{-w²/2ε} / (4π²ε³√(2πε))]
    return -w * w / (2.0 * eps) - math.log(4.0 * math.pi ** 2 * eps ** 3 * math.sqrt(2.0 * math.pi * eps))


def _fourier_shift(eps: float, w: float, y_hat: float, z_hat: float) -> np.ndarray:
    s_ratio, k_ratio = zero_point(w)
    return np.array([s_ratio - y_hat, k_ratio - z_hat]) / math.sqrt(eps)


def _hermite_log_sum(matrix: np.ndarray, shift: np.ndarray, n_nodes: int) -> Tuple[float, float]:
    # log of ∬ exp(i cᵀξ - ½ξᵀMξ) dξ with the contour moved through the saddle ξ* = iM⁻¹c
    eigvals, eigvecs = np.linalg.eigh(matrix)
    saddle = np.linalg.solve(matrix, shift)
    quadratic = float(shift @ saddle)

    nodes, weights = hermegauss(n_nodes)
    z1, z2 = np.meshgrid(nodes, nodes, indexing="ij")
    zeta = np.stack([z1.ravel(), z2.ravel()])
    eta = eigvecs @ (zeta / np.sqrt(eigvals)[:, None])
    xi = 1j * saddle[:, None] + eta
    exponent = 1j * (shift @ xi) - 0.5 * np.einsum("ik,ij,jk->k", xi, matrix, xi)
    residual = np.exp(exponent + 0.5 * quadratic + 0.5 * (zeta ** 2).sum(axis=0))
    total = complex(np.sum(np.outer(weights, weights).ravel() * residual))

    log_integral = -0.5 * quadratic - 0.5 * math.log(float(np.prod(eigvals))) + math.log(total.real)
    return log_integral, quadratic


def fourier_invert_gaussian(eps: float, w: float, y_hat: float, z_hat: float,
                            tol: float = settings.DEFAULT_TOL) -> QuadResult:
    """
    log p_ε from the ε = 0 integrand of the pinned Fourier representation.

        p = e^{-w²/2ε} / (4π²ε³√(2πε)) · ∬ exp((i/√ε)(ξ'λ' + ξλ)) e0_gaussian(ξ', ξ, w) dξ' dξ

    with λ' = sin w/w - ŷ and λ = (1 - cos w)/w - ẑ. The contour is shifted through
    the saddle, leaving a Gaussian in the eigen-coordinates of DU⁰ that is summed
    with a tensor Gauss-Hermite rule. The error estimate compares 24 and 12 nodes.

    Returns:
        QuadResult: value is log p_ε.
    """
    if w == 0.0:
        raise DomainError("The Gaussian inversion needs w ≠ 0.")
    if not eps > 0:
        raise DomainError(f"The time ε must be positive, got {eps}.")
    matrix = du0(w).as_array()
    shift = _fourier_shift(eps, w, y_hat, z_hat)

    fine, quadratic = _hermite_log_sum(matrix, shift, 24)
    coarse, _ = _hermite_log_sum(matrix, shift, 12)
    error = abs(fine - coarse)
    return QuadResult(value=_log_density_prefactor(eps, w) + fine, abs_error_estimate=error,
                      n_evals=24 * 24 + 12 * 12, converged=error <= tol,
                      cancellation_suspect=0.5 * quadratic > math.log(settings.CANCELLATION_LIMIT),
                      strategy="gauss-hermite")


def fourier_invert_mc(eps: float, w: float, y_hat: float, z_hat: float,
                      n_paths: int = settings.DEFAULT_N_PATHS, n_steps: int = settings.DEFAULT_N_STEPS,
                      seed: int = settings.DEFAULT_SEED, workers: int = 1) -> QuadResult:
    """
    log p_ε with the Monte-Carlo P_ε field in place of its ε = 0 limit.

    The (ξ', ξ) plane is truncated to the box, in the eigen-coordinates of DU⁰,
    where the ε = 0 Gaussian envelope stays above ENVELOPE_CUT of its peak. For
    each path the box integral of exp((i/√ε)(ξ'U + ξV)) is the product of
    2 sin(k_j R_j)/k_j factors, so only the path average is random.

    Raises:
        ConvergenceError: If the averaged box integral is not positive.
    """
    if w == 0.0:
        raise DomainError("The Fourier inversion needs w ≠ 0.")
    if not eps > 0:
        raise DomainError(f"The time ε must be positive, got {eps}.")
    eigvals, eigvecs = np.linalg.eigh(du0(w).as_array())
    radii = np.sqrt(-2.0 * math.log(ENVELOPE_CUT) / eigvals)
    scale = 1.0 / math.sqrt(eps)

    def functional(paths):
        u, v = bridge.bridge_offsets(eps, w, y_hat, z_hat, paths)
        k = scale * (eigvecs.T @ np.stack([u, v]))
        kr = k * radii[:, None]
        # 2 sin(kR)/k = 2R sinc(kR/π)
        factors = 2.0 * radii[:, None] * np.sinc(kr / math.pi)
        box = factors.prod(axis=0)
        return np.stack([box, np.abs(box)], axis=1)

    mean, std_error = bridge.mc_array(functional, n_paths, n_steps, seed, workers)
    box_mean, abs_mean = float(mean[0]), float(mean[1])
    box_se = float(std_error[0])

    if box_mean <= 0:
        result = QuadResult(value=math.nan, abs_error_estimate=math.inf, n_evals=n_paths, converged=False,
                            statistical_error_dominates=True, strategy="monte-carlo")
        raise ConvergenceError(f"The Monte-Carlo box integral {box_mean:.3e} ± {box_se:.1e} is not positive.", result)

    relative_se = box_se / box_mean
    return QuadResult(value=_log_density_prefactor(eps, w) + math.log(box_mean),
                      abs_error_estimate=relative_se, n_evals=n_paths,
                      converged=relative_se < 1.0,
                      cancellation_suspect=abs_mean / box_mean > settings.CANCELLATION_LIMIT,
                      statistical_error_dominates=relative_se > ENVELOPE_CUT,
                      strategy="monte-carlo")


# ====================== Φ on the axis and I_ε ======================

def _geometric_panels(upper: float) -> np.ndarray:
    edges = [0.0, 0.5]
    while edges[-1] < upper:
        edges.append(edges[-1] * 2.0)
    return np.asarray(edges)


def phi_abs_integral(tol: float = settings.DEFAULT_TOL, strategy: str = "panels") -> QuadResult:
    """
    ∫₀^∞ |Φ(x)| dx, finite because |Φ(x)| = O(x e^{-√(x/8)}).

    Strategies:
        "panels": 64-point Gauss-Legendre on dyadic panels up to 2¹⁶.
        "quad": adaptive QUADPACK on [0, ∞).
    """
    match strategy:
        case "panels":
            nodes, weights = leggauss(64)
            edges = _geometric_panels(2.0 ** 16)
            left, right = edges[:-1, None], edges[1:, None]
            x = 0.5 * (right - left) * nodes + 0.5 * (right + left)
            values = np.abs(specfun.phi_axis_values(x.ravel())).reshape(x.shape)
            contributions = 0.5 * (right - left)[:, 0] * (values @ weights)
            value = math.fsum(contributions)
            # the last panel bounds what lies beyond 2¹⁶
            error = abs(contributions[-1])
            n_evals = x.size
        case "quad":
            counted = _Counted(lambda x: abs(specfun.phi_axis_values(np.array([x]))[0]))
            value, error = integrate.quad(counted, 0.0, np.inf, epsabs=tol * 1e-2, epsrel=1e-12, limit=500)
            n_evals = counted.calls
        case _:
            raise DomainError(f"Unknown strategy {strategy!r}.")
    return QuadResult(value=value, abs_error_estimate=abs(error), n_evals=n_evals,
                      converged=abs(error) <= max(tol, tol * abs(value)), strategy=strategy)


def _i_eps_integrand(x: np.ndarray, frequency: float, damping: float) -> np.ndarray:
    phi = specfun.phi_axis_values(x)
    if damping:
        phi = phi * np.exp(-damping * specfun.ratio_axis_values(x))
    return np.exp(1j * frequency * x) * phi


def _i_eps_cutoff(damping: float) -> float:
    x = np.logspace(-3, 7, 2001)
    envelope = np.abs(specfun.phi_axis_values(x)) * np.exp(-damping * specfun.ratio_axis_values(x).real)
    alive = np.nonzero(envelope >= TAIL_CUT * envelope.max())[0]
    return float(x[alive[-1]]) * 1.05


def i_eps_direct(eps: float, y: float, z: float, tol: float = settings.DEFAULT_TOL,
                 max_panels: int = 400_000) -> QuadResult:
    """
    I_ε(y, z) = 2 Re ∫₀^∞ exp[iνx - (z²/2ε³) ratio(0, x)] Φ(x) dx, ν = (ε - y)/ε².

    One panel per period of e^{iνx}, each summed with 32- and 16-point
    Gauss-Legendre; panels are halved until the two rules agree to tol.
    The value is exponentially small in ν, so for ν beyond a few tenths the
    period contributions cancel below double precision.

    Raises:
        CancellationError: If Σ|period contributions| / |I_ε| exceeds CANCELLATION_LIMIT.
        ConvergenceError: If the panel count exceeds max_panels.
    """
    if not eps > 0:
        raise DomainError(f"The time ε must be positive, got {eps}.")
    frequency = (eps - y) / eps ** 2
    damping = z * z / (2.0 * eps ** 3)
    upper = _i_eps_cutoff(damping)
    period = 2.0 * math.pi / abs(frequency) if frequency else 2.0 * math.pi

    nodes32, weights32 = leggauss(32)
    nodes16, weights16 = leggauss(16)
    split = 1
    while True:
        width = period / split
        n_panels = int(math.ceil(upper / width))
        if n_panels > max_panels:
            raise ConvergenceError(f"I_ε needs more than {max_panels} panels at ν={frequency:.4g}.")
        left = (np.arange(n_panels) * width)[:, None]
        fine = _i_eps_integrand((left + 0.5 * width * (nodes32 + 1.0)).ravel(), frequency, damping)
        coarse = _i_eps_integrand((left + 0.5 * width * (nodes16 + 1.0)).ravel(), frequency, damping)
        contrib = 0.5 * width * (fine.reshape(n_panels, 32) @ weights32)
        check = 0.5 * width * (coarse.reshape(n_panels, 16) @ weights16)
        error = 2.0 * float(np.abs(contrib - check).sum())
        if error <= tol or split >= 16:
            break
        split *= 2

    value = 2.0 * (math.fsum(contrib.real))
    absolute = 2.0 * float(np.abs(contrib).sum())
    ratio = absolute / abs(value) if value else math.inf
    if ratio > settings.CANCELLATION_LIMIT:
        raise CancellationError(f"I_ε at ν={frequency:.4g} cancels by a factor {ratio:.2e}.", ratio)
    return QuadResult(value=value, abs_error_estimate=error, n_evals=n_panels * 48, converged=error <= tol,
                      cancellation_suspect=ratio > math.sqrt(settings.CANCELLATION_LIMIT),
                      strategy="gauss-legendre periods")
