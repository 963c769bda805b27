"""
Brownian-bridge sampling, closed-form transforms of bridge functionals and
the Monte-Carlo estimators built on them.

Random numbers come from counter-based Philox substreams, one per block of
PATH_BLOCK_SIZE paths. Block b always draws from SeedSequence(seed) child b,
and block moments are merged pairwise in block order, so a result depends on
(seed, n_paths, n_steps) and not on how many workers produced the blocks.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable
from typing import List
from typing import Tuple

import numpy as np
from scipy import integrate

from CircLang import settings
from langevin import specfun
from langevin.exceptions import DomainError
from langevin.exceptions import ValidityError
from langevin.malliavin import du0
from langevin.models import BridgePath
from langevin.models import MCEstimate
from langevin.models import PEpsField
from langevin.models import RiccatiSolution

Moments = Tuple[int, np.ndarray, np.ndarray]


# ====================== Sampling ======================

def block_stream(seed: int, block: int) -> np.random.Generator:
    """Generator of block `block`, identical to child `block` of SeedSequence(seed).spawn."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def bridge_block_streams(seed: int, n_blocks: int) -> List[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def _bridges_from(rng: np.random.Generator, n_paths: int, n_steps: int) -> np.ndarray:
    # ω_s = B_s - s B_1 on the grid s_j = j/n_steps
    increments = rng.standard_normal((n_paths, n_steps)) / math.sqrt(n_steps)
    brownian = np.zeros((n_paths, n_steps + 1))
    np.cumsum(increments, axis=1, out=brownian[:, 1:])
    grid = np.arange(n_steps + 1) / n_steps
    paths = brownian - grid * brownian[:, -1:]
    paths[:, 0] = 0.0
    paths[:, -1] = 0.0
    return paths


def sample_bridge(n_steps: int, rng: np.random.Generator) -> BridgePath:
    """
    One Brownian bridge on the uniform grid of [0, 1].

    Exact in law at the grid nodes: Cov(ω_s, ω_t) = s(1 - t) for s ≤ t.
    """
    if n_steps < 2:
        raise DomainError(f"n_steps must be at least 2, got {n_steps}.")
    return BridgePath(n_steps=n_steps, values=_bridges_from(rng, 1, n_steps)[0])


def sample_bridges(n_paths: int, n_steps: int, seed: int, block: int = 0) -> np.ndarray:
    """n_paths bridges drawn from the substream of `block`, as an (n_paths, n_steps + 1) array."""
    if n_steps < 2:
        raise DomainError(f"n_steps must be at least 2, got {n_steps}.")
    return _bridges_from(block_stream(seed, block), n_paths, n_steps)


def path_integral(paths: np.ndarray) -> np.ndarray:
    """Trapezoid rule for ∫₀¹ over the last axis of a grid array."""
    n_steps = paths.shape[-1] - 1
    return integrate.trapezoid(paths, dx=1.0 / n_steps, axis=-1)


# ====================== Deterministic reduction ======================

def _block_sizes(n_paths: int) -> List[int]:
    if n_paths < 2:
        raise DomainError(f"A Monte-Carlo estimate needs at least 2 paths, got {n_paths}.")
    full, rest = divmod(n_paths, settings.PATH_BLOCK_SIZE)
    return [settings.PATH_BLOCK_SIZE] * full + ([rest] if rest else [])


def _run_blocks(block_fn: Callable[[np.random.Generator, int], np.ndarray], n_paths: int,
                seed: int, workers: int) -> List[np.ndarray]:
    sizes = _block_sizes(n_paths)

    def run(block: int) -> np.ndarray:
        return block_fn(block_stream(seed, block), sizes[block])

    if workers <= 1:
        return [run(block) for block in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        # map keeps block order.
        return list(executor.map(run, range(len(sizes))))


def _moments(values: np.ndarray) -> Moments:
    mean = values.mean(axis=0)
    dev = values - mean
    m2 = (dev.real ** 2 + dev.imag ** 2).sum(axis=0)
    return values.shape[0], mean, m2


def _merge(left: Moments, right: Moments) -> Moments:
    n_left, mean_left, m2_left = left
    n_right, mean_right, m2_right = right
    n = n_left + n_right
    delta_mean = mean_right - mean_left
    mean = mean_left + delta_mean * (n_right / n)
    m2 = m2_left + m2_right + (delta_mean.real ** 2 + delta_mean.imag ** 2) * (n_left * n_right / n)
    return n, mean, m2


def _pairwise_reduce(blocks: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    moments = [_moments(np.asarray(values)) for values in blocks]
    while len(moments) > 1:
        merged = [_merge(moments[i], moments[i + 1]) for i in range(0, len(moments) - 1, 2)]
        if len(moments) % 2:
            merged.append(moments[-1])
        moments = merged
    n, mean, m2 = moments[0]
    return mean, np.sqrt(m2 / (n * (n - 1)))


def mc_array(functional: Callable[[np.ndarray], np.ndarray], n_paths: int, n_steps: int, seed: int,
             workers: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mean and standard error of functional(paths) over n_paths bridges.

    functional maps an (n, n_steps + 1) array of paths to an array whose first
    axis runs over the paths.
    """
    def block_fn(rng, size):
        return functional(_bridges_from(rng, size, n_steps))

    return _pairwise_reduce(_run_blocks(block_fn, n_paths, seed, workers))


def mc_expectation(functional: Callable[[np.ndarray], np.ndarray], n_paths: int, n_steps: int, seed: int,
                   workers: int = 1) -> MCEstimate:
    """Monte-Carlo estimate of E[functional(ω)] for a scalar functional."""
    mean, std_error = mc_array(functional, n_paths, n_steps, seed, workers)
    return MCEstimate(mean=complex(mean), std_error=float(std_error), n_paths=n_paths, seed=seed)


# ====================== Closed forms ======================

def _sqrt_gamma_over_sinh(gamma: float) -> float:
    if gamma == 0.0:
        return 1.0
    if gamma > 20.0:
        return math.exp(0.5 * (math.log(2.0 * gamma) - gamma - math.log1p(-math.exp(-2.0 * gamma))))
    return math.sqrt(gamma / math.sinh(gamma))


def laplace_const(alpha: float, gamma: float) -> float:
    """
    E[exp(α∫ω - (γ²/2)∫ω²)] = √(γ/sinh γ) exp[(α²/γ³)(γ/2 - tanh(γ/2))].

    The exponent factor (γ/2 - tanh(γ/2))/γ³ is taken from its series below
    SERIES_CUTOFF, where it tends to 1/24.
    """
    if gamma < 0:
        raise DomainError(f"laplace_const needs γ ≥ 0, got {gamma}.")
    if gamma < settings.SERIES_CUTOFF:
        g2 = gamma * gamma
        factor = 1.0 / 24.0 - g2 / 240.0 + 17.0 * g2 * g2 / 40320.0
    else:
        factor = (gamma / 2.0 - math.tanh(gamma / 2.0)) / gamma ** 3
    return _sqrt_gamma_over_sinh(gamma) * math.exp(alpha * alpha * factor)


def laplace_imaginary(beta: float) -> float:
    """
    E[exp(β∫ω²)] = √(γ/sin γ) with γ = √(2β).

    Diverges at β = π²/2, the abscissa of convergence. Negative β gives √(γ/sinh γ), γ = √(-2β).
    """
    if beta >= math.pi ** 2 / 2.0:
        raise DomainError(f"E[exp(β∫ω²)] diverges for β ≥ π²/2, got β={beta}.")
    if beta == 0.0:
        return 1.0
    if beta < 0:
        return _sqrt_gamma_over_sinh(math.sqrt(-2.0 * beta))
    gamma = math.sqrt(2.0 * beta)
    return math.sqrt(gamma / math.sin(gamma))


def _on_grid(fn: Callable[[float], float], grid: np.ndarray) -> np.ndarray:
    return np.vectorize(fn, otypes=[float])(grid)


def solve_riccati(gamma_fn: Callable[[float], float], n_nodes: int = settings.RICCATI_NODES) -> RiccatiSolution:
    """
    Fixed-step RK4 for u'' = -2γ(s) u, u(0) = 1, u'(0) = 0, on n_nodes uniform nodes.

    Raises:
        ValidityError: If u is not positive on the whole grid.
    """
    grid = np.linspace(0.0, 1.0, n_nodes)
    h = grid[1] - grid[0]
    fine = _on_grid(gamma_fn, np.linspace(0.0, 1.0, 2 * n_nodes - 1))
    u = np.empty(n_nodes)
    du = np.empty(n_nodes)
    u[0], du[0] = 1.0, 0.0

    for j in range(n_nodes - 1):
        g0, gm, g1 = fine[2 * j], fine[2 * j + 1], fine[2 * j + 2]
        ua, va = u[j], du[j]
        k1u, k1v = va, -2.0 * g0 * ua
        k2u, k2v = va + 0.5 * h * k1v, -2.0 * gm * (ua + 0.5 * h * k1u)
        k3u, k3v = va + 0.5 * h * k2v, -2.0 * gm * (ua + 0.5 * h * k2u)
        k4u, k4v = va + h * k3v, -2.0 * g1 * (ua + h * k3u)
        u[j + 1] = ua + h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
        du[j + 1] = va + h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0

    if np.any(u <= 0):
        first = int(np.argmax(u <= 0))
        raise ValidityError(f"u reaches {u[first]:.3e} at s={grid[first]:.6f}; the Riccati reduction needs u > 0.")
    return RiccatiSolution(grid=grid, u=u, du=du)


def laplace_general(alpha_fn: Callable[[float], float], gamma_fn: Callable[[float], float],
                    n_nodes: int = settings.RICCATI_NODES) -> float:
    """
    E[exp(∫α(s)ω_s ds + ∫γ(s)ω_s² ds)] through the Riccati reduction.

    With u from solve_riccati, every exponential of ∫g becomes a ratio of u values:

        k(s) = (1/u(s)) ∫_s¹ α u dτ
        m    = ∫₀¹ (u(1)/u(s)) k(s) ds
        v    = ∫₀¹ (u(1)/u(s))² ds
        E    = √u(1) exp(½∫₀¹k² - m²/(2v)) / √v

    All integrals use Simpson's rule on the ODE grid.
    """
    solution = solve_riccati(gamma_fn, n_nodes)
    grid, u = solution.grid, solution.u
    alpha = _on_grid(alpha_fn, grid)

    head = integrate.cumulative_simpson(alpha * u, x=grid, initial=0.0)
    k = (head[-1] - head) / u
    ratio = u[-1] / u
    m = integrate.simpson(ratio * k, x=grid)
    v = integrate.simpson(ratio * ratio, x=grid)
    kk = integrate.simpson(k * k, x=grid)
    return float(math.sqrt(u[-1]) * math.exp(0.5 * kk - m * m / (2.0 * v)) / math.sqrt(v))


def fourier_laplace_complex(xi: float, chi: float, x: float) -> complex:
    """
    E[exp(iξ∫ω - ((χ + ix)/2)∫ω²)] = e^{iφ(χ,x)} |γ/sinh γ|^{1/2} exp[-ξ² f(χ,x) / (2(χ + ix))].
    """
    if chi <= -math.pi ** 2:
        raise DomainError(f"The transform needs χ > -π², got χ={chi}.")
    if x < 0:
        raise DomainError(f"x must be non-negative, got {x}.")
    modulus = specfun.psi_modulus(chi, x)
    phase = specfun.phi_of(chi, x)
    ratio = specfun.ratio_of(chi, x)
    return complex(np.exp(1j * phase) * modulus * np.exp(-xi * xi / (2.0 * ratio)))


def _complex_cumulative(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return (integrate.cumulative_simpson(values.real, x=grid, initial=0.0)
            + 1j * integrate.cumulative_simpson(values.imag, x=grid, initial=0.0))


def _complex_simpson(values: np.ndarray, grid: np.ndarray) -> complex:
    return complex(integrate.simpson(values.real, x=grid), integrate.simpson(values.imag, x=grid))


def gauss_linear(u_fn: Callable[[float], complex], n_nodes: int = settings.RICCATI_NODES) -> complex:
    """E[exp(∫u ω)] = exp(½[∫₀¹(∫_s¹u)² ds - (∫₀¹∫_s¹u ds)²]) for complex deterministic u."""
    grid = np.linspace(0.0, 1.0, n_nodes)
    values = np.vectorize(u_fn, otypes=[complex])(grid)
    head = _complex_cumulative(values, grid)
    tail = head[-1] - head
    return complex(np.exp(0.5 * (_complex_simpson(tail * tail, grid) - _complex_simpson(tail, grid) ** 2)))


def e0_gaussian(xi_prime: float, xi: float, w: float) -> float:
    """exp(-½ (ξ', ξ) DU⁰(w) (ξ', ξ)ᵗ), the ε → 0 limit of |P_ε|."""
    return math.exp(-0.5 * du0(w).quadratic(xi_prime, xi))


# ====================== P_ε and endpoints ======================

def bridge_offsets(eps: float, w: float, y_hat: float, z_hat: float,
                   paths: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-path (∫cos(ws + √ε ω) - ŷ, ∫sin(ws + √ε ω) - ẑ)."""
    n_steps = paths.shape[1] - 1
    angle = w * (np.arange(n_steps + 1) / n_steps) + math.sqrt(eps) * paths
    return path_integral(np.cos(angle)) - y_hat, path_integral(np.sin(angle)) - z_hat


def p_eps_mc(eps: float, w: float, y_hat: float, z_hat: float, xi_grid: np.ndarray,
             n_paths: int = settings.DEFAULT_N_PATHS, n_steps: int = settings.DEFAULT_N_STEPS,
             seed: int = settings.DEFAULT_SEED, workers: int = 1) -> PEpsField:
    """
    Monte-Carlo field of P_ε(ξ', ξ) = E[exp((i/√ε)(ξ'U + ξV))] on the (k, 2) array xi_grid.

    U and V are the offsets of bridge_offsets at the scaled target (ŷ, ẑ) = (y/ε, z/ε).
    One path ensemble serves every node.
    """
    if not eps > 0:
        raise DomainError(f"The time ε must be positive, got {eps}.")
    xi_grid = np.atleast_2d(np.asarray(xi_grid, dtype=float))
    scale = 1.0 / math.sqrt(eps)

    def functional(paths):
        u, v = bridge_offsets(eps, w, y_hat, z_hat, paths)
        return np.exp(1j * scale * (np.outer(u, xi_grid[:, 0]) + np.outer(v, xi_grid[:, 1])))

    mean, std_error = mc_array(functional, n_paths, n_steps, seed, workers)
    return PEpsField(grid=xi_grid, mean=mean, std_error=std_error, n_paths=n_paths, seed=seed)


def simulate_endpoints(eps: float, n_paths: int, n_steps: int, seed: int,
                       workers: int = 1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Endpoints (W_ε, ∫₀^ε cos W, ∫₀^ε sin W) of the diffusion started at the origin.

    The time integrals use the trapezoid rule, a convex combination of points of
    the unit circle, so the plane endpoint stays in the disc of radius ε.
    """
    if not eps > 0:
        raise DomainError(f"The time ε must be positive, got {eps}.")

    def block_fn(rng, size):
        increments = rng.standard_normal((size, n_steps)) * math.sqrt(eps / n_steps)
        motion = np.zeros((size, n_steps + 1))
        np.cumsum(increments, axis=1, out=motion[:, 1:])
        dt = eps / n_steps
        y = integrate.trapezoid(np.cos(motion), dx=dt, axis=1)
        z = integrate.trapezoid(np.sin(motion), dx=dt, axis=1)
        return np.stack([motion[:, -1], y, z], axis=1)

    endpoints = np.concatenate(_run_blocks(block_fn, n_paths, seed, workers), axis=0)
    return endpoints[:, 0], endpoints[:, 1], endpoints[:, 2]


# ====================== Maximum of the bridge ======================

def _interval_maxima(paths: np.ndarray, uniforms: np.ndarray, n_steps: int) -> np.ndarray:
    # Exact maximum of a Brownian bridge between two grid nodes given its endpoints.
    left, right = paths[:, :-1], paths[:, 1:]
    spread = np.sqrt((left - right) ** 2 - 2.0 * np.log(uniforms) / n_steps)
    return ((left + right + spread) / 2.0).max(axis=1)


def bridge_abs_maximum(n_paths: int, n_steps: int, seed: int, workers: int = 1) -> np.ndarray:
    """Samples of ω* = sup|ω| with the maximum inside each grid interval drawn exactly."""
    def block_fn(rng, size):
        paths = _bridges_from(rng, size, n_steps)
        upper = _interval_maxima(paths, 1.0 - rng.random((size, n_steps)), n_steps)
        lower = _interval_maxima(-paths, 1.0 - rng.random((size, n_steps)), n_steps)
        return np.maximum(upper, lower)

    return np.concatenate(_run_blocks(block_fn, n_paths, seed, workers))


def wstar_cdf_alternating(y):
    """1 + 2Σ_{n≥1} (-1)ⁿ e^{-2n²y²}, summed until the terms fall below WSTAR_TAIL_TOL."""
    y = np.asarray(y, dtype=float)
    safe = np.where(y > 0, y, 1.0)
    y_min = float(np.min(safe))
    n_max = int(math.ceil(math.sqrt(-math.log(settings.WSTAR_TAIL_TOL) / (2.0 * y_min * y_min)))) + 1
    total = np.ones_like(safe)
    for n in range(1, n_max + 1):
        total += 2.0 * (-1) ** n * np.exp(-2.0 * n * n * safe * safe)
    return np.where(y > 0, total, 0.0)


def wstar_cdf_dual(y):
    """(√(2π)/y) Σ_{n≥0} exp(-(2n+1)²π²/(8y²)), the Poisson dual of the alternating series."""
    y = np.asarray(y, dtype=float)
    safe = np.where(y > 0, y, 1.0)
    y_max = float(np.max(safe))
    total = np.zeros_like(safe)
    n = 0
    while True:
        total += np.exp(-(2 * n + 1) ** 2 * math.pi ** 2 / (8.0 * safe * safe))
        if math.exp(-(2 * n + 1) ** 2 * math.pi ** 2 / (8.0 * y_max * y_max)) < settings.WSTAR_TAIL_TOL:
            break
        n += 1
    return np.where(y > 0, math.sqrt(2.0 * math.pi) / safe * total, 0.0)


def wstar_cdf(y):
    """P(sup|ω| < y), the dual series below WSTAR_SWITCH and the alternating one above."""
    y_arr = np.asarray(y, dtype=float)
    small = y_arr < settings.WSTAR_SWITCH
    result = np.where(small, wstar_cdf_dual(np.where(small, y_arr, 1.0)),
                      wstar_cdf_alternating(np.where(small, 1.0, y_arr)))
    result = np.where(y_arr > 0, result, 0.0)
    return float(result) if np.ndim(y) == 0 else result


def wstar_tail_bound(t: float) -> float:
    """Upper bound 2e^{-2t} of P(ω* ≥ √t)."""
    return 2.0 * math.exp(-2.0 * t)
