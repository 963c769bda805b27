"""
Acceptance checks run by the validate command.

Each check takes a SuiteContext and returns (passed, detail). The fast suite
only holds deterministic checks; the mc suite draws bridge paths with the
context seed, so it is reproducible but slower; full runs both plus the
finite-ε Fourier inversion.
"""
import cmath
import math
from dataclasses import dataclass
from typing import Callable
from typing import Dict
from typing import List
from typing import Sequence
from typing import Tuple

import numpy as np
from scipy import stats

from langevin import bridge
from langevin import kernel
from langevin import malliavin
from langevin import quad
from langevin import specfun
from langevin.models import MCEstimate
from langevin.models import PEpsField
from langevin.models import QuadResult
from langevin.models import SuiteContext
from langevin.models import TargetPoint

Outcome = Tuple[bool, str]


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    run: Callable[[SuiteContext], Outcome]


def _wrapped(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def _rng(context: SuiteContext, offset: int) -> np.random.Generator:
    return np.random.default_rng([context.seed, offset])


# ====================== Deterministic checks ======================

def check_delta_identity(context: SuiteContext) -> Outcome:
    worst = 0.0
    for w in _rng(context, 1).uniform(-20.0, 20.0, 1000):
        d = malliavin.delta(w)
        worst = max(worst, abs(d - 4.0 * w ** 4 * malliavin.du0(w).det) / abs(d))
    return worst <= 1e-12, f"max relative gap {worst:.3e} over 1000 w"


def check_small_w_scaling(context: SuiteContext) -> Outcome:
    grid = np.linspace(-0.03, 0.03, 61)
    grid = grid[grid != 0.0]
    det_ratios = [malliavin.du0(w).det * 8640.0 / (w * w) for w in grid]
    delta_ratios = [malliavin.delta(w) * 2160.0 / w ** 6 for w in grid]
    ratios = det_ratios + delta_ratios
    passed = all(0.999 <= r <= 1.001 for r in ratios)
    return passed, f"ratios in [{min(ratios):.6f}, {max(ratios):.6f}]"


def check_psi_identities(context: SuiteContext) -> Outcome:
    rng = _rng(context, 2)
    expanded_gap, polar_gap, zero_gap = 0.0, 0.0, 0.0
    for w, y, z in zip(rng.uniform(-6.0, 6.0, 100), rng.uniform(-1.0, 1.0, 100), rng.uniform(-1.0, 1.0, 100)):
        s_ratio, k_ratio = malliavin.zero_point(w)
        bilinear = 2.0 * w * w * malliavin.du0(w).quadratic(y - s_ratio, k_ratio - z)
        expanded_gap = max(expanded_gap, abs(malliavin.psi_quad(w, y, z) - bilinear) / max(1.0, abs(bilinear)))
        zero_gap = max(zero_gap, abs(malliavin.psi_quad(w, s_ratio, k_ratio)))
    for w, rho, alpha in zip(rng.uniform(0.2, 8.0, 100), rng.uniform(0.0, 1.0, 100), rng.uniform(0.0, 2.0 * math.pi, 100)):
        cartesian = malliavin.psi_bridge(w, rho * math.cos(alpha), rho * math.sin(alpha))
        polar_gap = max(polar_gap, abs(malliavin.psi_polar(w, rho, alpha) - cartesian) / max(1.0, abs(cartesian)))
    passed = expanded_gap <= 1e-10 and polar_gap <= 1e-10 and zero_gap <= 1e-12
    return passed, f"expanded {expanded_gap:.2e}, polar {polar_gap:.2e}, zero set {zero_gap:.2e}"


def check_sigma(context: SuiteContext) -> Outcome:
    period = quad.sigma_const(context.tol, strategy="period")
    phase = quad.sigma_const(context.tol, strategy="phase")
    gap = abs(period.value - phase.value)
    passed = gap <= 1e-6 and min(period.value, phase.value) > 0.1
    return passed, f"σ = {period.value:.12f} (period), {phase.value:.12f} (phase), gap {gap:.2e}"


def check_sigma_prime(context: SuiteContext) -> Outcome:
    period = quad.sigma_prime_const(context.tol, strategy="period")
    fourier = quad.sigma_prime_const(context.tol, strategy="fourier")
    gap = abs(period.value - fourier.value)
    passed = gap <= 1e-6 and min(period.value, fourier.value) > 0.1
    return passed, (f"σ' = {period.value:.12f} (period), {fourier.value:.12f} (fourier), gap {gap:.2e}, "
                    f"closed form {quad.sigma_prime_closed_form():.12f}")


def check_theta_root(context: SuiteContext) -> Outcome:
    theta = specfun.theta_root(1).value
    residual = abs(math.tan(theta) - theta)
    passed = 4.0 * math.pi / 3.0 < theta < 1.5 * math.pi and residual < 1e-10
    return passed, f"θ₁ = {theta:.15f}, |tan θ₁ - θ₁| = {residual:.2e}"


def check_riccati(context: SuiteContext) -> Outcome:
    rng = _rng(context, 3)
    worst = 0.0
    for alpha, gamma in zip(rng.uniform(-2.0, 2.0, 20), rng.uniform(0.1, 3.0, 20)):
        pipeline = bridge.laplace_general(lambda s, a=alpha: a, lambda s, g=gamma: -0.5 * g * g)
        closed = bridge.laplace_const(alpha, gamma)
        worst = max(worst, abs(pipeline - closed) / closed)
    return worst <= 1e-8, f"max relative gap {worst:.3e} over 20 pairs"


def check_ratio_origin(context: SuiteContext) -> Outcome:
    value = specfun.ratio_of(0.0, 0.01)
    expected = complex(12.0 + 1.43e-7, 0.012)
    passed = abs(value.real - expected.real) <= 1e-6 and abs(value.imag - expected.imag) <= 1e-6
    return passed, f"ratio(0, 0.01) = {value.real:.10f} + {value.imag:.10f}i"


def check_wstar_series(context: SuiteContext) -> Outcome:
    y = np.linspace(0.5, 3.0, 51)
    gap = float(np.max(np.abs(bridge.wstar_cdf_dual(y) - bridge.wstar_cdf_alternating(y))))
    tails = [(t, 1.0 - bridge.wstar_cdf(math.sqrt(t)), bridge.wstar_tail_bound(t)) for t in (0.5, 1.0, 2.0, 4.0)]
    passed = gap <= 1e-12 and all(tail < bound for _, tail, bound in tails)
    return passed, f"series gap {gap:.2e}, tail bound holds at t ∈ {{0.5, 1, 2, 4}}: {passed}"


def check_gaussian_inversion(context: SuiteContext) -> Outcome:
    worst = 0.0
    for eps in (0.5, 0.2, 0.1):
        for w in (0.5, 1.0, -2.0):
            s_ratio, k_ratio = malliavin.zero_point(w)
            for dy, dz in ((0.0, 0.0), (0.3, 0.1), (-0.1, 0.2)):
                y_hat, z_hat = s_ratio + dy, k_ratio + dz
                inverted = quad.fourier_invert_gaussian(eps, w, y_hat, z_hat).value
                asymptote = kernel.p_case_i(eps, w, eps * y_hat, eps * z_hat).log_density
                worst = max(worst, abs(inverted - asymptote) / max(1.0, abs(asymptote)))
    return worst <= 1e-6, f"max relative gap {worst:.3e} over 27 points"


def check_saddle_expansions(context: SuiteContext) -> Outcome:
    eps, y = 1e-3, -1.0
    eta = eps ** 2 / (4.0 * (eps - y))
    modulus_gap, phase_gap = 0.0, 0.0
    for x_hat in np.linspace(0.0, 10.0, 11):
        value = specfun.Phi_lift(-4.0 * math.pi ** 2 + 4.0 * eta, 4.0 * eta * x_hat)
        scaled = abs(value) * (x_hat ** 2 + 1.0) ** 0.25 * eps / math.sqrt(eps - y)
        modulus_gap = max(modulus_gap, abs(scaled / (8.0 * math.pi ** 2.5) - 1.0))
        phase_gap = max(phase_gap, abs(_wrapped(cmath.phase(value) + 0.5 * math.atan(x_hat))))

    h = 1e-4
    termwise = specfun.Phi_termwise(math.pi ** 2, h)
    constant = (2.0 ** 0.75 * math.pi ** 2.75
                / (math.sqrt(kernel.SINGULAR_GAP) * math.sinh(math.pi) ** 0.25))
    termwise_gap = abs(abs(termwise) * h ** 0.25 / constant - 1.0)
    termwise_phase = abs(_wrapped(cmath.phase(termwise) - math.pi / 8.0))

    passed = modulus_gap <= 0.02 and phase_gap <= 0.02 and termwise_gap <= 0.01 and termwise_phase <= 0.01
    return passed, (f"upper saddle modulus {modulus_gap:.2e}, argument {phase_gap:.2e}; "
                    f"lower saddle modulus {termwise_gap:.2e}, argument {termwise_phase:.2e}")


def check_group_action(context: SuiteContext) -> Outcome:
    rng = _rng(context, 4)
    eps = 0.1
    worst = 0.0
    direct_matches = True
    for _ in range(100):
        start = TargetPoint(*rng.uniform(-3.0, 3.0, 3))
        step = TargetPoint(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 3.0), *rng.uniform(-0.07, 0.07, 2))
        target = malliavin.compose(start, step)
        shift = TargetPoint(*rng.uniform(-3.0, 3.0, 3))
        reference = kernel.p_general(eps, start, target).log_density
        moved = kernel.p_general(eps, malliavin.compose(shift, start), malliavin.compose(shift, target)).log_density
        worst = max(worst, abs(moved - reference) / abs(reference))
        direct = kernel.p_case_i(eps, step.w, step.y, step.z)
        direct_matches &= kernel.p_general(eps, kernel.ORIGIN, step) == direct
    passed = worst <= 1e-10 and direct_matches
    return passed, f"max relative gap {worst:.3e} over 100 shifts, origin dispatch identical: {direct_matches}"


# ====================== Monte-Carlo checks ======================

def check_laplace_monte_carlo(context: SuiteContext) -> Outcome:
    misses = []
    for index, (alpha, gamma) in enumerate((a, g) for a in (0.0, 1.0) for g in (0.5, 1.0, 2.0)):
        def functional(paths, alpha=alpha, gamma=gamma):
            return np.exp(alpha * bridge.path_integral(paths) - 0.5 * gamma * gamma * bridge.path_integral(paths ** 2))

        estimate = bridge.mc_expectation(functional, context.n_paths, context.n_steps, context.seed + index,
                                         context.workers)
        if not estimate.within(bridge.laplace_const(alpha, gamma), n_se=3.0):
            misses.append(f"(α, γ) = ({alpha}, {gamma})")
    return not misses, "all 6 within 3 SE" if not misses else "outside 3 SE: " + ", ".join(misses)


def check_fourier_laplace_monte_carlo(context: SuiteContext) -> Outcome:
    misses = []
    for index, (xi, chi, x) in enumerate(((1.0, 1.0, 1.0), (0.0, -4.0, 2.0))):
        def functional(paths, xi=xi, chi=chi, x=x):
            return np.exp(1j * xi * bridge.path_integral(paths)
                          - 0.5 * complex(chi, x) * bridge.path_integral(paths ** 2))

        estimate = bridge.mc_expectation(functional, context.n_paths, context.n_steps, context.seed + 100 + index,
                                         context.workers)
        if not estimate.within(bridge.fourier_laplace_complex(xi, chi, x), n_se=3.0):
            misses.append(f"(ξ, χ, x) = ({xi}, {chi}, {x})")
    return not misses, "both within 3 SE" if not misses else "outside 3 SE: " + ", ".join(misses)


def check_wstar_ks(context: SuiteContext) -> Outcome:
    samples = bridge.bridge_abs_maximum(100_000, 128, context.seed, context.workers)
    statistic = stats.kstest(samples, bridge.wstar_cdf).statistic
    return statistic < 0.01, f"KS distance {statistic:.4f} with 100000 samples"


def check_support_invariant(context: SuiteContext) -> Outcome:
    eps = 0.1
    _, y, z = bridge.simulate_endpoints(eps, 100_000, context.n_steps, context.seed, context.workers)
    violations = int(np.count_nonzero(~kernel.support_indicator(eps, y, z)))
    return violations == 0, f"{violations} endpoints outside the disc of radius ε"


def _flatten(outcome) -> np.ndarray:
    # every Monte-Carlo result as one array, so equality is bitwise
    match outcome:
        case MCEstimate():
            return np.array([outcome.mean, outcome.std_error])
        case PEpsField():
            return np.concatenate([outcome.mean, outcome.std_error])
        case QuadResult():
            return np.array([outcome.value, outcome.abs_error_estimate])
        case tuple():
            return np.concatenate(outcome)
        case _:
            return np.asarray(outcome)


def check_worker_reproducibility(context: SuiteContext) -> Outcome:
    n_paths = min(context.n_paths, 50_000)

    def functional(paths):
        return np.exp(bridge.path_integral(paths))

    w = 1.0
    s_ratio, k_ratio = malliavin.zero_point(w)
    xi_grid = np.array([[0.5, 0.0], [1.0, -1.0]])
    runs = {
        "mc_expectation": lambda n: bridge.mc_expectation(functional, n_paths, 64, context.seed, n),
        "bridge_abs_maximum": lambda n: bridge.bridge_abs_maximum(n_paths, 32, context.seed, n),
        "p_eps_mc": lambda n: bridge.p_eps_mc(0.1, w, s_ratio, k_ratio, xi_grid, n_paths, 32, context.seed, n),
        "simulate_endpoints": lambda n: bridge.simulate_endpoints(0.1, n_paths, 32, context.seed, n),
        "fourier_invert_mc": lambda n: quad.fourier_invert_mc(0.1, w, s_ratio, k_ratio, n_paths, 32, context.seed, n),
    }
    differing = []
    for name, run in runs.items():
        outcomes = [_flatten(run(workers)) for workers in (1, 4, 8)]
        if not all(np.array_equal(outcome, outcomes[0]) for outcome in outcomes[1:]):
            differing.append(name)
    if differing:
        return False, "workers 1/4/8 differ for " + ", ".join(differing)
    return True, f"workers 1/4/8 identical for {len(runs)} Monte-Carlo operations"


def non_increasing(values: Sequence[float], std_errors: Sequence[float], n_se: float) -> bool:
    """Each value exceeds its predecessor by at most n_se combined standard errors."""
    return all(later <= earlier + n_se * math.hypot(se_earlier, se_later)
               for earlier, later, se_earlier, se_later in zip(values, values[1:], std_errors, std_errors[1:]))


def check_finite_eps_inversion(context: SuiteContext) -> Outcome:
    w = 1.0
    s_ratio, k_ratio = malliavin.zero_point(w)
    errors, std_errors = [], []
    for eps in (0.2, 0.1, 0.05):
        mc = quad.fourier_invert_mc(eps, w, s_ratio, k_ratio, n_paths=context.n_paths, n_steps=context.n_steps,
                                    seed=context.seed, workers=context.workers)
        gaussian = quad.fourier_invert_gaussian(eps, w, s_ratio, k_ratio)
        ratio = math.exp(mc.value - gaussian.value)
        errors.append(abs(ratio - 1.0))
        # abs_error_estimate is the relative SE of the MC box integral
        std_errors.append(mc.abs_error_estimate * ratio)
    trend = non_increasing(errors, std_errors, n_se=3.0)
    passed = errors[-1] < 0.25 and trend
    deviations = ", ".join(f"{e:.3f} ± {se:.3f}" for e, se in zip(errors, std_errors))
    return passed, f"density ratio deviation {deviations} at ε = 0.2, 0.1, 0.05; non-increasing: {trend}"


FAST_CHECKS: List[Check] = [
    Check("delta_identity", "Δ(w) = 4w⁴ det DU⁰(w) on random w", check_delta_identity),
    Check("small_w_scaling", "det DU⁰ ~ w²/8640 and Δ ~ w⁶/2160", check_small_w_scaling),
    Check("psi_identities", "quadratic form identities and zero set", check_psi_identities),
    Check("sigma", "σ by two strategies", check_sigma),
    Check("sigma_prime", "σ' by two strategies", check_sigma_prime),
    Check("theta_root", "first root of tan θ = θ", check_theta_root),
    Check("riccati", "Riccati pipeline against the constant closed form", check_riccati),
    Check("ratio_origin", "ratio(0, 0.01) expansion", check_ratio_origin),
    Check("wstar_series", "bridge maximum law, both series and tail bound", check_wstar_series),
    Check("gaussian_inversion", "Gaussian Fourier inversion against case (i)", check_gaussian_inversion),
    Check("saddle_expansions", "local expansions of Φ at both saddles", check_saddle_expansions),
    Check("group_action", "p_ε under simultaneous shifts", check_group_action),
]

MC_CHECKS: List[Check] = [
    Check("laplace_mc", "real Laplace closed form against bridge Monte Carlo", check_laplace_monte_carlo),
    Check("fourier_laplace_mc", "complex transform against bridge Monte Carlo", check_fourier_laplace_monte_carlo),
    Check("wstar_ks", "sampled bridge maximum against its law", check_wstar_ks),
    Check("support_invariant", "diffusion endpoints stay in the support", check_support_invariant),
    Check("worker_reproducibility", "results do not depend on the worker count", check_worker_reproducibility),
]

SLOW_CHECKS: List[Check] = [
    Check("finite_eps_inversion", "Monte-Carlo Fourier inversion against the Gaussian limit",
          check_finite_eps_inversion),
]

SUITES: Dict[str, List[Check]] = {
    "fast": FAST_CHECKS,
    "mc": MC_CHECKS,
    "full": FAST_CHECKS + MC_CHECKS + SLOW_CHECKS,
}


def suite_checks(suite: str, names: Tuple[str, ...] = ()) -> List[Check]:
    """The checks of a suite, restricted to names when any are given."""
    checks = SUITES[suite]
    if not names:
        return list(checks)
    known = {check.name for check in checks}
    unknown = [name for name in names if name not in known]
    if unknown:
        raise KeyError(f"Unknown check(s) for suite {suite!r}: {', '.join(unknown)}")
    return [check for check in checks if check.name in names]
