"""
Small-time equivalents of the heat kernel p_ε, one per regime, in log space.
"""
import math
from functools import lru_cache

from CircLang import settings
from langevin import quad
from langevin.exceptions import ConvergenceError
from langevin.exceptions import DomainError
from langevin.malliavin import delta
from langevin.malliavin import homogenize
from langevin.malliavin import psi_bridge
from langevin.malliavin import psi_quad
from langevin.models import LogDensityAsymptote
from langevin.models import QuadResult
from langevin.models import Regime
from langevin.models import TargetPoint

# π - 2 tanh(π/2)
SINGULAR_GAP = math.pi - 2.0 * math.tanh(math.pi / 2.0)

ORIGIN = TargetPoint(0.0, 0.0, 0.0)


def _converged_value(result: QuadResult, name: str) -> float:
    if not result.converged:
        raise ConvergenceError(f"{name} did not converge: error estimate {result.abs_error_estimate:.2e} "
                               f"above tol={settings.DEFAULT_TOL}.", result)
    return result.value


@lru_cache(maxsize=None)
def sigma_value() -> float:
    return _converged_value(quad.sigma_const(settings.DEFAULT_TOL), "σ")


@lru_cache(maxsize=None)
def sigma_prime_value() -> float:
    return _converged_value(quad.sigma_prime_const(settings.DEFAULT_TOL), "σ'")


def _check_epsilon(eps: float):
    if not eps > 0:
        raise DomainError(f"The time ε must be positive, got {eps}.")


def classify(point: TargetPoint) -> Regime:
    """Regime of a homogenised target; w is compared to 0 exactly."""
    if point.w != 0.0:
        return Regime.NON_DEGENERATE
    if point.z == 0.0 and point.y <= 0.0:
        return Regime.DEGENERATE_AXIS
    return Regime.DEGENERATE_GENERIC


def p_case_i(eps: float, w: float, y: float, z: float, form: str = "gaussian") -> LogDensityAsymptote:
    """
    Non-degenerate regime, w ≠ 0.

    exponent = -(w²/ε)(1/2 + ψ(w, y/ε, z/ε)/Δ(w)).

    Args:
        eps (float): The time ε > 0.
        w, y, z (float): The homogenised target.
        form (str): "gaussian" pairs psi_bridge with the prefactor
            w²/(πε³√(2πεΔ)), which is what the Fourier inversion produces.
            "stated" pairs psi_quad with 2w²/(πε³√(2πεΔ)).

    Returns:
        LogDensityAsymptote: log_prefactor and exponent.

    Raises:
        DomainError: If w = 0, ε ≤ 0 or form is unknown.
    """
    _check_epsilon(eps)
    d = delta(w)
    match form:
        case "gaussian":
            psi = psi_bridge(w, y / eps, z / eps)
            log_two = 0.0
        case "stated":
            psi = psi_quad(w, y / eps, z / eps)
            log_two = math.log(2.0)
        case _:
            raise DomainError(f"Unknown case (i) form {form!r}; expected 'gaussian' or 'stated'.")

    log_prefactor = (log_two + 2.0 * math.log(abs(w)) - math.log(math.pi) - 3.0 * math.log(eps)
                     - 0.5 * math.log(2.0 * math.pi * eps * d))
    exponent = -(w * w / eps) * (0.5 + psi / d)
    return LogDensityAsymptote(regime=Regime.NON_DEGENERATE, log_prefactor=log_prefactor,
                               exponent=exponent, epsilon=eps)


def p_case_ii(eps: float, y: float) -> LogDensityAsymptote:
    """First degenerate regime, w = z = 0 and y ≤ 0."""
    _check_epsilon(eps)
    if y > 0:
        raise DomainError(f"Case (ii) needs y ≤ 0, got y={y}.")
    log_prefactor = (math.log(2.0 * math.sqrt(2.0) * math.e * sigma_value()) - 3.0 * math.log(eps)
                     - 0.5 * math.log(eps - y))
    exponent = -4.0 * math.pi ** 2 * (eps - y) / eps ** 2
    return LogDensityAsymptote(regime=Regime.DEGENERATE_AXIS, log_prefactor=log_prefactor,
                               exponent=exponent, epsilon=eps)


def c_eps(eps: float, y: float, z: float) -> float:
    """C_ε(y, z) = πz²/(2(π - 2 tanh(π/2))ε³) + (y - ε)/ε²."""
    _check_epsilon(eps)
    return math.pi * z * z / (2.0 * SINGULAR_GAP * eps ** 3) + (y - eps) / eps ** 2


def c_squared_diagnostic() -> float:
    """C² = π(π cosh π - 3 sinh π + 2π) / (4(π cosh(π/2) - 2 sinh(π/2))²)."""
    pi = math.pi
    numerator = pi * (pi * math.cosh(pi) - 3.0 * math.sinh(pi) + 2.0 * pi)
    denominator = 4.0 * (pi * math.cosh(pi / 2.0) - 2.0 * math.sinh(pi / 2.0)) ** 2
    return numerator / denominator


def _log_singular_constant() -> float:
    # log[(2π/sinh π)^{1/4} σ' / √(π - 2 tanh(π/2))]
    return (0.25 * math.log(2.0 * math.pi / math.sinh(math.pi)) + math.log(sigma_prime_value())
            - 0.5 * math.log(SINGULAR_GAP))


def p_case_iii(eps: float, y: float, z: float) -> LogDensityAsymptote:
    """
    Second degenerate regime, w = 0 with z ≠ 0 or y > 0.

    Raises:
        DomainError: If the target is on the case (ii) half-axis or C_ε ≤ 0.
    """
    _check_epsilon(eps)
    if z == 0.0 and y <= 0.0:
        raise DomainError(f"(y, z) = ({y}, {z}) belongs to case (ii).")
    c = c_eps(eps, y, z)
    if c <= 0:
        raise DomainError(f"C_ε = {c} ≤ 0; the case (iii) equivalent does not apply at (ε, y, z) = ({eps}, {y}, {z}).")
    log_prefactor = _log_singular_constant() - 4.0 * math.log(eps) - 0.75 * math.log(c)
    exponent = -math.pi ** 2 * c
    return LogDensityAsymptote(regime=Regime.DEGENERATE_GENERIC, log_prefactor=log_prefactor,
                               exponent=exponent, epsilon=eps)


def p_case_iii_axis(eps: float, y: float) -> LogDensityAsymptote:
    """
    z = 0, y > 0 form: ε^{-5/2} y^{-3/4} (2π/sinh π)^{1/4} σ' e^{-π²(y-ε)/ε²} / √(π - 2 tanh(π/2)).

    It agrees with p_case_iii(ε, y, 0) up to the factor (y/(y - ε))^{3/4}, which tends to 1.
    """
    _check_epsilon(eps)
    if y <= 0:
        raise DomainError(f"The axis form needs y > 0, got y={y}.")
    log_prefactor = _log_singular_constant() - 2.5 * math.log(eps) - 0.75 * math.log(y)
    exponent = -math.pi ** 2 * (y - eps) / eps ** 2
    return LogDensityAsymptote(regime=Regime.DEGENERATE_GENERIC, log_prefactor=log_prefactor,
                               exponent=exponent, epsilon=eps)


def p_general(eps: float, start: TargetPoint, target: TargetPoint) -> LogDensityAsymptote:
    """Homogenise the target from start, classify it and evaluate the matching equivalent."""
    point = homogenize(start, target)
    match classify(point):
        case Regime.NON_DEGENERATE:
            return p_case_i(eps, point.w, point.y, point.z)
        case Regime.DEGENERATE_AXIS:
            return p_case_ii(eps, point.y)
        case Regime.DEGENERATE_GENERIC:
            return p_case_iii(eps, point.y, point.z)


def support_indicator(eps: float, y: float, z: float) -> bool:
    """True when (y, z) lies in the closed disc of radius ε, outside of which p_ε vanishes."""
    return y * y + z * z <= eps * eps


def log_density(asymptote: LogDensityAsymptote) -> float:
    return asymptote.log_density
