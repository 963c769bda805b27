"""
Complex special functions of the quadratic Brownian-bridge transforms.

Every function takes the real pair (χ, x) standing for s = χ + ix with x ≥ 0.
γ = a + ib is the principal square root of s, and

    f(χ, x)     = 1 - tanh(γ/2) / (γ/2)
    ratio(χ, x) = s / f(χ, x)

Arguments of multivalued quantities are returned as continuous lifts,
never reduced modulo 2π.
"""
import cmath
import math
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy import optimize

from CircLang import settings
from langevin.exceptions import BranchError
from langevin.exceptions import DomainError
from langevin.exceptions import PoleError
from langevin.models import LiftedComplex
from langevin.models import SqrtDecomp
from langevin.models import ThetaRoot

PI2 = math.pi ** 2

# ratio(s) = s / f(s) around s = 0, exact rationals 12, 6/5, -1/700, 1/63000.
RATIO_SERIES = (12.0, 6.0 / 5.0, -1.0 / 700.0, 1.0 / 63000.0)

# Above this real part of γ, hyperbolic functions are evaluated through e^{-a}.
_LARGE_A = 20.0


def sqrt_halfplane(chi: float, x: float) -> SqrtDecomp:
    """
    Principal square root a + ib of χ + ix for x ≥ 0.

    The larger of a, b comes from the modulus and the smaller one from
    2ab = x, so nothing cancels when χ < 0 and x ≪ |χ|.

    Raises:
        DomainError: for x < 0 or (χ, x) = (0, 0).
    """
    if x < 0:
        raise DomainError(f"x must be non-negative, got {x}.")
    if chi == 0.0 and x == 0.0:
        raise DomainError("(χ, x) = (0, 0) has no square-root decomposition.")

    r = math.hypot(chi, x)
    if chi >= 0:
        a = math.sqrt((r + chi) / 2.0)
        b = x / (2.0 * a)
    else:
        b = math.sqrt((r - chi) / 2.0)
        a = x / (2.0 * b)
    return SqrtDecomp(a=a, b=b)


def _sinh_argument(a: float, b: float) -> float:
    # φ_a(b), the continuous argument of sinh(a + ib) starting from 0 at b = 0.
    k = math.floor(b / math.pi + 0.5)
    d = b - k * math.pi
    if abs(abs(d) - math.pi / 2.0) <= 1e-15 * max(1.0, b):
        return b
    if a == 0.0:
        if d == 0.0:
            raise BranchError(f"sinh(i·{b}) vanishes; its argument has no continuous lift there.")
        return k * math.pi + math.copysign(math.pi / 2.0, d)
    return k * math.pi + math.atan(math.tan(d) / math.tanh(a))


def sinh_lift(a: float, b: float) -> LiftedComplex:
    """
    sinh(a + ib) as (modulus, continuous argument) for a > 0, b ≥ 0.

    The argument equals ∫₀^b sinh(2a)/(cosh 2a - cos 2β) dβ, evaluated in the
    closed form kπ + arctan(coth a · tan(b - kπ)) with k the nearest integer
    to b/π. At b = kπ ± π/2 the exact value b is returned.
    """
    if a <= 0:
        raise DomainError(f"sinh_lift needs a > 0, got a={a}.")
    if b < 0:
        raise DomainError(f"sinh_lift needs b ≥ 0, got b={b}.")
    # √((cosh 2a - cos 2b)/2) without the cancellation near a = b = 0.
    modulus = math.hypot(math.sinh(a), math.sin(b))
    return LiftedComplex(modulus=modulus, argument=_sinh_argument(a, b))


def _tanh_half(a: float, b: float) -> complex:
    # tanh((a + ib)/2) = (sinh a + i sin b) / (cosh a + cos b)
    if a > _LARGE_A:
        e1 = math.exp(-a)
        e2 = e1 * e1
        den = 1.0 + e2 + 2.0 * math.cos(b) * e1
        return complex((1.0 - e2) / den, 2.0 * math.sin(b) * e1 / den)
    den = 2.0 * (math.sinh(a / 2.0) ** 2 + math.cos(b / 2.0) ** 2)
    if den == 0.0:
        raise DomainError(f"cosh a + cos b vanishes at (a, b) = ({a}, {b}); f has a pole there.")
    return complex(math.sinh(a) / den, math.sin(b) / den)


def _ratio_series(s: complex) -> complex:
    c0, c1, c2, c3 = RATIO_SERIES
    return c0 + s * (c1 + s * (c2 + s * c3))


def _ratio_series_log_derivative(s: complex) -> complex:
    _, c1, c2, c3 = RATIO_SERIES
    return (c1 + s * (2.0 * c2 + 3.0 * s * c3)) / _ratio_series(s)


def f_of(chi: float, x: float) -> complex:
    """
    f(χ, x) = 1 - tanh(γ/2)/(γ/2).

    Equivalently 1 - [a sinh a + b sin b + i(a sin b - b sinh a)] / [(a²+b²)(cosh a + cos b)/2].
    Below SERIES_CUTOFF in |s| the value comes from the series of ratio.

    Raises:
        DomainError: at (0, 0) and where cosh a + cos b = 0.
    """
    s = complex(chi, x)
    sq = sqrt_halfplane(chi, x)
    if abs(s) < settings.SERIES_CUTOFF:
        return s / _ratio_series(s)
    return 1.0 - 2.0 * _tanh_half(sq.a, sq.b) / sq.value


def ratio_of(chi: float, x: float) -> complex:
    """
    ratio(χ, x) = (χ + ix) / f(χ, x), with ratio(0, 0) = 12.

    Raises:
        PoleError: near the zeros of f at (-4θ_k², 0).
    """
    s = complex(chi, x)
    if x < 0:
        raise DomainError(f"x must be non-negative, got {x}.")
    if abs(s) < settings.SERIES_CUTOFF:
        return _ratio_series(s)
    f = f_of(chi, x)
    if abs(f) * abs(s) < settings.POLE_TOL:
        raise PoleError(f"f(χ, x) vanishes at ({chi}, {x}); ratio has a pole there.")
    return s / f


def phi_of(chi: float, x: float) -> float:
    """
    φ(χ, x) = ½ arctan(b/a) - ½ φ_a(b), the continuous argument of √(γ/sinh γ).

    φ(0, 0) = 0. For x = 0 and χ < 0 the value is the limit x → 0⁺.
    """
    if x < 0:
        raise DomainError(f"x must be non-negative, got {x}.")
    if chi == 0.0 and x == 0.0:
        return 0.0
    sq = sqrt_halfplane(chi, x)
    return 0.5 * math.atan2(sq.b, sq.a) - 0.5 * _sinh_argument(sq.a, sq.b)


def phi_prime_axis(x: float) -> float:
    """
    dφ(0, x)/dx = -(1/(4√(2x))) (sinh√(2x) - sin√(2x)) / (cosh√(2x) - cos√(2x)).

    Tends to -1/12 as x → 0.
    """
    if x < 0:
        raise DomainError(f"x must be non-negative, got {x}.")
    w = math.sqrt(2.0 * x)
    if w < settings.SERIES_CUTOFF:
        return -1.0 / 12.0 + x * x / 1890.0
    if w > 2.0 * _LARGE_A:
        e1 = math.exp(-w)
        quotient = (1.0 - e1 * e1 - 2.0 * math.sin(w) * e1) / (1.0 + e1 * e1 - 2.0 * math.cos(w) * e1)
    else:
        # cosh w - cos w = 2(sinh²(w/2) + sin²(w/2))
        quotient = (math.sinh(w) - math.sin(w)) / (2.0 * (math.sinh(w / 2.0) ** 2 + math.sin(w / 2.0) ** 2))
    return -quotient / (4.0 * w)


def psi_modulus(chi: float, x: float) -> float:
    """|γ / sinh γ|^{1/2} = [2√(χ²+x²) / (cosh 2a - cos 2b)]^{1/4}."""
    if chi == 0.0 and x == 0.0:
        return 1.0
    sq = sqrt_halfplane(chi, x)
    r = sq.a * sq.a + sq.b * sq.b
    if sq.a > _LARGE_A:
        log_den = 2.0 * (sq.a - math.log(2.0)) + math.log1p(-2.0 * math.exp(-2.0 * sq.a) * math.cos(2.0 * sq.b))
        return math.exp(0.25 * (math.log(r) - log_den))
    den = math.sinh(sq.a) ** 2 + math.sin(sq.b) ** 2
    if den == 0.0:
        raise BranchError(f"sinh γ vanishes at (χ, x) = ({chi}, {x}).")
    return (r / den) ** 0.25


# Vectorised axis functions, used by the oscillatory quadratures.

def _axis_tanh_half(t: np.ndarray) -> np.ndarray:
    # tanh((t + it)/2) for t ≥ 0
    large = t > _LARGE_A
    tl = np.where(large, t, 0.0)
    e1 = np.exp(-np.where(large, t, 0.0))
    e2 = e1 * e1
    den_large = 1.0 + e2 + 2.0 * np.cos(tl) * e1
    value_large = ((1.0 - e2) + 2j * np.sin(tl) * e1) / den_large

    ts = np.where(large, 0.0, t)
    den = 2.0 * (np.sinh(ts / 2.0) ** 2 + np.cos(ts / 2.0) ** 2)
    value_small = (np.sinh(ts) + 1j * np.sin(ts)) / den
    return np.where(large, value_large, value_small)


def ratio_axis_values(x: np.ndarray) -> np.ndarray:
    """ratio(0, x) over an array of x ≥ 0."""
    x = np.asarray(x, dtype=float)
    s = 1j * x
    small = x < settings.SERIES_CUTOFF
    t = np.sqrt(x / 2.0)
    gamma = np.where(small, 1.0, t * (1.0 + 1j))
    f = 1.0 - 2.0 * _axis_tanh_half(np.where(small, 1.0, t)) / gamma
    generic = s / np.where(small, 1.0, f)
    series = RATIO_SERIES[0] + s * (RATIO_SERIES[1] + s * (RATIO_SERIES[2] + s * RATIO_SERIES[3]))
    return np.where(small, series, generic)


def phi_axis_values(x: np.ndarray) -> np.ndarray:
    """Φ(x) over an array of x ≥ 0, with Φ(0) = √(24π)."""
    x = np.asarray(x, dtype=float)
    t = np.sqrt(x / 2.0)
    zero = t == 0.0
    tz = np.where(zero, 1.0, t)

    # φ(0, x) = π/8 - ½ φ_t(t)
    k = np.floor(tz / np.pi + 0.5)
    d = tz - k * np.pi
    boundary = np.abs(np.abs(d) - np.pi / 2.0) <= 1e-15 * np.maximum(1.0, tz)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lifted = k * np.pi + np.arctan(np.tan(d) / np.tanh(tz))
    sinh_arg = np.where(boundary, tz, lifted)
    phase = np.where(zero, 0.0, np.pi / 8.0 - 0.5 * sinh_arg)

    # [2x / (cosh√(2x) - cos√(2x))]^{1/4}, in logs for large t
    large = tz > _LARGE_A
    with np.errstate(over="ignore"):
        den = np.sinh(np.where(large, 0.0, tz)) ** 2 + np.sin(tz) ** 2
        log_den = np.where(large,
                           2.0 * (tz - np.log(2.0)) + np.log1p(-2.0 * np.exp(-2.0 * tz) * np.cos(2.0 * tz)),
                           np.log(np.where(large, 1.0, den)))
    bracket = np.where(zero, 1.0, np.exp(0.25 * (np.log(2.0 * tz * tz) - log_den)))

    ratio = ratio_axis_values(x)
    return np.exp(1j * phase) * bracket * np.sqrt(2.0 * np.pi * ratio)


def Phi_axis(x: float) -> complex:
    """
    Φ(x) = e^{iφ(0,x)} [2x/(cosh√(2x) - cos√(2x))]^{1/4} √(2π·ratio(0, x)).

    The square root follows arg ratio(0, x), which stays in [0, π/2].
    Φ(0⁺) = √(24π); |Φ(x)| = O(x e^{-√(x/8)}).
    """
    if x <= 0:
        raise DomainError(f"Phi_axis needs x > 0, got {x}.")
    return complex(phi_axis_values(np.array([x]))[0])


@lru_cache(maxsize=64)
def theta_root(k: int) -> ThetaRoot:
    """
    k-th positive root of tan θ = θ, bracketed in ((2k-1)π/2, (2k+1)π/2).

    The bracket is searched on sin θ - θ cos θ, which has the same roots and no poles.
    """
    if k < 1:
        raise DomainError(f"theta_root needs k ≥ 1, got {k}.")
    lo = (2 * k - 1) * math.pi / 2.0
    hi = (2 * k + 1) * math.pi / 2.0
    value = optimize.brentq(lambda th: math.sin(th) - th * math.cos(th), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return ThetaRoot(index=k, value=value)


def strip_limit() -> float:
    """-4θ₁², the left edge of the strip where ratio is analytic."""
    return -4.0 * theta_root(1).value ** 2


def _ratio_log_derivative(s: complex) -> complex:
    # d log ratio / ds = 1/s - f'(s)/f(s)
    if abs(s) < settings.SERIES_CUTOFF:
        return _ratio_series_log_derivative(s)
    sq = sqrt_halfplane(s.real, s.imag)
    gamma = sq.value
    t = _tanh_half(sq.a, sq.b)
    f = 1.0 - 2.0 * t / gamma
    dg = (1.0 - t * t) / gamma - 2.0 * t / (gamma * gamma)
    df = -dg / (2.0 * gamma)
    return 1.0 / s - df / f


def _lift_integrand(chi: float, x: float) -> float:
    s = complex(chi, x)
    return (_ratio_log_derivative(s) - 1.0 / (s + PI2)).imag


def ratio_arg_lift(chi: float, x: float) -> float:
    """
    Continuous argument φ̃ of ratio along the segment from (0, x) to (χ, x).

    ratio = (s + π²)·h(s) with h free of zeros and poles in the strip, so

        φ̃ = Arg(s + π²) + [Arg ratio(0, x) - Arg(π² + ix)] + ∫₀^χ Im(h'/h) dχ

    with the principal Arg(s + π²) ∈ (0, π) for x > 0. On x = 0 the lift is 0
    right of -π² and π left of it.
    """
    if x < 0:
        raise DomainError(f"x must be non-negative, got {x}.")
    if chi <= strip_limit():
        raise DomainError(f"χ={chi} is outside the strip χ > -4θ₁².")
    if x == 0.0:
        if chi > -PI2:
            return 0.0
        if chi < -PI2:
            return math.pi
        raise BranchError("ratio vanishes at (-π², 0); its argument is undefined there.")

    offset = cmath.phase(ratio_of(0.0, x)) - math.atan2(x, PI2)
    head = math.atan2(x, chi + PI2)
    if chi == 0.0:
        return head + offset

    points = [-PI2] if chi < -PI2 else None
    value, _ = integrate.quad(_lift_integrand, chi, 0.0, args=(x,), points=points,
                              epsabs=settings.LIFT_QUAD_TOL, epsrel=settings.LIFT_QUAD_TOL, limit=200)
    return head + offset - value


def _lift_modulus(chi: float, x: float) -> float:
    s = complex(chi, x)
    sq = sqrt_halfplane(chi, x)
    if abs(s) < 0.1 or sq.a > 300.0:
        return math.sqrt(2.0 * math.pi) * psi_modulus(chi, x) * math.sqrt(abs(ratio_of(chi, x)))

    a, b = sq.a, sq.b
    r = a * a + b * b
    c_minus = 2.0 * (math.sinh(a / 2.0) ** 2 + math.sin(b / 2.0) ** 2)
    c_plus = 2.0 * (math.sinh(a / 2.0) ** 2 + math.cos(b / 2.0) ** 2)
    b_prime = r * c_plus - 4.0 * (a * math.sinh(a) + b * math.sin(b)) + 4.0 * c_minus
    if c_minus <= 0.0:
        raise BranchError(f"cosh a - cos b vanishes at (χ, x) = ({chi}, {x}).")
    if b_prime <= settings.POLE_TOL:
        raise PoleError(f"The lifted denominator vanishes at (χ, x) = ({chi}, {x}).")
    return math.sqrt(2.0 * math.pi) * r / (c_minus * b_prime) ** 0.25


def Phi_lift(chi: float, x: float) -> complex:
    """
    Analytic continuation of Φ from the axis χ = 0 into the strip χ > -4θ₁².

        |Φ(χ, x)| = √(2π) (a²+b²) (cosh a - cos b)^{-1/4}
                    / [(a²+b²)(cosh a + cos b) - 4(a sinh a + b sin b) + 4(cosh a - cos b)]^{1/4}
        arg Φ(χ, x) = φ(χ, x) + φ̃(χ, x)/2
    """
    if x < 0:
        raise DomainError(f"x must be non-negative, got {x}.")
    if chi <= strip_limit():
        raise DomainError(f"χ={chi} is outside the strip χ > -4θ₁².")
    if chi == 0.0 and x == 0.0:
        return complex(math.sqrt(24.0 * math.pi))
    if x == 0.0 and abs(chi + 4.0 * PI2) < 1e-12:
        raise BranchError("Φ has a branch point at (-4π², 0).")

    phase = phi_of(chi, x) + 0.5 * ratio_arg_lift(chi, x)
    return cmath.rect(_lift_modulus(chi, x), phase)


def Phi_termwise(chi: float, x: float) -> complex:
    """
    Continuation of Φ taken factor by factor.

    The bracket 2x/(cosh√(2x) - cos√(2x)) is continued as γ²/(sinh γ · sin γ)
    with its principal fourth root. The phase e^{iφ} and √(2π·ratio) keep their
    lifts. Near (π², 0) its modulus grows like x^{-1/4}.
    """
    if x < 0:
        raise DomainError(f"x must be non-negative, got {x}.")
    if chi == 0.0 and x == 0.0:
        return complex(math.sqrt(24.0 * math.pi))
    gamma = sqrt_halfplane(chi, x).value
    den = cmath.sinh(gamma) * cmath.sin(gamma)
    if den == 0:
        raise BranchError(f"sinh γ · sin γ vanishes at (χ, x) = ({chi}, {x}).")
    bracket = cmath.exp(0.25 * cmath.log(gamma * gamma / den))
    root = math.sqrt(2.0 * math.pi * abs(ratio_of(chi, x)))
    return cmath.exp(1j * phi_of(chi, x)) * bracket * root * cmath.exp(0.5j * ratio_arg_lift(chi, x))
