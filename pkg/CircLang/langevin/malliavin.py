"""
Limiting Malliavin covariance DU⁰(w), its determinant Δ(w), the quadratic
forms ψ and the affine rotation group acting on targets.
"""
import math
from fractions import Fraction
from typing import Tuple

from CircLang import settings
from langevin.exceptions import DomainError
from langevin.models import MalliavinMatrix
from langevin.models import TargetPoint

# Number of terms kept in the small-w expansions.
SERIES_TERMS = 24


def _m11_coefficients() -> Tuple[float, ...]:
    # m11 = Σ_{j≥2} (-1)^j (j-1) 4^j w^{2j-2} / (2j+2)!
    return tuple(float(Fraction((-1) ** j * (j - 1) * 4 ** j, math.factorial(2 * j + 2)))
                 for j in range(2, 2 + SERIES_TERMS))


def _m22_coefficients() -> Tuple[float, ...]:
    # m22 = Σ_{j≥1} (-1)^{j+1} (4^j (j-1) + 2) w^{2j-2} / (2j+2)!
    return tuple(float(Fraction((-1) ** (j + 1) * (4 ** j * (j - 1) + 2), math.factorial(2 * j + 2)))
                 for j in range(1, 1 + SERIES_TERMS))


def _m12_coefficients() -> Tuple[float, ...]:
    # m12 = Σ_{k≥2} (-1)^{k+1} (4^{k-1} (2k-3) + 1) w^{2k-3} / (2k+1)!
    return tuple(float(Fraction((-1) ** (k + 1) * (4 ** (k - 1) * (2 * k - 3) + 1), math.factorial(2 * k + 1)))
                 for k in range(2, 2 + SERIES_TERMS))


def _delta_coefficients() -> Tuple[float, ...]:
    # Δ = Σ_{m≥3} c_m w^{2m}
    return tuple(float(Fraction((-1) ** (m + 1) * ((2 * 4 ** m + 4) * (2 * m + 3) + 4 - 4 ** (m + 2)),
                                math.factorial(2 * m + 3)))
                 for m in range(3, 3 + SERIES_TERMS))


M11_SERIES = _m11_coefficients()   # powers w², w⁴, ...
M22_SERIES = _m22_coefficients()   # powers w⁰, w², ...
M12_SERIES = _m12_coefficients()   # powers w¹, w³, ...
DELTA_SERIES = _delta_coefficients()   # powers w⁶, w⁸, ...


def _even_series(coefficients: Tuple[float, ...], w2: float) -> float:
    total = 0.0
    for c in reversed(coefficients):
        total = total * w2 + c
    return total


def du0(w: float) -> MalliavinMatrix:
    """
    Deterministic limit of the Malliavin covariance matrix.

    For |w| below MALLIAVIN_SERIES_CUTOFF the entries come from their Taylor
    series, the closed forms losing most of their digits to cancellation there.
    du0(0) is the matrix diag(0, 1/12).
    """
    w2 = w * w
    if abs(w) < settings.MALLIAVIN_SERIES_CUTOFF:
        m11 = w2 * _even_series(M11_SERIES, w2)
        m22 = _even_series(M22_SERIES, w2)
        m12 = w * _even_series(M12_SERIES, w2)
        return MalliavinMatrix(m11=m11, m12=m12, m22=m22, w=w)

    s, c = math.sin(w), math.cos(w)
    w3 = w2 * w
    w4 = w2 * w2
    m11 = (1.0 + math.sin(2.0 * w) / (2.0 * w)) / (2.0 * w2) - s * s / w4
    m22 = (1.0 - math.sin(2.0 * w) / (2.0 * w)) / (2.0 * w2) - (1.0 - c) ** 2 / w4
    m12 = s * s / (2.0 * w3) - s * (1.0 - c) / w4
    return MalliavinMatrix(m11=m11, m12=m12, m22=m22, w=w)


def delta(w: float) -> float:
    """
    Δ(w) = 1 - (sin²w + 4(1 - cos w))/w² + 4(1 - cos w) sin w / w³ = 4w⁴ det DU⁰(w).

    Raises:
        DomainError: at w = 0, where the kernel changes regime.
    """
    if w == 0.0:
        raise DomainError("Δ(w) is only used for w ≠ 0; w = 0 belongs to the degenerate regimes.")
    w2 = w * w
    if abs(w) < settings.MALLIAVIN_SERIES_CUTOFF:
        return w2 * w2 * w2 * _even_series(DELTA_SERIES, w2)
    s, c = math.sin(w), math.cos(w)
    return 1.0 - (s * s + 4.0 * (1.0 - c)) / w2 + 4.0 * (1.0 - c) * s / (w2 * w)


def zero_point(w: float) -> Tuple[float, float]:
    """The point (sin w/w, (1 - cos w)/w) where both quadratic forms vanish."""
    if w == 0.0:
        return 1.0, 0.0
    return math.sin(w) / w, (1.0 - math.cos(w)) / w


def _form_coefficients(w: float) -> Tuple[float, float, float]:
    # A = 1 + sin 2w/2w - 2S², B = 1 - sin 2w/2w - 2K², C = sin²w/2w - KS
    if abs(w) < settings.MALLIAVIN_SERIES_CUTOFF:
        m = du0(w)
        scale = w * w
        return 2.0 * scale * m.m11, 2.0 * scale * m.m22, scale * m.m12
    s_ratio, k_ratio = zero_point(w)
    sin2 = math.sin(2.0 * w) / (2.0 * w)
    a = 1.0 + sin2 - 2.0 * s_ratio * s_ratio
    b = 1.0 - sin2 - 2.0 * k_ratio * k_ratio
    c = math.sin(w) ** 2 / (2.0 * w) - k_ratio * s_ratio
    return a, b, c


def psi_quad(w: float, y: float, z: float) -> float:
    """
    The non-negative quadratic form ψ(w, y, z) of the non-degenerate regime.

    With μ = sin w/w - y and λ = (1 - cos w)/w - z,

        ψ = (1 + sin 2w/2w - 2 sin²w/w²) μ²
          + (1 - sin 2w/2w - 2(1 - cos w)²/w²) λ²
          - 4 (sin²w/2w - (1 - cos w) sin w/w²) μλ

    which equals 2w² · v · DU⁰ · vᵗ for v = (y - sin w/w, (1 - cos w)/w - z).

    Raises:
        DomainError: at w = 0.
    """
    if w == 0.0:
        raise DomainError("ψ is only defined for w ≠ 0.")
    a, b, c = _form_coefficients(w)
    s_ratio, k_ratio = zero_point(w)
    mu = s_ratio - y
    lam = k_ratio - z
    return a * mu * mu + b * lam * lam - 4.0 * c * mu * lam


def psi_bridge(w: float, y: float, z: float) -> float:
    """
    Quadratic form produced by inverting the bridge Fourier transform.

    2w² · ṽ · DU⁰ · ṽᵗ with ṽ = ((1 - cos w)/w - z, y - sin w/w); it is psi_quad
    with the roles of the two plane offsets exchanged.
    """
    if w == 0.0:
        raise DomainError("ψ is only defined for w ≠ 0.")
    a, b, c = _form_coefficients(w)
    s_ratio, k_ratio = zero_point(w)
    mu = s_ratio - y
    lam = k_ratio - z
    return a * lam * lam + b * mu * mu - 4.0 * c * mu * lam


def psi_polar(w: float, rho: float, alpha: float) -> float:
    """psi_bridge at y = ρ cos α, z = ρ sin α."""
    if w == 0.0:
        raise DomainError("ψ is only defined for w ≠ 0.")
    s_ratio, k_ratio = zero_point(w)
    c2 = math.cos(w - 2.0 * alpha)
    quadratic = 1.0 - s_ratio * c2 - (2.0 * k_ratio / w) * (1.0 - c2)
    linear = 2.0 * (1.0 - s_ratio) * (math.sin(w - alpha) + math.sin(alpha)) / w
    constant = 2.0 * (1.0 - s_ratio) * k_ratio / w
    return rho * rho * quadratic - rho * linear + constant


def homogenize(start: TargetPoint, target: TargetPoint) -> TargetPoint:
    """
    Express target in the frame of start.

    Returns (w - w₀, (y - y₀) cos w₀ + (z - z₀) sin w₀, (z - z₀) cos w₀ - (y - y₀) sin w₀).
    """
    w0, y0, z0 = start.as_tuple()
    dy = target.y - y0
    dz = target.z - z0
    c, s = math.cos(w0), math.sin(w0)
    return TargetPoint(w=target.w - w0, y=dy * c + dz * s, z=dz * c - dy * s, frame=start.as_tuple())


def compose(start: TargetPoint, shift: TargetPoint) -> TargetPoint:
    """
    Group product of two frames.

    homogenize(shift, homogenize(start, t)) == homogenize(compose(start, shift), t).
    """
    c, s = math.cos(start.w), math.sin(start.w)
    return TargetPoint(w=start.w + shift.w,
                       y=start.y + shift.y * c - shift.z * s,
                       z=start.z + shift.y * s + shift.z * c)
