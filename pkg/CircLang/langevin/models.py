import json
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from typing import Any
from typing import Dict
from typing import List
from typing import Tuple
from typing import Union

import numpy as np


@dataclass(frozen=True)
class SqrtDecomp:
    """
    Real and imaginary parts of the principal square root of χ + ix.

    (a + ib)² = χ + ix with a ≥ 0 and b ≥ 0 when x ≥ 0.
    """
    a: float
    b: float

    @property
    def value(self) -> complex:
        return complex(self.a, self.b)


@dataclass(frozen=True)
class LiftedComplex:
    """
    A complex number carried as a modulus and a continuous argument.

    The argument is never reduced modulo 2π, so it keeps the branch the
    caller has followed along its evaluation path.
    """
    modulus: float
    argument: float

    @property
    def value(self) -> complex:
        return complex(self.modulus * np.cos(self.argument), self.modulus * np.sin(self.argument))


@dataclass(frozen=True)
class ThetaRoot:
    index: int
    value: float


@dataclass(frozen=True)
class MalliavinMatrix:
    """
    The deterministic limit DU⁰(w) of the Malliavin covariance matrix.

    m11 is the variance of ∫ sin(ws) ω_s ds under the Brownian bridge,
    m22 the variance of ∫ cos(ws) ω_s ds and m12 the covariance of
    -∫ sin(ws) ω_s ds with ∫ cos(ws) ω_s ds.
    """
    m11: float
    m12: float
    m22: float
    w: float

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m12

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m12, self.m22]])

    def quadratic(self, u: float, v: float) -> float:
        # (u, v) · DU⁰ · (u, v)ᵗ
        return self.m11 * u * u + 2.0 * self.m12 * u * v + self.m22 * v * v


@dataclass(frozen=True)
class TargetPoint:
    """
    A point (w, y, z) of the state space.

    frame is the starting point the coordinates are expressed from; the
    origin unless the point was produced by homogenisation.
    """
    w: float
    y: float
    z: float
    frame: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.w, self.y, self.z


class Regime(Enum):
    NON_DEGENERATE = "NonDegenerate"
    DEGENERATE_AXIS = "DegenerateAxis"
    DEGENERATE_GENERIC = "DegenerateGeneric"


@dataclass(frozen=True)
class LogDensityAsymptote:
    """
    Small-time equivalent of p_ε in log space.

    log p_ε = log_prefactor + exponent. Nothing is exponentiated here because
    the exponent reaches -10⁴ at small ε.
    """
    regime: Regime
    log_prefactor: float
    exponent: float
    epsilon: float

    @property
    def log_density(self) -> float:
        return self.log_prefactor + self.exponent


@dataclass
class BridgePath:
    n_steps: int
    values: np.ndarray

    def __post_init__(self):
        if self.n_steps < 2:
            raise ValueError(f"A bridge path needs at least 2 steps, got {self.n_steps}.")
        if self.values.shape != (self.n_steps + 1,):
            raise ValueError(f"Expected {self.n_steps + 1} values, got shape {self.values.shape}.")
        if self.values[0] != 0.0 or self.values[-1] != 0.0:
            raise ValueError("A Brownian bridge is pinned at 0 at both ends.")

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) / self.n_steps


@dataclass
class RiccatiSolution:
    """
    Solution of u'' = -2γu, u(0) = 1, u'(0) = 0 on a uniform grid of [0, 1].

    g = -u'/u solves the Riccati equation g' = g² + 2γ.
    """
    grid: np.ndarray
    u: np.ndarray
    du: np.ndarray

    @property
    def g(self) -> np.ndarray:
        return -self.du / self.u


@dataclass(frozen=True)
class MCEstimate:
    mean: complex
    std_error: float
    n_paths: int
    seed: int

    def within(self, value: complex, n_se: float = 3.0) -> bool:
        """True when value lies within n_se standard errors of the mean."""
        return abs(complex(value) - self.mean) <= n_se * self.std_error


@dataclass
class PEpsField:
    """Monte-Carlo field of P_ε over a grid of (ξ', ξ) nodes."""
    grid: np.ndarray
    mean: np.ndarray
    std_error: np.ndarray
    n_paths: int
    seed: int


@dataclass
class QuadResult:
    """
    Outcome of a quadrature.

    For the Fourier inversions value holds log p_ε and abs_error_estimate is
    the error on that logarithm.
    """
    value: Union[float, complex]
    abs_error_estimate: float
    n_evals: int
    converged: bool = True
    tail_extrapolated: bool = False
    cancellation_suspect: bool = False
    statistical_error_dominates: bool = False
    strategy: str = ""

    def __post_init__(self):
        if self.abs_error_estimate < 0:
            raise ValueError("abs_error_estimate must be non-negative.")

    @property
    def flags(self) -> List[str]:
        names = ("converged", "tail_extrapolated", "cancellation_suspect", "statistical_error_dominates")
        return [name for name in names if getattr(self, name)]


@dataclass
class PeriodSum:
    """Per-period contributions of an oscillatory integral and their accelerated sum."""
    value: float
    partial_sums: Tuple[float, ...]
    abs_error_estimate: float
    n_evals: int


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        # 17 significant digits round-trip every double.
        return float(f"{float(value):.17g}")
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": _jsonable(value.real), "im": _jsonable(value.imag)}
    return value


def dumps_sorted(payload: Any) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, ensure_ascii=False, indent=2)


@dataclass
class RunManifest:
    """
    Record of one command invocation, enough to replay it.

    created_at is an ISO-8601 timestamp.
    """
    command: str
    parameters: Dict[str, Any]
    seed: int
    versions: Dict[str, str]
    outputs: List[str] = field(default_factory=list)
    wall_time: float = 0.0
    created_at: str = ""

    def to_json(self) -> str:
        return dumps_sorted(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        return cls(command=data["command"],
                   parameters=data.get("parameters", {}),
                   seed=int(data["seed"]),
                   versions=data.get("versions", {}),
                   outputs=list(data.get("outputs", [])),
                   wall_time=float(data.get("wall_time", 0.0)),
                   created_at=data.get("created_at", ""))


@dataclass(frozen=True)
class SuiteContext:
    """Run parameters shared by every check of a validation suite."""
    seed: int
    n_paths: int
    n_steps: int
    workers: int = 1
    tol: float = 1e-9


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0
    skipped: bool = False

    @property
    def status(self) -> str:
        if self.skipped:
            return "SKIPPED"
        return "PASS" if self.passed else "FAIL"


@dataclass(frozen=True)
class ConstantReport:
    """A computed constant with its error estimate and the bound it has to satisfy."""
    name: str
    value: float
    error_estimate: float
    bound: str
    passed: bool
    strategy: str = ""
    converged: bool = True
