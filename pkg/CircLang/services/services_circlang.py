import csv
import math
import os
import platform
import time
from typing import Any
from typing import Dict
from typing import List
from typing import Sequence
from typing import Tuple

import numpy as np
import scipy
from sentry_sdk import capture_exception
from sentry_sdk import capture_message

from CircLang import settings
from langevin import kernel
from langevin import quad
from langevin import specfun
from langevin.acceptance import Check
from langevin.exceptions import CancellationError
from langevin.exceptions import CircLangError
from langevin.exceptions import ConvergenceError
from langevin.exceptions import DomainError
from langevin.malliavin import homogenize
from langevin.models import CheckResult
from langevin.models import ConstantReport
from langevin.models import LogDensityAsymptote
from langevin.models import RunManifest
from langevin.models import SuiteContext
from langevin.models import TargetPoint
from langevin.models import dumps_sorted

Table = Tuple[List[str], List[List[float]]]


class ServicesCircLang:

# ====================== Constants ======================
    @staticmethod
    def compute_constants(tol: float) -> List[ConstantReport]:
        """
        Compute σ, σ', θ₁, C² and f(π², 0) with their error estimates.

        σ and σ' are each computed by two strategies; the reported error is the
        larger of the quadrature estimate and the gap between the strategies.

        Args:
            tol (float): Absolute tolerance passed to the quadratures.

        Returns:
            List[ConstantReport]: One report per constant, in display order.

        Raises:
            DomainError: If tol is below what the quadratures can deliver.
            ConvergenceError: If a quadrature fails.
        """
        try:
            sigma = quad.sigma_const(tol, strategy="period")
            sigma_check = quad.sigma_const(tol, strategy="phase")
            sigma_prime = quad.sigma_prime_const(tol, strategy="period")
            sigma_prime_check = quad.sigma_prime_const(tol, strategy="fourier")
            theta = specfun.theta_root(1).value
            c_squared = kernel.c_squared_diagnostic()
            f_value = specfun.f_of(math.pi ** 2, 0.0)
        except DomainError as e:
            capture_exception(e)
            raise DomainError(f"Cannot compute the constants: {e}") from e
        except CircLangError as e:
            capture_exception(e)
            raise ConvergenceError(f"Quadrature failed while computing the constants: {e}") from e

        sigma_error = max(sigma.abs_error_estimate, abs(sigma.value - sigma_check.value))
        sigma_prime_error = max(sigma_prime.abs_error_estimate, abs(sigma_prime.value - sigma_prime_check.value))
        reports = [
            ConstantReport("sigma", sigma.value, sigma_error, "> 0.1", sigma.value > 0.1, "period/phase",
                           converged=sigma.converged and sigma_check.converged),
            ConstantReport("sigma_prime", sigma_prime.value, sigma_prime_error, "> 0.1", sigma_prime.value > 0.1,
                           "period/fourier", converged=sigma_prime.converged and sigma_prime_check.converged),
            ConstantReport("theta_1", theta, abs(math.tan(theta) - theta), "in (4π/3, 3π/2)",
                           4.0 * math.pi / 3.0 < theta < 1.5 * math.pi, "brentq"),
            ConstantReport("C_squared", c_squared, 0.0, "finite", math.isfinite(c_squared), "closed form"),
            ConstantReport("f(pi^2,0)", f_value.real, abs(f_value.imag), "finite", math.isfinite(f_value.real),
                           "closed form"),
        ]
        unconverged = [report.name for report in reports if not report.converged]
        if unconverged:
            capture_message(f"Quadratures did not reach tol={tol} for: {', '.join(unconverged)}.", level="error")
        failed = [report.name for report in reports if not report.passed]
        if failed:
            capture_message(f"Constants outside their bounds: {', '.join(failed)} (tol={tol}).", level="error")
        return reports

# ====================== Kernel ======================
    @staticmethod
    def target_in_support(eps: float, start: TargetPoint, target: TargetPoint) -> bool:
        point = homogenize(start, target)
        inside = kernel.support_indicator(eps, point.y, point.z)
        if not inside:
            capture_message(f"Target {target.as_tuple()} from {start.as_tuple()} is outside the support "
                            f"at ε={eps}.", level="warning")
        return inside

    @staticmethod
    def evaluate_kernel(eps: float, start: TargetPoint, target: TargetPoint) -> Tuple[TargetPoint,
                                                                                        LogDensityAsymptote]:
        """
        Homogenise the target and evaluate the small-time equivalent of log p_ε.

        Returns:
            Tuple[TargetPoint, LogDensityAsymptote]: The homogenised point and its asymptote.

        Raises:
            DomainError: If the point lies outside the domain of its regime.
            ConvergenceError: If one of the constants cannot be computed.
        """
        try:
            point = homogenize(start, target)
            asymptote = kernel.p_general(eps, start, target)
            return point, asymptote
        except DomainError as e:
            capture_exception(e)
            regime = kernel.classify(homogenize(start, target)).value
            raise DomainError(f"{regime}: {e}") from e
        except ConvergenceError as e:
            capture_exception(e)
            raise ConvergenceError(f"Kernel constants did not converge: {e}", e.result) from e
        except CircLangError as e:
            capture_exception(e)
            raise DomainError(f"Cannot evaluate the kernel: {e}") from e

    @staticmethod
    def kernel_sweep(eps_grid: Sequence[float], start: TargetPoint, target: TargetPoint) -> Table:
        """Exponent and log-density of one target over an ε grid; ε where the target leaves the support is skipped."""
        columns = ["epsilon[time]", "log_prefactor[nat]", "exponent[nat]", "log_density[nat]"]
        rows = []
        for eps in eps_grid:
            eps = float(eps)
            if not ServicesCircLang.target_in_support(eps, start, target):
                continue
            _, asymptote = ServicesCircLang.evaluate_kernel(eps, start, target)
            rows.append([eps, asymptote.log_prefactor, asymptote.exponent, asymptote.log_density])
        return columns, rows

    @staticmethod
    def phi_table(x_grid: Sequence[float]) -> Table:
        columns = ["x[1]", "abs_Phi[1]", "arg_Phi[rad]", "re_Phi[1]", "im_Phi[1]"]
        try:
            values = specfun.phi_axis_values(np.asarray(x_grid, dtype=float))
        except CircLangError as e:
            capture_exception(e)
            raise DomainError(f"Cannot tabulate Φ: {e}") from e
        rows = [[float(x), float(abs(v)), float(np.angle(v)), float(v.real), float(v.imag)]
                for x, v in zip(x_grid, values)]
        return columns, rows

# ====================== Validation ======================
    @staticmethod
    def run_check(check: Check, context: SuiteContext) -> CheckResult:
        """Run one acceptance check; a raised error counts as a failure and is reported to Sentry."""
        started = time.perf_counter()
        try:
            passed, detail = check.run(context)
        except CancellationError as e:
            capture_exception(e)
            passed, detail = False, f"cancellation (ratio {e.ratio:.2e}): {e}"
        except Exception as e:
            capture_exception(e)
            passed, detail = False, f"{type(e).__name__}: {e}"
        result = CheckResult(name=check.name, passed=bool(passed), detail=detail,
                             elapsed=time.perf_counter() - started)
        capture_message(f"Check {check.name}: {result.status} in {result.elapsed:.2f} s.",
                        level="info" if result.passed else "error")
        return result

# ====================== Files ======================
    @staticmethod
    def _formatted(value: Any) -> str:
        if isinstance(value, float):
            return f"{value:.{settings.JSON_SIGNIFICANT_DIGITS}g}"
        return str(value)

    @staticmethod
    def write_table(directory: str, name: str, table: Table, file_format: str) -> str:
        """
        Write a table as CSV (header row, LF line endings) or as key-sorted JSON.

        Returns:
            str: The path of the written file.

        Raises:
            OSError: If the file cannot be written.
        """
        columns, rows = table
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"{name}.{file_format}")
        try:
            match file_format:
                case "csv":
                    with open(path, "w", encoding="utf-8", newline="") as handle:
                        writer = csv.writer(handle, lineterminator="\n")
                        writer.writerow(columns)
                        for row in rows:
                            writer.writerow([ServicesCircLang._formatted(value) for value in row])
                case "json":
                    with open(path, "w", encoding="utf-8") as handle:
                        handle.write(dumps_sorted({"columns": columns, "rows": rows, "run": name}))
                        handle.write("\n")
                case _:
                    raise DomainError(f"Unknown export format {file_format!r}.")
        except OSError as e:
            capture_exception(e)
            raise OSError(f"Cannot write {path}: {e}") from e
        capture_message(f"Exported {len(rows)} rows to {path}.")
        return path

    @staticmethod
    def write_manifest(manifest: RunManifest, directory: str) -> str:
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"{manifest.command}_manifest.json")
        manifest.outputs = sorted(set(manifest.outputs) | {path})
        try:
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(manifest.to_json())
                handle.write("\n")
        except OSError as e:
            capture_exception(e)
            raise OSError(f"Cannot write the run manifest {path}: {e}") from e
        return path

    @staticmethod
    def read_manifest(path: str) -> RunManifest:
        try:
            with open(path, encoding="utf-8") as handle:
                return RunManifest.from_json(handle.read())
        except (OSError, KeyError, ValueError) as e:
            capture_exception(e)
            raise DomainError(f"Cannot read a run manifest from {path}: {e}") from e

    @staticmethod
    def collect_versions() -> Dict[str, str]:
        return {
            "circlang": settings.VERSION,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "scipy": scipy.__version__,
        }

