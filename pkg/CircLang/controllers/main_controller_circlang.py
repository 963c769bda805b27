import time
from dataclasses import asdict
from datetime import datetime
from datetime import timezone
from typing import Any
from typing import Dict
from typing import List
from typing import Optional

import numpy as np
from dateutil import parser as date_parser
from sentry_sdk import capture_exception
from sentry_sdk import capture_message

from CircLang import settings
from controllers.suites.validation_suite_controller import ValidationSuiteController
from langevin.exceptions import CancellationError
from langevin.exceptions import CircLangError
from langevin.exceptions import ConvergenceError
from langevin.models import RunManifest
from langevin.models import SuiteContext
from langevin.models import TargetPoint
from langevin.models import dumps_sorted
from services.services_circlang import ServicesCircLang
from views.main_view_cli import MainViewCLI
from views.suites.validation_view_cli import ValidationViewCli


class MainControllerCircLang:
    COMMANDS = ("constants", "kernel", "validate", "export")
    EXPORT_RUNS = ("kernel-sweep", "phi-table")

    EXIT_OK = 0
    EXIT_VALIDATION_FAILED = 1
    EXIT_USAGE = 2
    EXIT_NUMERICAL = 3

    def __init__(self, services_circlang: ServicesCircLang, view_cli: MainViewCLI,
                 validation_controller: Optional[ValidationSuiteController] = None):
        self.services_circlang = services_circlang
        self.view_cli = view_cli
        self.validation_controller = validation_controller or ValidationSuiteController(services_circlang,
                                                                                        ValidationViewCli())

    def run(self, command: str, parameters: Dict[str, Any], seed: int, out_dir: str) -> int:
        """
        Run a command and record it in a RunManifest written to out_dir.

        Numerical errors raised by the services are displayed here and turned
        into exit codes: 2 for domain errors, 3 for convergence, cancellation and
        any unexpected exception from the numerical libraries.

        Args:
            command (str): One of COMMANDS.
            parameters (Dict[str, Any]): The command parameters, JSON-serialisable so the
                manifest can replay them.
            seed (int): The resolved seed.
            out_dir (str): Directory for the manifest and any exported files.

        Returns:
            int: The exit code.
        """
        capture_message(f"Command {command} started with seed {seed}.")
        started = time.perf_counter()
        outputs: List[str] = []

        try:
            match command:
                case "constants":
                    # σ, σ', θ₁, C² and f(π², 0) against their bounds.
                    code = self.cmd_constants(parameters)
                case "kernel":
                    # Regime and small-time equivalent of p_ε at one target.
                    code = self.cmd_kernel(parameters)
                case "validate":
                    # Acceptance suite with a pass/fail table.
                    code = self.cmd_validate(parameters, seed)
                case "export":
                    # Sweep tables written as CSV or JSON.
                    code = self.cmd_export(parameters, out_dir, outputs)
                case _:
                    capture_message(f"Unknown command {command!r}. Expected one of {', '.join(self.COMMANDS)}.",
                                    level="error")
                    self.view_cli.display_error_message(f"Unknown command: {command}")
                    return self.EXIT_USAGE
        except (ConvergenceError, CancellationError) as e:
            self.view_cli.display_error_message(f"Numerical failure: {e}")
            code = self.EXIT_NUMERICAL
        except CircLangError as e:
            self.view_cli.display_error_message(str(e))
            code = self.EXIT_USAGE
        except OSError as e:
            self.view_cli.display_error_message(str(e))
            code = self.EXIT_USAGE
        except Exception as e:
            capture_exception(e)
            self.view_cli.display_error_message(f"Unexpected failure in {command}: {e!r}")
            code = self.EXIT_NUMERICAL

        manifest = RunManifest(command=command,
                               parameters=parameters,
                               seed=seed,
                               versions=self.services_circlang.collect_versions(),
                               outputs=outputs,
                               wall_time=time.perf_counter() - started,
                               created_at=datetime.now(timezone.utc).isoformat())
        try:
            path = self.services_circlang.write_manifest(manifest, out_dir)
        except OSError as e:
            self.view_cli.display_error_message(str(e))
            return code or self.EXIT_USAGE
        if not parameters.get("json"):
            self.view_cli.display_info_message(f"Run manifest: {path}")
        return code

# ====================== constants ======================
    def cmd_constants(self, parameters: Dict[str, Any]) -> int:
        reports = self.services_circlang.compute_constants(parameters["tol"])

        if parameters.get("json"):
            self.view_cli.display_json(dumps_sorted({"constants": [asdict(report) for report in reports]}))
        else:
            self.view_cli.display_constants(reports)

        unconverged = [report.name for report in reports if not report.converged]
        if unconverged:
            if not parameters.get("json"):
                self.view_cli.display_error_message(
                    f"Did not converge to tol={parameters['tol']}: {', '.join(unconverged)}.")
            return self.EXIT_NUMERICAL
        if all(report.passed for report in reports):
            return self.EXIT_OK
        if not parameters.get("json"):
            self.view_cli.display_error_message("At least one constant violates its bound.")
        return self.EXIT_VALIDATION_FAILED

# ====================== kernel ======================
    def cmd_kernel(self, parameters: Dict[str, Any]) -> int:
        """
        Evaluate the small-time equivalent of p_ε at one target.

        A target outside the support of p_ε is refused with a warning and exit
        code 2: the density vanishes there and none of the equivalents apply.
        """
        eps = parameters["eps"]
        start = TargetPoint(*parameters["start"])
        target = TargetPoint(parameters["w"], parameters["y"], parameters["z"])

        if not self.services_circlang.target_in_support(eps, start, target):
            self.view_cli.display_warning_message(
                f"Target {target.as_tuple()} is outside the support of p_ε from {start.as_tuple()} at ε={eps}: "
                f"the homogenised (y, z) must lie in the disc of radius ε.")
            return self.EXIT_USAGE

        point, asymptote = self.services_circlang.evaluate_kernel(eps, start, target)

        if parameters.get("json"):
            self.view_cli.display_json(dumps_sorted({
                "epsilon": asymptote.epsilon,
                "exponent": asymptote.exponent,
                "homogenised": list(point.as_tuple()),
                "log_density": asymptote.log_density,
                "log_prefactor": asymptote.log_prefactor,
                "regime": asymptote.regime,
            }))
        else:
            self.view_cli.display_kernel_report(point, asymptote)
        return self.EXIT_OK

# ====================== validate ======================
    def cmd_validate(self, parameters: Dict[str, Any], seed: int) -> int:
        context = SuiteContext(seed=seed,
                               n_paths=parameters["paths"],
                               n_steps=parameters["steps"],
                               workers=parameters["workers"],
                               tol=parameters["tol"])
        code, results = self.validation_controller.run(parameters["suite"], context,
                                                       names=tuple(parameters.get("checks", ())),
                                                       budget=parameters.get("budget"),
                                                       display=not parameters.get("json"))
        if parameters.get("json"):
            self.view_cli.display_json(dumps_sorted({
                "passed": code == self.EXIT_OK,
                "results": [dict(asdict(result), status=result.status) for result in results],
                "suite": parameters["suite"],
            }))
        return code

# ====================== export ======================
    def cmd_export(self, parameters: Dict[str, Any], out_dir: str, outputs: List[str]) -> int:
        """
        Write one sweep table to out_dir.

        "kernel-sweep" tabulates the equivalent of log p_ε at a fixed target over a
        geometric ε grid; "phi-table" tabulates Φ on the positive axis.

        Args:
            parameters (Dict[str, Any]): run, format, points and, for the kernel sweep,
                the target and start.
            out_dir (str): The output directory.
            outputs (List[str]): Receives the written paths.

        Returns:
            int: The exit code.
        """
        points = parameters["points"]
        match parameters["run"]:
            case "kernel-sweep":
                low, high = settings.EXPORT_EPS_RANGE
                start = TargetPoint(*parameters["start"])
                target = TargetPoint(parameters["w"], parameters["y"], parameters["z"])
                table = self.services_circlang.kernel_sweep(np.geomspace(low, high, points), start, target)
            case "phi-table":
                low, high = settings.EXPORT_X_RANGE
                table = self.services_circlang.phi_table(np.linspace(low, high, points))
            case _:
                self.view_cli.display_error_message(
                    f"Unknown export run {parameters['run']!r}. Choose one of {', '.join(self.EXPORT_RUNS)}.")
                return self.EXIT_USAGE

        path = self.services_circlang.write_table(out_dir, parameters["run"], table, parameters["format"])
        outputs.append(path)
        if not parameters.get("json"):
            columns, rows = table
            self.view_cli.display_table(f"{parameters['run']} (first rows of {len(rows)})", columns, rows[:8])
            self.view_cli.display_output_files([path])
        return self.EXIT_OK

# ====================== replay ======================
    def replay(self, manifest_path: str, out_dir: str) -> int:
        """
        Re-run the command recorded in a manifest with its parameters and seed.

        Deterministic commands reproduce their outputs bit for bit; Monte-Carlo
        checks reproduce them because the seed fixes every substream.
        """
        try:
            manifest = self.services_circlang.read_manifest(manifest_path)
        except CircLangError as e:
            self.view_cli.display_error_message(str(e))
            return self.EXIT_USAGE

        if manifest.command not in self.COMMANDS:
            self.view_cli.display_error_message(f"The manifest records an unknown command: {manifest.command!r}")
            return self.EXIT_USAGE

        recorded = "at an unknown time"
        if manifest.created_at:
            try:
                recorded = date_parser.isoparse(manifest.created_at).strftime("on %Y-%m-%d at %H:%M:%S %Z")
            except ValueError:
                self.view_cli.display_warning_message(f"Unreadable timestamp {manifest.created_at!r}.")
        if not manifest.parameters.get("json"):
            self.view_cli.display_message(f"Replaying '{manifest.command}' recorded {recorded} "
                                          f"with seed {manifest.seed}.")
        capture_message(f"Replaying {manifest.command} from {manifest_path}.")

        return self.run(manifest.command, manifest.parameters, manifest.seed, out_dir)
