import time
from typing import List
from typing import Optional
from typing import Tuple

from sentry_sdk import capture_message

from langevin.acceptance import SUITES
from langevin.acceptance import suite_checks
from langevin.models import CheckResult
from langevin.models import SuiteContext
from services.services_circlang import ServicesCircLang
from views.suites.validation_view_cli import ValidationViewCli


class ValidationSuiteController:
    EXIT_OK = 0
    EXIT_VALIDATION_FAILED = 1
    EXIT_USAGE = 2

    def __init__(self, services_circlang: ServicesCircLang, view_cli: ValidationViewCli):
        self.services_circlang = services_circlang
        self.view_cli = view_cli

    def run(self, suite: str, context: SuiteContext, names: Tuple[str, ...] = (),
            budget: Optional[float] = None, display: bool = True) -> Tuple[int, List[CheckResult]]:
        """
        Run the checks of a suite and display the pass/fail table.

        Checks run in suite order. Once the running time exceeds budget, the
        remaining checks are reported as skipped, which fails the suite.

        Args:
            suite (str): "fast", "mc" or "full".
            context (SuiteContext): Seed, path counts and tolerance shared by the checks.
            names (Tuple[str, ...]): Restrict the run to these checks.
            budget (Optional[float]): Time budget in seconds, or None.
            display (bool): Print progress and tables; off when the caller emits JSON.

        Returns:
            Tuple[int, List[CheckResult]]: The exit code and the results.
        """
        if suite not in SUITES:
            self.view_cli.display_error_message(f"Unknown suite {suite!r}. Choose one of {', '.join(SUITES)}.")
            return self.EXIT_USAGE, []
        try:
            checks = suite_checks(suite, names)
        except KeyError as e:
            self.view_cli.display_error_message(str(e.args[0]))
            return self.EXIT_USAGE, []

        capture_message(f"Validation suite {suite} started with seed {context.seed} ({len(checks)} checks).")
        if display:
            self.view_cli.display_message(f"Running {len(checks)} check(s) of suite '{suite}' "
                                          f"with seed {context.seed}...")

        started = time.perf_counter()
        results: List[CheckResult] = []
        for check in checks:
            if budget is not None and time.perf_counter() - started > budget:
                results.append(CheckResult(name=check.name, passed=False, skipped=True,
                                           detail=f"time budget of {budget:g} s exhausted"))
                continue
            result = self.services_circlang.run_check(check, context)
            if display:
                self.view_cli.display_summary_line(check.name, result.passed, result.elapsed)
            results.append(result)

        if display:
            self.view_cli.display_check_results(suite, results)
            self.view_cli.display_suite_summary(results)

        all_passed = all(result.passed for result in results)
        capture_message(f"Validation suite {suite}: {'passed' if all_passed else 'failed'}.",
                        level="info" if all_passed else "error")
        return (self.EXIT_OK if all_passed else self.EXIT_VALIDATION_FAILED), results
