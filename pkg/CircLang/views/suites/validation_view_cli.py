from typing import List

from rich.box import ROUNDED
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from langevin.models import CheckResult
from views.base_view_cli import BaseViewCli


class ValidationViewCli(BaseViewCli):

    def display_check_results(self, suite: str, results: List[CheckResult]) -> None:
        """
        Display one row per check with its status, running time and detail.

        Args:
            suite (str): The suite name, used in the title.
            results (List[CheckResult]): The checks in the order they ran.
        """
        console = Console()

        table = Table(title=f"Validation suite: {suite}", show_header=True, header_style="bold magenta",
                      box=ROUNDED, expand=True, show_lines=True)
        table.add_column("Check", style="dim")
        table.add_column("Status")
        table.add_column("Time (s)", justify="right")
        table.add_column("Detail")

        for result in results:
            match result.status:
                case "PASS":
                    status = "[green]PASS[/green]"
                case "FAIL":
                    status = "[bold red]FAIL[/bold red]"
                case _:
                    status = "[yellow]SKIPPED[/yellow]"
            table.add_row(result.name, status, f"{result.elapsed:.2f}", escape(result.detail))

        console.print(table)

    def display_suite_summary(self, results: List[CheckResult]) -> None:
        passed = sum(1 for result in results if result.passed)
        skipped = sum(1 for result in results if result.skipped)
        failed = len(results) - passed - skipped
        message = f"{passed} passed, {failed} failed, {skipped} skipped."
        if failed or skipped:
            self.display_error_message(message)
        else:
            self.display_info_message(message)
