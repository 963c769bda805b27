from typing import List

from rich.box import ROUNDED
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from langevin.models import ConstantReport
from langevin.models import LogDensityAsymptote
from langevin.models import TargetPoint
from views.base_view_cli import BaseViewCli


class MainViewCLI(BaseViewCli):

    def display_constants(self, reports: List[ConstantReport]) -> None:
        """
        Display the computed constants with their error estimates and bounds.

        Args:
            reports (List[ConstantReport]): The reports returned by the services layer.
        """
        console = Console()

        table = Table(title="Constants", show_header=True, header_style="bold magenta", box=ROUNDED, expand=True,
                      show_lines=True)
        table.add_column("Constant", style="dim")
        table.add_column("Value")
        table.add_column("Error estimate")
        table.add_column("Bound")
        table.add_column("Strategy")
        table.add_column("Status")

        for report in reports:
            if not report.converged:
                status = "[yellow]not converged[/yellow]"
            else:
                status = "[green]ok[/green]" if report.passed else "[red]violated[/red]"
            table.add_row(escape(report.name),
                          self.format_number(report.value),
                          self.format_number(report.error_estimate),
                          report.bound,
                          report.strategy,
                          status)

        console.print(table)

    def display_kernel_report(self, point: TargetPoint, asymptote: LogDensityAsymptote) -> None:
        console = Console()

        table = Table(title="Small-time heat kernel", show_header=True, header_style="bold magenta", box=ROUNDED,
                      show_lines=True)
        table.add_column("Field", style="dim")
        table.add_column("Value")

        table.add_row("regime", asymptote.regime.value)
        table.add_row("epsilon", self.format_number(asymptote.epsilon))
        table.add_row("homogenised (w, y, z)", ", ".join(self.format_number(v) for v in point.as_tuple()))
        table.add_row("log_prefactor", self.format_number(asymptote.log_prefactor))
        table.add_row("exponent", self.format_number(asymptote.exponent))
        table.add_row("log p_eps", self.format_number(asymptote.log_density))

        console.print(table)
