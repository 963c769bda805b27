from typing import Any
from typing import List
from typing import Sequence

import click
from colorama import Fore
from colorama import Style
from rich.box import ROUNDED
from rich.console import Console
from rich.markup import escape
from rich.table import Table
from rich.text import Text

from CircLang import settings


class BaseViewCli:

    @staticmethod
    def format_number(value: Any) -> str:
        """
        Format a number for a human table with TABLE_SIGNIFICANT_DIGITS digits.

        Complex values are written as a + bi; anything else is passed through str().
        """
        digits = settings.TABLE_SIGNIFICANT_DIGITS
        if isinstance(value, bool):
            return str(value)
        if isinstance(value, complex):
            sign = "-" if value.imag < 0 else "+"
            return f"{value.real:.{digits}g} {sign} {abs(value.imag):.{digits}g}i"
        if isinstance(value, float):
            return f"{value:.{digits}g}"
        return str(value)

    @staticmethod
    def display_error_message(error_message: str) -> None:
        """
        Display an error message in the console with a bold red style.
        Args:
            error_message (str): The error message to be displayed.
        """
        console = Console()
        error_text = Text(error_message, style="bold red")
        console.print(error_text)

    @staticmethod
    def display_info_message(info_message: str) -> None:
        console = Console()
        info_text = Text(info_message, style="bold green")
        console.print(info_text)

    @staticmethod
    def display_message(message: str) -> None:
        console = Console()
        message_text = Text(message, style="bold magenta")
        console.print(message_text)

    @staticmethod
    def display_warning_message(message: str) -> None:
        """
        Display a warning message in the console with a bold yellow style.
        Args:
            message (str): The warning message to be displayed.
        """
        console = Console()
        message_text = Text(message, style="bold yellow")
        console.print(message_text)

    @staticmethod
    def display_json(document: str) -> None:
        # Machine-readable output stays free of styling.
        click.echo(document)

    @staticmethod
    def display_summary_line(label: str, ok: bool, elapsed: float) -> None:
        colour = Fore.GREEN if ok else Fore.RED
        status = "ok" if ok else "failed"
        click.echo(f"{colour}{label}: {status}{Style.RESET_ALL} ({elapsed:.2f} s)")

    def display_table(self, title: str, columns: Sequence[str], rows: List[Sequence[Any]]) -> None:
        """
        Display rows in a rich table.

        Args:
            title (str): The table title.
            columns (Sequence[str]): Column headers.
            rows (List[Sequence[Any]]): One sequence of cell values per row; numbers are
                formatted with format_number.
        """
        console = Console()

        table = Table(title=title, show_header=True, header_style="bold magenta", box=ROUNDED, expand=True)
        for column in columns:
            table.add_column(escape(column))

        for row in rows:
            table.add_row(*(self.format_number(value) for value in row))

        console.print(table)

    def display_output_files(self, paths: List[str]) -> None:
        for path in paths:
            self.display_info_message(f"Wrote {path}")
