"""Console and logging helpers shared by all viscofit commands."""

from __future__ import annotations

import logging
from contextlib import AbstractContextManager, nullcontext
from pathlib import Path
from typing import TYPE_CHECKING, Any

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.status import Status
from rich.table import Table
from rich.text import Text

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence
    from logging import Handler

console = Console()


def create_status(text: str, style: str = "bold yellow", *, quiet: bool = False) -> AbstractContextManager[Any]:
    """Creates a default status with spinner; a no-op context when quiet."""
    if quiet:
        return nullcontext()
    spinner_text = Text(text, style=style)
    return Status(spinner_text, console=console, spinner="dots")


def print_output_panel(
    text: str,
    title: str = "Output",
    subtitle: str = "",
    style: str = "bold green",
) -> None:
    """Prints a panel with the output text."""
    console.print(Panel(text, title=title, subtitle=subtitle, border_style=style))


def print_error_message(message: str, suggestion: str | None = None) -> None:
    """Prints an error message in a panel."""
    error_text = Text(message)
    if suggestion:
        error_text.append("\n\n")
        error_text.append(suggestion)
    console.print(Panel(error_text, title="Error", border_style="bold red"))


def print_with_style(message: str, style: str = "bold green") -> None:
    """Prints a status message."""
    console.print(f"[{style}]{message}[/{style}]")


def print_table(
    title: str,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
) -> None:
    """Print rows as a rich table; floats use six significant digits."""
    table = Table(title=title, show_header=True, header_style="bold magenta")
    for i, column in enumerate(columns):
        table.add_column(column, style="cyan" if i == 0 else "green", no_wrap=i == 0)
    for row in rows:
        table.add_row(*(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))
    console.print(table)


def setup_logging(log_level: str, log_file: str | None, *, quiet: bool) -> None:
    """Route log records to stderr and, when given, to ``log_file``.

    With ``quiet`` only the file receives records, so stdout stays machine-readable.
    Numerical warnings from numpy and scipy are captured into the same handlers.
    """
    handlers: list[Handler] = []
    if not quiet:
        handlers.append(RichHandler(console=Console(stderr=True), show_path=False, markup=False))
    if log_file:
        file_handler = logging.FileHandler(log_file, mode="w")
        file_handler.setFormatter(logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s"))
        handlers.append(file_handler)

    logging.basicConfig(level=log_level.upper(), format="%(message)s", handlers=handlers, force=True)
    logging.captureWarnings(True)


PANEL_ORDER = (
    "Material Parameters",
    "Hardening Parameters",
    "Strain Program",
    "Noise Model",
    "Simulation",
    "Identification",
    "Monte Carlo",
    "Metric",
    "General Options",
)


def _format_value(value: Any) -> str:
    if value is None:
        return "[dim]None[/dim]"
    if isinstance(value, bool):
        return "[green]✓[/green]" if value else "[red]✗[/red]"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value) or "[dim]<empty>[/dim]"
    if isinstance(value, Path):
        return value.as_posix()
    return str(value)


def print_command_line_args(args: dict[str, Any]) -> None:
    """Print the resolved options of a command, grouped by help panel in the order of --help."""
    from viscofit import opts  # noqa: PLC0415

    groups: dict[str, list[tuple[str, Any]]] = {}
    for key, value in args.items():
        option = getattr(opts, key.upper(), None)
        panel = getattr(option, "rich_help_panel", None) or "Other"
        groups.setdefault(panel, []).append((key, value))

    table = Table(title="Resolved options", show_header=True, header_style="bold magenta")
    table.add_column("Option", style="cyan", no_wrap=True)
    table.add_column("Value", style="green")
    for panel in sorted(groups, key=lambda p: PANEL_ORDER.index(p) if p in PANEL_ORDER else len(PANEL_ORDER)):
        table.add_row(f"[bold yellow]── {panel} ──[/bold yellow]", "")
        for key, value in groups[panel]:
            table.add_row("--" + key.replace("_", "-"), _format_value(value))
    console.print(table)
