"""
Command-line argument definitions for the tensor-power growth tools.
Every command shares the same flags, defined once here.
"""

import argparse

COMMANDS = {
    "growth": "Compute the growth series b_n and write series.csv",
    "fit": "Fit the exponent of b_n (dim V)^-n and write fit.json",
    "check": "Run the exact-pipeline invariant suite and write check.json",
    "gauss": "Compare exact values with Gaussian estimates; write compare.csv and moments.json",
}


def add_common_cli_args(parser: argparse.ArgumentParser) -> None:
    """
    Add the arguments shared by every command.

    Args:
        parser: The argument parser to add arguments to
    """
    parser.add_argument("--config", help="Experiment config (JSON or YAML)", default=None)
    parser.add_argument(
        "--out",
        help="Output directory, overrides output_dir from the config",
        default=None,
    )
    parser.add_argument("--group", help="Cartan type such as A2xT1", default=None)
    parser.add_argument(
        "--rep",
        help='Summands as JSON, e.g. \'[{"highest_weight": [1, 0], "multiplicity": 1}]\'',
        default=None,
    )
    parser.add_argument("--nmax", help="Largest tensor power", type=int, default=None)
    parser.add_argument(
        "-v", "--verbose", help="Enable verbose logging", action="store_true"
    )


def create_cli_parser() -> argparse.ArgumentParser:
    """
    Create the parser with one subcommand per entry of COMMANDS.

    Returns:
        argparse.ArgumentParser: Configured parser
    """
    parser = argparse.ArgumentParser(
        description="Tensor power decomposition and growth of b_n", prog="rep_growth"
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to run")
    for name, help_text in COMMANDS.items():
        add_common_cli_args(subparsers.add_parser(name, help=help_text))
    return parser
