#!/usr/bin/env python3

import sys
import os

# Add the project root to the Python path
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from rep_growth.cli.args import create_cli_parser
from rep_growth.cli.commands import run_command


def main():
    """
    Main entry point for the rep_growth package.
    Dispatches to the appropriate subcommand.
    """
    parser = create_cli_parser()
    args = parser.parse_args()

    if args.command is None:
        parser.print_help()
        sys.exit(1)
    sys.exit(run_command(args))


if __name__ == "__main__":
    main()
