#!/usr/bin/env python3
"""
salt-lab command-line entry point.

Runs SALT Euler, rotating shallow-water, transport and Stratonovich
calculus experiments from configuration files.
"""

import sys

from src.cli import main as cli_main


def main() -> None:
    """Main entry point for the application."""
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
