"""Command-line entry point for coarse-bezout."""

import sys

from src.cli.runner import run
from src.utils.logger import get_logger

# Initialize logger
logger = get_logger()


def main() -> int:
    """Run one verb and return its exit code."""
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
