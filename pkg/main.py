#!/usr/bin/env python3
"""
Overpartition congruence tools
Entry point for the command-line subcommands (python main.py <subcommand> ...)
"""

import sys

from overpartitions.cli import run

if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
