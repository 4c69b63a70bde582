"""Brusselator timing table (detect, color, sparse and dense Jacobians)."""
import sys

from asdtrace.cli import main

sys.exit(main(["bench", "--sizes", "6,12,24", "--repeats", "3"] + sys.argv[1:]))
