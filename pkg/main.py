#!/usr/bin/env python3
"""
opseq: operation-sequence compiler, interpreter and evaluator

This script provides a command-line interface to opseq, for compiling
aligned corpora into operation sequences, restoring them, and scoring
streaming hypotheses.
"""

import os
import sys

# Ensure the package is in the path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

# Import and run the CLI
from opseq.cli import app

if __name__ == "__main__":
    app()
