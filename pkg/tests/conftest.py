"""Shared helpers for the test suite."""

import numpy as np
import pytest

from handstates.cli import main as cli_main


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def run_cli(*argv) -> int:
    """Invoke the CLI in-process; returns its exit code."""
    return cli_main([str(a) for a in argv])


@pytest.fixture
def cli():
    return run_cli
