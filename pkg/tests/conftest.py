import math

import numpy as np
import pytest

from brownmeasure import MeasureSpec


@pytest.fixture
def cauchy():
    return MeasureSpec.cauchy()


@pytest.fixture
def dirac():
    return MeasureSpec.dirac()


@pytest.fixture
def two_atoms():
    return MeasureSpec.atoms([(-1.0, 1 / 3), (1.0, 2 / 3)])


@pytest.fixture
def semicircle():
    return MeasureSpec.semicircle(1.0)


def semicircle_pdf(x, t):
    """Independent closed form of the semicircle law of variance ``t``."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.clip(4 * t - x * x, 0, None)) / (2 * math.pi * t)


def cauchy_poisson_i0(u, c):
    """``int dmu/((u-x)^2 + c^2)`` for the standard Cauchy law, by residues."""
    return (1 + c) / (c * (u * u + (1 + c) ** 2))


# -- acceptance report -------------------------------------------------------

ACCEPTANCE = {}


def record_criterion(number, label, ok, detail, elapsed):
    """Store a PASS/FAIL line for the terminal summary and echo it."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {label} | {detail} | {elapsed:.2f} s"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
