"""Shared builders for synthetic portfolio/factor file text and panels."""

import numpy as np
import pytest

from matfactor.data import MonthStamp, MatrixPanel, month_range

# one line per acceptance criterion, echoed after the run summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_portfolio_text(dates, values_by_block, n1, n2, banner="  Banner line\n"):
    """Assemble a portfolio-file body in the downloaded-monthly layout.

    values_by_block: list of T x (n1*n2) float arrays, one per block
    (value-weighted first, equal-weighted second by convention).
    """
    cols = [f"c{i}" for i in range(n1 * n2)]
    header = "," + ",".join(cols) + "\n"
    out = [banner]
    for b, block in enumerate(values_by_block):
        if b:
            out.append(f"\n  Block {b} description\n")
        out.append(header)
        for d, row in zip(dates, block):
            cells = ",".join(f"{v:.4f}" for v in row)
            out.append(f"{d}," + cells + "\n")
    out.append("\n  Copyright footer\n")
    return "".join(out)


def make_factor_text(dates, names, values, annual_junk=True):
    header = "," + ",".join(names) + "\n"
    out = ["  Factor file banner\n", header]
    for d, row in zip(dates, values):
        out.append(f"{d}," + ",".join(f"{v:.2f}" for v in row) + "\n")
    if annual_junk:
        out.append("\n  Annual Factors: January-December\n")
        out.append(header)
        out.append("2001," + ",".join("0.00" for _ in names) + "\n")
    return "".join(out)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def small_panel():
    """Seeded 12-month 3x2 panel with no missing entries."""
    gen = np.random.default_rng(7)
    dates = month_range(MonthStamp(2001, 1), MonthStamp(2001, 12))
    values = gen.standard_normal((12, 3, 2))
    return MatrixPanel(
        dates=dates,
        values=values,
        row_labels=["r1", "r2", "r3"],
        col_labels=["c1", "c2"],
        missing=np.zeros((12, 3, 2), dtype=bool),
    )
