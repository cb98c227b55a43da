"""Parsers for French-data-library CSV files and sample alignment.

The library files share one layout: a free-text preamble, a header row whose
first cell is empty, then monthly rows keyed by YYYYMM. Annual summary blocks
follow after a blank line and are keyed by 4-digit years, so a token that is
not 6 digits terminates the monthly block. Sentinels -99.99 and -999 mark
missing cells.
"""

from __future__ import annotations

from typing import IO, Iterable

import numpy as np

from .data import AlignedDataset, FactorSeries, MatrixPanel, MonthStamp, StockPanel, month_range
from .errors import DomainError, ParseError, SchemaError, StructuralError

__all__ = [
    "parse_ff_portfolio_csv",
    "parse_ff_factors_csv",
    "merge_factor_series",
    "align_and_filter",
    "min_obs_filter",
]

_SENTINELS = (-99.99, -999.0)


def _lines_of(text: str | IO[str] | Iterable[str]) -> list[str]:
    if hasattr(text, "read"):
        text = text.read()
    if isinstance(text, str):
        return text.splitlines()
    return [line.rstrip("\n") for line in text]


def _is_month_token(token: str) -> bool:
    token = token.strip()
    return len(token) == 6 and token.isdigit()


def _iter_monthly_blocks(lines: list[str]):
    """Yield (header_cells, [(lineno, cells), ...]) per monthly block.

    A block is any maximal run of rows whose first cell is a 6-digit token;
    the most recent row with an empty first cell supplies its header.
    """
    header: list[str] | None = None
    block: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(lines, start=1):
        cells = line.split(",")
        first = cells[0].strip()
        if _is_month_token(first):
            block.append((lineno, cells))
            continue
        if block:
            yield header, block
            block = []
        if line.strip() and first == "" and len(cells) > 1:
            header = cells
    if block:
        yield header, block


def parse_ff_portfolio_csv(text, n1: int, n2: int, block: int = 0) -> MatrixPanel:
    """Parse a French-library portfolio file into a MatrixPanel.

    Parameters
    ----------
    text : str or file-like
        Raw CSV contents.
    n1, n2 : int
        Grid shape; the file must carry n1*n2 portfolio columns. Portfolio
        k (0-based) maps to cell (k // n2, k % n2), i.e. size-major.
    block : int
        Which monthly block to read. The library files put value-weighted
        returns in block 0 and equal-weighted returns in block 1.

    Returns
    -------
    MatrixPanel
        Sentinel values -99.99 and -999 become missing-mask entries.
    """
    blocks = list(_iter_monthly_blocks(_lines_of(text)))
    if block >= len(blocks):
        raise StructuralError(f"file has {len(blocks)} monthly block(s), wanted index {block}")
    header, rows = blocks[block]
    expected = n1 * n2
    dates, vals, miss = [], [], []
    for lineno, cells in rows:
        if len(cells) - 1 != expected:
            raise StructuralError(
                f"line {lineno}: expected {expected} portfolio columns, got {len(cells) - 1}")
        dates.append(_parse_yyyymm(cells[0], lineno))
        row = np.empty(expected)
        row_miss = np.zeros(expected, dtype=bool)
        for k, cell in enumerate(cells[1:]):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"bad numeric cell {cell!r}", lineno) from None
            if v in _SENTINELS:
                row[k], row_miss[k] = np.nan, True
            else:
                row[k] = v
        vals.append(row)
        miss.append(row_miss)
    values = np.array(vals).reshape(len(dates), n1, n2)
    missing = np.array(miss).reshape(len(dates), n1, n2)
    row_labels = [f"size{i + 1}" for i in range(n1)]
    col_labels = [f"bm{j + 1}" for j in range(n2)]
    return MatrixPanel(dates, values, row_labels, col_labels, missing)


def _parse_yyyymm(token: str, lineno: int) -> MonthStamp:
    token = token.strip()
    try:
        return MonthStamp(int(token[:4]), int(token[4:]))
    except (ValueError, DomainError) as exc:
        raise ParseError(f"bad date token {token!r}: {exc}", lineno) from None


def parse_ff_factors_csv(text, expected_names: list[str]) -> FactorSeries:
    """Parse a French-library factor file into a FactorSeries.

    All columns of the monthly block are returned; `expected_names` must
    each appear in the header (after trimming) or a SchemaError is raised.
    """
    blocks = list(_iter_monthly_blocks(_lines_of(text)))
    if not blocks:
        raise ParseError("no monthly data block found")
    header, rows = blocks[0]
    if header is None:
        raise SchemaError("no header row precedes the monthly block")
    names = [c.strip() for c in header[1:] if c.strip()]
    for wanted in expected_names:
        if wanted not in names:
            raise SchemaError(f"expected column {wanted!r} not in header {names}")
    dates, vals = [], []
    seen: set[MonthStamp] = set()
    for lineno, cells in rows:
        date = _parse_yyyymm(cells[0], lineno)
        if date in seen:
            raise StructuralError(f"line {lineno}: duplicate date {date}")
        seen.add(date)
        if len(cells) - 1 < len(names):
            raise StructuralError(
                f"line {lineno}: expected {len(names)} value columns, got {len(cells) - 1}")
        row = []
        for cell in cells[1 : 1 + len(names)]:
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"bad numeric cell {cell!r}", lineno) from None
            row.append(np.nan if v in _SENTINELS else v)
        dates.append(date)
        vals.append(row)
    order = np.argsort([d.index for d in dates])
    dates = [dates[i] for i in order]
    values = np.array(vals, dtype=np.float64)[order]
    return FactorSeries(dates, names, values)


def merge_factor_series(*series: FactorSeries) -> FactorSeries:
    """Join factor series on their common dates; names must be disjoint."""
    if not series:
        raise DomainError("nothing to merge")
    common = set(series[0].dates)
    for s in series[1:]:
        common &= set(s.dates)
    if not common:
        raise DomainError("merged factor series share no dates")
    dates = sorted(common)
    names: list[str] = []
    for s in series:
        overlap = set(names) & set(s.names)
        if overlap:
            raise StructuralError(f"duplicate factor names across inputs: {sorted(overlap)}")
        names.extend(s.names)
    values = np.hstack([s.restrict(dates).values for s in series])
    return FactorSeries(dates, names, values)


def align_and_filter(
    panel: MatrixPanel,
    factors: FactorSeries,
    stocks: StockPanel | None,
    start: MonthStamp,
    end: MonthStamp,
    exclusions: list[tuple[MonthStamp, MonthStamp]] = (),
) -> AlignedDataset:
    """Restrict all inputs to [start, end] minus exclusion ranges.

    The sample is the set of months in the window, minus every exclusion
    range (inclusive on both ends), intersected with the dates present in
    each provided series. An empty result raises DomainError.
    """
    excluded: set[MonthStamp] = set()
    for lo, hi in exclusions:
        excluded.update(month_range(lo, hi))
    sample = [d for d in month_range(start, end) if d not in excluded]
    for part in (panel, factors) + ((stocks,) if stocks is not None else ()):
        have = set(part.dates)
        sample = [d for d in sample if d in have]
    if not sample:
        raise DomainError("alignment produced an empty sample")
    return AlignedDataset(
        panel.restrict(sample),
        factors.restrict(sample),
        stocks.restrict(sample) if stocks is not None else None,
        sample,
    )


def min_obs_filter(stocks: StockPanel, min_obs: int) -> StockPanel:
    """Keep stocks with strictly more than min_obs non-missing returns."""
    if min_obs < 0:
        raise DomainError("min_obs must be non-negative")
    keep = np.flatnonzero(stocks.obs_counts() > min_obs)
    return StockPanel(
        list(stocks.dates),
        [stocks.stock_ids[i] for i in keep],
        stocks.returns[:, keep],
        stocks.missing[:, keep],
    )
