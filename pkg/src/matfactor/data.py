"""Core value types for dated matrix panels and factor series.

Every dated container keeps its dates as MonthStamp lists sorted strictly
ascending. Serialization goes through the canonical CSV/JSON formats defined
here; floats are written with repr so a round trip is value-exact.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParseError, StructuralError

__all__ = [
    "MonthStamp",
    "MatrixPanel",
    "FactorSeries",
    "StockPanel",
    "AlignedDataset",
    "month_range",
    "parse_month",
    "format_float",
    "atomic_write_text",
    "save_matrix_panel",
    "load_matrix_panel",
    "save_factor_series",
    "load_factor_series",
    "save_stock_panel",
    "load_stock_panel",
    "save_aligned_dataset",
    "load_aligned_dataset",
]


@dataclass(frozen=True, order=True)
class MonthStamp:
    """A calendar month. Ordering is lexicographic on (year, month)."""

    year: int
    month: int

    def __post_init__(self):
        if not (1900 <= self.year <= 2100):
            raise DomainError(f"year {self.year} outside [1900, 2100]")
        if not (1 <= self.month <= 12):
            raise DomainError(f"month {self.month} outside [1, 12]")

    @property
    def index(self) -> int:
        return self.year * 12 + (self.month - 1)

    def __str__(self) -> str:
        return f"{self.year:04d}{self.month:02d}"

    def iso(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


def parse_month(token: str, line_number: int | None = None) -> MonthStamp:
    """Parse 'YYYYMM' or 'YYYY-MM' into a MonthStamp."""
    token = token.strip()
    digits = token.replace("-", "", 1) if len(token) == 7 and token[4] == "-" else token
    if len(digits) != 6 or not digits.isdigit():
        raise ParseError(f"bad month token {token!r}", line_number)
    try:
        return MonthStamp(int(digits[:4]), int(digits[4:]))
    except DomainError as exc:
        raise ParseError(f"bad month token {token!r}: {exc}", line_number) from exc


def month_range(start: MonthStamp, end: MonthStamp) -> list[MonthStamp]:
    """All months from start to end inclusive."""
    if end < start:
        raise DomainError(f"month range end {end} precedes start {start}")
    out = []
    y, m = start.year, start.month
    while (y, m) <= (end.year, end.month):
        out.append(MonthStamp(y, m))
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return out


def _check_dates(dates: list[MonthStamp]) -> None:
    for a, b in zip(dates, dates[1:]):
        if not a < b:
            raise StructuralError(f"dates not strictly increasing at {a}/{b}")


@dataclass(eq=False)
class MatrixPanel:
    """A dated sequence of n1 x n2 return matrices with a missing mask.

    Missing cells hold NaN in `values` and True in `missing`; all other
    entries must be finite.
    """

    dates: list[MonthStamp]
    values: np.ndarray
    row_labels: list[str]
    col_labels: list[str]
    missing: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.missing = np.asarray(self.missing, dtype=bool)
        _check_dates(self.dates)
        t, n1, n2 = len(self.dates), len(self.row_labels), len(self.col_labels)
        if self.values.shape != (t, n1, n2):
            raise StructuralError(
                f"values shape {self.values.shape} != ({t}, {n1}, {n2})")
        if self.missing.shape != self.values.shape:
            raise StructuralError("missing mask shape mismatch")
        if not np.all(np.isfinite(self.values[~self.missing])):
            raise DomainError("non-missing panel entries must be finite")

    @property
    def n1(self) -> int:
        return len(self.row_labels)

    @property
    def n2(self) -> int:
        return len(self.col_labels)

    @property
    def n_periods(self) -> int:
        return len(self.dates)

    def restrict(self, dates: list[MonthStamp]) -> "MatrixPanel":
        idx = _restrict_index(self.dates, dates)
        return MatrixPanel(list(dates), self.values[idx], list(self.row_labels),
                           list(self.col_labels), self.missing[idx])


@dataclass(eq=False)
class FactorSeries:
    """Dated named series with no missing entries."""

    dates: list[MonthStamp]
    names: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        _check_dates(self.dates)
        if len(set(self.names)) != len(self.names):
            raise StructuralError("factor names must be unique")
        if self.values.shape != (len(self.dates), len(self.names)):
            raise StructuralError(
                f"values shape {self.values.shape} != ({len(self.dates)}, {len(self.names)})")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("factor series must be complete and finite")

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.names.index(name)
        except ValueError:
            raise DomainError(f"no factor named {name!r}") from None
        return self.values[:, j]

    def restrict(self, dates: list[MonthStamp]) -> "FactorSeries":
        idx = _restrict_index(self.dates, dates)
        return FactorSeries(list(dates), list(self.names), self.values[idx])


@dataclass(eq=False)
class StockPanel:
    """Dated returns for n stocks with a missing mask."""

    dates: list[MonthStamp]
    stock_ids: list[str]
    returns: np.ndarray
    missing: np.ndarray

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=np.float64)
        self.missing = np.asarray(self.missing, dtype=bool)
        _check_dates(self.dates)
        if len(set(self.stock_ids)) != len(self.stock_ids):
            raise StructuralError("stock ids must be unique")
        shape = (len(self.dates), len(self.stock_ids))
        if self.returns.shape != shape or self.missing.shape != shape:
            raise StructuralError(f"stock panel arrays must have shape {shape}")
        if not np.all(np.isfinite(self.returns[~self.missing])):
            raise DomainError("non-missing stock returns must be finite")

    def obs_counts(self) -> np.ndarray:
        return (~self.missing).sum(axis=0)

    def restrict(self, dates: list[MonthStamp]) -> "StockPanel":
        idx = _restrict_index(self.dates, dates)
        return StockPanel(list(dates), list(self.stock_ids), self.returns[idx],
                          self.missing[idx])


@dataclass(eq=False)
class AlignedDataset:
    """Panel, factors, and optional stocks restricted to one sample."""

    panel: MatrixPanel
    factors: FactorSeries
    stocks: StockPanel | None
    sample_dates: list[MonthStamp]

    def __post_init__(self):
        for part in (self.panel, self.factors) + ((self.stocks,) if self.stocks else ()):
            if part.dates != self.sample_dates:
                raise StructuralError("dataset parts must share sample_dates exactly")


def _restrict_index(have: list[MonthStamp], want: list[MonthStamp]) -> list[int]:
    pos = {d: i for i, d in enumerate(have)}
    try:
        return [pos[d] for d in want]
    except KeyError as exc:
        raise DomainError(f"date {exc.args[0]} not present in series") from None


# ---------------------------------------------------------------------------
# canonical serialization


def format_float(x: float) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(x))


def atomic_write_text(path: str, text: str) -> None:
    """Write text to path via a temp file + rename so readers never see
    a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_cell(value: float, is_missing: bool) -> str:
    return "" if is_missing else format_float(value)


def save_matrix_panel(panel: MatrixPanel, out_dir: str, stem: str = "panel") -> str:
    """Write <stem>.csv plus <stem>.manifest.json; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    header = ["date"] + [f"r{i + 1}c{j + 1}" for i in range(panel.n1) for j in range(panel.n2)]
    lines = [",".join(header)]
    flat_vals = panel.values.reshape(panel.n_periods, -1)
    flat_miss = panel.missing.reshape(panel.n_periods, -1)
    for t, date in enumerate(panel.dates):
        cells = [_csv_cell(flat_vals[t, k], flat_miss[t, k]) for k in range(flat_vals.shape[1])]
        lines.append(",".join([str(date)] + cells))
    csv_name = f"{stem}.csv"
    atomic_write_text(os.path.join(out_dir, csv_name), "\n".join(lines) + "\n")
    manifest = {
        "kind": "matrix_panel",
        "n1": panel.n1,
        "n2": panel.n2,
        "dates": [str(d) for d in panel.dates],
        "row_labels": panel.row_labels,
        "col_labels": panel.col_labels,
        "values_csv": csv_name,
        "missing_count": int(panel.missing.sum()),
    }
    manifest_path = os.path.join(out_dir, f"{stem}.manifest.json")
    atomic_write_text(manifest_path, json.dumps(manifest, indent=2) + "\n")
    return manifest_path


def load_matrix_panel(manifest_path: str) -> MatrixPanel:
    with open(manifest_path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    if manifest.get("kind") != "matrix_panel":
        raise StructuralError(f"{manifest_path} is not a matrix_panel manifest")
    n1, n2 = manifest["n1"], manifest["n2"]
    csv_path = os.path.join(os.path.dirname(manifest_path), manifest["values_csv"])
    dates, rows, mask_rows = [], [], []
    with open(csv_path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 1 + n1 * n2:
            raise StructuralError(f"{csv_path}:{lineno}: expected {1 + n1 * n2} cells")
        dates.append(parse_month(cells[0], lineno))
        row = np.full(n1 * n2, np.nan)
        miss = np.zeros(n1 * n2, dtype=bool)
        for k, cell in enumerate(cells[1:]):
            if cell == "":
                miss[k] = True
            else:
                row[k] = float(cell)
        rows.append(row)
        mask_rows.append(miss)
    values = np.array(rows).reshape(len(dates), n1, n2)
    missing = np.array(mask_rows).reshape(len(dates), n1, n2)
    return MatrixPanel(dates, values, list(manifest["row_labels"]),
                       list(manifest["col_labels"]), missing)


def save_factor_series(series: FactorSeries, path: str) -> None:
    lines = [",".join(["date"] + series.names)]
    for t, date in enumerate(series.dates):
        lines.append(",".join([str(date)] + [format_float(v) for v in series.values[t]]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_factor_series(path: str) -> FactorSeries:
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise ParseError("empty factor file")
    names = [c.strip() for c in lines[0].split(",")[1:]]
    dates, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 1 + len(names):
            raise StructuralError(f"{path}:{lineno}: expected {1 + len(names)} cells")
        dates.append(parse_month(cells[0], lineno))
        rows.append([float(c) for c in cells[1:]])
    return FactorSeries(dates, names, np.array(rows, dtype=np.float64))


def save_stock_panel(stocks: StockPanel, path: str) -> None:
    lines = [",".join(["date"] + stocks.stock_ids)]
    for t, date in enumerate(stocks.dates):
        cells = [_csv_cell(stocks.returns[t, k], stocks.missing[t, k])
                 for k in range(len(stocks.stock_ids))]
        lines.append(",".join([str(date)] + cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_stock_panel(path: str) -> StockPanel:
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise ParseError("empty stock file")
    ids = [c.strip() for c in lines[0].split(",")[1:]]
    dates, rows, mask_rows = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 1 + len(ids):
            raise StructuralError(f"{path}:{lineno}: expected {1 + len(ids)} cells")
        dates.append(parse_month(cells[0], lineno))
        row = np.full(len(ids), np.nan)
        miss = np.zeros(len(ids), dtype=bool)
        for k, cell in enumerate(cells[1:]):
            if cell == "":
                miss[k] = True
            else:
                row[k] = float(cell)
        rows.append(row)
        mask_rows.append(miss)
    return StockPanel(dates, ids, np.array(rows), np.array(mask_rows))


def save_aligned_dataset(dataset: AlignedDataset, out_dir: str) -> str:
    """Write all dataset parts plus dataset.json; returns the dataset.json path."""
    os.makedirs(out_dir, exist_ok=True)
    save_matrix_panel(dataset.panel, out_dir, "panel")
    save_factor_series(dataset.factors, os.path.join(out_dir, "factors.csv"))
    entry = {
        "kind": "aligned_dataset",
        "sample_dates": [str(d) for d in dataset.sample_dates],
        "panel_manifest": "panel.manifest.json",
        "factors_csv": "factors.csv",
        "stocks_csv": None,
    }
    if dataset.stocks is not None:
        save_stock_panel(dataset.stocks, os.path.join(out_dir, "stocks.csv"))
        entry["stocks_csv"] = "stocks.csv"
    path = os.path.join(out_dir, "dataset.json")
    atomic_write_text(path, json.dumps(entry, indent=2) + "\n")
    return path


def load_aligned_dataset(directory: str) -> AlignedDataset:
    with open(os.path.join(directory, "dataset.json"), encoding="utf-8") as handle:
        entry = json.load(handle)
    if entry.get("kind") != "aligned_dataset":
        raise StructuralError("dataset.json is not an aligned_dataset manifest")
    panel = load_matrix_panel(os.path.join(directory, entry["panel_manifest"]))
    factors = load_factor_series(os.path.join(directory, entry["factors_csv"]))
    stocks = None
    if entry.get("stocks_csv"):
        stocks = load_stock_panel(os.path.join(directory, entry["stocks_csv"]))
    dates = [parse_month(tok) for tok in entry["sample_dates"]]
    return AlignedDataset(panel, factors, stocks, dates)
