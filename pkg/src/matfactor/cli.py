"""Command-line pipelines: ingest, estimate, evaluate, zoo, simulate.

Every command writes its outputs atomically into --out plus a
run_manifest.json recording resolved parameters, SHA-256 digests of the
inputs, the emitted paths, and the wall-clock duration. Outputs other than
the manifest are byte-identical across reruns with the same inputs and
seeds.

Exit codes: 0 success; 2 parse/schema/usage; 3 estimation degeneracy;
4 no stocks survive filtering; 5 dimensionality failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from ._version import __version__
from .cp import cp_fit, extract_cp_factors
from .data import (
    AlignedDataset,
    FactorSeries,
    atomic_write_text,
    format_float,
    load_aligned_dataset,
    load_factor_series,
    load_stock_panel,
    parse_month,
    save_aligned_dataset,
    save_factor_series,
    save_matrix_panel,
)
from .errors import (
    CollinearityError,
    DegeneracyError,
    DimensionalityError,
    DomainError,
    MatrixFactorError,
    NumericError,
    ParseError,
    SchemaError,
    StructuralError,
)
from .ingest import align_and_filter, merge_factor_series, parse_ff_factors_csv, parse_ff_portfolio_csv
from .regress import run_panel_evaluation
from .synth import simulate_cp, simulate_cross_section, simulate_tucker
from .tucker import extract_tucker_factors, iterative_tipup, rank_suggest_eigen_ratio
from .zoo import ZooDataset, double_selection

_PARSE_ERRORS = (ParseError, SchemaError, StructuralError)
_ESTIMATION_ERRORS = (DegeneracyError, NumericError, CollinearityError, DomainError)

EXIT_PARSE = 2
EXIT_ESTIMATION = 3
EXIT_NO_STOCKS = 4
EXIT_DIMENSION = 5


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _sanitize(obj):
    # JSON has no inf/nan literals; stringify them for portability
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if np.isfinite(value) else repr(value)
    return obj


def _write_json(path: str, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, default=_json_default) + "\n")


def _write_manifest(out_dir: str, command: str, params: dict, inputs: list[str],
                    outputs: list[str], started: float) -> None:
    manifest = {
        "command": command,
        "parameters": _sanitize(params),
        "inputs": {path: _sha256(path) for path in inputs},
        "outputs": sorted(os.path.relpath(p, out_dir) for p in outputs),
        "version": __version__,
        "duration_seconds": time.monotonic() - started,
    }
    _write_json(os.path.join(out_dir, "run_manifest.json"), manifest)


def _month_arg(token: str):
    try:
        return parse_month(token)
    except MatrixFactorError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _exclusion_arg(token: str):
    try:
        lo, hi = token.split(":")
        return parse_month(lo), parse_month(hi)
    except (ValueError, MatrixFactorError) as exc:
        raise argparse.ArgumentTypeError(
            f"exclusion must look like 2007-01:2009-12, got {token!r}") from exc


# ---------------------------------------------------------------------------
# commands


def cmd_ingest(args) -> int:
    started = time.monotonic()
    try:
        with open(args.portfolios, encoding="utf-8") as handle:
            panel = parse_ff_portfolio_csv(handle, args.n1, args.n2,
                                           block=1 if args.equal_weighted else 0)
        with open(args.factors, encoding="utf-8") as handle:
            factors = parse_ff_factors_csv(handle, ["Mkt-RF", "SMB", "HML", "RF"])
        with open(args.momentum, encoding="utf-8") as handle:
            momentum = parse_ff_factors_csv(handle, ["Mom"])
        merged = merge_factor_series(factors, momentum)
        dataset = align_and_filter(panel, merged, None, args.start, args.end,
                                   args.exclude or [])
    except MatrixFactorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    save_aligned_dataset(dataset, args.out)
    outputs = [os.path.join(args.out, name) for name in
               ("dataset.json", "panel.csv", "panel.manifest.json", "factors.csv")]
    print(f"T = {len(dataset.sample_dates)}")
    print(f"n1 = {dataset.panel.n1}")
    print(f"n2 = {dataset.panel.n2}")
    print(f"missing cells = {int(dataset.panel.missing.sum())}")
    _write_manifest(args.out, "ingest", _params(args),
                    [args.portfolios, args.factors, args.momentum], outputs, started)
    return 0


def _params(args) -> dict:
    skip = {"func"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, list) and value and isinstance(value[0], tuple):
            value = [f"{lo}:{hi}" for lo, hi in value]
        out[key] = str(value) if not isinstance(value, (int, float, bool, str, type(None), list)) else value
    return out


def _load_dataset_panel(args) -> tuple[AlignedDataset, list[str]]:
    dataset = load_aligned_dataset(args.dataset)
    inputs = [os.path.join(args.dataset, "dataset.json"),
              os.path.join(args.dataset, "panel.manifest.json"),
              os.path.join(args.dataset, "panel.csv"),
              os.path.join(args.dataset, "factors.csv")]
    stocks_csv = os.path.join(args.dataset, "stocks.csv")
    if dataset.stocks is not None and os.path.exists(stocks_csv):
        inputs.append(stocks_csv)
    return dataset, inputs


def cmd_tucker(args) -> int:
    started = time.monotonic()
    try:
        dataset, inputs = _load_dataset_panel(args)
    except (MatrixFactorError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    r1, r2 = args.ranks
    try:
        model = iterative_tipup(dataset.panel, r1, r2, args.h0, args.max_iter, args.tol)
        series = extract_tucker_factors(dataset.panel, model)
        max_rank_rows = min(8, dataset.panel.n1)
        max_rank_cols = min(8, dataset.panel.n2)
        suggest_rows = rank_suggest_eigen_ratio(dataset.panel, "rows", max_rank_rows, args.h0)
        suggest_cols = rank_suggest_eigen_ratio(dataset.panel, "cols", max_rank_cols, args.h0)
    except _ESTIMATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    os.makedirs(args.out, exist_ok=True)
    model_path = os.path.join(args.out, "tucker_model.json")
    _write_json(model_path, {
        "kind": "tucker_model",
        "ranks": [r1, r2],
        "h0": args.h0,
        "iterations": model.iterations,
        "converged": model.converged,
        "rank_suggestion": {"rows": suggest_rows, "cols": suggest_cols},
        "R": model.R,
        "C": model.C,
        "factors": model.factors,
    })
    factors_path = os.path.join(args.out, "tucker_factors.csv")
    save_factor_series(series, factors_path)
    print(f"converged = {model.converged} after {model.iterations} iterations")
    print(f"chosen ranks = ({r1}, {r2}); eigen-ratio suggestion = "
          f"({suggest_rows}, {suggest_cols})")
    _write_manifest(args.out, "tucker", _params(args), inputs,
                    [model_path, factors_path], started)
    return 0


def cmd_cp(args) -> int:
    started = time.monotonic()
    try:
        dataset, inputs = _load_dataset_panel(args)
    except (MatrixFactorError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        model = cp_fit(dataset.panel, args.rank, args.h0, args.max_iter, args.tol)
        series = extract_cp_factors(dataset.panel, model)
    except _ESTIMATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    os.makedirs(args.out, exist_ok=True)
    model_path = os.path.join(args.out, "cp_model.json")
    _write_json(model_path, {
        "kind": "cp_model",
        "r": model.r,
        "h0": args.h0,
        "iterations": model.iterations,
        "converged": model.converged,
        "A": model.A,
        "B": model.B,
        "A_tilde": model.A_tilde,
        "B_tilde": model.B_tilde,
        "factors": model.factors,
        "rss_path": model.rss_path,
    })
    factors_path = os.path.join(args.out, "cp_factors.csv")
    save_factor_series(series, factors_path)
    print(f"converged = {model.converged} after {model.iterations} iterations")
    _write_manifest(args.out, "cp", _params(args), inputs,
                    [model_path, factors_path], started)
    return 0


def cmd_evaluate(args) -> int:
    started = time.monotonic()
    try:
        dataset, inputs = _load_dataset_panel(args)
        stocks = load_stock_panel(args.stocks)
        stat_factors = load_factor_series(args.stat_factors)
        inputs += [args.stocks, args.stat_factors]
        if "RF" not in dataset.factors.names:
            raise SchemaError("dataset factors must include an RF column")
        if stocks.dates != dataset.sample_dates or stat_factors.dates != dataset.sample_dates:
            raise StructuralError("stocks and stat factors must cover the dataset sample dates")
    except (MatrixFactorError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rf = dataset.factors.column("RF")
    control_names = [n for n in dataset.factors.names if n != "RF"]
    controls = FactorSeries(dataset.sample_dates, control_names,
                            np.column_stack([dataset.factors.column(n) for n in control_names]))
    try:
        summary = run_panel_evaluation(stocks, controls, stat_factors, rf,
                                       args.min_obs, args.residualize)
    except _ESTIMATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    if not summary.rows:
        print("error: zero stocks survive filtering", file=sys.stderr)
        return EXIT_NO_STOCKS
    os.makedirs(args.out, exist_ok=True)
    per_stock_path = os.path.join(args.out, "per_stock.csv")
    lines = ["stock_id,n_obs,r2_reduced,r2_full,f_stat,p_value"]
    for row in summary.rows:
        lines.append(",".join([
            row.stock_id, str(row.n_obs), format_float(row.r2_reduced),
            format_float(row.r2_full), format_float(row.f_stat), format_float(row.p_value)]))
    atomic_write_text(per_stock_path, "\n".join(lines) + "\n")
    hist_r2_path = os.path.join(args.out, "histogram_r2.csv")
    edges = np.linspace(0.0, 1.0, len(summary.r2_full_hist) + 1)
    lines = ["bin_low,bin_high,count_reduced,count_full"]
    for b in range(len(summary.r2_full_hist)):
        lines.append(",".join([format_float(edges[b]), format_float(edges[b + 1]),
                               str(int(summary.r2_reduced_hist[b])),
                               str(int(summary.r2_full_hist[b]))]))
    atomic_write_text(hist_r2_path, "\n".join(lines) + "\n")
    hist_p_path = os.path.join(args.out, "histogram_pvalues.csv")
    lines = ["bin_low,bin_high,count"]
    for b in range(len(summary.p_value_hist)):
        lines.append(",".join([format_float(edges[b]), format_float(edges[b + 1]),
                               str(int(summary.p_value_hist[b]))]))
    atomic_write_text(hist_p_path, "\n".join(lines) + "\n")
    summary_path = os.path.join(args.out, "summary.json")
    _write_json(summary_path, {
        "kind": "panel_summary",
        "n_stocks": len(summary.rows),
        "n_skipped": len(summary.skipped),
        "skipped": [{"stock_id": sid, "reason": reason} for sid, reason in summary.skipped],
        "mean_r2_reduced": summary.mean_r2_reduced,
        "mean_r2_full": summary.mean_r2_full,
        "median_r2_reduced": summary.median_r2_reduced,
        "median_r2_full": summary.median_r2_full,
        "share_p_05": summary.share_p_05,
        "share_p_10": summary.share_p_10,
        "residualized": bool(args.residualize),
        "min_obs": args.min_obs,
    })
    print(f"stocks evaluated = {len(summary.rows)}, skipped = {len(summary.skipped)}")
    print(f"mean R2: reduced = {summary.mean_r2_reduced:.4f}, full = {summary.mean_r2_full:.4f}")
    print(f"median R2: reduced = {summary.median_r2_reduced:.4f}, "
          f"full = {summary.median_r2_full:.4f}")
    print(f"share p<0.05 = {summary.share_p_05:.4f}, share p<0.10 = {summary.share_p_10:.4f}")
    print("reference values on proprietary CRSP stocks (informational only): "
          "mean R2 0.271 -> 0.401; p<0.05 share 68.9%; p<0.10 share 72.4%")
    _write_manifest(args.out, "evaluate", _params(args), inputs,
                    [per_stock_path, hist_r2_path, hist_p_path, summary_path], started)
    return 0


def _read_zoo_csv(path: str) -> tuple[list[str], list[str], np.ndarray]:
    """Zoo-format CSV: header 'id,<date1>,...'; one row per series."""
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise ParseError(f"{path} is empty")
    header = lines[0].split(",")
    dates = [c.strip() for c in header[1:]]
    ids, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise StructuralError(f"{path}:{lineno}: expected {len(header)} cells")
        ids.append(cells[0].strip())
        try:
            rows.append([float(c) for c in cells[1:]])
        except ValueError as exc:
            raise ParseError(f"bad numeric cell: {exc}", lineno) from None
    if not rows:
        raise StructuralError(f"{path} has a header but no data rows")
    return ids, dates, np.array(rows, dtype=np.float64)


def _write_zoo_csv(path: str, ids: list[str], dates: list[str], values: np.ndarray) -> None:
    lines = [",".join(["id"] + dates)]
    for i, row_id in enumerate(ids):
        lines.append(",".join([row_id] + [format_float(v) for v in values[i]]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def cmd_zoo(args) -> int:
    started = time.monotonic()
    try:
        asset_ids, asset_dates, assets = _read_zoo_csv(args.assets)
        _, control_dates, controls = _read_zoo_csv(args.controls)
        new_ids, new_dates, new_factors = _read_zoo_csv(args.new_factors)
        if asset_dates != control_dates or asset_dates != new_dates:
            raise StructuralError("the three input files must share the same date header")
        dataset = ZooDataset(assets, controls, new_factors)
    except MatrixFactorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        result = double_selection(dataset, cv_folds=args.folds, seed=args.seed)
    except DimensionalityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except _ESTIMATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    os.makedirs(args.out, exist_ok=True)
    result_path = os.path.join(args.out, "zoo_result.json")
    _write_json(result_path, {
        "kind": "zoo_result",
        "new_factor_ids": new_ids,
        "lambda_g": result.lambda_g,
        "lambda_cov": result.lambda_cov,
        "gamma0": result.gamma0,
        "selected_first": result.selected_first,
        "selected_second": result.selected_second,
        "selected_union": sorted(set(result.selected_first) | set(result.selected_second)),
        "wald": result.wald,
        "df": result.df,
        "p_value": result.p_value,
        "cov_singular": result.cov_singular,
        "tuning": result.tuning,
    })
    lam_txt = ", ".join(f"{name}={value:.6g}" for name, value in zip(new_ids, result.lambda_g))
    print(f"lambda_g: {lam_txt}")
    print(f"wald = {result.wald:.6g}, df = {result.df}, p_value = {result.p_value:.6g}")
    print(f"selected controls: first pass {len(result.selected_first)}, "
          f"second pass {len(result.selected_second)}")
    _write_manifest(args.out, "zoo", _params(args),
                    [args.assets, args.controls, args.new_factors], [result_path], started)
    return 0


def cmd_simulate(args) -> int:
    started = time.monotonic()
    os.makedirs(args.out, exist_ok=True)
    try:
        if args.kind == "tucker":
            panel, truth = simulate_tucker(args.n1, args.n2, args.r1, args.r2, args.t,
                                           args.ar, args.snr, args.seed, args.missing_rate)
            save_matrix_panel(panel, args.out, "panel")
            outputs = [os.path.join(args.out, "panel.csv"),
                       os.path.join(args.out, "panel.manifest.json")]
        elif args.kind == "cp":
            panel, truth = simulate_cp(args.n1, args.n2, args.r, args.t, args.angle,
                                       args.ar, args.snr, args.seed, args.missing_rate)
            save_matrix_panel(panel, args.out, "panel")
            outputs = [os.path.join(args.out, "panel.csv"),
                       os.path.join(args.out, "panel.manifest.json")]
        else:
            lambda_g = np.array(args.lambda_g, dtype=np.float64)
            dataset, truth = simulate_cross_section(args.n, args.p, args.r_new, args.t,
                                                    lambda_g, args.sparsity, args.seed)
            dates = [f"t{k + 1}" for k in range(args.t)]
            assets_path = os.path.join(args.out, "assets.csv")
            controls_path = os.path.join(args.out, "controls.csv")
            new_path = os.path.join(args.out, "new_factors.csv")
            _write_zoo_csv(assets_path, [f"asset{i + 1}" for i in range(args.n)],
                           dates, dataset.test_asset_returns)
            _write_zoo_csv(controls_path, [f"control{i + 1}" for i in range(args.p)],
                           dates, dataset.control_factors)
            _write_zoo_csv(new_path, [f"new{i + 1}" for i in range(args.r_new)],
                           dates, dataset.new_factors)
            outputs = [assets_path, controls_path, new_path]
    except MatrixFactorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    truth_path = os.path.join(args.out, "truth.json")
    _write_json(truth_path, _sanitize({
        "kind": truth.kind,
        "params": truth.params,
        "factor_ar": truth.factor_ar,
        "snr": truth.snr,
        "seed": truth.seed,
        "generator": truth.generator,
    }))
    outputs.append(truth_path)
    print(f"simulated {truth.kind} dataset with seed {truth.seed}")
    _write_manifest(args.out, f"simulate-{args.kind}", _params(args), [], outputs, started)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matfactor",
        description="Matrix factor models for financial panels")
    parser.add_argument("--version", action="version", version=f"matfactor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse and align portfolio/factor files")
    p_ingest.add_argument("--portfolios", required=True)
    p_ingest.add_argument("--factors", required=True)
    p_ingest.add_argument("--momentum", required=True)
    p_ingest.add_argument("--start", required=True, type=_month_arg, metavar="YYYY-MM")
    p_ingest.add_argument("--end", required=True, type=_month_arg, metavar="YYYY-MM")
    p_ingest.add_argument("--exclude", action="append", type=_exclusion_arg,
                          metavar="YYYY-MM:YYYY-MM", default=[])
    p_ingest.add_argument("--n1", type=int, default=10)
    p_ingest.add_argument("--n2", type=int, default=10)
    p_ingest.add_argument("--equal-weighted", action="store_true",
                          help="read the equal-weighted block instead of value-weighted")
    p_ingest.add_argument("--out", required=True)
    p_ingest.set_defaults(func=cmd_ingest)

    p_tucker = sub.add_parser("tucker", help="fit the orthonormal-loading bilinear model")
    p_tucker.add_argument("--dataset", required=True)
    p_tucker.add_argument("--ranks", required=True, type=int, nargs=2, metavar=("R1", "R2"))
    p_tucker.add_argument("--h0", type=int, default=1)
    p_tucker.add_argument("--max-iter", type=int, default=50)
    p_tucker.add_argument("--tol", type=float, default=1e-6)
    p_tucker.add_argument("--out", required=True)
    p_tucker.set_defaults(func=cmd_tucker)

    p_cp = sub.add_parser("cp", help="fit the rank-one-sum model")
    p_cp.add_argument("--dataset", required=True)
    p_cp.add_argument("--rank", required=True, type=int)
    p_cp.add_argument("--h0", type=int, default=1)
    p_cp.add_argument("--max-iter", type=int, default=200)
    p_cp.add_argument("--tol", type=float, default=1e-7)
    p_cp.add_argument("--out", required=True)
    p_cp.set_defaults(func=cmd_cp)

    p_eval = sub.add_parser("evaluate", help="per-stock incremental explanatory power")
    p_eval.add_argument("--stocks", required=True)
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--stat-factors", required=True)
    p_eval.add_argument("--min-obs", type=int, default=30)
    p_eval.add_argument("--residualize", action="store_true")
    p_eval.add_argument("--out", required=True)
    p_eval.set_defaults(func=cmd_evaluate)

    p_zoo = sub.add_parser("zoo", help="double-selection test against a control zoo")
    p_zoo.add_argument("--assets", required=True)
    p_zoo.add_argument("--controls", required=True)
    p_zoo.add_argument("--new-factors", required=True)
    p_zoo.add_argument("--folds", type=int, default=10)
    p_zoo.add_argument("--seed", type=int, default=0)
    p_zoo.add_argument("--out", required=True)
    p_zoo.set_defaults(func=cmd_zoo)

    p_sim = sub.add_parser("simulate", help="generate synthetic datasets with stored truth")
    sim_sub = p_sim.add_subparsers(dest="kind", required=True)

    s_tucker = sim_sub.add_parser("tucker")
    s_tucker.add_argument("n1", type=int)
    s_tucker.add_argument("n2", type=int)
    s_tucker.add_argument("r1", type=int)
    s_tucker.add_argument("r2", type=int)
    s_tucker.add_argument("--t", type=int, default=200)
    s_tucker.add_argument("--ar", type=float, default=0.5)
    s_tucker.add_argument("--snr", type=float, default=1.0)
    s_tucker.add_argument("--missing-rate", type=float, default=0.0)
    s_tucker.add_argument("--seed", type=int, required=True)
    s_tucker.add_argument("--out", required=True)
    s_tucker.set_defaults(func=cmd_simulate)

    s_cp = sim_sub.add_parser("cp")
    s_cp.add_argument("n1", type=int)
    s_cp.add_argument("n2", type=int)
    s_cp.add_argument("r", type=int)
    s_cp.add_argument("--angle", type=float, default=90.0)
    s_cp.add_argument("--t", type=int, default=200)
    s_cp.add_argument("--ar", type=float, default=0.5)
    s_cp.add_argument("--snr", type=float, default=1.0)
    s_cp.add_argument("--missing-rate", type=float, default=0.0)
    s_cp.add_argument("--seed", type=int, required=True)
    s_cp.add_argument("--out", required=True)
    s_cp.set_defaults(func=cmd_simulate)

    s_cross = sim_sub.add_parser("cross-section")
    s_cross.add_argument("n", type=int)
    s_cross.add_argument("p", type=int)
    s_cross.add_argument("r_new", type=int)
    s_cross.add_argument("--t", type=int, default=300)
    s_cross.add_argument("--lambda-g", type=float, nargs="+", required=True)
    s_cross.add_argument("--sparsity", type=int, default=5)
    s_cross.add_argument("--seed", type=int, required=True)
    s_cross.add_argument("--out", required=True)
    s_cross.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
