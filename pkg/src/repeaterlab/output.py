"""Result serialization: deterministic CSV rows and JSON sweep summaries."""

import json
from typing import Optional, Sequence

from .errors import ResourceError
from .experiments import ExperimentResult, summarize_trend

CSV_HEADER = ("sweep_kind,total_distance_km,router_count,bsm_count,hop_km,"
              "attempts,e_count,failures,mean_f_e2e,parity,odd_subclass,seed")


def format_float(x: Optional[float]) -> str:
    """Render a float with 6 significant digits; empty string for None."""
    if x is None:
        return ""
    return f"{x:.6g}"


def result_row(r: ExperimentResult) -> str:
    fields = (
        r.sweep_kind,
        format_float(r.total_distance_km),
        str(r.router_count),
        str(r.bsm_count),
        format_float(r.hop_km),
        str(r.attempts),
        str(r.e_count),
        str(r.failures),
        format_float(r.mean_f_e2e),
        r.parity,
        r.odd_subclass,
        str(r.seed),
    )
    for f in fields:
        if "," in f:
            raise ResourceError(f"CSV field contains delimiter: {f!r}")
    return ",".join(fields)


def results_csv(results: Sequence[ExperimentResult]) -> str:
    """CSV text for a result set, sorted by distance then router count."""
    rows = sorted(results, key=lambda r: (r.total_distance_km, r.router_count,
                                          r.odd_subclass))
    return "\n".join([CSV_HEADER] + [result_row(r) for r in rows]) + "\n"


def write_results(results: Sequence[ExperimentResult], path: str):
    text = results_csv(results)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ResourceError(f"cannot write results to {path}: {exc}") from exc


def sweep_summary(results: Sequence[ExperimentResult]) -> dict:
    """Machine-readable summary of one sweep's results."""
    summary = {
        "configurations": len(results),
        "total_successes": sum(r.e_count for r in results),
        "total_attempts": sum(r.attempts for r in results),
        "errors": [
            {"total_distance_km": r.total_distance_km,
             "router_count": r.router_count, "error": r.error}
            for r in results if r.error
        ],
    }
    counts = {r.router_count for r in results}
    if len(counts) >= 2:
        trend = summarize_trend(results)
        summary["trend"] = {
            k: v for k, v in trend.items()
            if k in ("even_mean", "odd_mean", "slope_sign")
        }
        for name in ("even", "odd-left", "odd-right"):
            if name in trend:
                summary["trend"][name] = trend[name]
    return summary


def write_summary(results: Sequence[ExperimentResult], path: str):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(sweep_summary(results), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ResourceError(f"cannot write summary to {path}: {exc}") from exc


def parse_results_csv(text: str):
    """Rows of a results CSV as dicts (inverse of results_csv for charts)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ResourceError("not a results CSV: bad or missing header")
    cols = CSV_HEADER.split(",")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(cols):
            raise ResourceError(f"malformed CSV row: {ln!r}")
        row = dict(zip(cols, parts))
        for key in ("total_distance_km", "hop_km"):
            row[key] = float(row[key])
        for key in ("router_count", "bsm_count", "attempts", "e_count",
                    "failures", "seed"):
            row[key] = int(row[key])
        row["mean_f_e2e"] = float(row["mean_f_e2e"]) if row["mean_f_e2e"] else None
        rows.append(row)
    return rows
