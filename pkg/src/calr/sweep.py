"""(beta, delta) sweeps of the strip dissipation and its bounds.

One row per grid point, ordered by ascending ``beta`` and descending
``delta``.  Points are independent, so they may be evaluated in worker
processes; rows are collected in grid order, which makes the output
byte-identical for any worker count.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass


from .bounds import classify, theorem_lower_bound, upper_bound_chain, witness_constant
from .config import RunConfig
from .dissipation import dissipation
from .errors import InvalidParameterError, NotApplicableError
from .slab import k0, tau

COLUMNS = ("beta", "delta", "a", "xi", "E_xi", "error_estimate", "k0", "tau_a", "regime",
           "T1", "T2", "T3", "T4", "T_sum", "theorem_bound", "warning")

NAN = float("nan")


@dataclass
class SweepResult:
    rows: list
    summary: dict
    dataset_text: str

    @property
    def has_warning(self) -> bool:
        return any(r["warning"] for r in self.rows)


def evaluate_point(config: RunConfig, beta: float, delta: float, src=None) -> dict:
    """All columns of one sweep row."""
    src = src or config.build_source()
    cfg = config.slab_config(beta, delta, src)
    tol = config.numerics.tol
    warnings = []
    row = {"beta": beta, "delta": delta, "a": cfg.a, "xi": cfg.xi,
           "tau_a": tau(beta) * cfg.a}
    res = dissipation(src, cfg, tol=tol)
    row["E_xi"] = res.value
    row["error_estimate"] = res.abs_error_estimate + res.tail_bound
    if res.warning:
        warnings.append("tolerance_not_met")
    try:
        row["k0"] = k0(cfg)
    except InvalidParameterError:
        row["k0"] = NAN
    row["regime"] = classify(src, cfg).regime
    try:
        chain = upper_bound_chain(src, cfg)
        for t in chain.terms:
            row[t.name] = t.value
        row["T_sum"] = chain.total
    except (NotApplicableError, InvalidParameterError):
        for name in ("T1", "T2", "T3", "T4", "T_sum"):
            row[name] = NAN
    row["theorem_bound"] = NAN
    d_star = config.sweep.witness_depth
    if d_star is not None:
        try:
            lam = witness_constant(src, cfg, d_star)
            row["theorem_bound"] = theorem_lower_bound(src, cfg, d_star, lam).value
        except (NotApplicableError, InvalidParameterError):
            pass
    row["warning"] = ";".join(warnings)
    return row


def _point_task(args):
    config, beta, delta = args
    return evaluate_point(config, beta, delta)


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    return "%.16e" % value


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_format_cell(r[c]) for c in COLUMNS])
    return buf.getvalue()


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def rows_to_json(rows) -> str:
    clean = [{c: _json_safe(r[c]) for c in COLUMNS} for r in rows]
    return json.dumps({"columns": list(COLUMNS), "rows": clean}, indent=1) + "\n"


def decade_of(delta: float) -> int:
    """Decade label ``n`` with ``10^(n-1) < delta <= 10^n``."""
    return int(math.ceil(math.log10(delta) - 1e-9))


def decade_envelopes(deltas, values) -> dict:
    """``sup E`` over each decade, keyed by decade label."""
    out = {}
    for d, v in zip(deltas, values):
        n = decade_of(d)
        out[n] = max(out.get(n, -math.inf), v)
    return out


def summarize(rows) -> dict:
    per_beta = []
    betas = sorted({r["beta"] for r in rows})
    for beta in betas:
        sel = [r for r in rows if r["beta"] == beta]
        e = [r["E_xi"] for r in sel]
        env = decade_envelopes([r["delta"] for r in sel], e)
        labels = sorted(env, reverse=True)
        growth = [env[m] / env[n] if env[n] > 0 else None for n, m in zip(labels[:-1], labels[1:])]
        per_beta.append({
            "beta": beta,
            "a": sel[0]["a"],
            "E_min": min(e),
            "E_max": max(e),
            "decade_envelopes": [{"decade": n, "sup_E": env[n]} for n in labels],
            "decade_growth_factors": growth,
            "regimes": [r["regime"] for r in sel],
        })
    return {"points": len(rows),
            "warnings": sum(1 for r in rows if r["warning"]),
            "betas": per_beta}


def grid_points(config: RunConfig):
    return [(float(b), float(d)) for b in config.betas() for d in config.delta_grid()]


def compute_rows(config: RunConfig, workers: int | None = None) -> list:
    workers = workers or config.numerics.workers
    pts = grid_points(config)
    if not pts:
        return []
    if workers <= 1:
        src = config.build_source()
        return [evaluate_point(config, b, d, src) for b, d in pts]
    chunk = max(1, len(pts) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_point_task, [(config, b, d) for b, d in pts], chunksize=chunk))


def _check_writable(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise InvalidParameterError(f"output directory not writable: {parent}")
    if os.path.isdir(path):
        raise InvalidParameterError(f"output path is a directory: {path}")


def run_sweep(config: RunConfig, workers: int | None = None, write: bool = True) -> SweepResult:
    """Evaluate the grid, then write the dataset and a JSON summary.

    Raises
    ------
    InvalidParameterError
        For an invalid config or an unwritable output path; raised before
        any point is computed.
    """
    config.validate()
    out = config.output
    if write:
        _check_writable(out.dataset)
        _check_writable(out.summary)
    rows = compute_rows(config, workers)
    text = rows_to_csv(rows) if out.format == "csv" else rows_to_json(rows)
    summary = summarize(rows)
    if write:
        with open(out.dataset, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        with open(out.summary, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=1, default=_json_safe)
            fh.write("\n")
    return SweepResult(rows, summary, text)
