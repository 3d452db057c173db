"""Reporting and validation around designed pilot pairs.

Correlation reports recompute auto/cross-correlations of a pilot pair
independently of the designer (a deliberate second route for checking
residuals), Monte-Carlo aggregation reruns the designer across seeds, and
empirical_mse validates the analytic MSE expression by simulation.
"""

import csv
import math
from dataclasses import dataclass, replace as dc_replace

import numpy as np

from .designer import design_pilots
from .estimation import channel_mse_lemma, mmse_estimate, simulate_training
from .tensorops import shift_matrix

DB_FLOOR = -300.0


def _db(values):
    mag = np.abs(values)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    return np.maximum(db, DB_FLOOR)


@dataclass(frozen=True)
class CorrelationReport:
    """Auto/cross-correlation series of a pilot pair over lags -L..L.

    autocorr[q, j] is x_q^H J_lag x_q at lag = lags[j] (x_q^T J x_q under
    the literal-transpose convention); crosscorr[q, l, j] correlates
    downlink column q with uplink column l the same way.  The *_db arrays
    are 20 log10 magnitudes floored at -300 dB.
    """

    lags: np.ndarray
    autocorr: np.ndarray
    crosscorr: np.ndarray
    autocorr_db: np.ndarray
    crosscorr_db: np.ndarray
    literal_transpose: bool


def correlation_report(x, y, max_lag=None, literal_transpose=False):
    """Correlation series of the pilot pair for |lag| <= max_lag (< B)."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("pilot matrices must share the training length")
    b = x.shape[0]
    if max_lag is None:
        max_lag = b - 1
    if not 0 <= max_lag < b:
        raise ValueError(f"max_lag must be in [0, {b - 1}], got {max_lag}")
    lags = np.arange(-max_lag, max_lag + 1)
    xl = x if literal_transpose else x.conj()
    auto = np.empty((x.shape[1], lags.size), dtype=np.complex128)
    cross = np.empty((x.shape[1], y.shape[1], lags.size), dtype=np.complex128)
    for j, lag in enumerate(lags):
        jm = shift_matrix(b, int(lag))
        auto[:, j] = np.einsum("bq,bc,cq->q", xl, jm, x)
        cross[:, :, j] = xl.T @ jm @ y
    return CorrelationReport(
        lags=lags,
        autocorr=auto,
        crosscorr=cross,
        autocorr_db=_db(auto),
        crosscorr_db=_db(cross),
        literal_transpose=literal_transpose,
    )


@dataclass(frozen=True)
class MonteCarloSummary:
    """Aggregated design traces across seeds.

    Shorter traces are padded with their final value before averaging, so
    mse_mean[j] is the mean over runs of the MSE at outer iteration j
    (iteration 0 is the initialization).
    """

    iterations: np.ndarray
    mse_mean: np.ndarray
    mse_std: np.ndarray
    final_mse: np.ndarray
    seeds: np.ndarray
    converged_runs: int
    failed_runs: int


def monte_carlo_design(dl, ul, cfg, runs, base_seed=None):
    """Re-run the designer on seeds base..base+runs-1 and aggregate traces."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    base = cfg.seed if base_seed is None else base_seed
    seeds = np.arange(base, base + runs)
    traces = []
    finals = []
    converged = 0
    failed = 0
    for seed in seeds:
        try:
            _, trace = design_pilots(dl, ul, dc_replace(cfg, seed=int(seed)))
        except Exception:
            failed += 1
            continue
        traces.append(trace.mse)
        finals.append(trace.mse[-1])
        converged += trace.converged
    if not traces:
        raise RuntimeError(f"all {runs} design runs failed")
    length = max(len(t) for t in traces)
    padded = np.array([t + [t[-1]] * (length - len(t)) for t in traces])
    std = (
        np.std(padded, axis=0, ddof=1)
        if padded.shape[0] > 1
        else np.zeros(length)
    )
    return MonteCarloSummary(
        iterations=np.arange(length),
        mse_mean=np.mean(padded, axis=0),
        mse_std=std,
        final_mse=np.asarray(finals),
        seeds=seeds,
        converged_runs=converged,
        failed_runs=failed,
    )


@dataclass(frozen=True)
class EmpiricalMse:
    """Simulation estimate of the channel MSE."""

    mean: float
    stderr: float
    trials: int
    stderr_defined: bool


def empirical_mse(p, s, trials, seed=0):
    """Average ||H_hat - H||_F^2 over seeded training simulations.

    Trial t uses seed + t, so batches can be split and merged.  With a
    single trial the standard error is undefined and reported as 0 with
    stderr_defined=False.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    errs = np.empty(trials)
    for t in range(trials):
        real = simulate_training(p, s, seed + t)
        h_hat = mmse_estimate(real.yrx, p, s)
        errs[t] = np.linalg.norm(h_hat - real.h) ** 2
    mean = float(np.mean(errs))
    if trials == 1:
        return EmpiricalMse(mean=mean, stderr=0.0, trials=1, stderr_defined=False)
    stderr = float(np.std(errs, ddof=1) / math.sqrt(trials))
    return EmpiricalMse(mean=mean, stderr=stderr, trials=trials, stderr_defined=True)


def analytic_mse(p, s):
    """Alias for the lemma-form MSE, the reference value for validation."""
    return channel_mse_lemma(p, s)


def _fmt(v):
    return format(float(v), ".17g")


def write_correlation_csv(report, path):
    """Emit the report as rows kind,q,l,lag,re,im,mag_db (17 digits)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "q", "l", "lag", "re", "im", "mag_db"])
        n_t, n_y = report.crosscorr.shape[:2]
        for q in range(n_t):
            for j, lag in enumerate(report.lags):
                v = report.autocorr[q, j]
                w.writerow(
                    ["auto", q, "", lag, _fmt(v.real), _fmt(v.imag),
                     _fmt(report.autocorr_db[q, j])]
                )
        for q in range(n_t):
            for l in range(n_y):
                for j, lag in enumerate(report.lags):
                    v = report.crosscorr[q, l, j]
                    w.writerow(
                        ["cross", q, l, lag, _fmt(v.real), _fmt(v.imag),
                         _fmt(report.crosscorr_db[q, l, j])]
                    )


def write_montecarlo_csv(summary, path):
    """Emit per-iteration mean/std MSE as iteration,mean_mse,std_mse."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "mean_mse", "std_mse"])
        for i in range(summary.iterations.size):
            w.writerow(
                [int(summary.iterations[i]), _fmt(summary.mse_mean[i]),
                 _fmt(summary.mse_std[i])]
            )


def write_trace_csv(trace, path):
    """Emit designer progress as iteration,mse,max_cross,max_auto,max_power."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "mse", "max_cross", "max_auto", "max_power"])
        for i, mse in enumerate(trace.mse):
            w.writerow(
                [i, _fmt(mse), _fmt(trace.max_cross[i]), _fmt(trace.max_auto[i]),
                 _fmt(trace.max_power[i])]
            )


def correlation_rows(report):
    """Report rows as dicts, same order and fields as the CSV emitter."""
    rows = []
    n_t, n_y = report.crosscorr.shape[:2]
    for q in range(n_t):
        for j, lag in enumerate(report.lags):
            v = report.autocorr[q, j]
            rows.append(
                {"kind": "auto", "q": q, "l": None, "lag": int(lag),
                 "re": float(v.real), "im": float(v.imag),
                 "mag_db": float(report.autocorr_db[q, j])}
            )
    for q in range(n_t):
        for l in range(n_y):
            for j, lag in enumerate(report.lags):
                v = report.crosscorr[q, l, j]
                rows.append(
                    {"kind": "cross", "q": q, "l": l, "lag": int(lag),
                     "re": float(v.real), "im": float(v.imag),
                     "mag_db": float(report.crosscorr_db[q, l, j])}
                )
    return rows
