"""Experiment harness: seeded single-trial, Monte Carlo, and file estimation.

Each trial derives its PRNG streams as SeedSequence([master_seed, run_index,
stream]) with stream 0 for the random model and stream 1 for the data, so any
subset of runs is reproducible independently of execution order. All emitted
files are deterministic for a fixed configuration and master seed: floats are
written with full round-trip precision and JSON keys are sorted. Per-record
wall times are collected but only written when explicitly requested, to keep
the default output byte-stable.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .covariance import TimeSeries
from .errors import DataParseError, InvalidDataError, InvalidOrderError, KmaxentError
from .estimators import EstimateResult, Method, check_min_phase, me_bic
from .hyperopt import PipelineConfig, run_pem_pipeline, run_pipeline
from .kernels import KernelFamily
from .simulate import (
    ArmaModel,
    SpectrumModel,
    benchmark_arma,
    eval_spectrum,
    frequency_grid,
    generate,
    random_arma,
    reconstruction_error,
)

METHOD_ORDER = (Method.ME, Method.ME_DI, Method.ME_TC, Method.PEM_DI, Method.PEM_TC)

_KERNEL_OF = {
    Method.ME_DI: KernelFamily.DI,
    Method.ME_TC: KernelFamily.TC,
    Method.PEM_DI: KernelFamily.DI,
    Method.PEM_TC: KernelFamily.TC,
}

RECORD_COLUMNS = (
    "run",
    "method",
    "reconstruction_error",
    "df",
    "lambda",
    "beta",
    "min_phase",
    "max_root_modulus",
    "chosen_n",
    "error",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration shared by the harness entry points."""

    methods: tuple[Method, ...] = METHOD_ORDER
    N: int = 500
    n: int = 50
    runs: int = 100
    master_seed: int = 0
    pole_modulus: float = 0.98
    zero_modulus: float = 0.85
    pairs: int = 3
    max_phase_gap: float = 0.06
    grid_size: int = 2048
    burn_in: int = 2000
    low_order: int = 4
    refine: bool = True
    include_timings: bool = False
    output_path: str | None = None

    def __post_init__(self):
        methods = tuple(Method(m) for m in self.methods)
        if not methods:
            raise InvalidDataError("at least one method must be requested")
        ordered = tuple(m for m in METHOD_ORDER if m in methods)
        object.__setattr__(self, "methods", ordered)
        if self.n >= self.N:
            raise InvalidOrderError(f"need n < N, got n={self.n}, N={self.N}")
        if self.runs < 1:
            raise InvalidDataError(f"runs must be >= 1, got {self.runs}")

    def to_dict(self) -> dict:
        return {
            "methods": [m.value for m in self.methods],
            "N": self.N,
            "n": self.n,
            "runs": self.runs,
            "master_seed": self.master_seed,
            "pole_modulus": self.pole_modulus,
            "zero_modulus": self.zero_modulus,
            "pairs": self.pairs,
            "max_phase_gap": self.max_phase_gap,
            "grid_size": self.grid_size,
            "burn_in": self.burn_in,
            "low_order": self.low_order,
            "refine": self.refine,
        }


@dataclass(frozen=True)
class TrialRecord:
    """One (run, method) outcome; metric fields are None when the fit failed."""

    run_index: int
    method: Method
    reconstruction_error: float | None = None
    df: float | None = None
    lam: float | None = None
    beta: float | None = None
    min_phase_verified: bool | None = None
    max_root_modulus: float | None = None
    chosen_n: int | None = None
    wall_time_ms: float | None = None
    error: str | None = None


def trial_seed(master_seed: int, run_index: int, stream: int) -> np.random.SeedSequence:
    """Deterministic per-trial seed derivation (documented mixing function)."""
    return np.random.SeedSequence([master_seed, run_index, stream])


def _pipeline_config(cfg: ExperimentConfig) -> PipelineConfig:
    return PipelineConfig(n=cfg.n, low_order=cfg.low_order, refine=cfg.refine)


def fit_method(method: Method, y: TimeSeries, cfg: ExperimentConfig) -> EstimateResult:
    """Run one estimator on one series."""
    if method is Method.ME:
        b_hat, chosen = me_bic(y, cfg.n)
        is_min_phase, max_modulus = check_min_phase(b_hat)
        return EstimateResult(
            b_hat=b_hat,
            eta_hat=None,
            df=float(chosen + 1),
            min_phase_verified=is_min_phase,
            jitter_used=0.0,
            method_tag=Method.ME,
            max_root_modulus=max_modulus,
            chosen_n=chosen,
        )
    family = _KERNEL_OF[method]
    pipeline_cfg = _pipeline_config(cfg)
    if method in (Method.ME_DI, Method.ME_TC):
        return run_pipeline(y, cfg.n, family, pipeline_cfg)
    return run_pem_pipeline(y, cfg.n, family, pipeline_cfg)


def _record_from_result(
    run_index: int,
    method: Method,
    result: EstimateResult,
    truth: SpectrumModel,
    cfg: ExperimentConfig,
    elapsed_ms: float,
) -> TrialRecord:
    err = reconstruction_error(SpectrumModel(result.b_hat), truth, cfg.grid_size)
    return TrialRecord(
        run_index=run_index,
        method=method,
        reconstruction_error=err,
        df=result.df,
        lam=result.eta_hat.lam if result.eta_hat is not None else None,
        beta=result.eta_hat.beta if result.eta_hat is not None else None,
        min_phase_verified=result.min_phase_verified,
        max_root_modulus=result.max_root_modulus,
        chosen_n=result.chosen_n,
        wall_time_ms=elapsed_ms,
    )


def _run_trial(
    run_index: int, model: ArmaModel, y: TimeSeries, cfg: ExperimentConfig
) -> tuple[list[TrialRecord], dict[Method, EstimateResult]]:
    truth = SpectrumModel(model)
    records: list[TrialRecord] = []
    results: dict[Method, EstimateResult] = {}
    for method in cfg.methods:
        start = time.perf_counter()
        try:
            result = fit_method(method, y, cfg)
        except KmaxentError as exc:
            records.append(TrialRecord(run_index=run_index, method=method, error=str(exc)))
            continue
        elapsed_ms = (time.perf_counter() - start) * 1e3
        results[method] = result
        records.append(
            _record_from_result(run_index, method, result, truth, cfg, elapsed_ms)
        )
    return records, results


def run_single_trial(cfg: ExperimentConfig) -> list[TrialRecord]:
    """One seeded dataset from the fixed benchmark process, all methods.

    Writes ``spectra.csv`` (theta, true spectrum, one column per successful
    method) and ``records.csv`` under ``cfg.output_path`` when it is set, and
    returns the records.
    """
    model = benchmark_arma()
    y = generate(model, cfg.N, trial_seed(cfg.master_seed, 0, 1), cfg.burn_in)
    records, results = _run_trial(0, model, y, cfg)
    if cfg.output_path is not None:
        out = Path(cfg.output_path)
        out.mkdir(parents=True, exist_ok=True)
        columns = {"truth": eval_spectrum(SpectrumModel(model), cfg.grid_size)}
        for method, result in results.items():
            columns[method.value] = eval_spectrum(SpectrumModel(result.b_hat), cfg.grid_size)
        _write_spectra(out / "spectra.csv", cfg.grid_size, columns)
        write_records(out / "records.csv", records, cfg.include_timings)
    return records


def run_monte_carlo(cfg: ExperimentConfig) -> tuple[list[TrialRecord], dict]:
    """Randomized-model study: ``cfg.runs`` independent seeded trials.

    Per-trial failures are recorded with an error tag and the summary is
    computed over the successes. Writes ``records.csv`` and ``summary.json``
    under ``cfg.output_path`` when set.
    """
    records: list[TrialRecord] = []
    for run_index in range(1, cfg.runs + 1):
        model = random_arma(
            trial_seed(cfg.master_seed, run_index, 0),
            pole_modulus=cfg.pole_modulus,
            zero_modulus=cfg.zero_modulus,
            pairs=cfg.pairs,
            max_phase_gap=cfg.max_phase_gap,
        )
        y = generate(model, cfg.N, trial_seed(cfg.master_seed, run_index, 1), cfg.burn_in)
        trial_records, _ = _run_trial(run_index, model, y, cfg)
        records.extend(trial_records)
    summary = summarize(records, cfg)
    if cfg.output_path is not None:
        out = Path(cfg.output_path)
        out.mkdir(parents=True, exist_ok=True)
        write_records(out / "records.csv", records, cfg.include_timings)
        with open(out / "summary.json", "w") as fh:
            json.dump(summary, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return records, summary


def summarize(records: list[TrialRecord], cfg: ExperimentConfig) -> dict:
    """Boxplot-ready per-method statistics of the reconstruction error.

    Quartiles use numpy's default (linear-interpolation) percentiles;
    ``outliers`` counts points outside [q1 - 1.5 iqr, q3 + 1.5 iqr].
    """
    methods: dict[str, dict] = {}
    for method in cfg.methods:
        errors = np.array(
            [
                r.reconstruction_error
                for r in records
                if r.method is method and r.error is None
            ]
        )
        failures = sum(1 for r in records if r.method is method and r.error is not None)
        stats: dict = {"count": int(errors.size), "failures": failures}
        if errors.size:
            q1, q2, q3 = (float(np.percentile(errors, q)) for q in (25, 50, 75))
            iqr = q3 - q1
            stats.update(
                {
                    "min": float(np.min(errors)),
                    "q1": q1,
                    "median": q2,
                    "q3": q3,
                    "max": float(np.max(errors)),
                    "outliers": int(
                        np.sum((errors < q1 - 1.5 * iqr) | (errors > q3 + 1.5 * iqr))
                    ),
                }
            )
        methods[method.value] = stats
    failed = sum(1 for r in records if r.error is not None)
    return {
        "config": cfg.to_dict(),
        "methods": methods,
        "total_records": len(records),
        "failed_records": failed,
    }


def estimate_file(cfg: ExperimentConfig, input_path: str) -> dict:
    """Run the requested methods on a one-column CSV of samples.

    The file may carry an optional single header cell ``y``; any other
    non-numeric row is a parse error naming the row. Writes ``result.json``
    and ``spectrum.csv`` under ``cfg.output_path`` when set; returns the
    result document.
    """
    samples = _read_sample_column(input_path)
    if samples.size <= cfg.n:
        raise InvalidOrderError(
            f"need more samples than the model order: N={samples.size}, n={cfg.n}"
        )
    y = TimeSeries(samples)
    adjusted = replace(cfg, N=samples.size)
    document: dict = {"n_samples": samples.size, "n": cfg.n, "methods": {}}
    spectra: dict[str, np.ndarray] = {}
    for method in adjusted.methods:
        try:
            result = fit_method(method, y, adjusted)
        except KmaxentError as exc:
            document["methods"][method.value] = {"error": str(exc)}
            continue
        document["methods"][method.value] = {
            "coefficients": [float(c) for c in result.b_hat.coeffs],
            "lambda": result.eta_hat.lam if result.eta_hat is not None else None,
            "beta": result.eta_hat.beta if result.eta_hat is not None else None,
            "df": result.df,
            "min_phase": result.min_phase_verified,
            "max_root_modulus": result.max_root_modulus,
            "chosen_n": result.chosen_n,
            "error": None,
        }
        spectra[method.value] = eval_spectrum(SpectrumModel(result.b_hat), adjusted.grid_size)
    if cfg.output_path is not None:
        out = Path(cfg.output_path)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "result.json", "w") as fh:
            json.dump(document, fh, sort_keys=True, indent=2)
            fh.write("\n")
        _write_spectra(out / "spectrum.csv", adjusted.grid_size, spectra)
    return document


def _read_sample_column(path: str) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataParseError(f"cannot read '{path}': {exc}") from exc
    values: list[float] = []
    for i, row in enumerate(rows, start=1):
        cells = [c.strip() for c in row if c.strip() != ""]
        if not cells:
            continue
        if len(cells) > 1:
            raise DataParseError(f"row {i}: expected a single column, got {len(cells)}")
        if i == 1 and cells[0].lower() == "y":
            continue
        try:
            values.append(float(cells[0]))
        except ValueError:
            raise DataParseError(f"row {i}: non-numeric value {cells[0]!r}") from None
    if not values:
        raise DataParseError(f"no samples found in '{path}'")
    return np.array(values)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Method):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_records(path, records: list[TrialRecord], include_timings: bool = False) -> None:
    """Emit trial records as CSV in canonical (run, method) order."""
    columns = RECORD_COLUMNS + (("wall_time_ms",) if include_timings else ())
    ordered = sorted(records, key=lambda r: (r.run_index, METHOD_ORDER.index(r.method)))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for r in ordered:
            row = [
                r.run_index,
                r.method,
                r.reconstruction_error,
                r.df,
                r.lam,
                r.beta,
                r.min_phase_verified,
                r.max_root_modulus,
                r.chosen_n,
                r.error,
            ]
            if include_timings:
                row.append(r.wall_time_ms)
            writer.writerow([_fmt(v) for v in row])


def _write_spectra(path, grid_size: int, columns: dict[str, np.ndarray]) -> None:
    grid = frequency_grid(grid_size)
    names = list(columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["theta"] + names)
        for i, theta in enumerate(grid):
            writer.writerow([_fmt(float(theta))] + [_fmt(float(columns[c][i])) for c in names])
