"""Measurement-error engine: inject classical error into regression
variables and quantify the induced bias of the exposure coefficient.

"Error proportion" tau means Var(error) = tau * sample variance of the
clean column, so the asymptotic reliability ratio of a noisy exposure in
simple regression is 1/(1+tau). The variance anchor is always the clean
column, never a previously perturbed one, so tau means the same thing in
every replication.
"""

from __future__ import annotations

import csv
import math
import multiprocessing
import os
import time
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .power_engine import PROGRESS_GRANULARITY, StudyCancelled, _ProgressTracker
from .sampling import GENERATOR_ID, StreamKey, derive_stream, error_injection_tag
from .trial import ValidationIssue, ConfigValidationError
from .version import ENGINE_VERSION


@dataclass(frozen=True)
class Roles:
    """Which dataset columns play which regression role."""

    outcome: str
    exposure: str
    confounders: tuple = ()

    def __init__(self, outcome: str, exposure: str, confounders: Sequence[str] = ()):
        object.__setattr__(self, "outcome", outcome)
        object.__setattr__(self, "exposure", exposure)
        object.__setattr__(self, "confounders", tuple(confounders))

    @property
    def all_columns(self) -> tuple:
        return (self.outcome, self.exposure) + self.confounders

    @property
    def n_parameters(self) -> int:
        # intercept + exposure + confounders
        return 2 + len(self.confounders)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric data matrix (rows = subjects) with a role mapping."""

    column_names: tuple
    columns: np.ndarray
    roles: Roles

    @property
    def n_rows(self) -> int:
        return self.columns.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.columns[:, self.column_names.index(name)]


def _check_dataset(column_names, columns, roles: Roles) -> Dataset:
    names = tuple(column_names)
    missing = [c for c in roles.all_columns if c not in names]
    if missing:
        raise ValueError(f"role column(s) not found in data: {', '.join(missing)}")
    if len(set(roles.all_columns)) != len(roles.all_columns):
        raise ValueError(f"role columns must be distinct, got {roles.all_columns}")
    matrix = np.asarray(columns, dtype=np.float64)
    if not np.isfinite(matrix).all():
        raise ValueError("role columns must be finite-valued")
    min_rows = roles.n_parameters + 2
    if matrix.shape[0] < min_rows:
        raise ValueError(f"need at least {min_rows} usable rows, got {matrix.shape[0]}")
    return Dataset(column_names=names, columns=matrix, roles=roles)


def parse_csv(lines, roles: Roles, source: str = "<data>") -> tuple:
    """Parse header-row CSV lines, keeping only the role columns.

    Rows with a missing or non-numeric value in any role column are
    dropped. Returns (dataset, dropped_row_count).
    """
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError(f"{source}: empty file") from None
    header = [h.strip() for h in header]
    missing = [c for c in roles.all_columns if c not in header]
    if missing:
        raise ValueError(f"{source}: missing role column(s): {', '.join(missing)}")
    indices = [header.index(c) for c in roles.all_columns]
    rows = []
    dropped = 0
    for raw in reader:
        if not raw:
            continue
        try:
            values = [float(raw[i]) for i in indices]
        except (ValueError, IndexError):
            dropped += 1
            continue
        if not all(math.isfinite(v) for v in values):
            dropped += 1
            continue
        rows.append(values)
    if not rows:
        raise ValueError(f"{source}: no usable rows")
    dataset = _check_dataset(roles.all_columns, np.array(rows, dtype=np.float64), roles)
    return dataset, dropped


def load_csv(path, roles: Roles) -> tuple:
    """Load the role columns of a header-row CSV file; see :func:`parse_csv`."""
    with open(path, newline="", encoding="utf-8") as handle:
        return parse_csv(handle, roles, source=str(path))


@dataclass(frozen=True)
class SynthSpec:
    """Generator spec for a synthetic dataset: multivariate-normal covariates
    (exposure first, then confounders), linear outcome plus Gaussian noise."""

    n: int
    covariance: tuple  # row-major square matrix over (exposure, confounders)
    coefficients: tuple
    noise_sd: float

    def __init__(self, n, covariance, coefficients, noise_sd):
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "covariance", tuple(tuple(float(v) for v in row) for row in covariance))
        object.__setattr__(self, "coefficients", tuple(float(c) for c in coefficients))
        object.__setattr__(self, "noise_sd", float(noise_sd))


def synth_dataset(spec: SynthSpec, stream) -> Dataset:
    """Generate a synthetic dataset from ``spec``.

    Covariates are drawn multivariate normal via the Cholesky factor of the
    covariance; the outcome is the linear predictor plus N(0, noise_sd^2).
    """
    cov = np.asarray(spec.covariance, dtype=np.float64)
    d = cov.shape[0]
    if cov.shape != (d, d) or not np.allclose(cov, cov.T):
        raise ValueError("covariance must be a symmetric square matrix")
    if len(spec.coefficients) != d:
        raise ValueError(f"need {d} coefficients for {d} covariates, got {len(spec.coefficients)}")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ValueError("covariance matrix is not positive definite") from None
    z = stream.standard_normal((spec.n, d))
    covariates = z @ chol.T
    outcome = covariates @ np.asarray(spec.coefficients) + spec.noise_sd * stream.standard_normal(spec.n)
    names = ["outcome", "exposure"] + [f"confounder_{i}" for i in range(1, d)]
    roles = Roles(outcome="outcome", exposure="exposure", confounders=names[2:])
    return _check_dataset(names, np.column_stack([outcome, covariates]), roles)


@dataclass(frozen=True)
class OlsFit:
    """Least-squares fit of outcome ~ intercept + exposure + confounders."""

    names: tuple  # "(intercept)", exposure, confounders...
    coefficients: tuple
    standard_errors: tuple
    residual_variance: float

    @property
    def exposure_coefficient(self) -> float:
        return self.coefficients[1]


def ols_fit(dataset: Dataset) -> OlsFit:
    """OLS via QR decomposition of the design matrix (no normal equations)."""
    roles = dataset.roles
    y = dataset.column(roles.outcome)
    design = np.column_stack(
        [np.ones(dataset.n_rows)]
        + [dataset.column(c) for c in (roles.exposure,) + roles.confounders]
    )
    q, r = np.linalg.qr(design, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.min() <= diag.max() * np.finfo(np.float64).eps * design.shape[0]:
        raise ValueError("design matrix is rank deficient (collinear columns)")
    coef = np.linalg.solve(r, q.T @ y)
    residuals = y - design @ coef
    dof = dataset.n_rows - design.shape[1]
    residual_variance = float(residuals @ residuals / dof)
    r_inv = np.linalg.solve(r, np.eye(r.shape[0]))
    covariance = residual_variance * (r_inv @ r_inv.T)
    return OlsFit(
        names=("(intercept)", roles.exposure) + roles.confounders,
        coefficients=tuple(float(c) for c in coef),
        standard_errors=tuple(float(s) for s in np.sqrt(np.diag(covariance))),
        residual_variance=residual_variance,
    )


def inject_error(dataset: Dataset, target_set, tau: float, stream) -> Dataset:
    """Add independent N(0, tau * Var̂(column)) noise to each target column.

    tau = 0 returns the input dataset object unchanged (no noise path, so
    downstream fits reproduce the clean fit bitwise).
    """
    if tau < 0:
        raise ValueError(f"error-variance proportion tau must be >= 0, got {tau}")
    targets = list(target_set)
    for name in targets:
        if name not in dataset.column_names:
            raise ValueError(f"unknown target column {name!r}")
    if tau == 0.0 or not targets:
        return dataset
    columns = dataset.columns.copy()
    # perturb in dataset column order so draws do not depend on target_set ordering
    for index, name in enumerate(dataset.column_names):
        if name not in targets:
            continue
        clean = dataset.columns[:, index]
        scale = math.sqrt(tau * float(np.var(clean, ddof=1)))
        columns[:, index] = clean + scale * stream.standard_normal(dataset.n_rows)
    return replace(dataset, columns=columns)


@dataclass(frozen=True)
class MErrorConfig:
    targets: tuple  # tuple of tuples of column names
    tau_grid: tuple
    replications: int
    seed: int

    def __init__(self, targets, tau_grid, replications, seed):
        object.__setattr__(self, "targets", tuple(tuple(t) for t in targets))
        object.__setattr__(self, "tau_grid", tuple(float(t) for t in tau_grid))
        object.__setattr__(self, "replications", replications)
        object.__setattr__(self, "seed", seed)


def merror_config_issues(config: MErrorConfig, roles: Roles) -> list:
    issues = []
    perturbable = (roles.exposure,) + roles.confounders + (roles.outcome,)
    if not config.targets:
        issues.append(ValidationIssue("targets", "at least one target variable set is required"))
    for i, target in enumerate(config.targets):
        if not target:
            issues.append(ValidationIssue(f"targets[{i}]", "target set must not be empty"))
        for name in target:
            if name not in perturbable:
                issues.append(
                    ValidationIssue(
                        f"targets[{i}]",
                        f"{name!r} is not a role column (choose from {', '.join(perturbable)})",
                    )
                )
        if len(set(target)) != len(target):
            issues.append(ValidationIssue(f"targets[{i}]", "duplicate column in target set"))
    if not config.tau_grid:
        issues.append(ValidationIssue("tau_grid", "at least one error-variance proportion is required"))
    for tau in config.tau_grid:
        if not math.isfinite(tau) or tau < 0:
            issues.append(ValidationIssue("tau_grid", f"tau values must be finite and >= 0, got {tau}"))
    if not isinstance(config.replications, int) or config.replications < 1:
        issues.append(ValidationIssue("replications", f"replication count must be an integer >= 1, got {config.replications!r}"))
    if not isinstance(config.seed, int) or not (0 <= config.seed < 2**64):
        issues.append(ValidationIssue("seed", f"seed must be an integer in [0, 2^64), got {config.seed!r}"))
    return issues


def validate_merror_config(config: MErrorConfig, roles: Roles) -> MErrorConfig:
    """Validate and normalize (tau grid deduplicated and sorted ascending)."""
    issues = merror_config_issues(config, roles)
    if issues:
        raise ConfigValidationError(issues)
    return MErrorConfig(
        targets=config.targets,
        tau_grid=tuple(sorted(set(config.tau_grid))),
        replications=config.replications,
        seed=config.seed,
    )


@dataclass(frozen=True)
class MErrorCell:
    """Exposure-coefficient aggregates for one (target set, tau) cell."""

    target_set: tuple
    tau: float
    mean: Optional[float]
    sd: Optional[float]
    q025: Optional[float]
    q975: Optional[float]
    relative_bias: Optional[float]
    not_estimable: int
    replications: int


@dataclass(frozen=True)
class MErrorResults:
    config: MErrorConfig
    roles: Roles
    baseline: OlsFit
    cells: tuple  # MErrorCell in (target order, tau ascending) order
    dropped_rows: int
    master_seed: int
    generator_id: str
    engine_version: str
    wall_time_s: float

    def to_dict(self) -> dict:
        return {
            "baseline": {
                "names": list(self.baseline.names),
                "coefficients": list(self.baseline.coefficients),
                "standard_errors": list(self.baseline.standard_errors),
                "residual_variance": self.baseline.residual_variance,
            },
            "dropped_rows": self.dropped_rows,
            "cells": [
                {
                    "target_set": list(cell.target_set),
                    "tau": cell.tau,
                    "mean": cell.mean,
                    "sd": cell.sd,
                    "q025": cell.q025,
                    "q975": cell.q975,
                    "relative_bias": cell.relative_bias,
                    "not_estimable": cell.not_estimable,
                    "replications": cell.replications,
                }
                for cell in self.cells
            ],
        }


def _merror_cell_values(dataset, target, tau, seed, cell_index, lo, hi):
    """Exposure coefficients (NaN where rank-deficient) for replications [lo, hi)."""
    values = np.empty(hi - lo)
    tag = error_injection_tag(cell_index)
    for rep in range(lo, hi):
        stream = derive_stream(StreamKey(seed, rep, tag))
        perturbed = inject_error(dataset, target, tau, stream)
        try:
            values[rep - lo] = ols_fit(perturbed).exposure_coefficient
        except ValueError:
            values[rep - lo] = np.nan
    return values


_MW = {}


def _merror_init(dataset, cancel_event):
    _MW["dataset"] = dataset
    _MW["cancel_event"] = cancel_event


def _merror_chunk(task):
    cell_index, target, tau, seed, lo, hi = task
    event = _MW["cancel_event"]
    if event is not None and event.is_set():
        return None
    values = _merror_cell_values(_MW["dataset"], target, tau, seed, cell_index, lo, hi)
    return cell_index, lo, values


def run_merror_study(
    dataset: Dataset,
    config: MErrorConfig,
    progress_sink: Optional[Callable[[float], None]] = None,
    workers: Optional[int] = None,
    cancel: Optional[Callable[[], bool]] = None,
    dropped_rows: int = 0,
) -> MErrorResults:
    """Baseline fit on clean data, then R perturbed re-fits per
    (target set, tau) cell. Deterministic for any worker count."""
    config = validate_merror_config(config, dataset.roles)
    dataset = _check_dataset(dataset.column_names, dataset.columns, dataset.roles)
    start = time.perf_counter()
    baseline = ols_fit(dataset)

    cell_specs = [
        (target, tau) for target in config.targets for tau in config.tau_grid
    ]
    replications = config.replications
    total_work = len(cell_specs) * replications
    tracker = _ProgressTracker(progress_sink, total_work)
    chunk = max(1, replications // PROGRESS_GRANULARITY)
    tasks = []
    for cell_index, (target, tau) in enumerate(cell_specs):
        for lo in range(0, replications, chunk):
            tasks.append((cell_index, target, tau, config.seed, lo, min(lo + chunk, replications)))

    per_cell = [np.empty(replications) for _ in cell_specs]

    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, len(tasks)))

    if workers == 1:
        for cell_index, target, tau, seed, lo, hi in tasks:
            if cancel is not None and cancel():
                raise StudyCancelled("measurement-error study cancelled")
            per_cell[cell_index][lo:hi] = _merror_cell_values(dataset, target, tau, seed, cell_index, lo, hi)
            tracker.advance(hi - lo)
    else:
        ctx = multiprocessing.get_context("fork" if "fork" in multiprocessing.get_all_start_methods() else "spawn")
        cancel_event = ctx.Event()
        with ctx.Pool(processes=workers, initializer=_merror_init, initargs=(dataset, cancel_event)) as pool:
            try:
                for outcome in pool.imap_unordered(_merror_chunk, tasks):
                    if cancel is not None and cancel():
                        cancel_event.set()
                        raise StudyCancelled("measurement-error study cancelled")
                    if outcome is None:
                        raise StudyCancelled("measurement-error study cancelled")
                    cell_index, lo, values = outcome
                    per_cell[cell_index][lo : lo + len(values)] = values
                    tracker.advance(len(values))
            except StudyCancelled:
                pool.terminate()
                raise

    cells = []
    base_coef = baseline.exposure_coefficient
    for (target, tau), values in zip(cell_specs, per_cell):
        good = values[~np.isnan(values)]
        not_estimable = int(np.isnan(values).sum())
        if len(good) == 0:
            cells.append(
                MErrorCell(target, tau, None, None, None, None, None, not_estimable, replications)
            )
            continue
        mean = float(np.mean(good))
        sd = float(np.std(good, ddof=1)) if len(good) > 1 else 0.0
        q025, q975 = (float(q) for q in np.quantile(good, [0.025, 0.975]))
        relative_bias = (mean - base_coef) / base_coef if base_coef != 0 else None
        cells.append(
            MErrorCell(target, tau, mean, sd, q025, q975, relative_bias, not_estimable, replications)
        )

    return MErrorResults(
        config=config,
        roles=dataset.roles,
        baseline=baseline,
        cells=tuple(cells),
        dropped_rows=dropped_rows,
        master_seed=config.seed,
        generator_id=GENERATOR_ID,
        engine_version=ENGINE_VERSION,
        wall_time_s=time.perf_counter() - start,
    )
