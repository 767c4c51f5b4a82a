"""The simulation driver for power studies.

Runs R replications per total sample size. Each replication samples one
dataset under H1 (control vs intervention distributions) and one under H0
(control distribution in both arms), applies every selected test to both,
and counts rejections at p <= alpha. Replication tasks derive their random
streams from (master seed, replication index, purpose tag), so the output
is bit-identical for any worker count and completion order.
"""

from __future__ import annotations

import math
import multiprocessing
import os
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .version import ENGINE_VERSION
from .po_model import fit_proportional_odds, po_lrt_test, po_wald_test
from .sampling import (
    GENERATOR_ID,
    TAG_FISHER_MC,
    TAG_H0_SAMPLING,
    TAG_H1_SAMPLING,
    StreamKey,
    derive_stream,
    sample_arm,
)
from .stattests import (
    NotEstimableError,
    TestResult,
    _not_estimable,
    chi_square,
    dichotomized_chi_square,
    fisher_exact,
    mann_whitney,
)
from .trial import ArmCounts, PowerStudyConfig, arm_sizes, validate_config

#: progress is reported about once per percent of total replications
PROGRESS_GRANULARITY = 100


class StudyCancelled(RuntimeError):
    """Raised by the engines when a cancel callback requests early termination."""


def mc_standard_error(p_hat: float, r_effective: int) -> float:
    """Monte Carlo standard error of a rejection proportion: sqrt(p(1-p)/R)."""
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError(f"proportion must lie in [0, 1], got {p_hat}")
    if r_effective < 1:
        raise ValueError(f"effective replication count must be >= 1, got {r_effective}")
    return math.sqrt(p_hat * (1.0 - p_hat) / r_effective)


def evaluate_tests(
    a: ArmCounts,
    b: ArmCounts,
    tests,
    cut: Optional[int] = None,
    fisher_stream=None,
    extra_tests=None,
) -> dict:
    """Apply the selected tests to one dataset, sharing one PO fit when both
    proportional-odds tests are selected. ``extra_tests`` maps extra test ids
    to callables ``fn(a, b, rng) -> TestResult`` (a hook for engine tests)."""
    results = {}
    po_fit = None
    if "prop_odds_wald" in tests or "prop_odds_lrt" in tests:
        try:
            po_fit = fit_proportional_odds(a, b)
        except NotEstimableError:
            po_fit = None
    for test_id in tests:
        if test_id == "mann_whitney":
            result = mann_whitney(a, b)
        elif test_id == "chi_square":
            result = chi_square(a, b)
        elif test_id == "fisher_exact":
            result = fisher_exact(a, b, fisher_stream)
        elif test_id == "dichotomized_chi_square":
            result = dichotomized_chi_square(a, b, cut)
        elif test_id == "prop_odds_wald":
            result = po_wald_test(po_fit) if po_fit is not None else _not_estimable(test_id)
        elif test_id == "prop_odds_lrt":
            result = po_lrt_test(a, b, fit=po_fit) if po_fit is not None else _not_estimable(test_id)
        else:
            raise ValueError(f"unknown test id {test_id!r}")
        results[test_id] = result
    if extra_tests:
        for name in sorted(extra_tests):
            results[name] = extra_tests[name](a, b, fisher_stream)
    return results


@dataclass(frozen=True)
class CellStats:
    """Aggregates for one (test, total sample size) cell."""

    power: Optional[float]
    power_mc_se: Optional[float]
    power_ci95: Optional[tuple]
    type1: Optional[float]
    type1_mc_se: Optional[float]
    type1_ci95: Optional[tuple]
    h1_not_estimable: int
    h0_not_estimable: int
    replications: int


@dataclass(frozen=True)
class PowerResults:
    config: PowerStudyConfig
    test_ids: tuple
    total_sizes: tuple
    cells: dict  # (test_id, total_n) -> CellStats
    master_seed: int
    generator_id: str
    engine_version: str
    wall_time_s: float

    def to_dict(self) -> dict:
        rows = []
        for test_id in self.test_ids:
            for n in self.total_sizes:
                cell = self.cells[(test_id, n)]
                rows.append(
                    {
                        "test": test_id,
                        "total_n": n,
                        "power": cell.power,
                        "power_mc_se": cell.power_mc_se,
                        "power_ci95": list(cell.power_ci95) if cell.power_ci95 else None,
                        "type1": cell.type1,
                        "type1_mc_se": cell.type1_mc_se,
                        "type1_ci95": list(cell.type1_ci95) if cell.type1_ci95 else None,
                        "h1_not_estimable": cell.h1_not_estimable,
                        "h0_not_estimable": cell.h0_not_estimable,
                        "replications": cell.replications,
                    }
                )
        return {
            "test_ids": list(self.test_ids),
            "total_sizes": list(self.total_sizes),
            "cells": rows,
        }


def _replication_counts(config: PowerStudyConfig, test_ids, total_n: int, rep: int, extra_tests, out: np.ndarray):
    """Evaluate one replication; add [h1_rej, h1_ne, h0_rej, h0_ne] into ``out``."""
    n_control, n_intervention = arm_sizes(total_n, config.allocation)
    seed = config.seed

    h1_stream = derive_stream(StreamKey(seed, rep, TAG_H1_SAMPLING))
    a_h1 = sample_arm(config.control, n_control, h1_stream)
    b_h1 = sample_arm(config.intervention, n_intervention, h1_stream)

    h0_stream = derive_stream(StreamKey(seed, rep, TAG_H0_SAMPLING))
    a_h0 = sample_arm(config.control, n_control, h0_stream)
    b_h0 = sample_arm(config.control, n_intervention, h0_stream)

    fisher_stream = None
    if "fisher_exact" in config.tests or extra_tests:
        fisher_stream = derive_stream(StreamKey(seed, rep, TAG_FISHER_MC))

    for hyp_index, (arm_a, arm_b) in enumerate(((a_h1, b_h1), (a_h0, b_h0))):
        results = evaluate_tests(
            arm_a,
            arm_b,
            config.tests,
            cut=config.dichotomization_cut,
            fisher_stream=fisher_stream,
            extra_tests=extra_tests,
        )
        for t_index, test_id in enumerate(test_ids):
            result: TestResult = results[test_id]
            if not result.ok:
                out[t_index, 2 * hyp_index + 1] += 1
            elif result.p_value <= config.alpha:
                out[t_index, 2 * hyp_index] += 1


# worker-process state, installed once per pool worker via the initializer
_WORKER = {}


def _init_worker(config, test_ids, extra_tests, cancel_event):
    _WORKER["config"] = config
    _WORKER["test_ids"] = test_ids
    _WORKER["extra_tests"] = extra_tests
    _WORKER["cancel_event"] = cancel_event


def _run_chunk(task):
    """Pool task: replications [lo, hi) of one sample size. Returns summed counts."""
    n_index, total_n, lo, hi = task
    config = _WORKER["config"]
    cancel_event = _WORKER["cancel_event"]
    counts = np.zeros((len(_WORKER["test_ids"]), 4), dtype=np.int64)
    for rep in range(lo, hi):
        if cancel_event is not None and cancel_event.is_set():
            return None
        _replication_counts(config, _WORKER["test_ids"], total_n, rep, _WORKER["extra_tests"], counts)
    return n_index, hi - lo, counts


def _make_tasks(total_sizes, replications: int):
    chunk = max(1, replications // PROGRESS_GRANULARITY)
    tasks = []
    for n_index, total_n in enumerate(total_sizes):
        for lo in range(0, replications, chunk):
            tasks.append((n_index, total_n, lo, min(lo + chunk, replications)))
    return tasks


class _ProgressTracker:
    def __init__(self, sink, total: int):
        self._sink = sink
        self._total = total
        self._done = 0
        self._last_tick = -1
        self._emit()

    def advance(self, count: int):
        self._done += count
        self._emit()

    def _emit(self):
        if self._sink is None:
            return
        fraction = self._done / self._total if self._total else 1.0
        tick = int(fraction * PROGRESS_GRANULARITY)
        if tick > self._last_tick:
            self._last_tick = tick
            self._sink(fraction)


def run_power_study(
    config: PowerStudyConfig,
    progress_sink: Optional[Callable[[float], None]] = None,
    workers: Optional[int] = None,
    cancel: Optional[Callable[[], bool]] = None,
    extra_tests=None,
) -> PowerResults:
    """Run the full power study and aggregate rejection rates.

    Output is a pure function of (config, seed): bit-identical for any
    ``workers`` count. ``cancel`` is polled between replications; a True
    return aborts the run by raising :class:`StudyCancelled`.
    """
    config = validate_config(config)
    start = time.perf_counter()
    test_ids = tuple(config.tests)
    if extra_tests:
        test_ids = test_ids + tuple(sorted(extra_tests))
    replications = config.replications
    total_work = len(config.total_sizes) * replications
    tracker = _ProgressTracker(progress_sink, total_work)
    tasks = _make_tasks(config.total_sizes, replications)
    # counts[n_index, t_index, :] = [h1_rejections, h1_not_estimable, h0_rejections, h0_not_estimable]
    counts = np.zeros((len(config.total_sizes), len(test_ids), 4), dtype=np.int64)

    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, len(tasks)))

    if workers == 1:
        chunk_counts = np.zeros((len(test_ids), 4), dtype=np.int64)
        for n_index, total_n, lo, hi in tasks:
            chunk_counts[:] = 0
            for rep in range(lo, hi):
                if cancel is not None and cancel():
                    raise StudyCancelled("power study cancelled")
                _replication_counts(config, test_ids, total_n, rep, extra_tests, chunk_counts)
            counts[n_index] += chunk_counts
            tracker.advance(hi - lo)
    else:
        ctx = multiprocessing.get_context("fork" if "fork" in multiprocessing.get_all_start_methods() else "spawn")
        cancel_event = ctx.Event()
        with ctx.Pool(
            processes=workers,
            initializer=_init_worker,
            initargs=(config, test_ids, extra_tests, cancel_event),
        ) as pool:
            try:
                for outcome in pool.imap_unordered(_run_chunk, tasks):
                    if cancel is not None and cancel():
                        cancel_event.set()
                        raise StudyCancelled("power study cancelled")
                    if outcome is None:
                        raise StudyCancelled("power study cancelled")
                    n_index, done, chunk_counts = outcome
                    counts[n_index] += chunk_counts
                    tracker.advance(done)
            except StudyCancelled:
                pool.terminate()
                raise

    cells = {}
    for n_index, total_n in enumerate(config.total_sizes):
        for t_index, test_id in enumerate(test_ids):
            h1_rej, h1_ne, h0_rej, h0_ne = (int(v) for v in counts[n_index, t_index])
            cells[(test_id, total_n)] = _cell_stats(h1_rej, h1_ne, h0_rej, h0_ne, replications)

    return PowerResults(
        config=config,
        test_ids=test_ids,
        total_sizes=config.total_sizes,
        cells=cells,
        master_seed=config.seed,
        generator_id=GENERATOR_ID,
        engine_version=ENGINE_VERSION,
        wall_time_s=time.perf_counter() - start,
    )


def _estimate(rejections: int, not_estimable: int, replications: int):
    effective = replications - not_estimable
    if effective <= 0:
        return None, None, None
    p_hat = rejections / effective
    se = mc_standard_error(p_hat, effective)
    ci = (p_hat - 1.96 * se, p_hat + 1.96 * se)
    return p_hat, se, ci


def _cell_stats(h1_rej, h1_ne, h0_rej, h0_ne, replications) -> CellStats:
    power, power_se, power_ci = _estimate(h1_rej, h1_ne, replications)
    type1, type1_se, type1_ci = _estimate(h0_rej, h0_ne, replications)
    return CellStats(
        power=power,
        power_mc_se=power_se,
        power_ci95=power_ci,
        type1=type1,
        type1_mc_se=type1_se,
        type1_ci95=type1_ci,
        h1_not_estimable=h1_ne,
        h0_not_estimable=h0_ne,
        replications=replications,
    )
