"""Domain types and validation for two-arm ordinal-endpoint power studies."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

#: absolute tolerance on probability-vector sums
PROB_SUM_TOL = 1e-6

#: closed enumeration of test identifiers the engine knows
TEST_IDS = (
    "mann_whitney",
    "chi_square",
    "fisher_exact",
    "prop_odds_wald",
    "prop_odds_lrt",
    "dichotomized_chi_square",
)


@dataclass(frozen=True)
class ValidationIssue:
    """One violated invariant: a config field path and a human-readable message."""

    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class ConfigValidationError(ValueError):
    """Raised by validate_config; carries every violation, not just the first."""

    def __init__(self, issues: Sequence[ValidationIssue]):
        self.issues = list(issues)
        super().__init__("\n".join(str(i) for i in self.issues))


@dataclass(frozen=True)
class OrdinalDistribution:
    """Probability vector over K ordered categories (rank 1 = best)."""

    probs: tuple

    def __init__(self, probs: Sequence[float]):
        object.__setattr__(self, "probs", tuple(float(p) for p in probs))

    @property
    def k(self) -> int:
        return len(self.probs)

    def issues(self, path: str) -> list[ValidationIssue]:
        out = []
        if self.k < 2:
            out.append(ValidationIssue(path, f"needs at least 2 categories, got {self.k}"))
        for i, p in enumerate(self.probs):
            if not math.isfinite(p) or p < 0:
                out.append(ValidationIssue(f"{path}[{i}]", f"negative or non-finite probability {p}"))
        total = math.fsum(self.probs)
        if math.isfinite(total) and abs(total - 1.0) > PROB_SUM_TOL:
            out.append(
                ValidationIssue(path, f"sum {total:.6g} differs from 1 by more than {PROB_SUM_TOL:g}")
            )
        return out

    def normalized(self) -> "OrdinalDistribution":
        """Exact-sum copy: divide by the sum, absorbing the <=1-ulp residual
        into the largest entry so that renormalizing is idempotent."""
        total = math.fsum(self.probs)
        if total == 1.0:
            return self
        probs = [p / total for p in self.probs]
        residual = 1.0 - math.fsum(probs)
        probs[probs.index(max(probs))] += residual
        return OrdinalDistribution(probs)


@dataclass(frozen=True)
class AllocationRatio:
    """control:intervention allocation as positive integer weights, lowest terms."""

    control_weight: int
    intervention_weight: int

    def __post_init__(self):
        a, b = self.control_weight, self.intervention_weight
        if isinstance(a, int) and isinstance(b, int) and a >= 1 and b >= 1:
            g = math.gcd(a, b)
            object.__setattr__(self, "control_weight", a // g)
            object.__setattr__(self, "intervention_weight", b // g)

    def issues(self, path: str) -> list[ValidationIssue]:
        out = []
        for name, w in (("control_weight", self.control_weight), ("intervention_weight", self.intervention_weight)):
            if not isinstance(w, int) or w < 1:
                out.append(ValidationIssue(f"{path}.{name}", f"weight must be a positive integer, got {w!r}"))
        return out


def arm_sizes(total: int, allocation: AllocationRatio) -> tuple:
    """Split a total sample size N into (n_control, n_intervention).

    Control gets floor(N*a/(a+b)); the remainder patient goes to the
    intervention arm.
    """
    if total < 2:
        raise ValueError(f"total sample size must be >= 2, got {total}")
    a, b = allocation.control_weight, allocation.intervention_weight
    n_control = (total * a) // (a + b)
    n_intervention = total - n_control
    if n_control < 1 or n_intervention < 1:
        raise ValueError(
            f"degenerate split: N={total} at {a}:{b} gives arms ({n_control}, {n_intervention})"
        )
    return n_control, n_intervention


@dataclass(frozen=True)
class PowerStudyConfig:
    control: OrdinalDistribution
    intervention: OrdinalDistribution
    total_sizes: tuple
    allocation: AllocationRatio
    tests: tuple
    alpha: float
    replications: int
    seed: int
    dichotomization_cut: Optional[int] = None

    def __init__(
        self,
        control,
        intervention,
        total_sizes,
        allocation,
        tests,
        alpha,
        replications,
        seed,
        dichotomization_cut=None,
    ):
        object.__setattr__(self, "control", control)
        object.__setattr__(self, "intervention", intervention)
        object.__setattr__(self, "total_sizes", tuple(total_sizes))
        object.__setattr__(self, "allocation", allocation)
        object.__setattr__(self, "tests", tuple(tests))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "replications", replications)
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "dichotomization_cut", dichotomization_cut)


def config_issues(config: PowerStudyConfig) -> list[ValidationIssue]:
    """Collect every invariant violation in ``config`` (empty list = valid)."""
    issues: list[ValidationIssue] = []
    issues += config.control.issues("control")
    issues += config.intervention.issues("intervention")
    if config.control.k >= 2 and config.intervention.k >= 2 and config.control.k != config.intervention.k:
        issues.append(
            ValidationIssue(
                "intervention",
                f"category count mismatch: control has {config.control.k}, intervention has {config.intervention.k}",
            )
        )
    issues += config.allocation.issues("allocation")

    allocation_ok = not config.allocation.issues("allocation")
    if not config.total_sizes:
        issues.append(ValidationIssue("total_sizes", "at least one total sample size is required"))
    for n in config.total_sizes:
        if not isinstance(n, int) or n < 4:
            issues.append(ValidationIssue("total_sizes", f"each total sample size must be an integer >= 4, got {n!r}"))
        elif allocation_ok:
            try:
                arm_sizes(n, config.allocation)
            except ValueError as exc:
                issues.append(ValidationIssue("total_sizes", str(exc)))

    if not config.tests:
        issues.append(ValidationIssue("tests", "test set must not be empty"))
    for t in config.tests:
        if t not in TEST_IDS:
            issues.append(ValidationIssue("tests", f"unknown test id {t!r} (known: {', '.join(TEST_IDS)})"))

    if not (isinstance(config.alpha, (int, float)) and 0.0 < config.alpha < 1.0):
        issues.append(ValidationIssue("alpha", f"significance level must lie in (0, 1), got {config.alpha!r}"))
    if not isinstance(config.replications, int) or config.replications < 1:
        issues.append(ValidationIssue("replications", f"replication count must be an integer >= 1, got {config.replications!r}"))
    if not isinstance(config.seed, int) or not (0 <= config.seed < 2**64):
        issues.append(ValidationIssue("seed", f"seed must be an integer in [0, 2^64), got {config.seed!r}"))

    if "dichotomized_chi_square" in config.tests:
        k = config.control.k
        cut = config.dichotomization_cut
        if cut is None:
            issues.append(
                ValidationIssue("dichotomization_cut", "required when dichotomized_chi_square is selected")
            )
        elif not isinstance(cut, int) or not (1 <= cut <= k - 1):
            issues.append(
                ValidationIssue("dichotomization_cut", f"must be an integer in [1, {k - 1}], got {cut!r}")
            )
    return issues


def validate_config(config: PowerStudyConfig) -> PowerStudyConfig:
    """Validate every invariant; raise ConfigValidationError listing all
    violations, or return the normalized config (exact-sum probability
    vectors, deduplicated sorted sizes, allocation in lowest terms).

    Idempotent: validating a validated config returns an equal config.
    """
    issues = config_issues(config)
    if issues:
        raise ConfigValidationError(issues)
    return replace(
        config,
        control=config.control.normalized(),
        intervention=config.intervention.normalized(),
        total_sizes=tuple(sorted(set(config.total_sizes))),
        tests=tuple(t for t in TEST_IDS if t in config.tests),
    )


@dataclass(frozen=True, eq=False)
class ArmCounts:
    """Realized sample of one arm: patients per ordinal category."""

    counts: np.ndarray
    n: int

    @classmethod
    def from_counts(cls, counts) -> "ArmCounts":
        arr = np.asarray(counts, dtype=np.int64)
        if arr.ndim != 1 or (arr < 0).any():
            raise ValueError(f"counts must be a 1-D non-negative vector, got {counts!r}")
        return cls(counts=arr, n=int(arr.sum()))
