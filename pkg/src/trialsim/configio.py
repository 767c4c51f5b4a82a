"""Canonical config documents: parsing (YAML files, JSON bodies) and echoing.

The same key schema is used by the CLI's YAML config files and the HTTP
service's JSON bodies, so a config echoed into a results document is
identical regardless of how the study was submitted.
"""

from __future__ import annotations

import numbers

import yaml

from .merror import MErrorConfig, Roles, SynthSpec
from .trial import (
    AllocationRatio,
    ConfigValidationError,
    OrdinalDistribution,
    PowerStudyConfig,
    ValidationIssue,
)


def load_yaml(path) -> dict:
    with open(path, encoding="utf-8") as handle:
        data = yaml.safe_load(handle)
    if not isinstance(data, dict):
        raise ConfigValidationError([ValidationIssue("<document>", "config document must be a mapping")])
    return data


def _require(data, key, issues, expected="value"):
    if key not in data or data[key] is None:
        issues.append(ValidationIssue(key, f"missing required {expected}"))
        return None
    return data[key]


def _number_list(value, key, issues):
    if not isinstance(value, (list, tuple)) or not all(isinstance(v, numbers.Real) for v in value):
        issues.append(ValidationIssue(key, "must be a list of numbers"))
        return None
    return [float(v) for v in value]


def _int_list(value, key, issues):
    if not isinstance(value, (list, tuple)) or not all(
        isinstance(v, numbers.Integral) and not isinstance(v, bool) for v in value
    ):
        issues.append(ValidationIssue(key, "must be a list of integers"))
        return None
    return [int(v) for v in value]


def _int(value, key, issues):
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        issues.append(ValidationIssue(key, f"must be an integer, got {value!r}"))
        return None
    return int(value)


def _check_kind(data, expected, issues):
    kind = data.get("kind")
    if kind is not None and kind != expected:
        issues.append(ValidationIssue("kind", f"expected {expected!r}, got {kind!r}"))


def power_config_from_dict(data: dict) -> PowerStudyConfig:
    """Build a PowerStudyConfig from a parsed document.

    Raises ConfigValidationError listing every structural problem; semantic
    invariants are checked separately by validate_config.
    """
    issues: list[ValidationIssue] = []
    _check_kind(data, "power", issues)

    control = _number_list(_require(data, "control", issues, "probability list"), "control", issues)
    intervention = _number_list(
        _require(data, "intervention", issues, "probability list"), "intervention", issues
    )
    total_sizes = _int_list(_require(data, "total_sizes", issues, "sample-size list"), "total_sizes", issues)

    allocation_raw = data.get("allocation", [1, 1])
    allocation = None
    weights = _int_list(allocation_raw, "allocation", issues)
    if weights is not None:
        if len(weights) != 2:
            issues.append(ValidationIssue("allocation", "must be a pair [control_weight, intervention_weight]"))
        else:
            allocation = AllocationRatio(*weights)

    tests_raw = _require(data, "tests", issues, "test list")
    tests = None
    if tests_raw is not None:
        if not isinstance(tests_raw, (list, tuple)) or not all(isinstance(t, str) for t in tests_raw):
            issues.append(ValidationIssue("tests", "must be a list of test identifiers"))
        else:
            tests = list(tests_raw)

    alpha = _require(data, "alpha", issues, "significance level")
    if alpha is not None and not isinstance(alpha, numbers.Real):
        issues.append(ValidationIssue("alpha", f"must be a number, got {alpha!r}"))
        alpha = None
    replications = _int(_require(data, "replications", issues, "replication count"), "replications", issues)
    seed = _int(_require(data, "seed", issues, "master seed"), "seed", issues)

    cut = data.get("dichotomization_cut")
    if cut is not None:
        cut = _int(cut, "dichotomization_cut", issues)

    unknown = set(data) - {
        "kind",
        "control",
        "intervention",
        "total_sizes",
        "allocation",
        "tests",
        "alpha",
        "replications",
        "seed",
        "dichotomization_cut",
    }
    for key in sorted(unknown):
        issues.append(ValidationIssue(key, "unknown config key"))

    if issues:
        raise ConfigValidationError(issues)
    return PowerStudyConfig(
        control=OrdinalDistribution(control),
        intervention=OrdinalDistribution(intervention),
        total_sizes=total_sizes,
        allocation=allocation,
        tests=tests,
        alpha=float(alpha),
        replications=replications,
        seed=seed,
        dichotomization_cut=cut,
    )


def power_config_to_dict(config: PowerStudyConfig) -> dict:
    return {
        "kind": "power",
        "control": list(config.control.probs),
        "intervention": list(config.intervention.probs),
        "total_sizes": list(config.total_sizes),
        "allocation": [config.allocation.control_weight, config.allocation.intervention_weight],
        "tests": list(config.tests),
        "alpha": config.alpha,
        "replications": config.replications,
        "seed": config.seed,
        "dichotomization_cut": config.dichotomization_cut,
    }


def merror_config_from_dict(data: dict) -> tuple:
    """Build (Roles, MErrorConfig) from a parsed document."""
    issues: list[ValidationIssue] = []
    _check_kind(data, "merror", issues)

    roles_raw = _require(data, "roles", issues, "role mapping")
    roles = None
    if roles_raw is not None:
        if not isinstance(roles_raw, dict):
            issues.append(ValidationIssue("roles", "must be a mapping with outcome/exposure/confounders"))
        else:
            outcome = roles_raw.get("outcome")
            exposure = roles_raw.get("exposure")
            confounders = roles_raw.get("confounders", [])
            if not isinstance(outcome, str):
                issues.append(ValidationIssue("roles.outcome", "must name the outcome column"))
            if not isinstance(exposure, str):
                issues.append(ValidationIssue("roles.exposure", "must name the exposure column"))
            if not isinstance(confounders, (list, tuple)) or not all(isinstance(c, str) for c in confounders):
                issues.append(ValidationIssue("roles.confounders", "must be a list of column names"))
            if not issues:
                roles = Roles(outcome=outcome, exposure=exposure, confounders=confounders)

    targets_raw = _require(data, "targets", issues, "target variable sets")
    targets = None
    if targets_raw is not None:
        ok = isinstance(targets_raw, (list, tuple)) and all(
            isinstance(t, (list, tuple)) and all(isinstance(c, str) for c in t) for t in targets_raw
        )
        if not ok:
            issues.append(ValidationIssue("targets", "must be a list of column-name lists"))
        else:
            targets = [list(t) for t in targets_raw]

    tau_grid = _number_list(_require(data, "tau_grid", issues, "error-proportion grid"), "tau_grid", issues)
    replications = _int(_require(data, "replications", issues, "replication count"), "replications", issues)
    seed = _int(_require(data, "seed", issues, "master seed"), "seed", issues)

    unknown = set(data) - {"kind", "roles", "targets", "tau_grid", "replications", "seed"}
    for key in sorted(unknown):
        issues.append(ValidationIssue(key, "unknown config key"))

    if issues:
        raise ConfigValidationError(issues)
    return roles, MErrorConfig(targets=targets, tau_grid=tau_grid, replications=replications, seed=seed)


def merror_config_to_dict(config: MErrorConfig, roles: Roles) -> dict:
    return {
        "kind": "merror",
        "roles": {
            "outcome": roles.outcome,
            "exposure": roles.exposure,
            "confounders": list(roles.confounders),
        },
        "targets": [list(t) for t in config.targets],
        "tau_grid": list(config.tau_grid),
        "replications": config.replications,
        "seed": config.seed,
    }


def synth_spec_from_dict(data: dict) -> SynthSpec:
    issues: list[ValidationIssue] = []
    n = _int(_require(data, "n", issues, "sample size"), "n", issues)
    coefficients = _number_list(
        _require(data, "coefficients", issues, "coefficient list"), "coefficients", issues
    )
    noise_sd = _require(data, "noise_sd", issues, "noise standard deviation")
    if noise_sd is not None and (not isinstance(noise_sd, numbers.Real) or noise_sd < 0):
        issues.append(ValidationIssue("noise_sd", f"must be a number >= 0, got {noise_sd!r}"))
        noise_sd = None
    cov_raw = _require(data, "covariance", issues, "covariance matrix")
    covariance = None
    if cov_raw is not None:
        ok = isinstance(cov_raw, (list, tuple)) and all(
            isinstance(row, (list, tuple)) and all(isinstance(v, numbers.Real) for v in row) for row in cov_raw
        )
        if not ok:
            issues.append(ValidationIssue("covariance", "must be a square matrix of numbers"))
        else:
            covariance = [[float(v) for v in row] for row in cov_raw]
            if any(len(row) != len(covariance) for row in covariance):
                issues.append(ValidationIssue("covariance", "must be square"))
    if issues:
        raise ConfigValidationError(issues)
    return SynthSpec(n=n, covariance=covariance, coefficients=coefficients, noise_sd=float(noise_sd))
