import pytest

from trialsim.configio import (
    load_yaml,
    merror_config_from_dict,
    merror_config_to_dict,
    power_config_from_dict,
    power_config_to_dict,
    synth_spec_from_dict,
)
from trialsim.trial import ConfigValidationError, validate_config

POWER_DICT = {
    "kind": "power",
    "control": [0.265, 0.275, 0.247, 0.151, 0.020, 0.042],
    "intervention": [0.475, 0.180, 0.150, 0.137, 0.018, 0.040],
    "total_sizes": [100, 200],
    "allocation": [1, 1],
    "tests": ["mann_whitney", "chi_square"],
    "alpha": 0.05,
    "replications": 1000,
    "seed": 20260809,
    "dichotomization_cut": None,
}

MERROR_DICT = {
    "kind": "merror",
    "roles": {"outcome": "sbp", "exposure": "hba1c", "confounders": ["age", "bmi"]},
    "targets": [["hba1c"], ["bmi"], ["hba1c", "bmi"]],
    "tau_grid": [0.0, 0.25, 0.5, 1.0],
    "replications": 200,
    "seed": 7,
}


class TestPowerConfig:
    def test_round_trip(self):
        config = validate_config(power_config_from_dict(POWER_DICT))
        echoed = power_config_to_dict(config)
        assert power_config_from_dict(echoed) == config

    def test_missing_keys_all_reported(self):
        with pytest.raises(ConfigValidationError) as exc:
            power_config_from_dict({"kind": "power"})
        paths = {issue.path for issue in exc.value.issues}
        assert {"control", "intervention", "total_sizes", "tests", "alpha", "replications", "seed"} <= paths

    def test_wrong_types_reported_with_paths(self):
        bad = dict(POWER_DICT, control="not a list", alpha="high", total_sizes=[100.5])
        with pytest.raises(ConfigValidationError) as exc:
            power_config_from_dict(bad)
        paths = {issue.path for issue in exc.value.issues}
        assert {"control", "alpha", "total_sizes"} <= paths

    def test_unknown_key_reported(self):
        with pytest.raises(ConfigValidationError) as exc:
            power_config_from_dict(dict(POWER_DICT, powr=1))
        assert any(issue.path == "powr" for issue in exc.value.issues)

    def test_kind_mismatch(self):
        with pytest.raises(ConfigValidationError):
            power_config_from_dict(dict(POWER_DICT, kind="merror"))

    def test_allocation_defaults_to_even(self):
        data = {k: v for k, v in POWER_DICT.items() if k != "allocation"}
        config = power_config_from_dict(data)
        assert (config.allocation.control_weight, config.allocation.intervention_weight) == (1, 1)


class TestMErrorConfig:
    def test_round_trip(self):
        roles, config = merror_config_from_dict(MERROR_DICT)
        echoed = merror_config_to_dict(config, roles)
        roles2, config2 = merror_config_from_dict(echoed)
        assert roles2 == roles
        assert config2 == config

    def test_missing_roles_reported(self):
        bad = dict(MERROR_DICT, roles={"confounders": ["age"]})
        with pytest.raises(ConfigValidationError) as exc:
            merror_config_from_dict(bad)
        paths = {issue.path for issue in exc.value.issues}
        assert {"roles.outcome", "roles.exposure"} <= paths

    def test_bad_targets(self):
        with pytest.raises(ConfigValidationError):
            merror_config_from_dict(dict(MERROR_DICT, targets=["hba1c"]))


class TestSynthSpec:
    def test_parse(self):
        spec = synth_spec_from_dict(
            {"n": 100, "covariance": [[1.0, 0.5], [0.5, 1.0]], "coefficients": [1, 1], "noise_sd": 1}
        )
        assert spec.n == 100
        assert spec.covariance[0][1] == 0.5

    def test_non_square_rejected(self):
        with pytest.raises(ConfigValidationError):
            synth_spec_from_dict({"n": 10, "covariance": [[1.0, 0.5]], "coefficients": [1], "noise_sd": 1})


def test_load_yaml_comments_and_values(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(
        "# study configuration\n"
        "kind: power  # which engine\n"
        "control: [0.5, 0.5]\n"
        "intervention: [0.2, 0.8]\n"
        "total_sizes: [30]\n"
        "tests: [chi_square]\n"
        "alpha: 0.05\n"
        "replications: 100\n"
        "seed: 1\n"
    )
    config = validate_config(power_config_from_dict(load_yaml(path)))
    assert config.alpha == 0.05
    assert config.total_sizes == (30,)
