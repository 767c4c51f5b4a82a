import json
from pathlib import Path

import pytest

from trialsim.cli import main
from trialsim.reporting import ResultDocument

REPO_ROOT = Path(__file__).resolve().parent.parent

SMALL_POWER_YAML = """\
kind: power
control: [0.5, 0.5]
intervention: [0.2, 0.8]
total_sizes: [30, 40]
allocation: [1, 1]
tests: [mann_whitney, chi_square]
alpha: 0.05
replications: 120
seed: 42
"""

SMALL_MERROR_YAML = """\
kind: merror
roles:
  outcome: outcome
  exposure: exposure
  confounders: []
targets:
  - [exposure]
tau_grid: [0.0, 0.5]
replications: 10
seed: 42
"""

SMALL_SYNTH_YAML = """\
n: 400
covariance: [[1.0]]
coefficients: [1.0]
noise_sd: 1.0
"""


@pytest.fixture
def power_config(tmp_path):
    path = tmp_path / "power.yaml"
    path.write_text(SMALL_POWER_YAML)
    return path


class TestPowerCommand:
    def test_happy_path_writes_results_and_summary(self, power_config, tmp_path, capsys):
        out = tmp_path / "results.json"
        code = main(["power", "--config", str(power_config), "--out", str(out), "--threads", "1"])
        assert code == 0
        doc = ResultDocument.from_json(out.read_text())
        assert doc.kind == "power"
        captured = capsys.readouterr()
        assert "mann_whitney" in captured.out
        assert "wrote" in captured.err and "wrote" not in captured.out

    def test_flagship_config_parses(self):
        # the bundled example must stay loadable and valid
        from trialsim.configio import load_yaml, power_config_from_dict
        from trialsim.trial import validate_config

        config = validate_config(power_config_from_dict(load_yaml(REPO_ROOT / "configs" / "door_power.yaml")))
        assert config.control.k == 6
        assert config.replications == 10_000

    def test_validation_error_names_offending_arm(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text(SMALL_POWER_YAML.replace("control: [0.5, 0.5]", "control: [0.5, 0.6]"))
        code = main(["power", "--config", str(path), "--out", str(tmp_path / "r.json")])
        assert code == 1
        err = capsys.readouterr().err
        assert "control" in err

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["power", "--config", str(tmp_path / "nope.yaml")]) == 2

    def test_unwritable_out_is_io_error(self, power_config, tmp_path):
        code = main(["power", "--config", str(power_config), "--out", str(tmp_path / "no" / "dir.json"), "--threads", "1"])
        assert code == 2

    def test_seed_override_and_determinism(self, power_config, tmp_path, capsys):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["power", "--config", str(power_config), "--seed", "7", "--out", str(out1), "--quiet", "--threads", "1"]) == 0
        assert main(["power", "--config", str(power_config), "--seed", "7", "--out", str(out2), "--quiet", "--threads", "2"]) == 0
        doc1 = ResultDocument.from_json(out1.read_text())
        doc2 = ResultDocument.from_json(out2.read_text())
        assert doc1.canonical_json() == doc2.canonical_json()
        assert doc1.config["seed"] == 7
        assert capsys.readouterr().out == ""  # --quiet keeps stdout empty

    def test_csv_format(self, power_config, tmp_path):
        out = tmp_path / "results.csv"
        assert main(["power", "--config", str(power_config), "--out", str(out), "--format", "csv", "--quiet", "--threads", "1"]) == 0
        assert out.read_text().startswith("test,total_n,hypothesis,")


class TestMErrorCommand:
    def test_synthetic_attenuation(self, tmp_path, capsys):
        config = tmp_path / "merror.yaml"
        config.write_text(SMALL_MERROR_YAML)
        synth = tmp_path / "synth.yaml"
        synth.write_text(SMALL_SYNTH_YAML)
        out = tmp_path / "results.json"
        code = main(
            ["merror", "--config", str(config), "--synthetic", str(synth), "--out", str(out), "--threads", "1"]
        )
        assert code == 0
        doc = ResultDocument.from_json(out.read_text())
        baseline = doc.results["baseline"]["coefficients"][1]
        cells = {cell["tau"]: cell for cell in doc.results["cells"]}
        assert cells[0.5]["mean"] < baseline  # attenuation direction
        assert "baseline" in capsys.readouterr().out

    def test_missing_role_column_is_io_error(self, tmp_path, capsys):
        config = tmp_path / "merror.yaml"
        config.write_text(SMALL_MERROR_YAML.replace("exposure: exposure", "exposure: hba1c"))
        data = tmp_path / "data.csv"
        data.write_text("outcome,exposure\n" + "\n".join(f"{i},{i}" for i in range(10)) + "\n")
        code = main(["merror", "--config", str(config), "--data", str(data), "--out", str(tmp_path / "r.json")])
        assert code == 2
        assert "hba1c" in capsys.readouterr().err

    def test_negative_tau_is_validation_error(self, tmp_path):
        config = tmp_path / "merror.yaml"
        config.write_text(SMALL_MERROR_YAML.replace("tau_grid: [0.0, 0.5]", "tau_grid: [-0.5]"))
        synth = tmp_path / "synth.yaml"
        synth.write_text(SMALL_SYNTH_YAML)
        code = main(["merror", "--config", str(config), "--synthetic", str(synth), "--out", str(tmp_path / "r.json")])
        assert code == 1

    def test_csv_data_round(self, tmp_path):
        config = tmp_path / "merror.yaml"
        config.write_text(SMALL_MERROR_YAML)
        rows = ["outcome,exposure"] + [f"{0.8 * i + (i % 3)},{i}" for i in range(40)]
        data = tmp_path / "data.csv"
        data.write_text("\n".join(rows) + "\n")
        out = tmp_path / "results.json"
        assert main(["merror", "--config", str(config), "--data", str(data), "--out", str(out), "--quiet"]) == 0
        assert json.loads(out.read_text())["kind"] == "merror"
