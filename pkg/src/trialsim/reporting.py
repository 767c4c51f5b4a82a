"""Result documents: canonical serialization, CSV flattening, plot payloads.

The structured format is a single JSON text with stable key ordering and
full-precision floats, so serialize -> parse -> serialize is byte-identical
and two runs of the same study differ only in the volatile provenance
fields (timestamp and wall time).
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from datetime import datetime, timezone

from .configio import merror_config_to_dict, power_config_to_dict
from .merror import MErrorResults
from .power_engine import PowerResults

SCHEMA_VERSION = "1"

#: provenance fields that legitimately differ between identical runs
VOLATILE_FIELDS = ("timestamp", "wall_time_s")


@dataclass(frozen=True)
class ResultDocument:
    """A self-describing study result: config echo, results, provenance."""

    data: dict

    @property
    def kind(self) -> str:
        return self.data["kind"]

    @property
    def config(self) -> dict:
        return self.data["config"]

    @property
    def results(self) -> dict:
        return self.data["results"]

    @property
    def provenance(self) -> dict:
        return self.data["provenance"]

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, ensure_ascii=False) + "\n"

    def canonical_json(self) -> str:
        """Serialization with the volatile provenance fields masked; two runs
        of the same study with the same seed agree on this byte-for-byte."""
        masked = json.loads(self.to_json())
        for field in VOLATILE_FIELDS:
            masked["provenance"][field] = None
        return json.dumps(masked, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ResultDocument":
        data = json.loads(text)
        if not isinstance(data, dict) or "schema_version" not in data:
            raise ValueError("not a results document (missing schema_version)")
        if data["schema_version"] != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {data['schema_version']!r}")
        if data.get("kind") not in ("power", "merror"):
            raise ValueError(f"unknown result kind {data.get('kind')!r}")
        return cls(data=data)


def _provenance(master_seed, generator_id, engine_version, wall_time_s) -> dict:
    return {
        "master_seed": master_seed,
        "generator": generator_id,
        "engine_version": engine_version,
        "timestamp": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "wall_time_s": wall_time_s,
    }


def power_document(results: PowerResults) -> ResultDocument:
    return ResultDocument(
        data={
            "schema_version": SCHEMA_VERSION,
            "kind": "power",
            "config": power_config_to_dict(results.config),
            "results": results.to_dict(),
            "provenance": _provenance(
                results.master_seed, results.generator_id, results.engine_version, results.wall_time_s
            ),
        }
    )


def merror_document(results: MErrorResults) -> ResultDocument:
    return ResultDocument(
        data={
            "schema_version": SCHEMA_VERSION,
            "kind": "merror",
            "config": merror_config_to_dict(results.config, results.roles),
            "results": results.to_dict(),
            "provenance": _provenance(
                results.master_seed, results.generator_id, results.engine_version, results.wall_time_s
            ),
        }
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


def results_csv_text(doc: ResultDocument) -> str:
    """Flatten a document into CSV: one row per (test, N, hypothesis) for
    power studies, one row per (target set, tau) for measurement error."""
    out = io.StringIO()
    if doc.kind == "power":
        out.write("test,total_n,hypothesis,estimate,mc_se,ci_low,ci_high,not_estimable,replications\n")
        for cell in doc.results["cells"]:
            for hypothesis, prefix, ne_key in (
                ("H1", "power", "h1_not_estimable"),
                ("H0", "type1", "h0_not_estimable"),
            ):
                ci = cell[f"{prefix}_ci95"] or (None, None)
                row = [
                    cell["test"],
                    _fmt(cell["total_n"]),
                    hypothesis,
                    _fmt(cell[prefix]),
                    _fmt(cell[f"{prefix}_mc_se"]),
                    _fmt(ci[0]),
                    _fmt(ci[1]),
                    _fmt(cell[ne_key]),
                    _fmt(cell["replications"]),
                ]
                out.write(",".join(row) + "\n")
    else:
        out.write("target_set,tau,mean,sd,q025,q975,relative_bias,not_estimable,replications\n")
        for cell in doc.results["cells"]:
            row = [
                "+".join(cell["target_set"]),
                _fmt(cell["tau"]),
                _fmt(cell["mean"]),
                _fmt(cell["sd"]),
                _fmt(cell["q025"]),
                _fmt(cell["q975"]),
                _fmt(cell["relative_bias"]),
                _fmt(cell["not_estimable"]),
                _fmt(cell["replications"]),
            ]
            out.write(",".join(row) + "\n")
    return out.getvalue()


def write_results(doc: ResultDocument, path, format: str = "structured") -> None:
    """Write the document as structured JSON or flattened CSV."""
    if format == "structured":
        text = doc.to_json()
    elif format == "csv":
        text = results_csv_text(doc)
    else:
        raise ValueError(f"unknown format {format!r} (expected 'structured' or 'csv')")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def read_results(path) -> ResultDocument:
    with open(path, encoding="utf-8") as handle:
        return ResultDocument.from_json(handle.read())


def plot_series(doc: ResultDocument, metric: str = "power") -> dict:
    """Plot-ready series: one per test (power vs N) or per target set
    (mean coefficient vs tau), plus a horizontal reference line."""
    if doc.kind == "power":
        if metric not in ("power", "type1"):
            raise ValueError(f"metric must be 'power' or 'type1', got {metric!r}")
        series = []
        for test_id in doc.results["test_ids"]:
            cells = [c for c in doc.results["cells"] if c["test"] == test_id]
            cells.sort(key=lambda c: c["total_n"])
            series.append(
                {
                    "label": test_id,
                    "x": [c["total_n"] for c in cells],
                    "y": [c[metric] for c in cells],
                    "y_err": [
                        1.96 * c[f"{metric}_mc_se"] if c[f"{metric}_mc_se"] is not None else None
                        for c in cells
                    ],
                }
            )
        reference = {"label": "alpha", "value": doc.config["alpha"]}
        return {"kind": "power", "metric": metric, "x_label": "total sample size", "series": series, "reference": reference}

    baseline = doc.results["baseline"]["coefficients"][1]
    series = []
    seen = []
    for cell in doc.results["cells"]:
        key = tuple(cell["target_set"])
        if key not in seen:
            seen.append(key)
    for key in seen:
        cells = [c for c in doc.results["cells"] if tuple(c["target_set"]) == key]
        cells.sort(key=lambda c: c["tau"])
        series.append(
            {
                "label": "+".join(key),
                "x": [c["tau"] for c in cells],
                "y": [c["mean"] for c in cells],
                "y_err": [c["sd"] for c in cells],
            }
        )
    reference = {"label": "baseline", "value": baseline}
    return {"kind": "merror", "metric": "mean_exposure_coefficient", "x_label": "tau", "series": series, "reference": reference}
