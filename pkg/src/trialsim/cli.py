"""Batch entry point: run studies from commented config files.

Configuration documents are the single source of truth for statistical
parameters; flags may only override the seed, thread count, and output
destination, which keeps runs auditable. Exit codes: 0 success, 1
validation error, 2 I/O error. stdout carries only the summary table;
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import yaml

from .configio import (
    load_yaml,
    merror_config_from_dict,
    power_config_from_dict,
    synth_spec_from_dict,
)
from .merror import load_csv, run_merror_study, synth_dataset, validate_merror_config
from .power_engine import run_power_study
from .reporting import merror_document, power_document, write_results
from .sampling import TAG_SYNTH_DATA, StreamKey, derive_stream
from .trial import ConfigValidationError, ValidationIssue, validate_config

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _fail_validation(error) -> int:
    print("configuration invalid:", file=sys.stderr)
    if isinstance(error, ConfigValidationError):
        for issue in error.issues:
            print(f"  {issue}", file=sys.stderr)
    else:
        print(f"  {error}", file=sys.stderr)
    return EXIT_VALIDATION


def _fail_io(error) -> int:
    print(f"error: {error}", file=sys.stderr)
    return EXIT_IO


def _add_common_flags(parser):
    parser.add_argument("--config", required=True, help="YAML config document (statistical parameters)")
    parser.add_argument("--seed", type=int, default=None, help="override the config's master seed")
    parser.add_argument("--threads", type=int, default=None, help="worker count (default: machine parallelism)")
    parser.add_argument("--out", default=None, help="results path (default: <kind>_results.<ext>)")
    parser.add_argument(
        "--format", choices=("structured", "csv"), default="structured", help="results file format"
    )
    parser.add_argument("--quiet", action="store_true", help="suppress the stdout summary table")


def _load_config_dict(path):
    """Raises OSError for unreadable files, ConfigValidationError for bad YAML."""
    try:
        return load_yaml(path)
    except yaml.YAMLError as exc:
        raise ConfigValidationError([ValidationIssue("<document>", f"YAML parse error: {exc}")]) from exc


def _out_path(args, kind: str) -> str:
    if args.out:
        return args.out
    extension = "json" if args.format == "structured" else "csv"
    return f"{kind}_results.{extension}"


def _print_power_summary(doc):
    cells = doc.results["cells"]
    width = max(len(c["test"]) for c in cells)
    print(f"{'test':<{width}}  {'N':>6}  {'power':>8}  {'mc_se':>8}  {'type1':>8}  {'mc_se':>8}  {'failed':>6}")
    for cell in cells:
        power = "n/a" if cell["power"] is None else f"{cell['power']:.4f}"
        power_se = "" if cell["power_mc_se"] is None else f"{cell['power_mc_se']:.4f}"
        type1 = "n/a" if cell["type1"] is None else f"{cell['type1']:.4f}"
        type1_se = "" if cell["type1_mc_se"] is None else f"{cell['type1_mc_se']:.4f}"
        failed = cell["h1_not_estimable"] + cell["h0_not_estimable"]
        print(
            f"{cell['test']:<{width}}  {cell['total_n']:>6}  {power:>8}  {power_se:>8}"
            f"  {type1:>8}  {type1_se:>8}  {failed:>6}"
        )


def _print_merror_summary(doc):
    baseline = doc.results["baseline"]
    print(f"baseline exposure coefficient: {baseline['coefficients'][1]:.6g}")
    print(f"{'target_set':<24}  {'tau':>6}  {'mean':>10}  {'sd':>10}  {'rel_bias':>9}  {'failed':>6}")
    for cell in doc.results["cells"]:
        mean = "n/a" if cell["mean"] is None else f"{cell['mean']:.5f}"
        sd = "" if cell["sd"] is None else f"{cell['sd']:.5f}"
        bias = "" if cell["relative_bias"] is None else f"{cell['relative_bias']:+.3f}"
        print(
            f"{'+'.join(cell['target_set']):<24}  {cell['tau']:>6g}  {mean:>10}  {sd:>10}"
            f"  {bias:>9}  {cell['not_estimable']:>6}"
        )


def _cmd_power(args) -> int:
    try:
        data = _load_config_dict(args.config)
    except OSError as exc:
        return _fail_io(exc)
    except ConfigValidationError as exc:
        return _fail_validation(exc)
    try:
        config = power_config_from_dict(data)
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
        config = validate_config(config)
    except ConfigValidationError as exc:
        return _fail_validation(exc)

    results = run_power_study(config, workers=args.threads)
    doc = power_document(results)
    out = _out_path(args, "power")
    try:
        write_results(doc, out, format=args.format)
    except OSError as exc:
        return _fail_io(exc)
    print(f"wrote {out}", file=sys.stderr)
    if not args.quiet:
        _print_power_summary(doc)
    return EXIT_OK


def _cmd_merror(args) -> int:
    try:
        data = _load_config_dict(args.config)
    except OSError as exc:
        return _fail_io(exc)
    except ConfigValidationError as exc:
        return _fail_validation(exc)
    try:
        roles, config = merror_config_from_dict(data)
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
    except ConfigValidationError as exc:
        return _fail_validation(exc)

    dropped = 0
    try:
        if args.data is not None:
            dataset, dropped = load_csv(args.data, roles)
            if dropped:
                print(f"dropped {dropped} row(s) with missing/non-numeric role values", file=sys.stderr)
        else:
            spec_data = _load_config_dict(args.synthetic)
            spec = synth_spec_from_dict(spec_data)
            stream = derive_stream(StreamKey(config.seed, 0, TAG_SYNTH_DATA))
            dataset = synth_dataset(spec, stream)
            roles = dataset.roles
    except ConfigValidationError as exc:
        return _fail_validation(exc)
    except (OSError, ValueError) as exc:
        return _fail_io(exc)

    try:
        config = validate_merror_config(config, dataset.roles)
    except ConfigValidationError as exc:
        return _fail_validation(exc)

    results = run_merror_study(dataset, config, workers=args.threads, dropped_rows=dropped)
    doc = merror_document(results)
    out = _out_path(args, "merror")
    try:
        write_results(doc, out, format=args.format)
    except OSError as exc:
        return _fail_io(exc)
    print(f"wrote {out}", file=sys.stderr)
    if not args.quiet:
        _print_merror_summary(doc)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(workers=args.threads, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trialsim",
        description="Simulation workbench: ordinal-endpoint trial power and measurement-error bias.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    power = sub.add_parser("power", help="run a power/type-I-error study")
    _add_common_flags(power)
    power.set_defaults(func=_cmd_power)

    merror = sub.add_parser("merror", help="run a measurement-error bias study")
    _add_common_flags(merror)
    source = merror.add_mutually_exclusive_group(required=True)
    source.add_argument("--data", default=None, help="CSV dataset (header row, '.' decimals)")
    source.add_argument("--synthetic", default=None, help="YAML synthetic-dataset spec")
    merror.set_defaults(func=_cmd_merror)

    serve = sub.add_parser("serve", help="start the HTTP service and web UI")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=int(os.environ.get("TRIALSIM_PORT", "8787")))
    serve.add_argument("--threads", type=int, default=None)
    serve.add_argument("--static-dir", default=None, help="directory with the built web UI")
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
