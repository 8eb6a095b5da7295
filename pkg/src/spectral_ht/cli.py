"""``spectral-ht`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import SpectralHTError
from .harness import (
    EXIT_CODES,
    ExperimentConfig,
    check_writable,
    csv_text,
    run_convergence,
    run_phase_transition,
    run_single,
    run_timing,
    single_outputs,
    write_text,
)

COMMANDS = {
    "convergence": "convergence",
    "phase": "phase_transition",
    "timing": "timing",
    "solve": "single_solve",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spectral-ht",
        description="Recover spectrally sparse signals from partial samples and run experiments.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="experiment config JSON (optional for solve)")
    parser.add_argument("--out", help="output path; defaults to the config's output_path")
    parser.add_argument("--input", help="observed-signal JSON for solve")
    parser.add_argument("--force", action="store_true", help="overwrite existing outputs")
    parser.add_argument("--threads", type=int, help="worker processes for trial-level parallelism")
    return parser


def _load_config(args):
    experiment = COMMANDS[args.command]
    if args.config is None:
        if args.command != "solve":
            raise SpectralHTError(f"{args.command} requires --config")
        cfg = ExperimentConfig.from_dict({}, experiment)
    else:
        cfg = ExperimentConfig.load(args.config, experiment)
    overrides = {}
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.out is not None:
        overrides["output_path"] = args.out
    if overrides:
        d = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
        d.update(overrides)
        cfg = ExperimentConfig(**d)
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        out = cfg.output_path
        if args.command == "solve":
            if args.input is None:
                raise SpectralHTError("solve requires --input")
            if out is None:
                raise SpectralHTError("solve requires --out or output_path")
            sig_path, trace_path = single_outputs(out)
            check_writable([sig_path, trace_path], args.force)
            recovered, trace = run_single(cfg, args.input)
            write_text(sig_path, json.dumps([[float(v.real), float(v.imag)] for v in recovered]),
                       args.force)
            write_text(trace_path, trace.to_csv(), args.force)
            print(f"{trace.status}: {trace.iterations} iterations, wrote {sig_path} and {trace_path}")
            return EXIT_CODES[trace.status]

        if out is None:
            raise SpectralHTError(f"{args.command} requires --out or output_path")
        check_writable([out], args.force)
        if args.command == "convergence":
            header, rows = run_convergence(cfg)
        elif args.command == "phase":
            header, rows, _ = run_phase_transition(cfg)
        else:
            header, rows, _ = run_timing(cfg)
        write_text(out, csv_text(header, rows), args.force)
        print(f"wrote {len(rows)} rows to {out}")
        return 0
    except SpectralHTError as exc:
        print(f"spectral-ht: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
