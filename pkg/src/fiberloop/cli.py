"""Command-line entry point.

Subcommands: loss-sweep, mismatch-sweep, jitter-sweep, dump-map, validate.
Grid flags accept a single value, a comma list, or start:stop:step ranges.
Data is written to --out (or stdout); progress goes to stderr; --plot also
renders a figure beside the data file. Config files are JSON objects with
the same field names as the flags; flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .loss import LossParams
from .sweep import (
    ConfigError,
    SweepConfig,
    dump_map,
    run_loss_sweep,
    run_mismatch_sweep,
    run_validation,
    sequence_from_json,
)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose failures stay machine readable."""

    def error(self, message: str) -> "None":  # noqa: A003 - argparse API
        print(json.dumps({"error": "usage", "message": message}), file=sys.stderr)
        raise SystemExit(2)


def parse_int_axis(text: str) -> tuple[int, ...]:
    return tuple(int(round(v)) for v in parse_float_axis(text))


def parse_float_axis(text: str) -> tuple[float, ...]:
    """Parse '0.7', '0.7,0.9', or 'start:stop:step' (inclusive) grids."""
    values: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            pieces = part.split(":")
            if len(pieces) != 3:
                raise ConfigError(f"range must be start:stop:step, got {part!r}")
            start, stop, step = (float(p) for p in pieces)
            if step <= 0:
                raise ConfigError(f"range step must be positive, got {step}")
            count = int(round((stop - start) / step))
            if count < 0:
                raise ConfigError(f"range {part!r} is empty")
            values.extend(start + k * step for k in range(count + 1))
        elif part:
            values.append(float(part))
    if not values:
        raise ConfigError(f"empty grid expression {text!r}")
    return tuple(values)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--out", help="output data file (default: stdout)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), help="output format")
    p.add_argument("--iterations", type=int, help="search iterations / trials per grid point")
    p.add_argument("--plot", action="store_true", help="also render a PNG figure next to --out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fiberloop", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("loss-sweep", help="similarity / post-selection vs component loss")
    _add_common(p)
    p.add_argument("--m", default=None, help="mode-count grid (int values or ranges)")
    p.add_argument("--eta-f", default=None, help="fiber efficiency grid")
    p.add_argument("--eta-s", default=None, help="switch efficiency grid")
    p.add_argument("--experiment", choices=("loss-similarity", "loss-switch"), default=None)
    p.add_argument("--no-outer", action="store_true", help="drop the uniform outer-loop factor")

    for name, help_text in (
        ("mismatch-sweep", "fidelity vs loop length error"),
        ("jitter-sweep", "fidelity vs source time jitter"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.add_argument("--m", default=None, help="mode-count grid")
        p.add_argument("--delta", default=None, help="loop length error grid, units of width")
        p.add_argument("--sigma", default=None, help="jitter std grid, units of width")
        p.add_argument("--width", type=float, default=None, help="wave-packet width (default 1)")
        p.add_argument("--tau", type=float, default=None, help="time-bin spacing (default 100)")
        p.add_argument("--jitter-repeats", type=int, default=None)

    p = sub.add_parser("dump-map", help="emit the maps of one device instance as JSON")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--loops", type=int, default=1)
    p.add_argument("--eta-f", type=float, default=1.0)
    p.add_argument("--eta-s", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None, help="draw a random program")
    p.add_argument("--sequence-file", default=None, help="JSON file with an explicit program")
    p.add_argument("--no-outer", action="store_true")
    p.add_argument("--out", default=None)

    p = sub.add_parser("validate", help="run the cross-module consistency suite")
    p.add_argument("--seed", type=int, default=0)

    return parser


def _load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise ConfigError("config file must hold a JSON object")
    return payload


def _axis_from(value, parse, fallback) -> tuple:
    if value is None:
        return fallback
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


def _build_sweep_config(args: argparse.Namespace, experiment: str) -> SweepConfig:
    file_cfg = _load_config_file(args.config) if getattr(args, "config", None) else {}

    def pick(flag, key, default):
        if flag is not None:
            return flag
        return file_cfg.get(key, default)

    kwargs = dict(
        experiment=pick(getattr(args, "experiment", None), "experiment", experiment),
        modes=_axis_from(pick(getattr(args, "m", None), "modes", None), parse_int_axis, (3,)),
        master_seed=pick(args.seed, "master_seed", 0),
        iterations=pick(args.iterations, "iterations", 0),
        fmt=pick(args.fmt, "fmt", "csv"),
        out=pick(args.out, "out", None),
    )
    if experiment in ("loss-similarity", "loss-switch"):
        include_outer = bool(file_cfg.get("include_outer", True))
        if getattr(args, "no_outer", False):
            include_outer = False
        kwargs.update(
            eta_f=_axis_from(pick(args.eta_f, "eta_f", None), parse_float_axis, (1.0,)),
            eta_s=_axis_from(pick(args.eta_s, "eta_s", None), parse_float_axis, (1.0,)),
            include_outer=include_outer,
        )
    else:
        kwargs.update(
            delta=_axis_from(pick(args.delta, "delta", None), parse_float_axis, (0.0,)),
            sigma=_axis_from(pick(args.sigma, "sigma", None), parse_float_axis, (0.0,)),
            width=pick(args.width, "width", 1.0),
            bin_spacing=pick(args.tau, "bin_spacing", 100.0),
            jitter_repeats=pick(args.jitter_repeats, "jitter_repeats", 1),
        )
    return SweepConfig(**kwargs)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _figure_path(out: str | None) -> str:
    if not out:
        raise ConfigError("--plot requires --out so the figure has a home")
    stem = out.rsplit(".", 1)[0] if "." in out.rsplit("/", 1)[-1] else out
    return stem + ".png"


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "loss-sweep":
        config = _build_sweep_config(args, "loss-similarity")
        fig_path = _figure_path(config.out) if args.plot else None
        result = run_loss_sweep(config)
    elif args.command in ("mismatch-sweep", "jitter-sweep"):
        experiment = "mismatch-delta" if args.command == "mismatch-sweep" else "jitter-sigma"
        config = _build_sweep_config(args, experiment)
        config = replace(config, experiment=experiment)
        fig_path = _figure_path(config.out) if args.plot else None
        result = run_mismatch_sweep(config)
    elif args.command == "dump-map":
        sequence = None
        if args.sequence_file:
            with open(args.sequence_file, encoding="utf-8") as fh:
                sequence = sequence_from_json(json.load(fh))
        payload = dump_map(
            m=args.m,
            loops=args.loops,
            loss=LossParams(args.eta_f, args.eta_s),
            seed=args.seed,
            sequence=sequence,
            include_outer=not args.no_outer,
        )
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
        return 0
    elif args.command == "validate":
        checks = run_validation(args.seed)
        for check in checks:
            status = "PASS" if check.passed else "FAIL"
            print(f"{status} {check.name} {check.detail}")
        return 0 if all(c.passed for c in checks) else 1
    else:  # pragma: no cover - argparse enforces the choices
        raise ConfigError(f"unknown command {args.command!r}")

    _emit(result.rendered(), config.out)
    if fig_path:
        from .report import render_figure

        print(f"wrote {render_figure(result, fig_path)}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
