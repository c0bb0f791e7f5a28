"""Command-line interface: run an experiment preset, write CSV, figures, images."""

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from .harness import (PRESET_SPECS, ConfigError, build_spec, parse_config,
                      run_preset)
from .sensing import ImageFormatError

_SUMMARIES = {
    "success-sweep": "success rate vs oversampling ratio m/n (noiseless Gaussian)",
    "converge": "relative error per pass: TWF vs ITWF sampling variants",
    "cdp": "image recovery from coded diffraction patterns",
    "snr-sweep": "final relative MSE vs SNR under Poisson noise",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; for us bad usage is a config error (1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed_value(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit int")
    return value


def _config_epilog(cls):
    spec = cls()
    lines = ["config file keys (one `key = value` per line, '#' comments),",
             "with desk-scale defaults:"]
    for f in fields(cls):
        default = getattr(spec, f.name)
        if isinstance(default, tuple):
            default = ",".join(str(v) for v in default)
        lines.append(f"  {f.name} = {default}")
    return "\n".join(lines)


def build_parser():
    parser = _Parser(prog="twflow",
                     description="Phase retrieval experiment presets "
                                 "(truncated Wirtinger flow).")
    sub = parser.add_subparsers(dest="preset", required=True,
                                metavar="{" + ",".join(PRESET_SPECS) + "}")
    for preset, cls in PRESET_SPECS.items():
        p = sub.add_parser(preset, help=_SUMMARIES[preset],
                           epilog=_config_epilog(cls),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", type=Path, default=None,
                       help="key=value config file overriding preset defaults")
        p.add_argument("--seed", type=_seed_value, default=0,
                       help="root RNG seed (default 0)")
        p.add_argument("--out", type=Path, default=Path("."),
                       help="output directory (default: current directory)")
        p.add_argument("--scale", choices=("desk", "paper"), default="desk",
                       help="experiment scale (default desk)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        overrides = parse_config(args.config) if args.config else None
        spec = build_spec(args.preset, args.scale, overrides)
    except ConfigError as exc:
        print(f"twflow: config error: {exc}", file=sys.stderr)
        return 1
    try:
        rows = run_preset(args.preset, spec, args.seed, args.out)
        from .plotting import render_figure
        figure_path = Path(args.out) / f"{args.preset}.png"
        render_figure(args.preset, rows, figure_path)
    except ConfigError as exc:
        print(f"twflow: config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ImageFormatError) as exc:
        print(f"twflow: I/O error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {Path(args.out) / (args.preset + '.csv')} ({len(rows)} rows)")
    print(f"wrote {figure_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
