"""Command-line entry point: ``bathsynth <scenario> [--config PATH] [--out PATH]``.

Exit status: 0 success, 1 invalid configuration, 2 a comparison exceeded its
bound, 3 internal error.
"""

from __future__ import annotations

import argparse
import sys
import traceback

from .scenarios import SCENARIOS, ConfigError, ScenarioConfig, load_config, run

EXIT_OK, EXIT_CONFIG, EXIT_BOUND, EXIT_INTERNAL = 0, 1, 2, 3

_HELP = {
    "synth-bath": "reduce a star bath to a chain and write the chain table",
    "decay": "single site + bath: anchor intensity and fitted decay rate",
    "dimer": "coupler with a bath on site B: intensities and transfer lengths",
    "two-photon": "two photons in the coupler: post-selected populations and entropy",
    "lindblad-compare": "bath-realized vs master-equation two-photon populations",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bathsynth",
        description="Emulate lossy (non-Hermitian) waveguide dynamics with Hermitian "
                    "bath chains and write the resulting traces as CSV.")
    sub = parser.add_subparsers(dest="scenario", required=True, metavar="SCENARIO")
    for name in SCENARIOS:
        p = sub.add_parser(name, help=_HELP[name], description=_HELP[name])
        p.add_argument("--config", metavar="PATH",
                       help=f"INI file with a [{name}] section; missing keys take defaults")
        p.add_argument("--out", metavar="PATH",
                       help=f"output table (default: the config's 'out' or {name}.csv)")
        p.add_argument("--override-lmax", action="store_true",
                       help="run even when z_end exceeds the chain's safe length L_max")
        p.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
        p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                       help="override one config key; repeatable")
    return parser


def _overrides(pairs) -> dict:
    out = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, args.scenario)
        else:
            cfg = ScenarioConfig(args.scenario)
        if args.set:
            cfg = cfg.with_overrides(_overrides(args.set))
        out = args.out or cfg.out or f"{args.scenario}.csv"
        result = run(cfg, override_lmax=args.override_lmax)
        for w in result.warnings:
            print(f"warning: {w}", file=sys.stderr)
        result.write(out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception:
        print("internal error:", file=sys.stderr)
        traceback.print_exc()
        return EXIT_INTERNAL
    if not args.quiet:
        print(result.summary())
        print(f"wrote {out}")
    if result.bound_failed:
        print(f"error: max discrepancy {result.report['max_discrepancy']} exceeds bound "
              f"{result.report['bound']}", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
