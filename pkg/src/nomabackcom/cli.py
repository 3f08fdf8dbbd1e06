"""Command-line front end.

    nomabackcom <experiment> [--config FILE] [--seed N] [--out STEM] ...

Exit codes:
    0  success
    1  a validation check failed (xcheck tolerance, K-S rejection)
    2  usage error
    3  config file could not be parsed
    4  config value violates a constraint
    5  numerical engine error
    6  file I/O error

Worker threads for Monte Carlo runs come from NOMABACKCOM_WORKERS (default 1);
results do not depend on it.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import experiments as ex
from .config import EXPERIMENTS, FORMATS, RunConfig, parse_config
from .errors import ConfigParseError, ConfigValidationError, NomaBackComError
from .simulator import MIN_TRIALS

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_ENGINE = 5
EXIT_IO = 6

PROG = "nomabackcom"

COLUMNS_HELP = """\
output columns:
  ber-curve    snr_db, ber1_analytic, ber2_analytic, ber1_mc, ber2_mc,
               stderr1_mc, stderr2_mc (per selected engine)
  xcheck       as ber-curve with both engines
  m-sweep      m1 | m2, then the ber-curve engine columns
  contour      gamma1, gamma2, ber1, ber2
  gamma2-opt   snr_db, gamma2, ber1, ber2, noma_per_slot, normalized_bits,
               is_optimal
  oma-compare  snr_db, then per engine (suffix _analytic | _mc):
               noma_per_slot, tdma_per_slot, noma_normalized, tdma_normalized,
               noma_ber1, noma_ber2, tdma_ber1, tdma_ber2
  ks-validate  set_index, kind (0 sum, 1 difference), m1, omega1, m2, omega2,
               statistic, critical, reject
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog=PROG, description=__doc__.split("\n\n")[0],
                     epilog=COLUMNS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="experiment")
    sub.required = True
    for name in EXPERIMENTS:
        p = sub.add_parser(name, epilog=COLUMNS_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", metavar="FILE", help="INI run configuration")
        p.add_argument("--seed", type=int, help="overrides [run] seed (default 42)")
        p.add_argument("--out", metavar="STEM", help="output path without extension")
        p.add_argument("--format", choices=FORMATS, help="default both")
        p.add_argument("--timestamp", help="pin the metadata timestamp")
        if name != "ks-validate":
            p.add_argument("--trials", type=int)
            p.add_argument("--engine", choices=ex.ENGINES)
        if name == "ks-validate":
            p.add_argument("--dump-samples", metavar="DIR",
                           help="write every sample set as CSV into DIR")
        if name == "xcheck":
            p.add_argument("--tolerance", type=float, default=0.10,
                           help="max relative deviation (default 0.10)")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigValidationError(f"seed: value {args.seed} outside [0, 2**64)")
        cfg = replace(cfg, seed=args.seed)
    if args.format is not None:
        cfg = replace(cfg, format=args.format)
    if getattr(args, "trials", None) is not None:
        if args.trials < MIN_TRIALS:
            raise ConfigValidationError(f"trials: value {args.trials} below the minimum {MIN_TRIALS}")
        cfg = replace(cfg, trials=args.trials)
    if getattr(args, "engine", None) is not None:
        if cfg.experiment in ("contour", "gamma2-opt") and args.engine != "analytic":
            raise ConfigValidationError(f"engine: {cfg.experiment} supports the analytic engine only")
        cfg = replace(cfg, engine=args.engine)
    if args.out is not None:
        cfg = replace(cfg, output=args.out)
    return cfg


def sweep_spec(cfg: RunConfig) -> ex.SweepSpec:
    axes = cfg.axes
    axis2 = axes[1] if len(axes) > 1 else None
    return ex.SweepSpec(cfg.cluster, axes[0], cfg.sweep[axes[0]], axis2,
                        cfg.sweep[axis2] if axis2 else (), cfg.engine, cfg.trials,
                        cfg.effective_seed, cfg.fading_free)


def dispatch(cfg: RunConfig, *, timestamp=None, dump_samples=None, tolerance=0.10,
             out=None) -> int:
    """Run one experiment, write its table(s), return the exit status."""
    out = sys.stdout if out is None else out
    stem = Path(cfg.output or f"results/{cfg.experiment}")
    status = EXIT_OK
    kind = cfg.experiment

    if kind == "ks-validate":
        table, samples = ex.ks_validation(cfg.effective_seed, cfg.ks_samples, cfg.ks_alpha,
                                          timestamp=timestamp, return_samples=True)
        for row in table.rows:
            rec = dict(zip(table.columns, row))
            law = "sum " if rec["kind"] == 0 else "diff"
            verdict = "reject" if rec["reject"] else "accept"
            print(f"{law} m1={rec['m1']:g} omega1={rec['omega1']:g} m2={rec['m2']:g} "
                  f"omega2={rec['omega2']:g}  D={rec['statistic']:.4f}  "
                  f"c={rec['critical']:.4f}  {verdict}", file=out)
            if rec["reject"]:
                status = EXIT_CHECK_FAILED
        if dump_samples:
            d = Path(dump_samples)
            d.mkdir(parents=True, exist_ok=True)
            for (k, i), data in samples.items():
                name = f"{'sum' if k == 0 else 'diff'}_set{i}.csv"
                (d / name).write_text("value\n" + "\n".join(repr(float(v)) for v in data) + "\n",
                                      encoding="utf-8")
    else:
        spec = sweep_spec(cfg)
        if kind == "ber-curve":
            table = ex.run_ber_curve(spec, timestamp=timestamp)
        elif kind == "m-sweep":
            table = ex.run_m_sweep(spec, timestamp=timestamp)
        elif kind == "contour":
            table = ex.run_contour(spec, timestamp=timestamp)
        elif kind == "oma-compare":
            table = ex.run_oma_comparison(spec, timestamp=timestamp)
        elif kind == "gamma2-opt":
            table = ex.run_gamma2_opt(spec, timestamp=timestamp)
            for opt in table.metadata["optima"]:
                print(f"snr {opt['snr_db']:g} dB: gamma2* = {opt['gamma2_star']:.2f}, "
                      f"normalized effective bits = {opt['effective_bits_max']:.4f}", file=out)
        elif kind == "xcheck":
            check = ex.cross_check(spec, tolerance=tolerance, timestamp=timestamp)
            table = check.table
            where = ""
            if check.worst:
                w = check.worst
                where = f" (user {w['user']} at {w['snr_db']:g} dB)"
            print(f"max relative deviation {check.max_rel_dev:.4f}{where} over "
                  f"{check.compared} points with BER >= 1e-3; tolerance {tolerance:g}: "
                  f"{'PASS' if check.passed else 'FAIL'}", file=out)
            if not check.passed:
                status = EXIT_CHECK_FAILED
        else:
            raise AssertionError(kind)

    for path in table.write(stem, cfg.format):
        print(f"wrote {path}", file=out)
    return status


def _fail(code, message):
    print(f"{PROG}: error: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
        cfg = _apply_overrides(parse_config(text, args.command), args)
        return dispatch(cfg, timestamp=args.timestamp,
                        dump_samples=getattr(args, "dump_samples", None),
                        tolerance=getattr(args, "tolerance", 0.10))
    except ConfigParseError as exc:
        return _fail(EXIT_PARSE, exc)
    except ConfigValidationError as exc:
        return _fail(EXIT_VALIDATION, exc)
    except (NomaBackComError, ValueError, ArithmeticError) as exc:
        return _fail(EXIT_ENGINE, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)


if __name__ == "__main__":
    sys.exit(main())
