"""Run configuration: a strict INI document with [run], [cluster], [sweep]
and [ks] sections.

List values are comma separated (``0, 5, 10``) or an inclusive range
``start:stop:step``.
"""

import configparser
import math
from dataclasses import dataclass
from typing import Optional

from .analytic import BsnLink, ClusterConfig
from .distributions import NakagamiParams
from .errors import ConfigParseError, ConfigValidationError
from .experiments import AXES, ENGINES, KS_ALPHA, KS_SAMPLES
from .simulator import MIN_TRIALS

EXPERIMENTS = ("ber-curve", "gamma2-opt", "contour", "m-sweep", "oma-compare",
               "ks-validate", "xcheck")
FORMATS = ("csv", "json", "both")
DEFAULT_SEED = 42

_SCHEMA = {
    "run": {"experiment", "engine", "trials", "seed", "fading_free", "output", "format"},
    "cluster": {"gamma1", "gamma2", "m1", "omega1", "m2", "omega2",
                "snr_db", "snr1_db", "snr2_db"},
    "sweep": set(AXES),
    "ks": {"samples", "alpha"},
}

_BASE_CLUSTER = {"gamma1": 1.0, "gamma2": 0.3, "m1": 4.0, "omega1": 1.0,
                 "m2": 1.0, "omega2": 0.5, "snr_db": 10.0}


def _steps(start, stop, step):
    n = int(math.floor((stop - start) / step + 1e-9))
    return tuple(round(start + k * step, 10) for k in range(n + 1))


_SNR_0_30 = _steps(0, 30, 5)

# per-experiment defaults layered under the config file
_EXPERIMENT_DEFAULTS = {
    "ber-curve": ({"gamma1": 1.0, "gamma2": 0.3}, {"snr_db": _SNR_0_30}, "both"),
    "xcheck": ({"gamma1": 1.0, "gamma2": 0.6, "omega2": 1.0}, {"snr_db": _SNR_0_30}, "both"),
    "gamma2-opt": ({"gamma1": 0.7, "gamma2": 0.2}, {"snr_db": (0.0, 10.0, 20.0)}, "analytic"),
    "contour": ({"snr_db": 15.0},
                {"gamma1": _steps(0.05, 1.0, 0.05), "gamma2": _steps(0.05, 1.0, 0.05)},
                "analytic"),
    "m-sweep": ({"gamma1": 1.0, "gamma2": 0.3, "snr1_db": 20.0, "snr2_db": 15.0},
                {"m1": _steps(1.0, 10.0, 1.0)}, "analytic"),
    "oma-compare": ({"gamma1": 0.7, "gamma2": 0.2}, {"snr_db": _steps(0, 25, 5)}, "analytic"),
    "ks-validate": ({}, {}, "analytic"),
}

# axis layout accepted by each experiment, in table order
_AXIS_LAYOUT = {
    "ber-curve": (("snr_db",),),
    "xcheck": (("snr_db",),),
    "oma-compare": (("snr_db",),),
    "gamma2-opt": (("snr_db",), ("snr_db", "gamma2")),
    "contour": (("gamma1", "gamma2"),),
    "m-sweep": (("m1",), ("m2",)),
    "ks-validate": ((),),
}


@dataclass
class RunConfig:
    experiment: str
    cluster: ClusterConfig
    sweep: dict
    engine: str
    trials: int = 1_000_000
    seed: Optional[int] = None
    fading_free: bool = False
    output: Optional[str] = None
    format: str = "both"
    ks_samples: int = KS_SAMPLES
    ks_alpha: float = KS_ALPHA

    @property
    def effective_seed(self):
        return DEFAULT_SEED if self.seed is None else self.seed

    @property
    def axes(self):
        for layout in _AXIS_LAYOUT[self.experiment]:
            if set(layout) == set(self.sweep):
                return layout
        raise AssertionError("sweep layout validated at parse time")


def _number(section, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigParseError(f"[{section}] {key} = {raw!r} is not a number") from None


def _integer(section, key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigParseError(f"[{section}] {key} = {raw!r} is not an integer") from None


def _number_list(section, key, raw):
    raw = raw.strip()
    if not raw:
        raise ConfigValidationError(f"[{section}] {key}: sweep list is empty")
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ConfigParseError(f"[{section}] {key} = {raw!r}: range must be start:stop:step")
        start, stop, step = (_number(section, key, p) for p in parts)
        if not step > 0 or stop < start:
            raise ConfigValidationError(
                f"[{section}] {key} = {raw!r}: range needs step > 0 and stop >= start")
        return _steps(start, stop, step)
    return tuple(_number(section, key, p) for p in raw.split(",") if p.strip())


def _check(cond, key, msg):
    if not cond:
        raise ConfigValidationError(f"{key}: {msg}")


def _check_gamma(key, v):
    _check(0 < v <= 1, key, f"value {v} outside the bound (0, 1]")


def _check_m(key, v):
    _check(v >= 0.5, key, f"value {v} violates m >= 0.5")


def parse_config(source: str, experiment: Optional[str] = None) -> RunConfig:
    """Parse and validate a run configuration document.

    experiment, when given (the CLI subcommand), selects the defaults and must
    agree with [run] experiment if that key is present.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(source)
    except configparser.Error as exc:
        msg = " ".join(str(exc).split())
        raise ConfigParseError(f"malformed config: {msg}") from None

    unknown = [s for s in cp.sections() if s not in _SCHEMA]
    if unknown:
        raise ConfigValidationError(f"unknown section(s): {', '.join(unknown)}")
    for sec in cp.sections():
        bad = sorted(set(cp[sec]) - _SCHEMA[sec])
        if bad:
            raise ConfigValidationError(
                f"unknown key(s) in [{sec}]: {', '.join(bad)}; "
                f"allowed: {', '.join(sorted(_SCHEMA[sec]))}")

    run = cp["run"] if cp.has_section("run") else {}
    file_exp = run.get("experiment")
    if file_exp is not None:
        _check(file_exp in EXPERIMENTS, "experiment",
               f"{file_exp!r} is not one of {', '.join(EXPERIMENTS)}")
        _check(experiment is None or experiment == file_exp, "experiment",
               f"config says {file_exp!r} but {experiment!r} was requested")
    experiment = experiment or file_exp
    _check(experiment in EXPERIMENTS, "experiment",
           f"missing or unknown; expected one of {', '.join(EXPERIMENTS)}")
    cluster_defaults, sweep_defaults, engine_default = _EXPERIMENT_DEFAULTS[experiment]

    # cluster
    given = {}
    if cp.has_section("cluster"):
        given = {k: _number("cluster", k, raw) for k, raw in cp["cluster"].items()}
    vals = dict(_BASE_CLUSTER, **cluster_defaults)
    if "snr_db" in given:
        vals.pop("snr1_db", None)
        vals.pop("snr2_db", None)
    vals.update(given)
    for k in ("gamma1", "gamma2"):
        _check_gamma(k, vals[k])
    for k in ("m1", "m2"):
        _check_m(k, vals[k])
    for k in ("omega1", "omega2"):
        _check(vals[k] > 0 and math.isfinite(vals[k]), k, f"value {vals[k]} must be positive")
    snr1 = vals.get("snr1_db", vals["snr_db"])
    snr2 = vals.get("snr2_db", vals["snr_db"])
    for k, v in (("snr1_db", snr1), ("snr2_db", snr2)):
        _check(math.isfinite(v), k, f"value {v} must be finite")
    cluster = ClusterConfig(BsnLink(vals["gamma1"], snr1, NakagamiParams(vals["m1"], vals["omega1"])),
                            BsnLink(vals["gamma2"], snr2, NakagamiParams(vals["m2"], vals["omega2"])))

    # sweep
    if cp.has_section("sweep") and len(cp["sweep"]):
        sweep = {k: _number_list("sweep", k, raw) for k, raw in cp["sweep"].items()}
    else:
        sweep = dict(sweep_defaults)
    layouts = _AXIS_LAYOUT[experiment]
    _check(any(set(lay) == set(sweep) for lay in layouts), "sweep",
           f"{experiment} accepts axes " + " or ".join("(" + ", ".join(l) + ")" for l in layouts)
           + f", got ({', '.join(sweep)})")
    for k, values in sweep.items():
        key = f"sweep.{k}"
        _check(len(values) > 0, key, "sweep list is empty")
        _check(all(math.isfinite(v) for v in values), key, "values must be finite")
        _check(all(b > a for a, b in zip(values, values[1:])), key,
               "values must be strictly increasing")
        if k.startswith("gamma"):
            for v in values:
                _check_gamma(key, v)
        if k.startswith("m"):
            for v in values:
                _check_m(key, v)
    if experiment == "gamma2-opt" and "gamma2" in sweep:
        _check(sweep["gamma2"][-1] < vals["gamma1"], "sweep.gamma2",
               f"grid must lie below gamma1 = {vals['gamma1']}")

    # run
    engine = run.get("engine", engine_default)
    _check(engine in ENGINES, "engine", f"{engine!r} is not one of {', '.join(ENGINES)}")
    if experiment in ("contour", "gamma2-opt"):
        _check(engine == "analytic", "engine", f"{experiment} supports the analytic engine only")
    trials = _integer("run", "trials", run["trials"]) if "trials" in run else 1_000_000
    _check(trials >= MIN_TRIALS, "trials", f"value {trials} below the minimum {MIN_TRIALS}")
    seed = None
    if "seed" in run:
        seed = _integer("run", "seed", run["seed"])
        _check(0 <= seed < 2**64, "seed", f"value {seed} outside [0, 2**64)")
    fading = False
    if "fading_free" in run:
        try:
            fading = cp.getboolean("run", "fading_free")
        except ValueError:
            raise ConfigParseError(f"[run] fading_free = {run['fading_free']!r} is not a boolean") from None
    fmt = run.get("format", "both")
    _check(fmt in FORMATS, "format", f"{fmt!r} is not one of {', '.join(FORMATS)}")

    ks = cp["ks"] if cp.has_section("ks") else {}
    samples = _integer("ks", "samples", ks["samples"]) if "samples" in ks else KS_SAMPLES
    _check(samples >= 2, "samples", f"value {samples} must be >= 2")
    alpha = _number("ks", "alpha", ks["alpha"]) if "alpha" in ks else KS_ALPHA
    _check(0 < alpha < 1, "alpha", f"value {alpha} outside (0, 1)")

    return RunConfig(experiment, cluster, sweep, engine, trials, seed, fading,
                     run.get("output"), fmt, samples, alpha)
