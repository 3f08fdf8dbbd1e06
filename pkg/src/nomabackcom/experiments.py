"""Parameter sweeps over the analytic and Monte Carlo engines, emitted as
self-describing result tables (CSV / JSON)."""

import csv
import datetime as _dt
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import analytic
from .analytic import BsnLink, ClusterConfig
from .distributions import (NakagamiParams, approx_diff, approx_sum, ks_test,
                            sample_nakagami)
from .errors import EmptyGrid
from .simulator import (BerEstimate, Scheme, effective_bits, simulate_cluster,
                        simulate_tdma)

AXES = ("snr_db", "gamma1", "gamma2", "m1", "m2")
ENGINES = ("analytic", "montecarlo", "both")
FADING_FREE_M = 50.0

# sum-law and difference-law validation sets, (m1, omega1, m2, omega2)
KS_PARAMETER_SETS = ((1.0, 1.0, 1.0, 1.0), (2.0, 1.0, 1.0, 1.0), (3.0, 1.0, 3.0, 0.5))
KS_SAMPLES = 5000
KS_ALPHA = 0.05


def default_cluster(gamma1=1.0, gamma2=0.3, snr_db=10.0, *, m1=4.0, omega1=1.0,
                    m2=1.0, omega2=0.5) -> ClusterConfig:
    """Cluster with the default channel (m1=4, Omega1=1, m2=1, Omega2=0.5)."""
    return ClusterConfig(BsnLink(gamma1, snr_db, NakagamiParams(m1, omega1)),
                         BsnLink(gamma2, snr_db, NakagamiParams(m2, omega2)))


def fading_free(c: ClusterConfig) -> ClusterConfig:
    """Near-AWGN version of a cluster: both shapes raised to FADING_FREE_M."""
    return c.with_values(m1=FADING_FREE_M, m2=FADING_FREE_M)


def cluster_to_dict(c: ClusterConfig):
    return {f"bsn{i}": {"reflection": b.reflection, "snr_db": b.snr_db,
                        "m": b.fading.m, "omega": b.fading.omega}
            for i, b in ((1, c.bsn1), (2, c.bsn2))}


def cluster_from_dict(d) -> ClusterConfig:
    links = [BsnLink(d[k]["reflection"], d[k]["snr_db"],
                     NakagamiParams(d[k]["m"], d[k]["omega"])) for k in ("bsn1", "bsn2")]
    return ClusterConfig(*links)


def _validate_axis(name, values):
    if name not in AXES:
        raise ValueError(f"unknown sweep axis {name!r}; expected one of {', '.join(AXES)}")
    if len(values) == 0:
        raise EmptyGrid(f"sweep axis {name!r} has no values")
    if any(not math.isfinite(v) for v in values):
        raise ValueError(f"sweep axis {name!r} has non-finite values")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"sweep axis {name!r} values must be strictly increasing")
    if name.startswith("gamma") and not all(0 < v <= 1 for v in values):
        raise ValueError(f"sweep axis {name!r} values must lie in (0, 1]")
    if name.startswith("m") and not all(v >= 0.5 for v in values):
        raise ValueError(f"sweep axis {name!r} values must be >= 0.5")


@dataclass(frozen=True)
class SweepSpec:
    base: ClusterConfig
    axis1: str
    values1: tuple
    axis2: Optional[str] = None
    values2: tuple = ()
    engine: str = "analytic"
    trials: int = 1_000_000
    seed: int = 42
    fading_free: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values1", tuple(float(v) for v in self.values1))
        object.__setattr__(self, "values2", tuple(float(v) for v in self.values2))
        _validate_axis(self.axis1, self.values1)
        if self.axis2 is not None:
            if self.axis2 == self.axis1:
                raise ValueError("the two sweep axes must differ")
            _validate_axis(self.axis2, self.values2)
        elif self.values2:
            raise ValueError("values2 given without axis2")
        if self.engine not in ENGINES:
            raise ValueError(f"engine {self.engine!r} not in {ENGINES}")

    @property
    def engines(self):
        return ("analytic", "montecarlo") if self.engine == "both" else (self.engine,)

    def points(self):
        """Axis coordinates in table order (axis1 outer, axis2 inner)."""
        if self.axis2 is None:
            return [{self.axis1: v} for v in self.values1]
        return [{self.axis1: v, self.axis2: w} for v in self.values1 for w in self.values2]

    def cluster_at(self, coords) -> ClusterConfig:
        c = self.base.with_values(**coords)
        if self.fading_free:
            c = fading_free(c)
        return c

    def to_dict(self):
        return {"base": cluster_to_dict(self.base), "axis1": self.axis1,
                "values1": list(self.values1), "axis2": self.axis2,
                "values2": list(self.values2), "engine": self.engine,
                "trials": self.trials, "seed": self.seed,
                "fading_free": self.fading_free}

    @classmethod
    def from_dict(cls, d):
        return cls(cluster_from_dict(d["base"]), d["axis1"], tuple(d["values1"]),
                   d.get("axis2"), tuple(d.get("values2", ())), d["engine"],
                   d["trials"], d["seed"], d.get("fading_free", False))

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class ResultTable:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows])

    def to_json(self):
        return json.dumps({"columns": self.columns,
                           "rows": [list(r) for r in self.rows],
                           "metadata": self.metadata}, indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        lines = [",".join(self.columns)]
        lines += [",".join(repr(float(v)) for v in r) for r in self.rows]
        return "\n".join(lines) + "\n"

    def write(self, stem, fmt="both"):
        """Write <stem>.csv and/or <stem>.json; returns the paths written."""
        stem = Path(stem)
        stem.parent.mkdir(parents=True, exist_ok=True)
        out = []
        if fmt in ("csv", "both"):
            p = stem.with_suffix(".csv")
            p.write_text(self.to_csv(), encoding="utf-8")
            out.append(p)
        if fmt in ("json", "both"):
            p = stem.with_suffix(".json")
            p.write_text(self.to_json(), encoding="utf-8")
            out.append(p)
        return out

    @classmethod
    def read_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            columns = next(reader)
            rows = [tuple(float(v) for v in r) for r in reader]
        return cls(columns, rows)


def _now():
    return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


def _metadata(kind, spec, timestamp, **extra):
    md = {"kind": kind, "timestamp": timestamp or _now()}
    if spec is not None:
        md.update(spec=spec.to_dict(), spec_hash=spec.digest(), seed=spec.seed,
                  engine=spec.engine)
    md.update(extra)
    return md


def _engine_columns(spec):
    cols = []
    for eng in spec.engines:
        if eng == "analytic":
            cols += ["ber1_analytic", "ber2_analytic"]
        else:
            cols += ["ber1_mc", "ber2_mc", "stderr1_mc", "stderr2_mc"]
    return cols


def _engine_values(spec, c, workers):
    vals = []
    for eng in spec.engines:
        if eng == "analytic":
            vals += [analytic.ber_u1_avg(c), analytic.ber_u2_avg(c)]
        else:
            e = simulate_cluster(c, spec.trials, spec.seed, workers=workers)
            vals += [e.ber1, e.ber2, e.stderr1, e.stderr2]
    return vals


def _require_axes(spec, kind, allowed):
    if spec.axis1 not in allowed or spec.axis2 is not None:
        raise ValueError(f"{kind} sweeps a single axis from {allowed}")


def run_ber_curve(spec: SweepSpec, *, workers=None, timestamp=None) -> ResultTable:
    """BER of both users against the common transmit SNR."""
    _require_axes(spec, "ber-curve", ("snr_db",))
    rows = []
    for pt in spec.points():
        rows.append((pt["snr_db"], *_engine_values(spec, spec.cluster_at(pt), workers)))
    return ResultTable(["snr_db", *_engine_columns(spec)], rows,
                       _metadata("ber-curve", spec, timestamp))


def run_m_sweep(spec: SweepSpec, *, workers=None, timestamp=None) -> ResultTable:
    """BER of both users against one fading shape (m1 or m2)."""
    _require_axes(spec, "m-sweep", ("m1", "m2"))
    rows = []
    for pt in spec.points():
        rows.append((pt[spec.axis1], *_engine_values(spec, spec.cluster_at(pt), workers)))
    return ResultTable([spec.axis1, *_engine_columns(spec)], rows,
                       _metadata("m-sweep", spec, timestamp))


def run_contour(spec: SweepSpec, *, timestamp=None) -> ResultTable:
    """Analytic BER over the (gamma1, gamma2) grid, restricted to gamma1 > gamma2."""
    if {spec.axis1, spec.axis2} != {"gamma1", "gamma2"}:
        raise ValueError("contour sweeps gamma1 x gamma2")
    if spec.engine != "analytic":
        raise ValueError("contour supports the analytic engine only")
    rows = []
    for pt in spec.points():
        if pt["gamma1"] <= pt["gamma2"]:
            continue
        c = spec.cluster_at(pt)
        rows.append((pt["gamma1"], pt["gamma2"], analytic.ber_u1_avg(c), analytic.ber_u2_avg(c)))
    if not rows:
        raise EmptyGrid("contour grid has no point with gamma1 > gamma2")
    rows.sort(key=lambda r: (r[0], r[1]))
    return ResultTable(["gamma1", "gamma2", "ber1", "ber2"], rows,
                       _metadata("contour", spec, timestamp))


def run_oma_comparison(spec: SweepSpec, *, workers=None, timestamp=None) -> ResultTable:
    """NOMA against OMA-TDMA effective bits and per-user BER across SNR."""
    _require_axes(spec, "oma-compare", ("snr_db",))
    names = ["noma_per_slot", "tdma_per_slot", "noma_normalized", "tdma_normalized",
             "noma_ber1", "noma_ber2", "tdma_ber1", "tdma_ber2"]
    suffix = {"analytic": "analytic", "montecarlo": "mc"}
    columns = ["snr_db"] + [f"{n}_{suffix[e]}" for e in spec.engines for n in names]
    rows = []
    for pt in spec.points():
        c = spec.cluster_at(pt)
        row = [pt["snr_db"]]
        for eng in spec.engines:
            if eng == "analytic":
                noma = BerEstimate(analytic.ber_u1_avg(c), analytic.ber_u2_avg(c), 1, 0, 0, 0)
                tdma = BerEstimate(analytic.ber_single_user(c.bsn1),
                                   analytic.ber_single_user(c.bsn2), 1, 0, 0, 0)
            else:
                noma = simulate_cluster(c, spec.trials, spec.seed, workers=workers)
                tdma = simulate_tdma(c, spec.trials, spec.seed, workers=workers)
            nb, tb = effective_bits(noma, Scheme.NOMA), effective_bits(tdma, Scheme.TDMA)
            row += [nb.per_slot, tb.per_slot, nb.normalized, tb.normalized,
                    noma.ber1, noma.ber2, tdma.ber1, tdma.ber2]
        rows.append(tuple(row))
    return ResultTable(columns, rows, _metadata("oma-compare", spec, timestamp))


def default_gamma2_grid(gamma1, step=0.01):
    """k * step for every k >= 1 with k * step < gamma1."""
    n = int(math.floor(gamma1 / step + 1e-9))
    grid = [round(k * step, 10) for k in range(1, n + 1)]
    return [g for g in grid if g < gamma1 - 1e-12]


def normalized_noma_bits(c: ClusterConfig) -> float:
    e = BerEstimate(analytic.ber_u1_avg(c), analytic.ber_u2_avg(c), 1, 0, 0, 0)
    return effective_bits(e, Scheme.NOMA).normalized


def find_optimal_gamma2(base: ClusterConfig, gamma1: float, snr_db: float, grid=None):
    """Exhaustive search of gamma2 maximizing normalized NOMA effective bits.

    Returns (gamma2_star, effective_bits_max); ties go to the lowest gamma2.
    """
    grid = default_gamma2_grid(gamma1) if grid is None else sorted(float(g) for g in grid)
    if not grid:
        raise EmptyGrid("gamma2 grid is empty")
    if grid[0] <= 0 or grid[-1] >= gamma1:
        raise ValueError(f"gamma2 grid must lie inside (0, {gamma1})")
    best_g, best_v = None, -math.inf
    for g in grid:
        v = normalized_noma_bits(base.with_values(gamma1=gamma1, gamma2=g, snr_db=snr_db))
        if v > best_v:
            best_g, best_v = g, v
    return best_g, best_v


def run_gamma2_opt(spec: SweepSpec, *, timestamp=None) -> ResultTable:
    """Effective-bits curves over gamma2 per SNR, with the optimum flagged.

    axis1 is snr_db; axis2 (gamma2) defaults to the 0.01 grid below gamma1.
    """
    if spec.axis1 != "snr_db" or spec.axis2 not in (None, "gamma2"):
        raise ValueError("gamma2-opt sweeps snr_db (x gamma2)")
    if spec.engine != "analytic":
        raise ValueError("gamma2-opt supports the analytic engine only")
    gamma1 = spec.base.bsn1.reflection
    grid = list(spec.values2) if spec.axis2 else default_gamma2_grid(gamma1)
    rows, optima = [], []
    for snr in spec.values1:
        g_star, v_star = find_optimal_gamma2(spec.base, gamma1, snr, grid)
        optima.append({"snr_db": snr, "gamma2_star": g_star, "effective_bits_max": v_star})
        for g in grid:
            c = spec.base.with_values(gamma2=g, snr_db=snr)
            b1, b2 = analytic.ber_u1_avg(c), analytic.ber_u2_avg(c)
            eb = effective_bits(BerEstimate(b1, b2, 1, 0, 0, 0), Scheme.NOMA)
            rows.append((snr, g, b1, b2, eb.per_slot, eb.normalized, float(g == g_star)))
    return ResultTable(["snr_db", "gamma2", "ber1", "ber2", "noma_per_slot",
                        "normalized_bits", "is_optimal"], rows,
                       _metadata("gamma2-opt", spec, timestamp, optima=optima))


def _ks_rng(seed, index):
    ss = np.random.SeedSequence(seed, spawn_key=(0x4B53, index))
    return np.random.Generator(np.random.Philox(ss))


def ks_validation(seed=42, n=KS_SAMPLES, alpha=KS_ALPHA, *, timestamp=None,
                  return_samples=False):
    """K-S tests of the moment-matched sum (Nakagami) and difference (normal)
    laws on the three validation parameter sets.

    kind column: 0 = sum, 1 = difference.
    """
    rows, samples = [], {}
    for kind in (0, 1):
        for i, (m1, o1, m2, o2) in enumerate(KS_PARAMETER_SETS):
            p1, p2 = NakagamiParams(m1, o1), NakagamiParams(m2, o2)
            rng = _ks_rng(seed, 3 * kind + i)
            x1 = sample_nakagami(p1, rng, n)
            x2 = sample_nakagami(p2, rng, n)
            if kind == 0:
                data, law = x1 + x2, approx_sum(p1, p2)
            else:
                data, law = x1 - x2, approx_diff(p1, p2)
            rep = ks_test(data, law.cdf, alpha)
            samples[(kind, i)] = data
            rows.append((float(i), float(kind), m1, o1, m2, o2, rep.statistic,
                         rep.critical, float(rep.reject)))
    table = ResultTable(["set_index", "kind", "m1", "omega1", "m2", "omega2",
                         "statistic", "critical", "reject"], rows,
                        _metadata("ks-validate", None, timestamp, seed=seed,
                                  n_samples=n, alpha=alpha))
    return (table, samples) if return_samples else table


@dataclass
class CrossCheck:
    table: ResultTable
    max_rel_dev: float
    worst: Optional[dict]
    compared: int
    tolerance: float
    passed: bool


def cross_check(spec: SweepSpec, *, tolerance=0.10, ber_floor=1e-3, workers=None,
                timestamp=None) -> CrossCheck:
    """Relative deviation |analytic - mc| / mc over points where mc >= ber_floor."""
    spec = replace(spec, engine="both")
    table = run_ber_curve(spec, workers=workers, timestamp=timestamp)
    table.metadata["kind"] = "xcheck"
    worst, max_dev, compared = None, 0.0, 0
    for row in table.rows:
        rec = dict(zip(table.columns, row))
        for u in (1, 2):
            mc, an = rec[f"ber{u}_mc"], rec[f"ber{u}_analytic"]
            if mc < ber_floor:
                continue
            compared += 1
            dev = abs(an - mc) / mc
            if dev >= max_dev:
                max_dev = dev
                worst = {"snr_db": rec["snr_db"], "user": u, "analytic": an, "mc": mc}
    table.metadata.update(max_rel_dev=max_dev, tolerance=tolerance, ber_floor=ber_floor)
    return CrossCheck(table, max_dev, worst, compared, tolerance, max_dev <= tolerance)
