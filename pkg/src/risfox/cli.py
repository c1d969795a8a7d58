"""``risfox`` command line: scenario sweeps to CSV and analytic-vs-MC reports.

Scenario files are YAML with a top-level ``version: 1``.  Layout::

    version: 1
    kind: link-outage            # link-capacity | spatial-outage | compare
    metric: outage               # compare only: outage | capacity | spatial-outage
    threshold_bits: 1.0          # rho; 1 bit is an SNR threshold of 0 dB
    seed: 0
    sweep: {variable: snr, start: 0, stop: 40, points: 9, scale: dB}
    curves:
      - label: N=2
        link:
          elements:
            - {h: {kind: nakagami, m: 0.5}, g: {kind: nakagami, m: 2}}
            - {h: rayleigh, g: {kind: nakagami, m: 3}}
      - label: N=3 iid
        link: {n: 3, hop: {h: rayleigh, g: rayleigh}}
    mc: {trials: 1000000, seed: 1, batch: 1000000}
    outputs: {csv: out.csv}

Spatial curves use ``scene: {m_ris, radius, bs_distance, pathloss_exp, link}``.
The sweep variable is ``snr`` (average SNR before path loss) or
``threshold_bits``.  ``scale: dB`` converts sweep values to linear here;
the library itself is linear throughout.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import deployment, fading, mcsim, metrics
from .errors import RisFoxError

SCHEMA_VERSION = 1
KINDS = ("link-outage", "link-capacity", "spatial-outage", "compare")
METRICS = ("outage", "capacity", "spatial-outage")
WORKERS_ENV = "RISFOX_WORKERS"
Z_LIMIT = 4.0


class ConfigError(Exception):
    pass


@dataclass
class Sweep:
    variable: str
    start: float
    stop: float
    points: int
    scale: str

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)

    def to_linear(self, v: float) -> float:
        return 10.0 ** (v / 10.0) if self.scale == "dB" else float(v)


@dataclass
class Curve:
    label: str
    link: metrics.RisLink | None = None
    scene: dict | None = None


@dataclass
class Scenario:
    kind: str
    metric: str
    sweep: Sweep
    curves: list[Curve]
    threshold_bits: float = 1.0
    snr: float = 1.0
    seed: int = 0
    mc: mcsim.McConfig | None = None
    csv_path: Path | None = None
    source: Path | None = None
    extra: dict = field(default_factory=dict)


# ------------------------------------------------------------ parsing

def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing '{key}'")
    return d[key]


def _parse_link(spec: Any, where: str) -> metrics.RisLink:
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: link must be a mapping")
    try:
        if "elements" in spec:
            hops = [fading.HopPair(fading.from_dict(e["h"]), fading.from_dict(e["g"])) for e in spec["elements"]]
        else:
            n = int(_require(spec, "n", where))
            hop = _require(spec, "hop", where)
            hops = [fading.HopPair(fading.from_dict(hop["h"]), fading.from_dict(hop["g"]))] * n
        return metrics.RisLink(len(hops), hops, 1.0)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{where}: bad link description ({exc})") from exc
    except RisFoxError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_scene(spec: Any, where: str) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: scene must be a mapping")
    out = {k: _require(spec, k, where) for k in ("m_ris", "radius", "bs_distance", "pathloss_exp")}
    out["m_ris"] = int(out["m_ris"])
    out["link"] = _parse_link(_require(spec, "link", where), where + ".link")
    try:
        deployment.DeploymentScene(out["m_ris"], float(out["radius"]), float(out["bs_distance"]),
                                   float(out["pathloss_exp"]), out["link"])
    except RisFoxError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    return out


def load_scenario(path: str | Path) -> Scenario:
    """Parse a scenario file; a bare bundled name such as ``fig1`` also works."""
    path = Path(path)
    bundled = bundled_scenarios() / f"{path.name}.yaml"
    if not path.exists() and path.suffix == "" and bundled.exists():
        path = bundled
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
    return parse_scenario(raw, path)


def parse_scenario(raw: Any, source: Path | None = None) -> Scenario:
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a mapping")
    version = raw.get("version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported or missing version {version!r} (expected {SCHEMA_VERSION})")
    kind = _require(raw, "kind", "scenario")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    metric = raw.get("metric", {"link-outage": "outage", "link-capacity": "capacity",
                                "spatial-outage": "spatial-outage"}.get(kind))
    if metric not in METRICS:
        raise ConfigError(f"metric must be one of {METRICS}, got {metric!r}")

    sw = _require(raw, "sweep", "scenario")
    if not isinstance(sw, dict):
        raise ConfigError("sweep must be a mapping")
    try:
        sweep = Sweep(
            str(sw.get("variable", "snr")), float(_require(sw, "start", "sweep")),
            float(_require(sw, "stop", "sweep")), int(_require(sw, "points", "sweep")),
            str(sw.get("scale", "dB")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sweep: {exc}") from exc
    if sweep.points < 2:
        raise ConfigError(f"sweep needs at least 2 points, got {sweep.points}")
    if sweep.scale not in ("linear", "dB", "log"):
        raise ConfigError(f"sweep scale must be linear, dB or log, got {sweep.scale!r}")
    if sweep.variable not in ("snr", "threshold_bits"):
        raise ConfigError(f"sweep variable must be snr or threshold_bits, got {sweep.variable!r}")
    if sweep.scale == "log" and min(sweep.start, sweep.stop) <= 0:
        raise ConfigError("log sweep needs positive bounds")

    entries = raw.get("curves")
    if entries is None:
        entries = [{k: raw[k] for k in ("link", "scene") if k in raw}]
    if not isinstance(entries, list) or not entries:
        raise ConfigError("curves must be a non-empty list")
    curves = []
    for i, entry in enumerate(entries):
        where = f"curves[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where} must be a mapping")
        label = str(entry.get("label", f"curve{i}"))
        if metric == "spatial-outage":
            curves.append(Curve(label, scene=_parse_scene(_require(entry, "scene", where), where + ".scene")))
        else:
            curves.append(Curve(label, link=_parse_link(_require(entry, "link", where), where + ".link")))

    mc = None
    if raw.get("mc") is not None:
        m = raw["mc"]
        try:
            trials = int(m.get("trials", 10**6))
            mc = mcsim.McConfig(trials, int(m.get("seed", 0)), int(m.get("batch", min(trials, 10**6))))
        except (AttributeError, TypeError, ValueError, RisFoxError) as exc:
            raise ConfigError(f"mc: {exc}") from exc
    if kind == "compare" and mc is None:
        raise ConfigError("compare scenarios need an 'mc' section")

    csv_path = None
    outputs = raw.get("outputs") or {}
    if "csv" in outputs:
        csv_path = Path(outputs["csv"])  # relative paths follow the working directory
        parent = csv_path.parent
        if parent.exists() and not os.access(parent, os.W_OK):
            raise ConfigError(f"output directory {parent} is not writable")

    try:
        threshold = float(raw.get("threshold_bits", 1.0))
        snr_db = float(raw.get("snr_db", 0.0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if threshold < 0:
        raise ConfigError("threshold_bits must be >= 0")
    return Scenario(kind, metric, sweep, curves, threshold, 10.0 ** (snr_db / 10.0),
                    int(raw.get("seed", 0)), mc, csv_path, source)


# ----------------------------------------------------------- evaluation

COLUMNS = {
    "outage": ["value", "err", "method", "upper", "lower_asymptotic", "asymptotic", "diversity"],
    "capacity": ["value", "err", "method", "bound"],
    "spatial-outage": ["value", "err", "method", "upper", "scaling_law", "asymptotic"],
}
MC_COLUMNS = ["mc_mean", "mc_std_error", "mc_unresolved", "z"]


def _point_inputs(sc: Scenario, x: float):
    snr, bits = sc.snr, sc.threshold_bits
    if sc.sweep.variable == "snr":
        snr = sc.sweep.to_linear(x)
    else:
        bits = sc.sweep.to_linear(x)
    return snr, metrics.OutageQuery(bits)


def _best_effort(fn, *args):
    try:
        return fn(*args)
    except RisFoxError:
        return math.nan


def evaluate_point(sc: Scenario, curve: Curve, x: float) -> dict:
    snr, q = _point_inputs(sc, x)
    row: dict[str, Any] = {"curve": curve.label, "x": x, "snr_linear": snr,
                           "threshold_bits": q.threshold_bits, "rho_t": q.rho_t(snr)}
    mc_est = None
    try:
        if sc.metric == "outage":
            link = curve.link.with_snr(snr)
            res = metrics.outage(link, q, seed=sc.seed)
            row.update(value=res.value, err=res.err, method=res.method)
            row["upper"] = res.upper if res.method == "bounds" else _best_effort(metrics.outage_upper, link, q)
            row["lower_asymptotic"] = _best_effort(metrics.outage_lower_asymptotic, link, q)
            row["asymptotic"] = _best_effort(lambda: metrics.outage_asymptotic(link, q).value)
            row["diversity"] = _best_effort(metrics.diversity_order, link)
            if sc.mc:
                mc_est = mcsim.mc_outage(link, q, sc.mc)
        elif sc.metric == "capacity":
            link = curve.link.with_snr(snr)
            if link.n_elements == 1:
                value, err, method = metrics.capacity_n1(link), math.nan, "single-element"
                bound = value
            else:
                value, err = metrics.capacity_exact(link)
                method, bound = "outage-integral", _best_effort(metrics.capacity_lower, link)
            row.update(value=value, err=err, method=method, bound=bound)
            if sc.mc:
                mc_est = mcsim.mc_capacity(link, sc.mc)
        else:
            s = curve.scene
            scene = deployment.DeploymentScene(s["m_ris"], float(s["radius"]), float(s["bs_distance"]),
                                               float(s["pathloss_exp"]), s["link"].with_snr(snr))
            value, err = deployment.spatial_outage(scene, q, seed=sc.seed)
            row.update(value=value, err=err, method="binomial")
            row["upper"] = _best_effort(deployment.spatial_outage_upper, scene, q)
            row["scaling_law"] = _best_effort(deployment.scaling_law_large_m, scene, q)
            row["asymptotic"] = _best_effort(lambda: deployment.spatial_asymptotic(scene, q).value)
            if sc.mc:
                mc_est = mcsim.mc_spatial_outage(scene, q, sc.mc)
    except RisFoxError as exc:
        row.update(value=math.nan, err=math.nan, method=f"failed: {type(exc).__name__}")
        row["failed"] = True
    if mc_est is not None:
        row.update(mc_mean=mc_est.mean, mc_std_error=mc_est.std_error, mc_unresolved=mc_est.unresolved)
        v = row.get("value", math.nan)
        row["z"] = math.nan if (mc_est.unresolved or not np.isfinite(v)) else mc_est.z_score(v)
    return row


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def evaluate(sc: Scenario, workers: int | None = None) -> list[dict]:
    tasks = [(c, float(x)) for c in sc.curves for x in sc.sweep.values()]
    workers = workers or default_workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda t: evaluate_point(sc, *t), tasks))
    return [evaluate_point(sc, *t) for t in tasks]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def header(sc: Scenario) -> list[str]:
    xname = f"{sc.sweep.variable}_{sc.sweep.scale}" if sc.sweep.scale == "dB" else sc.sweep.variable
    cols = ["curve", xname, "snr_linear", "threshold_bits", "rho_t"] + COLUMNS[sc.metric]
    return cols + (MC_COLUMNS if sc.mc else [])


def write_csv(sc: Scenario, rows: list[dict], stream) -> None:
    cols = header(sc)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        r = dict(r, **{cols[1]: r["x"]})
        w.writerow([_fmt(r.get(c, math.nan)) for c in cols])


# ------------------------------------------------------------------ verbs

def _emit(sc: Scenario, rows: list[dict]) -> None:
    if sc.csv_path is not None:
        sc.csv_path.parent.mkdir(parents=True, exist_ok=True)
        with open(sc.csv_path, "w", newline="") as fh:
            write_csv(sc, rows, fh)
        print(f"wrote {len(rows)} rows to {sc.csv_path}")
    else:
        write_csv(sc, rows, sys.stdout)


def cmd_run(args) -> int:
    sc = load_scenario(args.file)
    rows = evaluate(sc, args.workers)
    _emit(sc, rows)
    failed = [r for r in rows if r.get("failed")]
    if failed:
        print(f"{len(failed)} point(s) failed numerically; see 'method' column", file=sys.stderr)
        return 2
    return 0


def compare_report(rows: list[dict]) -> tuple[list[str], bool]:
    lines, ok = [], True
    for r in rows:
        if r.get("mc_unresolved"):
            status = "unresolved (excluded)"
        elif not np.isfinite(r.get("z", math.nan)):
            status = "no analytic value"
            ok = False
        else:
            z = r["z"]
            status = f"z={z:+.2f}" + ("  FAIL" if abs(z) > Z_LIMIT else "")
            ok &= abs(z) <= Z_LIMIT
        lines.append(f"{r['curve']:>14s}  x={r['x']:<10g} analytic={r.get('value', math.nan):<12.6g} "
                     f"mc={r.get('mc_mean', math.nan):<12.6g} {status}")
    return lines, ok


def cmd_compare(args) -> int:
    sc = load_scenario(args.file)
    if sc.mc is None:
        raise ConfigError("compare needs an 'mc' section in the scenario")
    rows = evaluate(sc, args.workers)
    _emit(sc, rows)
    lines, ok = compare_report(rows)
    print("\n".join(lines))
    print("compare: " + ("all resolved points within |z| <= 4" if ok else "mismatch detected"))
    if any(r.get("failed") for r in rows):
        return 2
    return 0 if ok else 3


def cmd_validate(args) -> int:
    sc = load_scenario(args.file)
    n = len(sc.curves) * sc.sweep.points
    print(f"{args.file}: ok ({sc.kind}, metric {sc.metric}, {len(sc.curves)} curve(s), {n} point(s))")
    return 0


def cmd_list_models(args) -> int:
    params = {
        "rayleigh": "",
        "nakagami": "m >= 0.5",
        "alpha-mu": "alpha > 0, mu > 0",
        "fisher-f": "m > 0, ms > 1",
        "generalized-k": "m > 0 (multipath), k > 0 (shadowing)",
    }
    for kind in fading.MODEL_KINDS:
        print(f"{kind:15s} {params[kind]}")
    return 0


def bundled_scenarios() -> Path:
    return Path(__file__).parent / "scenarios"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="risfox", description="RIS outage/capacity under Fox's H fading")
    sub = p.add_subparsers(dest="verb", required=True)
    for name, fn, text in (
        ("run", cmd_run, "evaluate a scenario and write CSV"),
        ("compare", cmd_compare, "evaluate and z-score against Monte Carlo"),
        ("validate", cmd_validate, "check a scenario file"),
    ):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("file")
        if name != "validate":
            sp.add_argument("--workers", type=int, default=None,
                            help=f"concurrent sweep points (default ${WORKERS_ENV} or 1)")
        sp.set_defaults(fn=fn)
    sp = sub.add_parser("list-models", help="list fading models and parameters")
    sp.set_defaults(fn=cmd_list_models)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except RisFoxError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
