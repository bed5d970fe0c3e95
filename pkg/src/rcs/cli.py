"""Command-line batch front end.

    rcs spectrum|stabilize|sweep --config FILE [--jobs N] [--out DIR]
    rcs table NAME [--config FILE] [--jobs N] [--out DIR]

Runs are described by a TOML file (see README).  Results are written as CSV
(complex values split into ``_re``/``_im`` columns, a ``#`` metadata header)
and JSON (``{"metadata": ..., "rows": [...]}``).  Exit codes: 0 success,
1 configuration error, 2 numerical failure, 3 some eigenvalue families could
not be tracked (results are still written).
"""
from __future__ import annotations

import argparse
import csv
import datetime
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .basis import FINE_STRUCTURE, PhysicsParams, make_basis_params
from .errors import ConfigError, NumericalError, RCSError
from .potentials import (
    NuclearUnits,
    PotentialSpec,
    convert_nuclear,
    internal_to_mev,
    power_exp,
    tabulated,
    uniform_sphere_coulomb,
    woods_saxon,
)
from .spectral import (
    ScalingParams,
    Tolerances,
    classify_spectrum,
    solve_spectrum,
    stabilize,
    theta_sweep,
)
from .tables import TABLES

log = logging.getLogger("rcs")

JOBS = ("spectrum", "stabilize", "sweep", "table")
FORMATS = ("csv", "json")
MODELS = ("woods-saxon", "power-exp", "coulomb-sphere", "tabulated")
_MODEL_ARGS = {
    "woods-saxon": ("V0", "R0", "r0"),
    "power-exp": ("c", "p", "a"),
    "coulomb-sphere": ("Z", "Rc"),
    "tabulated": ("r", "values"),
}


@dataclass
class RunConfig:
    job: str
    physics: PhysicsParams
    spec: Optional[PotentialSpec]
    omegas: tuple
    N: int
    K: Optional[int] = None
    N_jitter: float = 0.05
    theta: float = 0.0
    theta_grid: Optional[np.ndarray] = None
    tol: Tolerances = Tolerances()
    formats: tuple = FORMATS
    name: Optional[str] = None
    units: Optional[NuclearUnits] = None
    raw: dict = field(default_factory=dict, repr=False)


# --- config parsing -----------------------------------------------------------


def _get(table: dict, key: str, path: str, kind=float, default=..., choices=None):
    where = f"{path}.{key}" if path else key
    if key not in table:
        if default is ...:
            raise ConfigError("missing required field", where)
        return default
    value = table[key]
    try:
        if kind is int:
            if isinstance(value, bool) or int(value) != value:
                raise ValueError
            value = int(value)
        elif kind is float:
            if isinstance(value, bool):
                raise ValueError
            value = float(value)
        elif kind is str and not isinstance(value, str):
            raise ValueError
    except (TypeError, ValueError):
        raise ConfigError(f"expected {kind.__name__}, got {value!r}", where) from None
    if choices is not None and value not in choices:
        raise ConfigError(f"must be one of {', '.join(map(str, choices))}; got {value!r}", where)
    return value


def _section(raw: dict, name: str) -> dict:
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError("expected a table", name)
    return sec


def _float_list(value, where):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value),)
    if isinstance(value, list) and value and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return tuple(float(v) for v in value)
    raise ConfigError("expected a number or a non-empty list of numbers", where)


def _theta_grid(value, where):
    if isinstance(value, list):
        return np.asarray(_float_list(value, where))
    if isinstance(value, dict):
        start = _get(value, "start", where)
        stop = _get(value, "stop", where)
        step = _get(value, "step", where)
        if not step > 0 or stop < start:
            raise ConfigError("need step > 0 and stop >= start", where)
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(count)
    raise ConfigError("expected a list or a {start, stop, step} table", where)


def _model(pot: dict):
    name = _get(pot, "model", "potential", str, choices=MODELS)
    params = pot.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("expected a table", "potential.params")
    where = "potential.params"
    if name == "tabulated":
        r = params.get("r")
        v = params.get("values")
        if not isinstance(r, list) or not isinstance(v, list) or len(r) != len(v) or len(r) < 4:
            raise ConfigError("need equal-length lists r and values with at least 4 points", where)
        r = np.asarray(r, dtype=float)
        if np.any(np.diff(r) <= 0):
            raise ConfigError("r must be strictly increasing", f"{where}.r")
        return name, tabulated(r, v), {"r": list(map(float, r)), "values": list(map(float, v))}
    args = {k: _get(params, k, where) for k in _MODEL_ARGS[name]}
    build = {"woods-saxon": woods_saxon, "power-exp": power_exp, "coulomb-sphere": uniform_sphere_coulomb}[name]
    try:
        return name, build(**args), args
    except ValueError as exc:
        raise ConfigError(str(exc), where) from None


def _output_options(out: dict):
    formats = out.get("formats", list(FORMATS))
    if isinstance(formats, str):
        formats = [formats]
    if not isinstance(formats, list) or not formats or any(f not in FORMATS for f in formats):
        raise ConfigError(f"expected a list drawn from {FORMATS}", "output.formats")
    return tuple(formats), _get(out, "name", "output", str, None)


def parse_config(raw: dict, job: Optional[str] = None) -> RunConfig:
    """Validate a decoded TOML document against every precondition."""
    job = job or _get(raw, "job", "", str, choices=JOBS)
    phys = _section(raw, "physics")
    basis = _section(raw, "basis")
    pot = _section(raw, "potential")
    scal = _section(raw, "scaling")
    tols = _section(raw, "tolerances")
    out = _section(raw, "output")

    unit_system = _get(phys, "unit_system", "physics", str, "atomic", ("atomic", "nuclear"))
    Z = _get(phys, "Z", "physics", float, 0.0)
    kappa = _get(phys, "kappa", "physics", int)
    if kappa == 0:
        raise ConfigError("must be a nonzero integer", "physics.kappa")
    branch = _get(phys, "branch", "physics", str, "positive", ("positive", "negative"))
    lam_scale = _get(phys, "lambda_scale", "physics", float, 1.0)
    if not lam_scale >= 1:
        raise ConfigError("must be >= 1", "physics.lambda_scale")

    units = None
    eta = {n: _get(pot, "eta_" + n, "potential", float, 1.0 if n == "V" else 0.0) for n in "VSW"}
    try:
        if unit_system == "nuclear":
            particle = _get(phys, "particle", "physics", str, "proton", ("proton", "neutron"))
            units = NuclearUnits.for_particle(particle)
            ws = {}
            if "model" in pot:
                _get(pot, "model", "potential", str, choices=("woods-saxon",))
                params = pot.get("params", {})
                ws = {k: _get(params, k, "potential.params") for k in ("V0", "R0", "r0")}
                if not all(v > 0 for v in ws.values()):
                    raise ConfigError("Woods-Saxon parameters must be positive", "potential.params")
            Rc = _get(pot, "Rc", "potential", float, None)
            coulomb = _get(pot, "coulomb", "potential", str, "sphere", ("sphere", "split"))
            p, spec = convert_nuclear(
                Z, kappa, eta_V=eta["V"], eta_S=eta["S"], eta_W=eta["W"], Rc=Rc,
                branch=branch, lam_scale=lam_scale, units=units, coulomb=coulomb, **ws,
            )
            if spec.is_zero:
                spec = None
        else:
            lam = _get(phys, "lambda", "physics", float, FINE_STRUCTURE)
            p = PhysicsParams(lam / lam_scale, Z, kappa, branch)
            spec = None
            if "model" in pot:
                _, f, _ = _model(pot)
                comps = {n: (f if eta[n] != 0 else None) for n in "VSW"}
                spec = PotentialSpec(comps["V"], comps["S"], comps["W"], eta["V"], eta["S"], eta["W"])
                if spec.is_zero:
                    spec = None
    except ConfigError:
        raise
    except RCSError as exc:
        raise ConfigError(str(exc), "physics") from None

    omegas = _float_list(basis.get("omega", None), "basis.omega") if "omega" in basis else None
    if omegas is None:
        raise ConfigError("missing required field", "basis.omega")
    N = _get(basis, "N", "basis", int)
    K = _get(basis, "K", "basis", int, None)
    if K is not None and K < N + 1:
        raise ConfigError(f"must be at least N + 1 = {N + 1}", "basis.K")
    jitter = _get(basis, "N_jitter", "basis", float, 0.05)
    if not 0 <= jitter < 1:
        raise ConfigError("must lie in [0, 1)", "basis.N_jitter")
    for w in omegas:
        try:
            make_basis_params(p, w, N)
        except RCSError as exc:
            raise ConfigError(str(exc), "basis") from None
    if job == "stabilize" and len(omegas) < 3:
        raise ConfigError("stabilization needs at least three omega values", "basis.omega")

    theta = _get(scal, "theta", "scaling", float, 0.0)
    grid = _theta_grid(scal["theta_grid"], "scaling.theta_grid") if "theta_grid" in scal else None
    if job == "sweep" and grid is None:
        raise ConfigError("a sweep needs scaling.theta_grid", "scaling.theta_grid")
    angles = [theta] + ([] if grid is None else list(grid))
    if min(angles) < 0 or max(angles) >= 0.5 * math.pi:
        raise ConfigError("scaling angles must lie in [0, pi/2)", "scaling")
    if spec is not None:
        ceiling, who = spec.theta_ceiling()
        worst = max(angles)
        if worst > ceiling:
            raise ConfigError(
                f"theta = {worst:.4g} exceeds the analyticity ceiling {ceiling:.4g} of {who}", "scaling.theta"
            )

    tol = Tolerances(
        bound=_get(tols, "bound", "tolerances", float, Tolerances.bound),
        continuum=_get(tols, "continuum", "tolerances", float, Tolerances.continuum),
        match=_get(tols, "match", "tolerances", float, Tolerances.match),
    )
    formats, name = _output_options(out)
    return RunConfig(
        job=job, physics=p, spec=spec, omegas=omegas, N=N, K=K, N_jitter=jitter, theta=theta,
        theta_grid=grid, tol=tol, formats=formats, name=name, units=units, raw=raw,
    )


def _read_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}", str(path)) from None


def load_config(path, job: Optional[str] = None) -> RunConfig:
    return parse_config(_read_toml(path), job)


# --- output -------------------------------------------------------------------


def _flatten(row: dict) -> dict:
    out = {}
    for k, v in row.items():
        if isinstance(v, (complex, np.complexfloating)):
            out[k + "_re"] = float(v.real)
            out[k + "_im"] = float(v.imag)
        elif isinstance(v, np.generic):
            out[k] = v.item()
        else:
            out[k] = v
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _csv_value(v):
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def emit_results(rows, stem, formats=FORMATS, metadata=None) -> list:
    """Write ``rows`` to ``stem.csv`` and/or ``stem.json``; returns the paths."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    flat = [_flatten(r) for r in rows]
    columns = []
    for r in flat:
        columns.extend(k for k in r if k not in columns)
    meta = _jsonable(metadata or {})
    paths = []
    if "json" in formats:
        path = stem.with_suffix(".json")
        doc = {"metadata": meta, "columns": columns, "rows": flat}
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        paths.append(path)
    if "csv" in formats:
        path = stem.with_suffix(".csv")
        with open(path, "w", newline="") as fh:
            fh.write("# metadata: " + json.dumps(meta, sort_keys=True) + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in flat:
                w.writerow([_csv_value(r.get(c)) for c in columns])
        paths.append(path)
    return paths


def _parse_cell(s: str):
    if s == "":
        return None
    for kind in (int, float):
        try:
            return kind(s)
        except ValueError:
            pass
    return s


def read_results(path):
    """Inverse of :func:`emit_results` for one file: ``(metadata, rows)``."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        return doc["metadata"], doc["rows"]
    with open(path, newline="") as fh:
        first = fh.readline()
        meta = json.loads(first.split(":", 1)[1]) if first.startswith("# metadata:") else {}
        reader = csv.reader(fh)
        header = next(reader)
        rows = [{k: _parse_cell(v) for k, v in zip(header, line) if v != ""} for line in reader]
    return meta, rows


# --- jobs ---------------------------------------------------------------------


def _with_mev(row: dict, cfg: RunConfig, key: str = "energy") -> dict:
    if cfg.units is not None:
        row[key + "_mev"] = complex(internal_to_mev(row[key], cfg.units))
    return row


def _metadata(cfg: RunConfig, **extra) -> dict:
    meta = {
        "code_version": __version__,
        "job": cfg.job,
        "N": cfg.N,
        "K": cfg.K,
        "omega": list(cfg.omegas),
        "theta": cfg.theta,
        "tolerances": {"bound": cfg.tol.bound, "continuum": cfg.tol.continuum, "match": cfg.tol.match},
        "physics": {"lambda": cfg.physics.lam, "Z": cfg.physics.Z, "kappa": cfg.physics.kappa,
                    "branch": cfg.physics.branch},
        "config": cfg.raw,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    meta.update(extra)
    return meta


def run_spectrum(cfg: RunConfig):
    sp = solve_spectrum(cfg.physics, cfg.omegas[0], cfg.N, cfg.spec, cfg.theta, cfg.K)
    rows = []
    for i, (q, res) in enumerate(zip(classify_spectrum(sp, cfg.physics.lam, cfg.tol), sp.residual)):
        rows.append(_with_mev({"index": i, "eps": q.eps, "energy": q.energy, "kind": q.kind,
                               "residual": float(res)}, cfg))
    return {"": rows}, _metadata(cfg, K=sp.meta["K"], omega=[cfg.omegas[0]]), []


def run_stabilize(cfg: RunConfig, jobs: int = 1):
    scaling = ScalingParams(cfg.theta, cfg.omegas, cfg.N, cfg.N_jitter, cfg.K)
    res = stabilize(cfg.physics, cfg.spec, scaling, cfg.tol, jobs=jobs)
    rows = []
    for i, q in enumerate(res.points):
        rows.append(_with_mev({"index": i, "eps": q.eps, "energy": q.energy, "kind": q.kind,
                               "stability": q.stability, "stable_digits": q.stable_digits,
                               "tracked": q.tracked}, cfg))
    return {"": rows}, _metadata(cfg, K=res.K, N_jitter=cfg.N_jitter), res.failures


def run_sweep(cfg: RunConfig, jobs: int = 1):
    res = theta_sweep(cfg.physics, cfg.omegas[0], cfg.N, cfg.spec, cfg.theta_grid, cfg.K, tol=cfg.tol, jobs=jobs)
    traj = []
    for i, t in enumerate(res.theta_grid):
        for j in range(res.trajectories.shape[1]):
            traj.append(_with_mev({"theta": float(t), "column": j, "energy": res.trajectories[i, j],
                                   "kind": res.kinds[i][j]}, cfg))
    cut = []
    for i, t in enumerate(res.theta_grid):
        for x, z in zip(res.xi, res.cut_curve[i]):
            cut.append(_with_mev({"theta": float(t), "xi": float(x), "energy": z}, cfg))
    meta = _metadata(cfg, omega=[cfg.omegas[0]], theta_grid=list(res.theta_grid))
    return {"": traj, "_cut": cut}, meta, []


def run_table(name: str, jobs: int = 1):
    if name not in TABLES:
        raise ConfigError(f"unknown table {name!r}; choose from {', '.join(TABLES)}", "table")
    rows, meta = TABLES[name](jobs=jobs)
    meta = dict(meta, code_version=__version__, job="table",
                created=datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"))
    return {"": rows}, meta, []


def _configure_logging():
    level = os.environ.get("RCS_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rcs", description="Relativistic complex-scaling spectra.")
    ap.add_argument("job", choices=JOBS)
    ap.add_argument("name", nargs="?", help="table name (I-VI) for the table job")
    ap.add_argument("--config", type=Path, help="TOML run configuration")
    ap.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging()
    try:
        if args.jobs < 1:
            raise ConfigError("must be >= 1", "--jobs")
        formats, stem = FORMATS, None
        if args.job == "table":
            if not args.name:
                raise ConfigError("the table job needs a table name", "table")
            if args.config is not None:
                formats, stem = _output_options(_section(_read_toml(args.config), "output"))
            results, meta, failures = run_table(args.name, args.jobs)
            stem = stem or f"table_{args.name}"
        else:
            if args.config is None:
                raise ConfigError("a config file is required", "--config")
            cfg = load_config(args.config, args.job)
            formats, stem = cfg.formats, cfg.name or args.job
            if args.job == "spectrum":
                results, meta, failures = run_spectrum(cfg)
            elif args.job == "stabilize":
                results, meta, failures = run_stabilize(cfg, args.jobs)
            else:
                results, meta, failures = run_sweep(cfg, args.jobs)
    except ConfigError as exc:
        log.error("%s", exc)
        print(f"rcs: configuration error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, RCSError) as exc:
        print(f"rcs: numerical failure: {exc}", file=sys.stderr)
        return 2

    if failures:
        meta["match_failures"] = [str(f) for f in failures]
    for suffix, rows in results.items():
        for path in emit_results(rows, args.out / f"{stem}{suffix}", formats, meta):
            print(path)
    if failures:
        for f in failures:
            log.warning("%s", f)
        print(f"rcs: {len(failures)} eigenvalue families could not be tracked", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
