"""Scenario-driven command line front end.

Scenarios are JSON files validated against ``SCENARIO_SCHEMA``. Every run
writes ``report.json`` plus the CSV outputs the scenario asks for.
Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import asymmetric as asym
from . import robustness as rb
from . import structured as st
from . import unstructured as un
from .engine import IntegratorConfig, Trajectory, integrate, settle_time
from .errors import NumericalError, SwarmError, ValidationError
from .game_core import ModelParams, SimplexState
from .network import ClassState, DegreeDistribution, theta_of

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
MODELS = ("unstructured", "structured", "asymmetric", "micro_macro", "sector")
OUTPUTS = ("trajectory_csv", "barycentric_csv", "report_json")
SETTLE_TOL = 1e-2

_num = {"type": "number"}
_nonneg = {"type": "number", "minimum": 0}
_triple = {"type": "array", "items": _nonneg, "minItems": 3, "maxItems": 3}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["model", "params", "init"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "model": {"enum": list(MODELS)},
        "params": {"type": "object", "additionalProperties": _nonneg},
        "network": {
            "type": "object",
            "oneOf": [
                {"required": ["support", "probs"],
                 "properties": {"support": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                                "probs": {"type": "array", "items": _nonneg}},
                 "additionalProperties": False},
                {"required": ["power_law"],
                 "properties": {"power_law": {
                     "type": "object", "required": ["mean_k", "k_max"],
                     "properties": {"mean_k": _num, "k_max": {"type": "integer", "minimum": 1}},
                     "additionalProperties": False}},
                 "additionalProperties": False},
            ],
        },
        "init": {
            "oneOf": [
                _triple,
                {"type": "object", "minProperties": 1,
                 "propertyNames": {"pattern": "^[0-9]+$"},
                 "additionalProperties": _triple},
            ],
        },
        "theta": {"type": "number", "minimum": 0, "maximum": 1},
        "psi": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1},
                "minItems": 1},
        "empirical": {"type": "boolean"},
        "sector": {
            "type": "object",
            "required": ["k_tilde"],
            "additionalProperties": False,
            "properties": {
                "k_tilde": _nonneg,
                "x_ref": {"type": "number", "minimum": 0, "maximum": 0.5},
                "loop": {"enum": ["nonlinear", "lure"]},
                "alpha_on_cross": {"type": "boolean"},
                "signal": {
                    "type": "object",
                    "required": ["type"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"enum": ["constant", "sinusoid", "switching"]},
                        "value": _nonneg,
                        "freq": _nonneg,
                        "phase": _num,
                        "dwell": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
            },
        },
        "integrator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["rk4_fixed", "rk45_adaptive"]},
                "step": {"type": "number", "exclusiveMinimum": 0},
                "horizon": {"type": "number", "exclusiveMinimum": 0},
                "rel_tol": {"type": "number", "exclusiveMinimum": 0},
                "abs_tol": {"type": "number", "exclusiveMinimum": 0},
                "steady_tol": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "steady_window": {"type": "integer", "minimum": 1},
                "record_every": {"type": "integer", "minimum": 1},
            },
        },
        "outputs": {"type": "array", "items": {"enum": list(OUTPUTS)}, "uniqueItems": True},
        "seed": {"type": "integer"},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["name", "model", "params", "equilibria", "thresholds",
                 "classifications", "settle_times", "final_state"],
    "properties": {
        "name": {"type": "string"},
        "model": {"enum": list(MODELS)},
        "params": {"type": "object"},
        "equilibria": {"type": "array"},
        "thresholds": {"type": "object"},
        "classifications": {"type": "array"},
        "settle_times": {"type": "object",
                         "additionalProperties": {"type": ["number", "null"]}},
        "final_state": {"type": "array"},
        "extra": {"type": "object"},
        "files": {"type": "array", "items": {"type": "string"}},
    },
}


def _pointer(path) -> str:
    return "/" + "/".join(str(p).replace("~", "~0").replace("/", "~1") for p in path)


def validate_scenario(doc: dict) -> None:
    """Schema plus model-specific checks; errors carry JSON pointer paths."""
    v = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errs = sorted(v.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errs:
        e = errs[0]
        raise ValidationError(f"{_pointer(e.absolute_path)}: {e.message}")
    model = doc["model"]
    needs_net = model == "micro_macro" or (model == "structured" and "psi" not in doc)
    if needs_net and "network" not in doc:
        raise ValidationError(f"/network: required for model {model!r}")
    if model == "structured" and "psi" in doc and "theta" not in doc:
        raise ValidationError("/theta: required with /psi (fixed-theta mean field)")
    if model == "sector" and "sector" not in doc:
        raise ValidationError("/sector: required for model 'sector'")
    if isinstance(doc["init"], dict):
        if model not in ("structured", "micro_macro") or "network" not in doc:
            raise ValidationError("/init: per-class init needs a network model")
        dist = _dist(doc)
        for key in doc["init"]:
            if int(key) not in dist.support:
                raise ValidationError(f"/init/{key}: class not in the network support")
        if set(int(k) for k in doc["init"]) != set(dist.support):
            raise ValidationError("/init: per-class init must cover every class")


def _dist(doc) -> DegreeDistribution:
    try:
        return DegreeDistribution.from_dict(doc["network"])
    except ValidationError as e:
        raise ValidationError(f"/network: {e}") from e


def _params(doc) -> ModelParams:
    try:
        return ModelParams.from_dict(doc["params"])
    except (ValidationError, KeyError, TypeError) as e:
        raise ValidationError(f"/params: {e}") from e


def _simplex(x, where="/init") -> np.ndarray:
    try:
        return SimplexState.from_array(x).as_array()
    except ValidationError as e:
        raise ValidationError(f"{where}: {e}") from e


def to_barycentric(x) -> tuple:
    """(x1, x2, x3) to the plane: state 1 at (0, 0), 2 at (1, 0), 3 at the apex."""
    if not isinstance(x, SimplexState):
        x = SimplexState.from_array(x)
    return (x.x2 + 0.5 * x.x3, math.sqrt(3.0) / 2.0 * x.x3)


def _barycentric_arrays(x2, x3):
    return x2 + 0.5 * x3, (math.sqrt(3.0) / 2.0) * x3


def _fmt(v) -> str:
    return format(float(v), ".12g")


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _clean(obj):
    """JSON-safe copy: numpy to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


class _Result:
    def __init__(self):
        self.report = {"equilibria": [], "thresholds": {}, "classifications": [],
                       "settle_times": {}, "final_state": [], "extra": {}}
        self.times = None
        self.flat = None  # (T, 3) for single-population models
        self.classes = None  # list of (label, (T, 3) states, (T, 2) theta)


def _nearest_settle(traj_times, states, targets, tol) -> Optional[float]:
    """Settle time to whichever target the run ends closest to."""
    if not targets:
        return None
    final = states[-1]
    tgt = min(targets, key=lambda t: float(np.max(np.abs(final - t))))
    return settle_time(Trajectory(traj_times, states), tgt, tol)


def _run_unstructured(doc, cfg, res: _Result):
    p = _params(doc)
    x0 = _simplex(doc["init"])
    fams = un.equilibria(p)
    res.report["equilibria"] = [f.to_dict() for f in fams]
    stable = []
    for f in fams:
        if f.feasible:
            rep = un.classify_point(p, f.state)
            res.report["classifications"].append({"case": f.case_tag, **rep.to_dict()})
            if rep.is_stable:
                stable.append(np.array(f.point[:2]))
    try:
        res.report["thresholds"]["sigma_star"] = un.consensus_threshold(p)
    except SwarmError as e:
        res.report["thresholds"]["sigma_star"] = None
        res.report["thresholds"]["note"] = str(e)
    if doc.get("empirical"):
        res.report["thresholds"]["sigma_star_empirical"] = un.empirical_threshold(p)
    traj = integrate(un.rhs_vector(p), x0[:2], cfg)
    res.times = traj.times
    res.flat = np.column_stack([traj.states, 1.0 - traj.states.sum(axis=1)])
    res.report["settle_times"]["equilibrium"] = _nearest_settle(
        traj.times, traj.states, stable, SETTLE_TOL)
    res.report["final_state"] = res.flat[-1]


def _run_asymmetric(doc, cfg, res: _Result):
    try:
        p = asym.AsymParams.from_dict(doc["params"])
    except ValidationError as e:
        raise ValidationError(f"/params: {e}") from e
    x0 = _simplex(doc["init"])
    reps = asym.asym_equilibria(p)
    res.report["equilibria"] = [list(r.equilibrium) for r in reps]
    res.report["classifications"] = [r.to_dict() for r in reps]
    pr = rb.positive_real_check(rb.asym_transfer(p)) if p.gamma1 + p.gamma2 > 0 else None
    res.report["thresholds"]["positive_real"] = None if pr is None else pr.to_dict()
    traj = integrate(asym.asym_vector_field(p), x0, cfg)
    res.times, res.flat = traj.times, traj.states
    res.report["settle_times"]["consensus_1"] = settle_time(traj, [1.0, 0.0, 0.0], SETTLE_TOL)
    res.report["extra"]["peak_x3"] = float(np.max(traj.states[:, 2]))
    res.report["final_state"] = traj.final


def _class_init(doc, dist) -> np.ndarray:
    init = doc["init"]
    if isinstance(init, dict):
        return np.array([_simplex(init[str(k)], f"/init/{k}") for k in dist.support])
    return np.tile(_simplex(init), (len(dist), 1))


def _run_meanfield(doc, cfg, res: _Result):
    p = _params(doc)
    theta = doc["theta"]
    x0 = _simplex(doc["init"])
    res.classes = []
    for i, psi in enumerate(doc["psi"]):
        sysm = st.mean_field_system(p, psi, theta)
        eq = st.mean_field_equilibrium(p, psi, theta)
        fast, slow = st.mean_field_eigenvalues(p, psi, theta)
        res.report["equilibria"].append({"psi": psi, "point": eq})
        res.report["classifications"].append({
            "psi": psi, "eigenvalues": [fast, slow],
            "classification": "stable node" if max(fast, slow) < 0 else "not stable"})
        traj = integrate(sysm.rhs, x0[:2], cfg)
        full = np.column_stack([traj.states, 1.0 - traj.states.sum(axis=1)])
        res.times = traj.times
        res.classes.append((psi, full, np.full((len(traj.times), 2), theta)))
        res.report["settle_times"][f"psi={psi:g}"] = settle_time(traj, eq[:2], SETTLE_TOL)
        res.report["final_state"].append(full[-1])
    res.report["thresholds"]["sigma_star"] = _safe_threshold(p)
    res.report["extra"]["theta"] = theta


def _safe_threshold(p):
    try:
        return un.consensus_threshold(p)
    except SwarmError:
        return None


def _network_reports(doc, p, dist, res: _Result):
    th, X = st.symmetric_equilibrium(p, dist)
    res.report["equilibria"].append({"theta": th, "per_class": X,
                                     "classes": list(dist.support)})
    if _safe_threshold(p) is not None:
        res.report["thresholds"].update(st.threshold_comparison(p, dist, doc.get("empirical", False)))
    else:
        res.report["thresholds"]["sigma_star_well_mixed"] = None
    for k, x in zip(dist.support, X):
        fast, slow = st.mean_field_eigenvalues(p, k / dist.k_max, th)
        res.report["classifications"].append({
            "k": k, "eigenvalues": [fast, slow],
            "classification": "stable node" if max(fast, slow) < 0 else "not stable"})
    return X


def _run_structured(doc, cfg, res: _Result):
    if "psi" in doc:
        return _run_meanfield(doc, cfg, res)
    p = _params(doc)
    p.require_symmetric()
    dist = _dist(doc)
    X0 = _class_init(doc, dist)
    Xeq = _network_reports(doc, p, dist, res)
    traj = integrate(lambda t, X: st.structured_rhs_array(p, dist, X), X0[:, :2], cfg)
    res.times = traj.times
    res.classes = []
    th = np.column_stack([theta_of(dist, traj.states[:, :, 0].T), theta_of(dist, traj.states[:, :, 1].T)])
    for j, k in enumerate(dist.support):
        s = traj.states[:, j, :]
        full = np.column_stack([s, 1.0 - s.sum(axis=1)])
        res.classes.append((k, full, th))
        res.report["final_state"].append(full[-1])
    res.report["settle_times"]["symmetric"] = _class_settle(traj.times, traj.states, Xeq[:, :2])
    res.report["settle_times"]["final"] = _class_settle(traj.times, traj.states, traj.states[-1])


def _class_settle(times, states, target):
    return settle_time(Trajectory(times, states.reshape(len(times), -1)),
                       np.asarray(target).reshape(-1), SETTLE_TOL)


def _run_micro_macro(doc, cfg, res: _Result):
    p = _params(doc)
    p.require_symmetric()
    dist = _dist(doc)
    cs0 = ClassState(dist, _class_init(doc, dist))
    Xeq = _network_reports(doc, p, dist, res)
    mm = st.simulate_micro_macro(p, cs0, cfg.horizon, cfg.step, steady_tol=cfg.steady_tol,
                                 steady_window=cfg.steady_window, record_every=cfg.record_every)
    res.times = mm.times
    res.classes = [(k, mm.micro[:, j, :], mm.theta) for j, k in enumerate(dist.support)]
    res.report["final_state"] = mm.micro[-1]
    res.report["settle_times"]["symmetric"] = _class_settle(mm.times, mm.micro[:, :, :2], Xeq[:, :2])
    res.report["settle_times"]["final"] = _class_settle(mm.times, mm.micro, mm.micro[-1])
    x3 = mm.micro[-1][:, 2]
    res.report["extra"].update(
        consistency_gap=mm.consistency_gap(),
        final_x3_by_class=dict(zip([str(k) for k in dist.support], x3)),
        x3_increasing_in_k=bool(np.all(np.diff(x3) > 0)))


def _signal(doc, sector: rb.SectorBound):
    spec = doc["sector"].get("signal", {"type": "sinusoid"})
    kind, k = spec["type"], sector.k_tilde
    if kind == "constant":
        return rb.constant_signal(spec.get("value", k))
    if kind == "sinusoid":
        return rb.sinusoid_signal(k, spec.get("freq", 1.0), spec.get("phase", 0.0))
    horizon = doc.get("integrator", {}).get("horizon", IntegratorConfig().horizon)
    return rb.switching_signal(k, spec.get("dwell", 1.0), horizon, doc.get("seed", 0))


def _run_sector(doc, cfg, res: _Result):
    p = _params(doc)
    p.require_symmetric()
    sec_doc = doc["sector"]
    sector = rb.SectorBound(sec_doc["k_tilde"])
    x_ref = sec_doc.get("x_ref", rb.default_linearization_point(p.with_sigma(0.0)))
    A = rb.linearized_a(p, x_ref)
    hv = rb.hurwitz_check(A, p, x_ref)
    res.report["equilibria"].append({"x_ref": x_ref, "point": [x_ref, x_ref, 1 - 2 * x_ref]})
    res.report["classifications"].append(hv.to_dict())
    cert = None
    if hv.hurwitz:
        spr = rb.spr_check(rb.z_of_s(p, x_ref, sector))
        cert = rb.kyp_solve(A, sector)
        res.report["thresholds"].update(spr=spr.to_dict(), kyp=cert.to_dict())
    x0 = _simplex(doc["init"])
    if cfg.method != "rk4_fixed":
        raise ValidationError("/integrator/method: sector scenarios use rk4_fixed")
    rep = rb.simulate_sector(p, _signal(doc, sector), x0[:2], cfg.horizon, cfg.step,
                             sector=sector, certificate=cert, x_ref=x_ref,
                             loop=sec_doc.get("loop", "nonlinear"),
                             alpha_on_cross=sec_doc.get("alpha_on_cross", False))
    res.times, res.flat = rep.trajectory.times, rep.trajectory.states
    res.report["final_state"] = res.flat[-1]
    res.report["settle_times"]["x_ref"] = settle_time(
        rep.trajectory, [x_ref, x_ref, 1 - 2 * x_ref], SETTLE_TOL)
    res.report["extra"].update(rep.summary())


_RUNNERS = {
    "unstructured": _run_unstructured,
    "asymmetric": _run_asymmetric,
    "structured": _run_structured,
    "micro_macro": _run_micro_macro,
    "sector": _run_sector,
}


def _write_outputs(doc, res: _Result, out: Path, name: str) -> list:
    outputs = doc.get("outputs", ["trajectory_csv", "barycentric_csv", "report_json"])
    files = []
    if "trajectory_csv" in outputs:
        path = out / f"{name}_trajectory.csv"
        if res.flat is not None:
            write_csv(path, ["t", "x1", "x2", "x3"],
                      (np.concatenate([[t], x]) for t, x in zip(res.times, res.flat)))
        else:
            write_csv(path, ["t", "k", "x1", "x2", "x3", "theta1", "theta2"],
                      ([t, k, *X[i], *TH[i]] for i, t in enumerate(res.times)
                       for k, X, TH in res.classes))
        files.append(path.name)
    if "barycentric_csv" in outputs:
        path = out / f"{name}_barycentric.csv"
        if res.flat is not None:
            u, v = _barycentric_arrays(res.flat[:, 1], res.flat[:, 2])
            write_csv(path, ["t", "u", "v"], zip(res.times, u, v))
        else:
            bary = [(k, *_barycentric_arrays(X[:, 1], X[:, 2])) for k, X, _ in res.classes]
            write_csv(path, ["t", "k", "u", "v"],
                      ([t, k, u[i], v[i]] for i, t in enumerate(res.times) for k, u, v in bary))
        files.append(path.name)
    return files


def run(scenario_path, out_dir, stream=None) -> int:
    """Run one scenario; returns the exit status."""
    stream = sys.stderr if stream is None else stream
    out = Path(os.environ.get("SWARM_OUT") or out_dir)
    try:
        try:
            with open(scenario_path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ValidationError(f"cannot read scenario: {e}") from e
        if not isinstance(doc, dict):
            raise ValidationError("/: scenario must be a JSON object")
        validate_scenario(doc)
        try:
            cfg = IntegratorConfig.from_dict(doc.get("integrator", {}))
        except ValidationError as e:
            raise ValidationError(f"/integrator: {e}") from e
        name = doc.get("name") or Path(scenario_path).stem
        res = _Result()
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            _RUNNERS[doc["model"]](doc, cfg, res)
        out.mkdir(parents=True, exist_ok=True)
        files = _write_outputs(doc, res, out, name)
        report = {"name": name, "model": doc["model"], "params": doc["params"], **res.report,
                  "files": files + ["report.json"]}
        report = _clean(report)
        jsonschema.validate(report, REPORT_SCHEMA)
        with open(out / "report.json", "w", encoding="utf-8", newline="") as fh:
            fh.write(json.dumps(report, indent=2, allow_nan=False) + "\n")
        return EXIT_OK
    except (ValidationError, jsonschema.ValidationError) as e:
        print(f"validation error: {e}", file=stream)
        return EXIT_VALIDATION
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=stream)
        return EXIT_NUMERICAL


def _load_params(text: str) -> dict:
    path = Path(text)
    try:
        raw = path.read_text(encoding="utf-8") if path.is_file() else text
        doc = json.loads(raw)
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"--params is neither a JSON file nor JSON text: {e}") from e
    if not isinstance(doc, dict):
        raise ValidationError("--params must be a JSON object")
    return doc.get("params", doc)


def _is_asym(d: dict) -> bool:
    return set(d) == {"gamma1", "gamma2", "sigma"}


def cmd_equilibria(args) -> dict:
    d = _load_params(args.params)
    if _is_asym(d):
        reps = asym.asym_equilibria(asym.AsymParams.from_dict(d))
        return {"equilibria": [r.to_dict() for r in reps]}
    p = ModelParams.from_dict(d)
    out = []
    for f in un.equilibria(p):
        item = f.to_dict()
        if f.feasible:
            item["stability"] = un.classify_point(p, f.state).to_dict()
        out.append(item)
    return {"equilibria": out}


def cmd_threshold(args) -> dict:
    p = ModelParams.from_dict(_load_params(args.params))
    out = {"sigma_star": un.consensus_threshold(p)}
    if args.empirical:
        out["sigma_star_empirical"] = un.empirical_threshold(p)
    return out


def cmd_spr(args) -> dict:
    d = _load_params(args.params)
    if _is_asym(d):
        g = rb.asym_transfer(asym.AsymParams.from_dict(d))
        return {"positive_real": rb.positive_real_check(g).to_dict()}
    p = ModelParams.from_dict(d)
    sector = rb.SectorBound(args.sector)
    x = args.x if args.x is not None else rb.default_linearization_point(p.with_sigma(0.0))
    A = rb.linearized_a(p, x)
    hv = rb.hurwitz_check(A, p, x)
    out = {"x": x, "hurwitz": hv.to_dict()}
    if hv.hurwitz:
        out["spr"] = rb.spr_check(rb.z_of_s(p, x, sector)).to_dict()
        out["kyp"] = rb.kyp_solve(A, sector).to_dict()
    return out


def _sweep_one(job):
    path, out = job
    return str(path), run(path, out)


def cmd_sweep(args, base_out: Path) -> int:
    paths = sorted(Path(args.dir).glob("*.json"))
    if not paths:
        print(f"no scenarios in {args.dir}", file=sys.stderr)
        return EXIT_VALIDATION
    jobs = [(p, base_out / p.stem) for p in paths]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    for path, code in results:
        print(f"{code} {path}")
    return max(code for _, code in results)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="swarmdyn", description="Collective decision dynamics toolkit")
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="run a JSON scenario")
    s.add_argument("scenario")
    s.add_argument("--out", default="out")
    s = sub.add_parser("equilibria", help="closed-form equilibria with stability")
    s.add_argument("--params", required=True, help="JSON text or file")
    s = sub.add_parser("threshold", help="consensus threshold")
    s.add_argument("--params", required=True)
    s.add_argument("--empirical", action="store_true")
    s = sub.add_parser("spr-check", help="SPR and KYP checks for a sector bound")
    s.add_argument("--params", required=True)
    s.add_argument("--sector", type=float, default=1.0)
    s.add_argument("--x", type=float, default=None, help="linearisation point")
    s = sub.add_parser("sweep", help="run every scenario in a directory")
    s.add_argument("--dir", required=True)
    s.add_argument("--out", default="out")
    s.add_argument("--jobs", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return run(args.scenario, args.out)
    if args.command == "sweep":
        return cmd_sweep(args, Path(os.environ.get("SWARM_OUT") or args.out))
    handler = {"equilibria": cmd_equilibria, "threshold": cmd_threshold,
               "spr-check": cmd_spr}[args.command]
    try:
        out = handler(args)
    except ValidationError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(_clean(out), indent=2, allow_nan=False))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
