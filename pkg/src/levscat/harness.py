"""Scenario configuration, reproducible runs and report emission.

A scenario is a YAML document naming a potential, a task and its
parameters; running one writes plot-ready CSV tables and JSON reports
under ``results/<name>/run-NNN/`` together with an append-only ledger
of content digests, so identical scenarios reproduce bitwise-identical
outputs and prior result directories are never overwritten.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .channels import Channel, build_channels
from .errors import LevscatError, PositivityViolation, UnsupportedAngular
from .greens import extract_g11, extract_gnu0, kernel_table
from .potential import AngularPotential, PotentialSpec, Segment
from .scattering import phase_curve
from .specfun import c_nu
from .ssf import _default_nu_max, levinson_check
from .threshold import classify_threshold

TASKS = ("channels", "phases", "threshold", "greens-check", "levinson", "sweep")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_OVER_BUDGET = 3


@dataclass(frozen=True)
class Scenario:
    """One reproducible experiment: a potential plus a task."""

    name: str
    spec: PotentialSpec
    task: str
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "potential": {
                "n": self.spec.n,
                "q": {"kind": self.spec.q.kind, "q0": self.spec.q.q0,
                      "cos_coeffs": list(self.spec.q.cos_coeffs)},
                "w": [{"r_lo": s.r_lo, "r_hi": s.r_hi, "coeffs": list(s.coeffs)}
                      for s in self.spec.w],
                "g": self.spec.g,
                "r_cut": self.spec.r_cut,
            },
            "task": self.task,
            "params": dict(self.params),
            "tolerances": dict(self.tolerances),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        pot = data["potential"]
        qd = pot.get("q", {})
        spec = PotentialSpec(
            n=int(pot["n"]),
            q=AngularPotential(kind=qd.get("kind", "constant"),
                               q0=float(qd.get("q0", 0.0)),
                               cos_coeffs=tuple(float(x) for x in qd.get("cos_coeffs", []))),
            w=tuple(Segment(float(s["r_lo"]), float(s["r_hi"]),
                            tuple(float(c) for c in s["coeffs"]))
                    for s in pot.get("w", [])),
            g=float(pot.get("g", 0.0)),
            r_cut=float(pot.get("r_cut", 1.0)),
        )
        return cls(name=str(data["name"]), spec=spec, task=str(data["task"]),
                   params=dict(data.get("params", {}) or {}),
                   tolerances=dict(data.get("tolerances", {}) or {}))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return Scenario.from_dict(yaml.safe_load(fh))


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scenario.to_dict(), fh, sort_keys=False)


@dataclass(frozen=True)
class RunRecord:
    """Provenance of one scenario execution."""

    scenario_hash: str
    version: str
    started: float
    finished: float
    status: str          # "ok" | "residual-over-budget" | "error"
    outputs: tuple       # (relative path, sha256) pairs

    def to_dict(self) -> dict:
        return {**asdict(self), "outputs": [list(o) for o in self.outputs]}


def validate(scenario: Scenario) -> list:
    """Structural diagnostics; runs no numerics beyond the channel build."""
    diagnostics = list(scenario.spec.validate())
    if scenario.task not in TASKS:
        diagnostics.append(f"unknown task {scenario.task!r}")
    try:
        build_channels(scenario.spec, nu_max=3.0)
    except (PositivityViolation, UnsupportedAngular) as exc:
        diagnostics.append(f"{type(exc).__name__}: {exc}")
    return diagnostics


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header_cols, rows, scenario_hash: str) -> None:
    lines = [f"# scenario_hash={scenario_hash} version={__version__}",
             ",".join(header_cols)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, payload: dict, scenario_hash: str) -> None:
    doc = {"scenario_hash": scenario_hash, "version": __version__, **payload}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _levinson_kwargs(scenario: Scenario, tol_scale: float, threads: int) -> dict:
    p = scenario.params
    kw = {
        "lambda_min": float(p.get("lambda_min", 1e-6)),
        "lambda_top": float(p.get("lambda_top", 2500.0)),
        "points_per_decade": int(p.get("points_per_decade", 400)),
        "low_ppd": int(p.get("low_ppd", 60)),
        "tol_scale": tol_scale,
        "threads": threads,
    }
    if "fit_lo" in p:
        kw["fit_lo"] = float(p["fit_lo"])
    if "tol_a" in scenario.tolerances:
        kw["tol_a"] = float(scenario.tolerances["tol_a"])
    if "residual_budget" in scenario.tolerances:
        kw["residual_budget"] = float(scenario.tolerances["residual_budget"])
    return kw


def _task_channels(scenario, out, tol_scale, threads):
    nu_max = float(scenario.params.get("nu_max", 10.0))
    cs = build_channels(scenario.spec, nu_max)
    rows = [(ch.nu, ch.lambda_nu, ch.mult, int(ch in cs.sigma1)) for ch in cs.channels]
    _write_csv(out / "channels.csv", ["nu", "lambda", "mult", "in_sigma1"],
               rows, scenario.digest())
    return "ok"


def _task_phases(scenario, out, tol_scale, threads):
    p = scenario.params
    nu_max = float(p.get("nu_max", 3.5))
    k_lo, k_hi = float(p.get("k_min", 1e-3)), float(p.get("k_max", 50.0))
    n_pts = int(p.get("points_per_decade", 100) * math.log10(k_hi / k_lo))
    ks = np.geomspace(k_lo, k_hi, max(n_pts, 8))
    cs = build_channels(scenario.spec, nu_max)
    for ch in cs.channels:
        curve = phase_curve(ch, scenario.spec, ks)
        rows = list(zip(curve.k_grid, curve.delta))
        _write_csv(out / f"phases_nu_{ch.nu:.6f}.csv", ["k", "delta"],
                   rows, scenario.digest())
    return "ok"


def _task_threshold(scenario, out, tol_scale, threads):
    nu_max = float(scenario.params.get("nu_max", 6.0))
    tol_a = float(scenario.tolerances.get("tol_a", 1e-7))
    cs = build_channels(scenario.spec, nu_max)
    rep = classify_threshold(cs, scenario.spec, tol_a=tol_a)
    rows = [(r.nu, r.mult, r.a, r.b, r.klass) for r in rep.records]
    _write_csv(out / "threshold.csv", ["nu", "mult", "a", "b", "class"],
               rows, scenario.digest())
    _write_json(out / "threshold.json", {
        "N0": rep.N0, "mu_r": rep.mu_r,
        "resonances": [[s, m] for s, m in rep.resonances],
        "resonance_sum": rep.resonance_sum,
    }, scenario.digest())
    return "ok"


def _task_greens_check(scenario, out, tol_scale, threads):
    p = scenario.params
    nus = [float(v) for v in p.get("nu_values", (0.3, 0.5, 0.7))]
    radii = [float(v) for v in p.get("radii", (0.6, 1.0, 1.7))]
    z_mags = tuple(float(v) for v in p.get("z_mags", (1e-3, 1e-4, 1e-5, 1e-6)))
    n = scenario.spec.n
    rows = []
    for nu in nus:
        ch = Channel(lambda_nu=nu**2 - (n - 2)**2 / 4.0, nu=nu, mult=1)
        for r, tau, zmin, ex, tgt, rel in kernel_table(ch, n, radii, z_mags, c_nu(nu)):
            rows.append((nu, r, tau, zmin, ex.real, ex.imag, tgt.real, tgt.imag, rel))
    _write_csv(out / "gnu0.csv",
               ["nu", "r", "tau", "zmin", "extracted_re", "extracted_im",
                "target_re", "target_im", "relerr"], rows, scenario.digest())
    return "ok"


def _task_levinson(scenario, out, tol_scale, threads):
    rep = levinson_check(scenario.spec, **_levinson_kwargs(scenario, tol_scale, threads))
    _write_json(out / "levinson.json", rep.to_dict(), scenario.digest())
    _write_csv(out / "levinson.csv",
               ["g", "lhs", "beta", "N_minus", "N0", "resonance_sum", "rhs",
                "residual", "error_budget"],
               [(scenario.spec.g, rep.lhs, rep.beta, rep.N_minus, rep.N0,
                 rep.resonance_sum, rep.rhs, rep.residual, rep.error_budget)],
               scenario.digest())
    return "residual-over-budget" if rep.flagged else "ok"


def _task_sweep(scenario, out, tol_scale, threads):
    p = scenario.params
    if "g_values" in p:
        gs = [float(g) for g in p["g_values"]]
    else:
        gs = list(np.linspace(float(p["g_lo"]), float(p["g_hi"]),
                              int(p.get("g_count", 11))))
    rows = []
    status = "ok"
    for g in gs:
        sc = replace(scenario.spec, g=g)
        rep = levinson_check(sc, **_levinson_kwargs(scenario, tol_scale, threads))
        rows.append((g, rep.lhs, rep.beta, rep.lhs - rep.beta, rep.N_minus,
                     rep.N0, rep.resonance_sum, rep.rhs, rep.residual))
        if rep.flagged:
            status = "residual-over-budget"
    _write_csv(out / "sweep.csv",
               ["g", "lhs", "beta", "lhs_minus_beta", "N_minus", "N0",
                "resonance_sum", "rhs", "residual"], rows, scenario.digest())
    return status


_TASK_RUNNERS = {
    "channels": _task_channels,
    "phases": _task_phases,
    "threshold": _task_threshold,
    "greens-check": _task_greens_check,
    "levinson": _task_levinson,
    "sweep": _task_sweep,
}


def _next_run_dir(base: Path) -> Path:
    base.mkdir(parents=True, exist_ok=True)
    seq = 1
    while (base / f"run-{seq:03d}").exists():
        seq += 1
    path = base / f"run-{seq:03d}"
    path.mkdir()
    return path


def _append_ledger(out_root: Path, record: RunRecord, scenario_name: str) -> None:
    ledger = out_root / "ledger.jsonl"
    entry = json.dumps({"scenario": scenario_name, **record.to_dict()},
                       sort_keys=True)
    with open(ledger, "a", encoding="utf-8") as fh:
        fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
        fh.write(entry + "\n")
        fcntl.flock(fh.fileno(), fcntl.LOCK_UN)


def run(scenario: Scenario, out_dir="results", threads: int = 1,
        tol_scale: float = 1.0) -> RunRecord:
    """Execute a scenario; outputs land under out_dir/<name>/run-NNN/."""
    if scenario.task not in _TASK_RUNNERS:
        raise LevscatError(f"unknown task {scenario.task!r}")
    out_root = Path(out_dir)
    run_dir = _next_run_dir(out_root / scenario.name)
    started = time.time()
    try:
        status = _TASK_RUNNERS[scenario.task](scenario, run_dir, tol_scale, threads)
    except LevscatError as exc:
        (run_dir / "error.txt").write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
        status = "error"
    outputs = []
    for path in sorted(run_dir.iterdir()):
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        outputs.append((str(path.relative_to(out_root)), digest))
    record = RunRecord(scenario_hash=scenario.digest(), version=__version__,
                       started=started, finished=time.time(), status=status,
                       outputs=tuple(outputs))
    _append_ledger(out_root, record, scenario.name)
    return record
