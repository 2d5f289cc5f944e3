"""Run orchestration behind the CLI: pipelines, gauge verification, sweeps, file output."""

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import _kernels
from .analytic_spin import SpinGauge, analytic_basis, analytic_phases, rotating_frame_exact
from .config import Run, build, gauge_from_config, with_parameter
from .evolution import (
    InitialDecomposition,
    adiabatic_deviation,
    adiabatic_states,
    decompose_initial,
    exact_propagate,
)
from .fieldpath import precessing_field
from .observables import gauge_invariance_report
from .phases import GaugeFunction, apply_gauge, build_ledger, relative_gauge
from .spectral import spectral_trajectory


def fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([r if isinstance(r, str) else fmt(r) for r in row])


def write_json(path: Path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def checked(value, threshold):
    return {"value": float(value), "threshold": float(threshold), "pass": bool(value < threshold)}


@dataclass
class Pipeline:
    run: Run
    traj: object
    ledger: object
    decomp: InitialDecomposition
    psi0: np.ndarray
    exact: np.ndarray
    adiabatic: np.ndarray
    deviation: np.ndarray
    # spin-1/2 precessing runs with mu > 0 only
    closed_form_basis_phase: Optional[np.ndarray] = None
    closed_form_phase: Optional[np.ndarray] = None
    oracle_states: Optional[np.ndarray] = None

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.exact, axis=1) - 1.0)))

    @property
    def phase_error(self) -> Optional[float]:
        if self.closed_form_phase is None:
            return None
        return float(np.max(np.abs(self.closed_form_basis_phase - self.closed_form_phase)))

    @property
    def propagation_error(self) -> Optional[float]:
        if self.oracle_states is None:
            return None
        return float(np.max(np.linalg.norm(self.exact - self.oracle_states, axis=1)))


def has_closed_form(run: Run) -> bool:
    return run.precessing is not None and run.mu is not None and run.mu > 0


def run_pipeline(run: Run) -> Pipeline:
    traj = spectral_trajectory(run.family, run.grid)
    ledger = build_ledger(traj)
    if run.coefficients is not None:
        decomp = InitialDecomposition(run.coefficients)
        psi0 = traj.vectors[0] @ decomp.coefficients
    else:
        psi0 = run.psi0
        decomp = decompose_initial(psi0, traj.frame(0))
    exact = exact_propagate(run.family, psi0, run.grid)
    adiab = adiabatic_states(decomp, traj, ledger)
    result = Pipeline(run, traj, ledger, decomp, psi0, exact, adiab, adiabatic_deviation(exact, adiab))

    if has_closed_form(run):
        times = run.grid.times
        basis = analytic_basis(precessing_field(run.precessing, times), 0.0, 0.0)
        alpha = relative_gauge(traj, basis)
        result.closed_form_basis_phase = ledger.geometric - alpha.increment()
        result.closed_form_phase = np.stack(analytic_phases(run.precessing, SpinGauge(), times), axis=1)
        result.oracle_states = rotating_frame_exact(run.precessing, run.mu, psi0, times)
    return result


def output_dir(raw, override=None) -> Path:
    if override:
        out = Path(override)
    elif os.environ.get("ADIAPHASE_OUT"):
        out = Path(os.environ["ADIAPHASE_OUT"])
    else:
        out = Path(raw.get("output", {}).get("dir", "adiaphase_out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _random_gauges(grid, d, seed, count, modes=3):
    rng = np.random.default_rng(seed)
    return [GaugeFunction.random_fourier(grid, d, rng, modes=modes) for _ in range(count)]


def simulate(raw, out_dir=None, seed=None, tolerance=None):
    """Full pipeline; writes phases.csv, states.csv, expectations.csv and report.json.

    Returns the report dict; ``report["pass"]`` is False if any checked
    tolerance failed.
    """
    started = time.perf_counter()
    run = build(raw)
    if tolerance is not None:
        run.tolerances["gauge"] = tolerance
    seed = raw.get("seed", 0) if seed is None else seed
    p = run_pipeline(run)
    out = output_dir(raw, out_dir)
    times = run.grid.times
    d = run.dimension

    header = ["t"]
    for j in range(1, d + 1):
        header += [f"gamma_{j}", f"avg_energy_{j}", f"dynamical_arg_{j}"]
    columns = [times]
    for j in range(d):
        columns += [p.ledger.geometric[:, j], p.ledger.average_energy[:, j], p.ledger.dynamical_argument[:, j]]
    if p.closed_form_phase is not None:
        for j in range(d):
            header += [f"gamma_closed_form_basis_{j + 1}", f"gamma_closed_form_{j + 1}"]
            columns += [p.closed_form_basis_phase[:, j], p.closed_form_phase[:, j]]
    write_csv(out / "phases.csv", header, np.column_stack(columns))

    header = ["t"]
    columns = [times]
    for label, series in (("exact", p.exact), ("adiabatic", p.adiabatic)):
        for i in range(d):
            header += [f"{label}_re_{i + 1}", f"{label}_im_{i + 1}"]
            columns += [series[:, i].real, series[:, i].imag]
    header.append("deviation")
    columns.append(p.deviation)
    write_csv(out / "states.csv", header, np.column_stack(columns))

    if "gauge" in raw:
        alpha = gauge_from_config(raw["gauge"], run.grid, d, np.random.default_rng(seed))
    else:
        alpha = GaugeFunction.zero(run.grid, d)
    g_ledger = build_ledger(apply_gauge(p.traj, alpha))
    steps = np.arange(len(times))
    header = ["t"]
    columns = [times]
    gauge_max = 0.0
    for obs in run.observables:
        rep = gauge_invariance_report(p.decomp, p.traj, p.ledger, obs, alpha, steps, gauged_ledger=g_ledger)
        o_exact = np.einsum("si,sij,sj->s", p.exact.conj(), obs.sample(times), p.exact).real
        header += [f"{obs.name}_exact", f"{obs.name}_adiabatic", f"{obs.name}_adiabatic_gauged",
                   f"{obs.name}_discrepancy"]
        columns += [o_exact, rep.direct, rep.direct_gauged, np.abs(rep.direct - rep.direct_gauged)]
        gauge_max = max(gauge_max, rep.worst)
    write_csv(out / "expectations.csv", header, np.column_stack(columns))

    tol = run.tolerances
    checks = {
        "norm_drift": checked(p.norm_drift, tol["norm"]),
        "gauge_discrepancy": checked(gauge_max, tol["gauge"]),
    }
    if p.phase_error is not None:
        checks["closed_form_phase_error"] = checked(p.phase_error, tol["phase"])
    report = {
        "command": "simulate",
        "backend": _kernels.BACKEND,
        "grid": {"T": run.grid.duration, "N": run.grid.steps, "h": run.grid.step},
        "levels": d,
        "final_phases": {
            "geometric": p.ledger.geometric[-1].tolist(),
            "average_energy": p.ledger.average_energy[-1].tolist(),
            "dynamical_argument": p.ledger.dynamical_argument[-1].tolist(),
        },
        "adiabatic_deviation": {"max": float(p.deviation.max()), "final": float(p.deviation[-1])},
        "integrator": {"scheme": "midpoint-exponential", "norm_drift": p.norm_drift},
        "checks": checks,
    }
    if p.closed_form_phase is not None:
        report["final_phases"]["geometric_closed_form_basis"] = p.closed_form_basis_phase[-1].tolist()
        report["final_phases"]["geometric_closed_form"] = p.closed_form_phase[-1].tolist()
        report["integrator"]["rotating_frame_max_error"] = p.propagation_error
    report["pass"] = all(c["pass"] for c in checks.values())
    report["wall_time_s"] = time.perf_counter() - started
    write_json(out / "report.json", report)
    return report


def verify(raw, random_gauges=None, seed=None, tolerance=None, out_dir=None, echo=print):
    """Compare observables across instantaneous bases for one or more gauges.

    Returns the report dict; ``report["pass"]`` is True iff every gauge's worst
    residual is below the gauge tolerance.
    """
    started = time.perf_counter()
    run = build(raw)
    tol = tolerance if tolerance is not None else run.tolerances["gauge"]
    seed = raw.get("seed", 0) if seed is None else seed
    vcfg = raw.get("verify", {})
    p = run_pipeline(run)
    d = run.dimension
    if random_gauges is not None:
        gauges = _random_gauges(run.grid, d, seed, random_gauges, vcfg.get("modes", 3))
    elif "gauge" in raw:
        gauges = [gauge_from_config(raw["gauge"], run.grid, d, np.random.default_rng(seed))]
    else:
        gauges = _random_gauges(run.grid, d, seed, vcfg.get("random_gauges", 20), vcfg.get("modes", 3))
    if not run.observables:
        raise ValueError("verify needs at least one observable")
    steps = np.unique(np.linspace(0, run.grid.steps, vcfg.get("samples", 50)).round().astype(int))

    entries = []
    for i, alpha in enumerate(gauges):
        g_ledger = build_ledger(apply_gauge(p.traj, alpha))
        reports = [gauge_invariance_report(p.decomp, p.traj, p.ledger, obs, alpha, steps, gauged_ledger=g_ledger)
                   for obs in run.observables]
        entry = {
            "gauge": i,
            "discrepancy": max(r.discrepancy for r in reports),
            "consistency": max(r.consistency for r in reports),
            "phase_law_residual": max(r.phase_law_residual for r in reports),
            "max": max(r.worst for r in reports),
        }
        entry["pass"] = bool(entry["max"] < tol)
        entries.append(entry)
        echo(f"gauge {i:3d}: max discrepancy {entry['discrepancy']:.3e} "
             f"(consistency {entry['consistency']:.3e}, phase law {entry['phase_law_residual']:.3e}) "
             f"{'ok' if entry['pass'] else 'FAIL'} [tolerance {tol:.1e}]")

    report = {
        "command": "verify",
        "backend": _kernels.BACKEND,
        "seed": seed,
        "tolerance": tol,
        "samples": len(steps),
        "observables": [o.name for o in run.observables],
        "gauges": entries,
        "max_discrepancy": max(e["max"] for e in entries),
        "pass": all(e["pass"] for e in entries),
        "wall_time_s": time.perf_counter() - started,
    }
    write_json(output_dir(raw, out_dir) / "verify.json", report)
    return report


def sweep_point(raw_point):
    """One sweep row (module-level so worker processes can pickle it)."""
    run = build(raw_point)
    p = run_pipeline(run)
    return {
        "N": run.grid.steps,
        "T": run.grid.duration,
        "max_deviation": float(p.deviation.max()),
        "final_deviation": float(p.deviation[-1]),
        "phase_error": p.phase_error,
        "propagation_error": p.propagation_error,
        "norm_drift": p.norm_drift,
    }


def sweep(raw, out_dir=None, workers=None):
    started = time.perf_counter()
    spec = raw.get("sweep")
    if not spec or not spec.get("values"):
        raise ValueError("sweep needs a 'sweep' section with at least one value")
    name = spec["parameter"]
    points = [with_parameter(raw, name, v) for v in spec["values"]]
    for pt in points:
        build(pt)  # surface config errors before spending compute
    workers = workers or raw.get("workers", 1)
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(sweep_point, points))
    else:
        rows = [sweep_point(pt) for pt in points]

    header = ["parameter", "value", "N", "T", "max_deviation", "final_deviation",
              "phase_error", "phase_error_ratio", "propagation_error", "propagation_error_ratio", "norm_drift"]
    table = []
    for i, (v, row) in enumerate(zip(spec["values"], rows)):
        def ratio(key):
            if i == 0 or row[key] is None or not rows[i - 1][key]:
                return ""
            return fmt(rows[i - 1][key] / row[key]) if row[key] else ""
        table.append([name, fmt(v), str(row["N"]), fmt(row["T"]), fmt(row["max_deviation"]),
                      fmt(row["final_deviation"]),
                      "" if row["phase_error"] is None else fmt(row["phase_error"]), ratio("phase_error"),
                      "" if row["propagation_error"] is None else fmt(row["propagation_error"]),
                      ratio("propagation_error"), fmt(row["norm_drift"])])
    out = output_dir(raw, out_dir)
    write_csv(out / "sweep.csv", header, table)
    report = {
        "command": "sweep",
        "backend": _kernels.BACKEND,
        "parameter": name,
        "values": list(spec["values"]),
        "rows": rows,
        "wall_time_s": time.perf_counter() - started,
    }
    write_json(out / "sweep.json", report)
    return report
