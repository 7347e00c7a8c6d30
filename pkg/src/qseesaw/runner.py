"""Scenario execution: dispatch to the right propagator, write
``timeseries.csv`` and ``meta.txt``.

CSV schema: first column ``time``, then the scenario's outputs in
declaration order; complex-valued observables split into ``re_<name>`` and
``im_<name>`` columns.  Floats are printed with 17 significant digits, so a
rerun with the same seed produces byte-identical files.
"""

from __future__ import annotations

import os
import time

import numpy as np

from .dynamics import (
    IntegrationError,
    TrajectoryRecord,
    integrate_lindblad,
    integrate_meanfield,
    propagate_schrodinger,
    run_mcwf_ensemble,
)
from .models import build_fullspace_hamiltonian, build_twosite_hamiltonian, build_seesaw_hamiltonian
from .scenarios import (
    Scenario,
    build_initial_state,
    build_observables,
    truncation_monitor_for,
)

__all__ = ["run_scenario", "execute_scenario", "TRUNCATION_WARN_LEVEL"]

TRUNCATION_WARN_LEVEL = 1e-4


def execute_scenario(s: Scenario) -> TrajectoryRecord:
    """Run the scenario and return the (aggregated) record."""
    obs = build_observables(s)
    monitor = truncation_monitor_for(s)
    init = build_initial_state(s)
    if s.model == "seesaw":
        h = build_seesaw_hamiltonian(s.params)
        return propagate_schrodinger(h, init, s.integrator, observables=obs,
                                     truncation_monitor=monitor)
    if s.model == "twosite-meanfield":
        return integrate_meanfield(s.params, init, s.integrator, observed=s.outputs)
    if s.model == "twosite-quantum":
        h, jump = build_twosite_hamiltonian(s.params)
        if s.method == "lindblad":
            return integrate_lindblad(h, [jump], init.to_density_matrix(), s.integrator,
                                      observables=obs, truncation_monitor=monitor)
        ens = run_mcwf_ensemble(h, [jump], init, s.integrator, s.master_seed, s.n_traj,
                                observables=obs.linear(), functionals=obs.functionals(),
                                n_workers=s.n_workers, density_stride=s.density_stride,
                                store_density=False, truncation_monitor=monitor)
        return ens.record
    if s.model == "fullspace-mcwf":
        h, jump = build_fullspace_hamiltonian(s.params)
        ens = run_mcwf_ensemble(h, [jump], init, s.integrator, s.master_seed, s.n_traj,
                                observables=obs.linear(), functionals=obs.functionals(),
                                n_workers=s.n_workers, density_stride=s.density_stride,
                                store_density=False, truncation_monitor=monitor)
        return ens.record
    raise AssertionError(s.model)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _csv_columns(s: Scenario, record: TrajectoryRecord) -> tuple[list[str], list[np.ndarray]]:
    headers = ["time"]
    columns = [np.asarray(record.times, dtype=float)]
    for name in s.outputs:
        series = record.observables[name]
        if np.iscomplexobj(series):
            headers += [f"re_{name}", f"im_{name}"]
            columns += [series.real, series.imag]
        else:
            headers.append(name)
            columns.append(np.asarray(series, dtype=float))
    return headers, columns


def write_timeseries_csv(path: str, s: Scenario, record: TrajectoryRecord) -> None:
    headers, columns = _csv_columns(s, record)
    n_rows = len(columns[0])
    for name, col in zip(headers, columns):
        if len(col) != n_rows:
            raise IntegrationError(
                f"column {name!r} has {len(col)} rows, expected {n_rows}; "
                "use density_stride=1 for nonlinear ensemble outputs")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(headers) + "\n")
        for i in range(n_rows):
            fh.write(",".join(_fmt(col[i]) for col in columns) + "\n")


def write_meta(path: str, s: Scenario, record: TrajectoryRecord, wall_time: float,
               n_rows: int) -> list[str]:
    """Write the resolved configuration and run report; returns warning lines.

    Only Fock-ladder cutoffs ("top"-monitored factors) trigger the 1e-4
    population warning; plane-wave edge populations are reported as
    information (their observables are convergence-checked by doubling).
    """
    monitor_kinds = truncation_monitor_for(s)
    warnings = []
    lines = [f"scenario = {s.name}", f"model = {s.model}"]
    for section, entries in s.resolved.items():
        lines.append(f"[{section}]")
        for key, value in entries.items():
            lines.append(f"{key} = {value}")
    lines.append("[run]")
    lines.append(f"rows = {n_rows}")
    lines.append(f"wall_time_s = {wall_time:.3f}")
    if s.model in ("twosite-quantum", "fullspace-mcwf") and s.method == "mcwf":
        lines.append(f"master_seed = {s.master_seed}")
        lines.append(f"n_traj = {s.n_traj}")
        lines.append("trajectory_seeds = derived from (master_seed, k) via SeedSequence")
        if "mean_jump_count" in record.meta:
            lines.append(f"mean_jump_count = {record.meta['mean_jump_count']:.4f}")
    for key in ("norm_drift", "trace_drift"):
        if key in record.meta:
            lines.append(f"{key} = {record.meta[key]:.6e}")
    trunc = record.meta.get("truncation", {})
    for label, value in sorted(trunc.items()):
        lines.append(f"truncation_max_population[{label}] = {value:.6e}")
        if value > TRUNCATION_WARN_LEVEL and monitor_kinds.get(label) == "top":
            warnings.append(
                f"warning: factor {label!r} top-level population {value:.3e} exceeds "
                f"{TRUNCATION_WARN_LEVEL:g}; raise the cutoff")
    lines.extend(warnings)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return warnings


def run_scenario(s: Scenario, out_dir: str) -> dict:
    """Execute and write ``timeseries.csv`` + ``meta.txt`` into ``out_dir``.

    Returns a summary dict with paths, wall time and any truncation warnings.
    """
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.perf_counter()
    record = execute_scenario(s)
    wall = time.perf_counter() - t0
    csv_path = os.path.join(out_dir, "timeseries.csv")
    meta_path = os.path.join(out_dir, "meta.txt")
    write_timeseries_csv(csv_path, s, record)
    warnings = write_meta(meta_path, s, record, wall, len(record.times))
    return {"csv": csv_path, "meta": meta_path, "wall_time": wall,
            "warnings": warnings, "record": record}
