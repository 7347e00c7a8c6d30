"""Command-line entry point.

Subcommands:

* ``qseesaw run <cfg-or-builtin> [--out DIR] [--seed N] [--traj N] [--workers N]``
* ``qseesaw list``   show built-in scenarios
* ``qseesaw check``  run the fast oracle suite

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .dynamics import IntegrationError
from .scenarios import ScenarioError, list_builtin_scenarios, load_scenario
from .runner import run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
        if args.seed is not None:
            scenario = dataclasses.replace(scenario, master_seed=args.seed)
            scenario.resolved["ensemble"]["master_seed"] = args.seed
        if args.traj is not None:
            scenario = dataclasses.replace(scenario, n_traj=args.traj)
            scenario.resolved["ensemble"]["n_traj"] = args.traj
        if args.workers is not None:
            scenario = dataclasses.replace(scenario, n_workers=args.workers)
            scenario.resolved["ensemble"]["n_workers"] = args.workers
    except ScenarioError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_scenario(scenario, args.out)
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for warning in result["warnings"]:
        print(warning, file=sys.stderr)
    print(f"{scenario.name}: wrote {result['csv']} and {result['meta']} "
          f"({result['wall_time']:.2f} s)")
    return EXIT_OK


def _cmd_list(_args) -> int:
    for name, description in list_builtin_scenarios():
        print(f"{name:16s} {description}")
    return EXIT_OK


def _cmd_check(_args) -> int:
    """Fast oracle suite: closed-form checks that finish in seconds."""
    import math

    from .hilbert import HilbertSpace, SparseOperator, StateVector, annihilation_matrix, \
        coherent_state, number_matrix
    from .dynamics import IntegratorConfig, MeanFieldState, integrate_meanfield, \
        run_mcwf_ensemble
    from .models import TwoSiteParams, eliminated_field_operator
    from .observables import negativity
    from .scenarios import superfluid_amplitudes

    failures = 0

    def report(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))
        failures += 0 if ok else 1

    # Bell-pair negativity
    sp2 = HilbertSpace((("A", 2), ("B", 2)))
    bell = StateVector(sp2, np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2))
    n_bell = negativity(bell, "A")
    report("bell negativity = 1/2", abs(n_bell - 0.5) < 1e-10, f"{n_bell:.12f}")

    # two-branch superposition of opposite-phase coherent fields
    cut = 40
    fp = coherent_state(1.0, cut).amplitudes
    fm = coherent_state(-1.0, cut).amplitudes
    csp = HilbertSpace((("atom", 2), ("field", cut)))
    amp = np.concatenate([fp, fm]) / math.sqrt(2)
    cat = StateVector(csp, amp)
    n_cat = negativity(cat, "field")
    n_exact = math.sqrt(1 - math.exp(-4.0)) / 2
    report("two-branch field superposition negativity", abs(n_cat - n_exact) < 1e-8,
           f"{n_cat:.8f} vs {n_exact:.8f}")

    # balanced two-atom state is a null eigenvector of the slaved field
    tp = TwoSiteParams(J=0.01, Jtilde=1.6, U0=-2.0, Delta_c=-6.0, N_atoms=2)
    ae = eliminated_field_operator(tp)
    mott = np.array([0.0, 1.0, 0.0], dtype=complex)
    report("balanced state gives zero slaved field",
           float(np.linalg.norm(ae.matrix.dot(mott))) == 0.0)

    # damped cavity ensemble vs closed form
    cut = 12
    spf = HilbertSpace((("field", cut),))
    a = annihilation_matrix(cut)
    h0 = SparseOperator(spf, 0 * a)
    jump = SparseOperator(spf, math.sqrt(2.0) * a)
    psi0 = coherent_state(1.0, cut)
    cfg = IntegratorConfig(dt=0.005, t_final=1.0, record_stride=20)
    nobs = {"n": SparseOperator(spf, number_matrix(cut))}
    ens = run_mcwf_ensemble(h0, [jump], psi0, cfg, master_seed=2, n_traj=50,
                            observables=nobs, store_density=False)
    exact = np.exp(-2.0 * ens.record.times)
    err = float(np.max(np.abs(ens.record.observables["n"] - exact)))
    report("damped cavity ensemble matches e^(-2 kappa t)", err < 1e-7, f"max err {err:.2e}")

    # symmetric mean-field stationarity
    tpm = TwoSiteParams(J=-0.01, Jtilde=0.9, U0=-0.25, Delta_c=-2 / 3, N_atoms=4,
                        photon_cutoff=2)
    s0 = MeanFieldState(superfluid_amplitudes(4).astype(complex), 0.0)
    rec = integrate_meanfield(tpm, s0, IntegratorConfig(dt=0.01, t_final=10.0,
                                                        record_stride=10))
    peak = float(np.max(np.abs(rec.observables["intensity"])))
    report("symmetric mean-field start stays dark", peak == 0.0, f"max |alpha|^2 = {peak:g}")

    print("check:", "all oracles passed" if failures == 0 else f"{failures} failures")
    return EXIT_OK if failures == 0 else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qseesaw",
        description="Cavity-QED self-organization scenarios: run, list, check.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config file or builtin name")
    p_run.add_argument("scenario", help="path to a .cfg file or a builtin scenario name")
    p_run.add_argument("--out", default="out", help="output directory (default: out)")
    p_run.add_argument("--seed", type=int, default=None, help="override master seed")
    p_run.add_argument("--traj", type=int, default=None, help="override trajectory count")
    p_run.add_argument("--workers", type=int, default=None, help="override worker count")
    p_run.set_defaults(handler=_cmd_run)

    p_list = sub.add_parser("list", help="list builtin scenarios")
    p_list.set_defaults(handler=_cmd_list)

    p_check = sub.add_parser("check", help="run the fast oracle suite")
    p_check.set_defaults(handler=_cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
