"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
(run with ``pytest tests/test_acceptance.py -v -s``).

The full-space localized-start criterion (``test_fig6_symmetrization``)
asserts the eventual collapse of the coherent field fraction; in this model,
which carries no atomic spontaneous-emission channel, the localized
configuration is dynamically stable (verified against basis-size doubling
and 10^4/kappa horizons), so that single assertion fails and is documented
as a known model deviation.
"""

import dataclasses
import math

import numpy as np
import pytest

from qseesaw.dynamics import (
    IntegratorConfig,
    MeanFieldState,
    integrate_lindblad,
    integrate_meanfield,
    propagate_schrodinger,
    run_mcwf_ensemble,
)
from qseesaw.hilbert import (
    HilbertSpace,
    SparseOperator,
    StateVector,
    annihilation_matrix,
    coherent_state,
    fock_state,
    number_matrix,
    tensor_product_op,
)
from qseesaw.models import (
    FullSpaceParams,
    SeesawParams,
    TwoSiteParams,
    build_fullspace_hamiltonian,
    build_seesaw_hamiltonian,
    build_twosite_hamiltonian,
    compute_wannier_couplings,
    eliminated_field_operator,
    twosite_atomic_ops,
)
from qseesaw.observables import Observable, ObservableSet, negativity
from qseesaw.runner import run_scenario
from qseesaw.scenarios import (
    NegativityOf,
    SpatialMomentOf,
    build_initial_state,
    load_scenario,
    superfluid_amplitudes,
)

FIG4 = dict(J=0.01, Jtilde=1.6, U0=-2.0, Delta_c=-6.0, N_atoms=2)


def report(name: str, ok: bool, detail: str = ""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))
    return ok


def cat_state(alpha: complex, cutoff: int) -> StateVector:
    space = HilbertSpace((("atom", 2), ("field", cutoff)))
    fp = coherent_state(alpha, cutoff).amplitudes
    fm = coherent_state(-alpha, cutoff).amplitudes
    return StateVector(space, np.concatenate([fp, fm]) / math.sqrt(2))


def superfluid_with_vacuum(p: TwoSiteParams) -> StateVector:
    atomic = superfluid_amplitudes(p.N_atoms).astype(complex)
    fld = np.zeros(p.photon_cutoff, dtype=complex)
    fld[0] = 1.0
    return StateVector(p.space, np.kron(atomic, fld))


def mott_with_vacuum(p: TwoSiteParams) -> StateVector:
    atomic = np.zeros(p.N_atoms + 1, dtype=complex)
    atomic[p.N_atoms // 2] = 1.0
    fld = np.zeros(p.photon_cutoff, dtype=complex)
    fld[0] = 1.0
    return StateVector(p.space, np.kron(atomic, fld))


def twosite_observables(p: TwoSiteParams) -> dict:
    ops = twosite_atomic_ops(p.N_atoms)
    return {
        "photon_number": tensor_product_op(p.space, {"field": number_matrix(p.photon_cutoff)}),
        "imbalance_sq": tensor_product_op(p.space, {"atoms": ops["dz"] @ ops["dz"]}),
    }


# ---------------------------------------------------------------------------


def test_negativity_suite():
    """Product 0, Bell 1/2, opposite-phase coherent superposition closed form."""
    rng = np.random.default_rng(5)
    space = HilbertSpace((("A", 3), ("B", 4)))
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    b = rng.normal(size=4) + 1j * rng.normal(size=4)
    prod = StateVector(space, np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b)))
    ok = negativity(prod, "A") <= 1e-10

    bell = StateVector(HilbertSpace((("A", 2), ("B", 2))),
                       np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2))
    ok &= abs(negativity(bell, "A") - 0.5) <= 1e-10

    worst = 0.0
    for alpha in (0.5, 1.0, 2.0):
        got = negativity(cat_state(alpha, 40), "field")
        expected = math.sqrt(1.0 - math.exp(-4.0 * alpha ** 2)) / 2.0
        worst = max(worst, abs(got - expected))
    ok &= worst <= 1e-8
    assert report("negativity suite (product / Bell / coherent-branch states)",
                  ok, f"max cat deviation {worst:.2e}")


def test_meanfield_stationarity():
    """Symmetric start at the fig3 working point stays exactly dark to t=100."""
    wan = compute_wannier_couplings(-4.0, -0.25, 1.0)
    p = TwoSiteParams(J=wan.J, Jtilde=wan.Jtilde, U0=-0.25, Delta_c=-2.0 / 3.0,
                      N_atoms=4, photon_cutoff=2)
    s0 = MeanFieldState(superfluid_amplitudes(4).astype(complex), 0.0)
    cfg = IntegratorConfig(dt=0.005, t_final=100.0, record_stride=100)
    rec = integrate_meanfield(p, s0, cfg)
    peak = float(np.sqrt(np.max(rec.observables["intensity"])))
    assert report("mean-field stationarity of the symmetric start",
                  peak < 1e-12, f"max |alpha| = {peak:.3e}")


def test_quantum_meanfield_contrast():
    """Quantum model lights up immediately; symmetric mean field never does;
    the plateau follows the slaved-field prediction in the bad-cavity run."""
    # quantum: first recorded step already carries photons
    p = TwoSiteParams(photon_cutoff=12, **FIG4)
    h, jump = build_twosite_hamiltonian(p)
    psi0 = superfluid_with_vacuum(p)
    obs = twosite_observables(p)
    early = integrate_lindblad(h, [jump], psi0.to_density_matrix(),
                               IntegratorConfig(dt=0.005, t_final=0.1, record_stride=1),
                               observables=obs)
    n_first = early.observables["photon_number"][1]
    long = integrate_lindblad(h, [jump], psi0.to_density_matrix(),
                              IntegratorConfig(dt=0.005, t_final=30.0, record_stride=100),
                              observables=obs)
    t = long.times
    plateau = float(long.observables["photon_number"][t >= 15.0].mean())
    ok = report("quantum model: photons at the first recorded step, nonzero plateau",
                n_first > 0.0 and plateau > 0.1,
                f"n(dt) = {n_first:.3e}, plateau = {plateau:.3f}")

    # mean field from the same symmetric start stays identically dark
    s0 = MeanFieldState(superfluid_amplitudes(p.N_atoms).astype(complex), 0.0)
    mf = integrate_meanfield(p, s0, IntegratorConfig(dt=0.005, t_final=30.0,
                                                     record_stride=100))
    mf_peak = float(np.max(mf.observables["intensity"]))
    ok &= report("mean field from the symmetric start stays at zero intensity",
                 mf_peak == 0.0, f"max intensity = {mf_peak:g}")

    # bad-cavity consistency: photon number tracks Jt^2 <D^2>/(kappa^2 + Delta^2)
    pb = TwoSiteParams(J=0.01, Jtilde=0.1, U0=-2.0, Delta_c=-6.0, N_atoms=2,
                       photon_cutoff=4)
    hb, jb = build_twosite_hamiltonian(pb)
    obs_b = twosite_observables(pb)
    rec = integrate_lindblad(hb, [jb], superfluid_with_vacuum(pb).to_density_matrix(),
                             IntegratorConfig(dt=0.01, t_final=30.0, record_stride=50),
                             observables=obs_b)
    sel = rec.times >= 10.0
    n_sim = float(rec.observables["photon_number"][sel].mean())
    d2 = float(rec.observables["imbalance_sq"][sel].mean())
    n_pred = pb.Jtilde ** 2 * d2 / (pb.kappa ** 2 + pb.detuning_eff ** 2)
    rel = abs(n_sim - n_pred) / n_pred
    ok &= report("bad-cavity plateau matches the slaved-field prediction within 15%",
                 rel < 0.15, f"sim {n_sim:.4e} vs pred {n_pred:.4e}, rel {rel:.1%}")
    assert ok


def test_ordering_speed():
    """The superfluid start reaches half its asymptotic photon number before
    the one-atom-per-well start does."""
    p = TwoSiteParams(photon_cutoff=12, **FIG4)
    h, jump = build_twosite_hamiltonian(p)
    obs = twosite_observables(p)
    cfg = IntegratorConfig(dt=0.005, t_final=150.0, record_stride=20)

    def half_rise(psi0):
        rec = integrate_lindblad(h, [jump], psi0.to_density_matrix(), cfg,
                                 observables=obs)
        n = rec.observables["photon_number"]
        t = rec.times
        long_mean = float(n[t >= 0.8 * t[-1]].mean())
        idx = int(np.argmax(n >= 0.5 * long_mean))
        return float(t[idx]), long_mean

    t_sf, mean_sf = half_rise(superfluid_with_vacuum(p))
    t_mott, mean_mott = half_rise(mott_with_vacuum(p))
    assert report("superfluid start self-organizes faster than the balanced start",
                  t_sf < t_mott,
                  f"half-rise {t_sf:g} vs {t_mott:g} (plateaus {mean_sf:.2f}/{mean_mott:.2f})")


def test_mott_null_field_identity():
    """The slaved field annihilates the one-atom-per-well state exactly."""
    p = TwoSiteParams(photon_cutoff=4, **FIG4)
    ae = eliminated_field_operator(p)
    mott = np.array([0.0, 1.0, 0.0], dtype=complex)
    out = ae.matrix.dot(mott)
    assert report("balanced two-atom state is a null eigenvector of the slaved field",
                  bool(np.all(out == 0.0)), f"|a_eff mott| = {np.linalg.norm(out):g}")


def test_mcwf_against_oracles():
    """Damped-cavity ensemble vs the analytic decay (3 standard errors, with
    an integrator-precision floor); fig4 ensemble vs the master equation."""
    cutoff = 20
    space = HilbertSpace((("field", cutoff),))
    a = annihilation_matrix(cutoff)
    h0 = SparseOperator(space, 0 * a)
    jump = SparseOperator(space, math.sqrt(2.0) * a)
    n_op = {"n": SparseOperator(space, number_matrix(cutoff))}
    psi0 = coherent_state(1.5, cutoff)
    cfg = IntegratorConfig(dt=0.002, t_final=1.5, record_stride=75)
    ens = run_mcwf_ensemble(h0, [jump], psi0, cfg, master_seed=424242, n_traj=1000,
                            observables=n_op, store_density=False,
                            return_trajectories=True)
    per = np.stack([tr.observables["n"] for tr in ens.trajectories])
    mean = per.mean(axis=0)
    se = per.std(axis=0, ddof=1) / math.sqrt(per.shape[0])
    n0 = float(mean[0])
    exact = n0 * np.exp(-2.0 * ens.record.times)
    # a decaying coherent state is jump-invariant, so the sample spread is
    # integrator noise; the floor keeps 3 sigma meaningful at that scale
    margin = 3.0 * se + 1e-9
    worst = float(np.max(np.abs(mean - exact) - margin))
    ok = report("damped-cavity ensemble inside 3 standard errors of the decay law",
                worst <= 0.0, f"worst excess {worst:.2e}")

    p = TwoSiteParams(photon_cutoff=12, **FIG4)
    h, jmp = build_twosite_hamiltonian(p)
    psi = superfluid_with_vacuum(p)
    obs = {"photon_number": twosite_observables(p)["photon_number"]}
    cfg4 = IntegratorConfig(dt=0.01, t_final=20.0, record_stride=20)
    lin = integrate_lindblad(h, [jmp], psi.to_density_matrix(), cfg4, observables=obs)
    mc = run_mcwf_ensemble(h, [jmp], psi, cfg4, master_seed=2024, n_traj=500,
                           observables=obs, store_density=False)
    l = lin.observables["photon_number"]
    m = mc.record.observables["photon_number"]
    rel_rms = float(np.sqrt(np.mean((m - l) ** 2)) / np.sqrt(np.mean(l ** 2)))
    ok &= report("500-trajectory ensemble matches the master equation within 5% RMS",
                 rel_rms < 0.05, f"relative RMS {rel_rms:.2%}")
    assert ok


def _fig5_ensemble(n_momentum: int, photon_cutoff: int, n_traj: int,
                   with_negativity: bool):
    p = FullSpaceParams(V0=-6.7, U0=-1.7, Delta_c=-12.0, recoil_ratio=0.05,
                        n_momentum=n_momentum, photon_cutoff=photon_cutoff)
    h, jump = build_fullspace_hamiltonian(p)
    mot = np.zeros(p.n_momentum, dtype=complex)
    mot[p.n_max] = 1.0
    fld = np.zeros(p.photon_cutoff, dtype=complex)
    fld[0] = 1.0
    psi0 = StateVector(p.space, np.kron(mot, fld))
    obs = {"photon_number": tensor_product_op(p.space,
                                              {"field": number_matrix(p.photon_cutoff)})}
    funcs = (ObservableSet((Observable("negativity", "func", func=NegativityOf("motion")),))
             if with_negativity else None)
    cfg = IntegratorConfig(dt=0.005, t_final=40.0, record_stride=40)
    return run_mcwf_ensemble(h, [jump], psi0, cfg, master_seed=20240, n_traj=n_traj,
                             observables=obs, functionals=funcs, store_density=False)


def test_fig5_flat_start_entanglement_growth():
    """Flat wavefunction + vacuum: photon number jumps up and persists,
    ensemble negativity rises then its envelope decays, and doubling both
    cutoffs moves the long-time mean by less than 5%."""
    base = _fig5_ensemble(43, 6, 200, with_negativity=True)
    t = base.record.times
    n = base.record.observables["photon_number"]
    late = t >= 20.0
    n_late = float(n[late].mean())
    rises = n[0] == 0.0 and n[1] > 0.0
    sign_flips = int(np.sum(np.diff(np.sign(np.diff(n[late]))) != 0))
    ok = report("photon number rises from zero, oscillates, keeps a positive mean",
                rises and n_late > 0.01 and sign_flips >= 4,
                f"late mean {n_late:.4f}, {sign_flips} turning points")

    neg = base.record.observables["negativity"]
    peak_idx = int(np.argmax(neg))
    neg_late = float(neg[t >= 30.0].mean())
    ok &= report("ensemble negativity rises and its envelope decays",
                 neg[0] <= 1e-10 and neg[peak_idx] > 0.1
                 and peak_idx < len(neg) // 2 and neg_late < 0.5 * neg[peak_idx],
                 f"peak {neg[peak_idx]:.3f} at t={t[peak_idx]:g}, late mean {neg_late:.3f}")

    doubled = _fig5_ensemble(87, 12, 200, with_negativity=False)
    n2_late = float(doubled.record.observables["photon_number"][late].mean())
    rel = abs(n2_late - n_late) / n_late
    ok &= report("doubling momentum and photon cutoffs shifts the late mean < 5%",
                 rel < 0.05, f"{n_late:.5f} -> {n2_late:.5f}, rel {rel:.2%}")
    assert ok


def test_fig6_symmetrization():
    """Right-localized start: the field begins coherent (|<a>|^2 close to
    <a^dag a>); the eventual collapse of that ratio below 0.1 with the
    photon number intact is asserted as stated.

    Known red: without a spontaneous-emission jump channel the localized
    state is an attractor (cavity jumps leave its coherent field invariant
    and the well bottom is an extremum of sin(kx)); the collapse observed
    on smaller momentum bases recedes as the basis grows, and no collapse
    occurs out to 10^4/kappa on the converged basis.  See the decisions
    ledger for the full analysis.
    """
    s = load_scenario("fig6")
    p = dataclasses.replace(s.params, n_momentum=61, photon_cutoff=12)
    s = dataclasses.replace(s, params=p,
                            integrator=IntegratorConfig(dt=0.02, t_final=3000.0,
                                                        record_stride=500))
    psi0 = build_initial_state(s)
    h, jump = build_fullspace_hamiltonian(p)
    obs = {
        "photon_number": tensor_product_op(p.space, {"field": number_matrix(p.photon_cutoff)}),
        "mean_a": tensor_product_op(p.space, {"field": annihilation_matrix(p.photon_cutoff)}),
    }
    ens = run_mcwf_ensemble(h, [jump], psi0, s.integrator, master_seed=3, n_traj=1,
                            observables=obs, store_density=False)
    t = ens.record.times
    n = ens.record.observables["photon_number"].real
    ratio = np.abs(ens.record.observables["mean_a"]) ** 2 / np.maximum(n, 1e-12)

    early = t <= 50.0
    ok_initial = bool(np.all(ratio[early] > 0.8))
    report("initially |<a>|^2 / <a a> above 0.8", ok_initial,
           f"min early ratio {ratio[early].min():.3f}")

    early_plateau = float(n[early].mean())
    ok_photon = bool(abs(float(n[t >= 0.8 * t[-1]].mean()) - early_plateau)
                     <= 0.3 * early_plateau)
    report("photon number stays within 30% of its early plateau", ok_photon,
           f"early {early_plateau:.3f}, late {float(n[t >= 0.8 * t[-1]].mean()):.3f}")

    late_ratio = float(ratio[-1])
    ok_collapse = late_ratio < 0.1
    report("coherent fraction collapses below 0.1 by the end of the run",
           ok_collapse, f"final ratio {late_ratio:.3f} "
           "(stable: no spontaneous-emission channel in this model)")
    assert ok_initial and ok_photon
    assert ok_collapse, (
        "the localized state does not symmetrize without a spontaneous-emission "
        f"channel: final coherent fraction {late_ratio:.3f} (see decisions ledger)")


def test_seesaw_growth_window():
    """Unstable seesaw from the product ground state: negativity starts at
    zero, negativity and Var(x) grow monotonically, and doubling both Fock
    cutoffs moves the recorded curves by less than 1%."""
    def run(cx, cp):
        p = SeesawParams(omega_x=1.0, omega_phi=3.0, J=16.0, cutoff_x=cx, cutoff_phi=cp)
        h = build_seesaw_hamiltonian(p)
        amp = np.zeros(p.space.dim, dtype=complex)
        amp[0] = 1.0
        obs = ObservableSet((
            Observable("negativity", "func", func=NegativityOf("x")),
            Observable("var_x", "func", func=SpatialMomentOf("x", "oscillator", 1)),
        ))
        cfg = IntegratorConfig(dt=1e-4, t_final=0.4, record_stride=40)
        return propagate_schrodinger(h, StateVector(p.space, amp), cfg, observables=obs)

    base = run(56, 48)
    neg, var = base.observables["negativity"], base.observables["var_x"]
    ok = report("negativity starts at zero and grows monotonically with Var(x)",
                neg[0] == 0.0 and bool(np.all(np.diff(neg) > 0))
                and bool(np.all(np.diff(var) > 0)),
                f"final negativity {neg[-1]:.3f}, final Var(x) {var[-1]:.3f}")

    big = run(112, 96)
    rel_neg = float(np.max(np.abs(big.observables["negativity"] - neg))
                    / np.max(big.observables["negativity"]))
    rel_var = float(np.max(np.abs(big.observables["var_x"] - var))
                    / np.max(big.observables["var_x"]))
    ok &= report("doubling both Fock cutoffs changes the curves < 1%",
                 rel_neg < 0.01 and rel_var < 0.01,
                 f"negativity {rel_neg:.2%}, Var(x) {rel_var:.2%}")
    ok &= report("seesaw norm drift below 1e-9", base.meta["norm_drift"] < 1e-9,
                 f"{base.meta['norm_drift']:.2e}")
    assert ok


def test_integrator_hygiene(tmp_path):
    """Norm conservation, closed-system energy conservation, and
    byte-identical reruns for any worker count."""
    # closed-system run: norm and energy
    p = TwoSiteParams(photon_cutoff=12, **FIG4)
    h, _ = build_twosite_hamiltonian(p)
    atomic = superfluid_amplitudes(2).astype(complex)
    fld = coherent_state(1.0, 12).amplitudes
    psi0 = StateVector(p.space, np.kron(atomic, fld))
    rec = propagate_schrodinger(h, psi0,
                                IntegratorConfig(dt=0.001, t_final=10.0, record_stride=200),
                                observables={"H": h})
    e = rec.observables["H"]
    e_drift = float(np.max(np.abs(e - e[0])) / abs(e[0]))
    ok = report("closed-system norm drift below 1e-9",
                rec.meta["norm_drift"] < 1e-9, f"{rec.meta['norm_drift']:.2e}")
    ok &= report("closed-system energy drift below 1e-8 relative",
                 e_drift < 1e-8, f"{e_drift:.2e}")

    # deterministic output bytes for any worker count
    s = load_scenario("damped-cavity")
    s = dataclasses.replace(s, n_traj=8)
    out = []
    for workers in (1, 2, 3):
        sw = dataclasses.replace(s, n_workers=workers)
        result = run_scenario(sw, str(tmp_path / f"w{workers}"))
        out.append(open(result["csv"], "rb").read())
    rerun = run_scenario(dataclasses.replace(s, n_workers=2), str(tmp_path / "again"))
    out.append(open(rerun["csv"], "rb").read())
    ok &= report("byte-identical timeseries for worker counts 1/2/3 and reruns",
                 all(b == out[0] for b in out[1:]), f"{len(out[0])} bytes")
    assert ok
