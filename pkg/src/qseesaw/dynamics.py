"""Time evolution engines.

Four propagation routes share one fixed-step 4th-order (RK4) core:

* :func:`propagate_schrodinger` -- closed-system unitary evolution;
* :func:`integrate_meanfield`   -- atomic Schrodinger equation co-integrated
  with the classical field amplitude alpha(t) (factorized atom-field ansatz);
* :func:`integrate_lindblad`    -- the master equation
  drho/dt = -i[H,rho] + sum_j (c rho c^dag - {c^dag c, rho}/2),
  the deterministic oracle the trajectory engine is checked against;
* :func:`run_mcwf_trajectory` / :func:`run_mcwf_ensemble` -- stochastic
  wave-function unraveling with waiting-time jump sampling.

Jump-operator convention: the builders hand over c = sqrt(2 kappa) a, so the
photon number of an empty-Hamiltonian cavity decays at rate 2 kappa and the
field amplitude at rate kappa.  The effective non-Hermitian generator is
H_eff = H - (i/2) sum_j c_j^dag c_j, which is what makes ensemble averages
of trajectories converge to the Lindblad solution above.

Determinism: a trajectory is a pure function of (seed, config, operators).
Ensembles derive per-trajectory integer seeds from (master_seed, k) and
reduce in fixed trajectory order, so results are bit-identical for any
worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .hilbert import DensityMatrix, HilbertSpace, SparseOperator, StateVector, marginal_populations
from .models import TwoSiteParams, twosite_atomic_ops
from .observables import Observable, ObservableSet

__all__ = [
    "IntegratorConfig",
    "MeanFieldState",
    "TrajectoryRecord",
    "EnsembleResult",
    "IntegrationError",
    "propagate_schrodinger",
    "integrate_meanfield",
    "integrate_lindblad",
    "run_mcwf_trajectory",
    "run_mcwf_ensemble",
    "derive_trajectory_seed",
]

NORM_DRIFT_LIMIT = 1e-6
TRACE_DRIFT_LIMIT = 1e-8


class IntegrationError(RuntimeError):
    """Numerical failure inside a propagator (step too large, drift, ...)."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration window: dt and t_final in units of 1/kappa
    (or 1/omega_x for the seesaw); observables recorded every
    ``record_stride`` steps."""

    dt: float
    t_final: float
    method: str = "rk4"
    record_stride: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_final < self.dt:
            raise ValueError("t_final must be at least one step")
        if self.method != "rk4":
            raise ValueError(f"unknown method {self.method!r} (fixed-step rk4 only)")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_final / self.dt)))

    def record_times(self) -> np.ndarray:
        idx = np.arange(0, self.n_steps + 1, self.record_stride)
        return idx * self.dt


@dataclass(frozen=True)
class MeanFieldState:
    """Factorized state of the two-site model: atomic amplitudes over the
    fixed-N basis plus the c-number field amplitude."""

    atomic_amplitudes: np.ndarray
    alpha: complex = 0.0

    def __post_init__(self):
        amp = np.asarray(self.atomic_amplitudes, dtype=np.complex128).copy()
        n = np.linalg.norm(amp)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"atomic amplitudes must be normalized, got norm {n!r}")
        amp.setflags(write=False)
        object.__setattr__(self, "atomic_amplitudes", amp)
        object.__setattr__(self, "alpha", complex(self.alpha))


@dataclass
class TrajectoryRecord:
    """Time series of one run: named observable arrays on the record grid,
    the jump times (MCWF only), the RNG seed and the final state."""

    seed: int | None
    times: np.ndarray
    observables: dict[str, np.ndarray]
    jump_times: list[float] = field(default_factory=list)
    final_state: StateVector | None = None
    meta: dict = field(default_factory=dict)


@dataclass
class EnsembleResult:
    """Ensemble average: aggregated record (linear observables averaged over
    trajectories; nonlinear functionals evaluated on the averaged density
    matrix) plus the averaged density-matrix series itself."""

    record: TrajectoryRecord
    density_times: np.ndarray
    densities: list[DensityMatrix] | None
    trajectories: list[TrajectoryRecord] | None = None


# ---------------------------------------------------------------------------
# shared helpers


def _as_observable_set(observables) -> ObservableSet:
    if observables is None:
        return ObservableSet(())
    if isinstance(observables, ObservableSet):
        return observables
    entries = []
    for name, op in observables.items():
        entries.append(Observable(name=name, kind="op", op=op,
                                  complex_valued=not op.is_hermitian(1e-12)))
    return ObservableSet(tuple(entries))


def _alloc_series(obs: ObservableSet, n: int) -> dict[str, np.ndarray]:
    out = {}
    for o in obs.entries:
        out[o.name] = np.zeros(n, dtype=np.complex128 if o.complex_valued else np.float64)
    return out


def _store(series: dict, obs: ObservableSet, i: int, state) -> None:
    vals = obs.evaluate(state)
    for o in obs.entries:
        v = vals[o.name]
        series[o.name][i] = v if o.complex_valued else complex(v).real


def _rk4_linear(m: sp.csr_matrix, y: np.ndarray, h: float) -> np.ndarray:
    k1 = m.dot(y)
    k2 = m.dot(y + (0.5 * h) * k1)
    k3 = m.dot(y + (0.5 * h) * k2)
    k4 = m.dot(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _truncation_update(best: dict, state, monitor: dict[str, str]) -> None:
    for label, kind in monitor.items():
        p = marginal_populations(state, label)
        val = float(max(p[0], p[-1])) if kind == "edges" else float(p[-1])
        if val > best.get(label, 0.0):
            best[label] = val


# ---------------------------------------------------------------------------
# closed-system propagation


def propagate_schrodinger(H: SparseOperator, psi0: StateVector, cfg: IntegratorConfig,
                          observables=None,
                          truncation_monitor: dict[str, str] | None = None) -> TrajectoryRecord:
    """Unitary evolution under a fixed Hamiltonian.

    The state is renormalized every step; the accumulated pre-normalization
    deviation is reported as ``meta['norm_drift']`` and must stay below
    1e-6 or an IntegrationError is raised (step too large).
    """
    if H.space != psi0.space:
        raise ValueError("Hamiltonian and state live on different spaces")
    obs = _as_observable_set(observables)
    monitor = truncation_monitor or {}
    m = (-1j) * H.matrix.astype(np.complex128)
    psi = psi0.normalize().amplitudes.copy()
    n_steps = cfg.n_steps
    times = cfg.record_times()
    series = _alloc_series(obs, len(times))
    best_trunc: dict[str, float] = {}

    def record(i: int, amp: np.ndarray):
        state = StateVector(psi0.space, amp, normalized=True)
        _store(series, obs, i, state)
        _truncation_update(best_trunc, state, monitor)

    record(0, psi)
    drift = 0.0
    rec_i = 1
    for step in range(1, n_steps + 1):
        psi = _rk4_linear(m, psi, cfg.dt)
        nrm = float(np.linalg.norm(psi))
        drift += abs(nrm - 1.0)
        if drift > NORM_DRIFT_LIMIT:
            raise IntegrationError(
                f"norm drift {drift:.3e} beyond {NORM_DRIFT_LIMIT:.0e} at t={step * cfg.dt:g}; "
                "reduce dt")
        psi /= nrm
        if step % cfg.record_stride == 0:
            record(rec_i, psi)
            rec_i += 1
    final = StateVector(psi0.space, psi, normalized=True)
    return TrajectoryRecord(seed=None, times=times, observables=series,
                            final_state=final,
                            meta={"norm_drift": drift, "truncation": dict(best_trunc)})


# ---------------------------------------------------------------------------
# mean-field (factorized) model


def _imbalance_paired(psi: np.ndarray, N: int) -> float:
    """<n_l - n_r> with exact pairwise cancellation for symmetric amplitudes."""
    p = np.abs(psi) ** 2
    acc = 0.0
    for i in range((N + 1) // 2):
        acc += (p[i] - p[N - i]) * (N - 2 * i)
    return acc / float(p.sum())


def integrate_meanfield(p: TwoSiteParams, s0: MeanFieldState, cfg: IntegratorConfig,
                        observed: tuple[str, ...] = ("intensity", "re_alpha", "im_alpha",
                                                     "imbalance")) -> TrajectoryRecord:
    """Co-integrate the atomic state under H(alpha(t)) with the damped
    c-number field equation
    d(alpha)/dt = [i(Delta_c - U0 N) - kappa] alpha - i Jtilde <n_l - n_r>.

    A perfectly symmetric atomic distribution with alpha(0) = 0 stays at
    alpha(t) = 0 identically: the imbalance is evaluated with pairwise
    cancellation so the symmetric fixed point is preserved exactly.
    """
    N = p.N_atoms
    if s0.atomic_amplitudes.shape != (N + 1,):
        raise ValueError(f"atomic amplitudes must have length N+1={N + 1}")
    ops = twosite_atomic_ops(N)
    # tunneling as two elementwise shifts rather than a BLAS matvec: for a
    # pairwise-symmetric state this evaluates index i and N-i with the same
    # commutative two-term sums, so the symmetric fixed point (alpha = 0)
    # is preserved bitwise, not just approximately
    hop = np.array([ops["tunnel"][i, i + 1] for i in range(N)])
    dz_diag = np.real(np.diag(ops["dz"])).copy()
    lin = 1j * p.detuning_eff - p.kappa

    def tunnel_apply(psi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(psi)
        out[:-1] += hop * psi[1:]
        out[1:] += hop * psi[:-1]
        return out

    def rhs(psi: np.ndarray, alpha: complex):
        coupling = 2.0 * p.Jtilde * alpha.real
        dpsi = -1j * (p.J * tunnel_apply(psi) + coupling * (dz_diag * psi))
        dalpha = lin * alpha - 1j * p.Jtilde * _imbalance_paired(psi, N)
        return dpsi, dalpha

    psi = s0.atomic_amplitudes.copy()
    alpha = complex(s0.alpha)
    times = cfg.record_times()
    known = {"intensity", "re_alpha", "im_alpha", "imbalance"}
    bad = set(observed) - known
    if bad:
        raise ValueError(f"unknown mean-field observables {sorted(bad)}; have {sorted(known)}")
    series = {name: np.zeros(len(times)) for name in observed}

    def record(i: int):
        vals = {"intensity": abs(alpha) ** 2, "re_alpha": alpha.real,
                "im_alpha": alpha.imag, "imbalance": _imbalance_paired(psi, N)}
        for name in observed:
            series[name][i] = vals[name]

    record(0)
    drift = 0.0
    rec_i = 1
    h = cfg.dt
    for step in range(1, cfg.n_steps + 1):
        k1p, k1a = rhs(psi, alpha)
        k2p, k2a = rhs(psi + 0.5 * h * k1p, alpha + 0.5 * h * k1a)
        k3p, k3a = rhs(psi + 0.5 * h * k2p, alpha + 0.5 * h * k2a)
        k4p, k4a = rhs(psi + h * k3p, alpha + h * k3a)
        psi = psi + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        alpha = alpha + (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        nrm = float(np.linalg.norm(psi))
        # per-step norm loss is the step-size instability signal; long runs
        # accumulate a benign drift that only the meta report tracks
        if abs(nrm - 1.0) > 1e-8:
            raise IntegrationError(
                f"atomic norm changed by {abs(nrm - 1.0):.3e} in one step; reduce dt")
        drift += abs(nrm - 1.0)
        psi /= nrm
        if step % cfg.record_stride == 0:
            record(rec_i)
            rec_i += 1
    space = HilbertSpace((("atoms", N + 1),))
    final = StateVector(space, psi, normalized=True)
    rec = TrajectoryRecord(seed=None, times=times, observables=series,
                           final_state=final, meta={"norm_drift": drift,
                                                    "final_alpha": alpha})
    return rec


# ---------------------------------------------------------------------------
# Lindblad master equation (dense, oracle for the trajectory engine)


def integrate_lindblad(H: SparseOperator, jumps: list[SparseOperator],
                       rho0: DensityMatrix, cfg: IntegratorConfig,
                       observables=None,
                       truncation_monitor: dict[str, str] | None = None) -> TrajectoryRecord:
    """Master-equation evolution with jump operators as given (for
    c = sqrt(2 kappa) a the photon number decays at 2 kappa).  Trace is
    monitored and must stay within 1e-8 of one."""
    if H.space != rho0.space:
        raise ValueError("Hamiltonian and state live on different spaces")
    for c in jumps:
        if c.space != H.space:
            raise ValueError("jump operator space mismatch")
    obs = _as_observable_set(observables)
    monitor = truncation_monitor or {}
    hd = H.toarray()
    cs = [c.toarray() for c in jumps]
    ccs = [c.conj().T @ c for c in cs]

    def rhs(rho: np.ndarray) -> np.ndarray:
        out = -1j * (hd @ rho - rho @ hd)
        for c, cc in zip(cs, ccs):
            out += c @ rho @ c.conj().T - 0.5 * (cc @ rho + rho @ cc)
        return out

    rho = rho0.entries.astype(np.complex128).copy()
    times = cfg.record_times()
    series = _alloc_series(obs, len(times))
    best_trunc: dict[str, float] = {}

    def record(i: int, mat: np.ndarray):
        state = DensityMatrix(rho0.space, mat)
        _store(series, obs, i, state)
        _truncation_update(best_trunc, state, monitor)

    record(0, rho)
    h = cfg.dt
    rec_i = 1
    trace_drift = 0.0
    for step in range(1, cfg.n_steps + 1):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        trace_drift = max(trace_drift, abs(float(np.trace(rho).real) - 1.0))
        if trace_drift > TRACE_DRIFT_LIMIT:
            raise IntegrationError(f"trace drift {trace_drift:.3e}; reduce dt")
        if step % cfg.record_stride == 0:
            record(rec_i, rho)
            rec_i += 1
    herm_dev = float(np.max(np.abs(rho - rho.conj().T)))
    return TrajectoryRecord(seed=None, times=times, observables=series,
                            final_state=None,
                            meta={"trace_drift": trace_drift,
                                  "hermiticity_deviation": herm_dev,
                                  "final_rho": DensityMatrix(rho0.space, rho),
                                  "truncation": dict(best_trunc)})


# ---------------------------------------------------------------------------
# MCWF trajectories


def derive_trajectory_seed(master_seed: int, k: int) -> int:
    """Deterministic per-trajectory integer seed from (master_seed, k)."""
    ss = np.random.SeedSequence([int(master_seed), int(k)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _bisect_jump_time(m_eff: sp.csr_matrix, psi: np.ndarray, span: float,
                      threshold: float, max_iter: int = 50) -> tuple[float, np.ndarray]:
    """Find tau in (0, span] where the squared norm of the decaying state
    crosses ``threshold``; returns (tau, state at tau)."""
    lo, hi = 0.0, span
    cand = _rk4_linear(m_eff, psi, span)
    best = (span, cand)
    for _ in range(max_iter):
        n2 = float(np.vdot(best[1], best[1]).real)
        if abs(n2 - threshold) <= 1e-10 * threshold + 1e-13:
            return best
        mid = 0.5 * (lo + hi)
        pm = _rk4_linear(m_eff, psi, mid)
        if float(np.vdot(pm, pm).real) > threshold:
            lo = mid
        else:
            hi = mid
            best = (mid, pm)
    n2 = float(np.vdot(best[1], best[1]).real)
    if abs(n2 - threshold) <= 1e-8 * threshold + 1e-10:
        return best
    raise IntegrationError(
        f"jump-time bisection did not converge in {max_iter} iterations "
        f"(|norm^2 - r| = {abs(n2 - threshold):.3e}); reduce dt")


def _run_trajectory_arrays(h_matrix: sp.csr_matrix, jump_matrices: list[sp.csr_matrix],
                           space: HilbertSpace, psi0: np.ndarray, cfg: IntegratorConfig,
                           seed: int, obs: ObservableSet,
                           monitor: dict[str, str],
                           collect_indices: np.ndarray | None):
    """Inner trajectory loop on raw arrays; returns (series, jump_times,
    final_psi, collected_states, truncation)."""
    rng = np.random.default_rng(int(seed))
    have_jumps = len(jump_matrices) > 0
    m_eff = (-1j) * h_matrix.astype(np.complex128)
    for c in jump_matrices:
        m_eff = m_eff - 0.5 * (c.conj().T @ c)
    m_eff = m_eff.tocsr()

    psi = psi0 / np.linalg.norm(psi0)
    r = rng.random() if have_jumps else 0.0
    n_steps = cfg.n_steps
    times = cfg.record_times()
    series = _alloc_series(obs, len(times))
    jump_times: list[float] = []
    collected = ([] if collect_indices is not None else None)
    collect_set = set(int(i) for i in collect_indices) if collect_indices is not None else set()
    best_trunc: dict[str, float] = {}

    def record(i: int, amp: np.ndarray):
        nrm = np.linalg.norm(amp)
        normed = amp / nrm
        state = StateVector(space, normed, normalized=True)
        _store(series, obs, i, state)
        _truncation_update(best_trunc, state, monitor)
        if collected is not None and i in collect_set:
            collected.append(normed)

    record(0, psi)
    rec_i = 1
    for step in range(1, n_steps + 1):
        t0 = (step - 1) * cfg.dt
        remaining = cfg.dt
        while True:
            cand = _rk4_linear(m_eff, psi, remaining)
            if not have_jumps:
                psi = cand
                break
            n2 = float(np.vdot(cand, cand).real)
            if n2 > r:
                psi = cand
                break
            tau, psi_at = _bisect_jump_time(m_eff, psi, remaining, r)
            # pick the jump channel with probability ~ <c^dag c>
            weights = np.array([float(np.vdot(c.dot(psi_at), c.dot(psi_at)).real)
                                for c in jump_matrices])
            total = float(weights.sum())
            if total <= 0.0:
                psi = psi_at
                remaining -= tau
                if remaining <= 1e-15 * cfg.dt:
                    break
                continue
            u = rng.random() * total
            j = int(np.searchsorted(np.cumsum(weights), u, side="right"))
            j = min(j, len(jump_matrices) - 1)
            jumped = jump_matrices[j].dot(psi_at)
            psi = jumped / np.linalg.norm(jumped)
            jump_times.append(t0 + (cfg.dt - remaining) + tau)
            r = rng.random()
            remaining -= tau
            if remaining <= 1e-15 * cfg.dt:
                break
        if step % cfg.record_stride == 0:
            record(rec_i, psi)
            rec_i += 1
    final = psi / np.linalg.norm(psi)
    return series, jump_times, final, collected, best_trunc


def run_mcwf_trajectory(H: SparseOperator, jumps: list[SparseOperator],
                        psi0: StateVector, cfg: IntegratorConfig, seed: int,
                        observables=None,
                        truncation_monitor: dict[str, str] | None = None) -> TrajectoryRecord:
    """One stochastic wave-function trajectory.

    Between jumps the state evolves (unnormalized) under
    H_eff = H - (i/2) sum_j c_j^dag c_j.  Jumps fire when the squared norm
    falls to a uniform threshold r (waiting-time sampling); the crossing
    is refined by bisection, the channel is drawn proportionally to
    <c_j^dag c_j>, and the threshold is redrawn.  Fully deterministic for
    fixed (seed, cfg).
    """
    if H.space != psi0.space:
        raise ValueError("Hamiltonian and state live on different spaces")
    for c in jumps:
        if c.space != H.space:
            raise ValueError("jump operator space mismatch")
    obs = _as_observable_set(observables)
    series, jump_times, final, _, trunc = _run_trajectory_arrays(
        H.matrix, [c.matrix for c in jumps], psi0.space,
        psi0.normalize().amplitudes, cfg, seed, obs, truncation_monitor or {}, None)
    return TrajectoryRecord(seed=int(seed), times=cfg.record_times(), observables=series,
                            jump_times=jump_times,
                            final_state=StateVector(psi0.space, final, normalized=True),
                            meta={"truncation": trunc})


def _ensemble_chunk(payload):
    """Worker task: run a contiguous block of trajectories, return their
    per-trajectory linear-observable series and recorded states."""
    (h_matrix, jump_matrices, space, psi0, cfg, seeds, obs, monitor,
     collect_indices) = payload
    out = []
    for seed in seeds:
        series, jump_times, final, collected, trunc = _run_trajectory_arrays(
            h_matrix, jump_matrices, space, psi0, cfg, seed, obs, monitor,
            collect_indices)
        states = np.array(collected) if collected is not None else None
        out.append((series, len(jump_times), states, trunc))
    return out


def run_mcwf_ensemble(H: SparseOperator, jumps: list[SparseOperator],
                      psi0: StateVector, cfg: IntegratorConfig,
                      master_seed: int, n_traj: int,
                      observables=None,
                      functionals=None,
                      n_workers: int = 1,
                      density_stride: int = 1,
                      store_density: bool = True,
                      truncation_monitor: dict[str, str] | None = None,
                      return_trajectories: bool = False) -> EnsembleResult:
    """Average ``n_traj`` trajectories with seeds derived from (master_seed, k).

    Linear observables are averaged across trajectories (equal to their
    expectation in the averaged density matrix); ``functionals`` (an
    ObservableSet of nonlinear quantities such as negativity) are evaluated
    on the averaged density matrix at every ``density_stride``-th record
    point.  The reduction runs in fixed trajectory order, so the result is
    bit-identical for any ``n_workers``.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if density_stride < 1:
        raise ValueError("density_stride must be >= 1")
    obs = _as_observable_set(observables)
    for o in obs.entries:
        if o.kind != "op":
            raise ValueError(
                f"per-trajectory observable {o.name!r} must be linear; pass nonlinear "
                "quantities via functionals=")
    funcs = functionals if functionals is not None else ObservableSet(())
    monitor = truncation_monitor or {}
    times = cfg.record_times()
    dens_idx = np.arange(0, len(times), density_stride)
    need_states = store_density or len(funcs.entries) > 0
    collect_indices = dens_idx if need_states else None

    seeds = [derive_trajectory_seed(master_seed, k) for k in range(n_traj)]
    jump_matrices = [c.matrix for c in jumps]
    psi0_amp = psi0.normalize().amplitudes

    if n_workers <= 1 or n_traj == 1:
        chunks = [_ensemble_chunk((H.matrix, jump_matrices, psi0.space, psi0_amp,
                                   cfg, seeds, obs, monitor, collect_indices))]
    else:
        bounds = np.array_split(np.arange(n_traj), min(n_workers, n_traj))
        payloads = [(H.matrix, jump_matrices, psi0.space, psi0_amp, cfg,
                     [seeds[k] for k in block], obs, monitor, collect_indices)
                    for block in bounds if len(block)]
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            chunks = list(pool.map(_ensemble_chunk, payloads))

    # fixed-order reduction over trajectories
    dim = psi0.space.dim
    sum_series = _alloc_series(obs, len(times))
    states_all = (np.empty((n_traj, len(dens_idx), dim), dtype=np.complex128)
                  if need_states else None)
    total_jumps = 0
    best_trunc: dict[str, float] = {}
    per_traj: list[TrajectoryRecord] = []
    k = 0
    for chunk in chunks:
        for series, n_jumps, states, trunc in chunk:
            for name in sum_series:
                sum_series[name] += series[name]
            if need_states:
                states_all[k] = states
            total_jumps += n_jumps
            for label, val in trunc.items():
                if val > best_trunc.get(label, 0.0):
                    best_trunc[label] = val
            if return_trajectories:
                per_traj.append(TrajectoryRecord(seed=seeds[k], times=times,
                                                 observables=series,
                                                 meta={"truncation": trunc}))
            k += 1

    mean_series = {name: arr / n_traj for name, arr in sum_series.items()}
    densities = None
    if need_states:
        # build the averaged density matrix one time slice at a time (k-ordered
        # sum, so the result does not depend on worker chunking)
        densities = [] if store_density else None
        func_series = _alloc_series(funcs, len(dens_idx))
        for ti in range(len(dens_idx)):
            rho = np.zeros((dim, dim), dtype=np.complex128)
            for kk in range(n_traj):
                rho += np.outer(states_all[kk, ti], states_all[kk, ti].conj())
            rho /= n_traj
            dm = DensityMatrix(psi0.space, rho)
            _store(func_series, funcs, ti, dm)
            if store_density:
                densities.append(dm)
        if density_stride == 1:
            mean_series.update(func_series)
        else:
            for name, arr in func_series.items():
                mean_series[name + "@density_grid"] = arr

    record = TrajectoryRecord(seed=int(master_seed), times=times,
                              observables=mean_series, jump_times=[],
                              final_state=None,
                              meta={"n_traj": n_traj,
                                    "mean_jump_count": total_jumps / n_traj,
                                    "truncation": best_trunc})
    return EnsembleResult(record=record, density_times=times[dens_idx],
                          densities=densities,
                          trajectories=per_traj if return_trajectories else None)
