"""Quantum trajectories: the stochastic wave-function engine against its
closed-form and master-equation oracles, then a small ensemble of the
flat-start atom showing photons and atom-field entanglement appearing
together.

Writes trajectories.png.
"""

import math

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from qseesaw import (
    FullSpaceParams,
    HilbertSpace,
    IntegratorConfig,
    SparseOperator,
    StateVector,
    build_fullspace_hamiltonian,
    coherent_state,
    fock_state,
    run_mcwf_ensemble,
    run_mcwf_trajectory,
)
from qseesaw.hilbert import annihilation_matrix, number_matrix, tensor_product_op
from qseesaw.observables import Observable, ObservableSet
from qseesaw.scenarios import NegativityOf

# --- damped cavity: single trajectories vs the decay law --------------------

cutoff = 16
space = HilbertSpace((("field", cutoff),))
a = annihilation_matrix(cutoff)
h0 = SparseOperator(space, 0 * a)
jump = SparseOperator(space, math.sqrt(2.0) * a)
n_op = {"n": SparseOperator(space, number_matrix(cutoff))}
cfg = IntegratorConfig(dt=0.005, t_final=1.5, record_stride=20)

rec_coh = run_mcwf_trajectory(h0, [jump], coherent_state(1.2, cutoff), cfg, seed=1,
                              observables=n_op)
print("coherent start: every trajectory follows |a|^2 e^{-2 kappa t} exactly;")
print("  max deviation:",
      np.max(np.abs(rec_coh.observables["n"] - 1.2 ** 2 * np.exp(-2 * rec_coh.times))))

rec_fock = run_mcwf_trajectory(h0, [jump], fock_state(space, 3), cfg, seed=1,
                               observables=n_op)
print(f"Fock |3> start: one trajectory makes {len(rec_fock.jump_times)} jumps"
      " (a staircase), only the ensemble recovers the smooth decay")

ens = run_mcwf_ensemble(h0, [jump], fock_state(space, 3), cfg, master_seed=9,
                        n_traj=200, observables=n_op, store_density=False)

# --- flat atom + vacuum: entanglement-driven ordering ------------------------

p = FullSpaceParams(V0=-6.7, U0=-1.7, Delta_c=-12.0, recoil_ratio=0.05,
                    n_momentum=43, photon_cutoff=6)
h, jmp = build_fullspace_hamiltonian(p)
mot = np.zeros(p.n_momentum, dtype=complex)
mot[p.n_max] = 1.0
fld = np.zeros(p.photon_cutoff, dtype=complex)
fld[0] = 1.0
psi0 = StateVector(p.space, np.kron(mot, fld))
obs = {"photon": tensor_product_op(p.space, {"field": number_matrix(p.photon_cutoff)})}
funcs = ObservableSet((Observable("negativity", "func", func=NegativityOf("motion")),))
cfg5 = IntegratorConfig(dt=0.005, t_final=30.0, record_stride=80)
flat = run_mcwf_ensemble(h, [jmp], psi0, cfg5, master_seed=17, n_traj=60,
                         observables=obs, functionals=funcs, store_density=False)
print("\nflat start (60 trajectories):")
print("  photon number at the end:", flat.record.observables["photon"][-1])
print("  peak ensemble negativity:", flat.record.observables["negativity"].max())

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
axes[0].plot(rec_fock.times, rec_fock.observables["n"], drawstyle="steps-post",
             label="one trajectory")
axes[0].plot(ens.record.times, ens.record.observables["n"], label="200-trajectory mean")
axes[0].plot(ens.record.times, 3 * np.exp(-2 * ens.record.times), "k--",
             label=r"$3e^{-2\kappa t}$")
axes[0].set_xlabel(r"$\kappa t$")
axes[0].set_ylabel(r"$\langle n\rangle$")
axes[0].legend()
axes[0].set_title("damped cavity, Fock start")

ax = axes[1]
ax.plot(flat.record.times, flat.record.observables["photon"], label="photon number")
ax.plot(flat.record.times, flat.record.observables["negativity"], label="negativity")
ax.set_xlabel(r"$\kappa t$")
ax.legend()
ax.set_title("flat atom + vacuum field")
fig.tight_layout()
fig.savefig("trajectories.png", dpi=150)
print("wrote trajectories.png")
