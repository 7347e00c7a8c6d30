"""Walk through the state/operator toolkit: tensor spaces, coherent states,
reduced states and the negativity entanglement measure, each checked against
a closed form.
"""

import math

import numpy as np

from qseesaw import (
    HilbertSpace,
    StateVector,
    coherent_state,
    hermitian_spectrum,
    negativity,
    partial_trace,
    partial_transpose,
    schmidt_coefficients,
)

# --- coherent states on a truncated Fock ladder -----------------------------

psi = coherent_state(1.0, cutoff=25)
print("coherent |alpha=1>:")
print("  ground amplitude", abs(psi.amplitudes[0]), "vs exp(-1/2) =", math.exp(-0.5))

# --- a Bell pair and its partial transpose ----------------------------------

pair = HilbertSpace((("A", 2), ("B", 2)))
bell = StateVector(pair, np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2))
print("\nBell pair:")
print("  Schmidt weights       ", schmidt_coefficients(bell, "A"))
print("  negativity            ", negativity(bell, "A"), "(expect 0.5)")
evals = hermitian_spectrum(partial_transpose(bell.to_density_matrix(), "A"))
print("  partial-transpose eigs", np.round(evals, 6))

# --- two field branches with opposite phase ---------------------------------
# (|0>|alpha> + |1>|-alpha>)/sqrt(2): the workhorse entangled state of the
# self-organization dynamics.  Closed form: N = sqrt(1 - e^{-4|a|^2})/2.

for alpha in (0.5, 1.0, 2.0):
    cutoff = 40
    space = HilbertSpace((("atom", 2), ("field", cutoff)))
    amp = np.concatenate([
        coherent_state(alpha, cutoff).amplitudes,
        coherent_state(-alpha, cutoff).amplitudes,
    ]) / math.sqrt(2)
    cat = StateVector(space, amp)
    expected = math.sqrt(1 - math.exp(-4 * alpha ** 2)) / 2
    print(f"\nbranch state alpha={alpha}:")
    print(f"  negativity {negativity(cat, 'field'):.8f} vs closed form {expected:.8f}")
    reduced = partial_trace(cat.to_density_matrix(), ["field"])
    top = np.sort(hermitian_spectrum(reduced.entries))[-2:]
    print("  reduced-field eigenvalues", np.round(top, 6),
          "vs (1 -+ e^{-2|a|^2})/2")
