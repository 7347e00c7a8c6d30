"""Observables: entanglement negativity, field moments, two-site atom
statistics and motional statistics.

Conventions fixed here:

* negativity N = (||rho^T_A||_1 - 1)/2, so a Bell pair gives 1/2;
* oscillator quadrature x = (a + a^dag)/sqrt(2) (ground-state variance 1/2);
* on the periodic coordinate (plane-wave ladder) the mean position is the
  circular mean arg<e^{ikx}> reported in [-pi, pi).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .hilbert import (
    DensityMatrix,
    SparseOperator,
    StateVector,
    annihilation_matrix,
    expectation_value,
    hermitian_spectrum,
    number_matrix,
    partial_trace,
    partial_transpose,
    schmidt_coefficients,
    tensor_product_op,
)
from .models import twosite_atomic_ops

__all__ = [
    "negativity",
    "field_statistics",
    "site_statistics",
    "spatial_statistics",
    "Observable",
    "ObservableSet",
]

State = Union[StateVector, DensityMatrix]


def negativity(state: State, label: str) -> float:
    """Entanglement negativity of the bipartition (labeled factor | rest).

    Pure states go through the Schmidt decomposition,
    N = ((sum_i sqrt(lambda_i))^2 - 1)/2; mixed states through the sum of
    the negative eigenvalues of the partial transpose.  Both paths agree
    on pure states.
    """
    if isinstance(state, StateVector):
        lam = schmidt_coefficients(state, label)
        s = float(np.sum(np.sqrt(np.clip(lam, 0.0, None))))
        return max(0.0, (s * s - 1.0) / 2.0)
    if isinstance(state, DensityMatrix):
        pt = partial_transpose(state, label)
        evals = hermitian_spectrum(pt)
        return float(max(0.0, -evals[evals < 0.0].sum()))
    raise TypeError(f"expected StateVector or DensityMatrix, got {type(state)}")


def field_statistics(state: State, field_label: str) -> tuple[complex, float]:
    """(<a>, <a^dag a>) of the labeled cavity factor."""
    space = state.space
    dim = space.dim_of(field_label)
    a_full = tensor_product_op(space, {field_label: annihilation_matrix(dim)})
    n_full = tensor_product_op(space, {field_label: number_matrix(dim)})
    mean_a = expectation_value(a_full, state)
    photons = expectation_value(n_full, state).real
    return mean_a, photons


def site_statistics(state: State, atomic_label: str, N: int) -> tuple[float, float]:
    """(<n_l - n_r>, <n_l n_r>) on a fixed-N two-site sector."""
    space = state.space
    if space.dim_of(atomic_label) != N + 1:
        raise ValueError(
            f"factor {atomic_label!r} has dim {space.dim_of(atomic_label)}, "
            f"expected N+1={N + 1} for a fixed-N two-site sector")
    ops = twosite_atomic_ops(N)
    dz = tensor_product_op(space, {atomic_label: ops["dz"]})
    nlnr = tensor_product_op(space, {atomic_label: ops["nlnr"]})
    return (expectation_value(dz, state).real,
            expectation_value(nlnr, state).real)


def _wrap_angle(x: np.ndarray) -> np.ndarray:
    return np.mod(x + np.pi, 2.0 * np.pi) - np.pi


def spatial_statistics(state: State, motion_label: str, kind: str,
                       grid_points: int = 1024) -> tuple[float, float, float]:
    """(mean_x, var_x, mean_sin_kx) of the motional factor.

    ``kind`` selects the factor semantics: "oscillator" for a Fock ladder
    with x = (a + a^dag)/sqrt(2), or "planewave" for the periodic
    e^{i n k x} ladder, where mean_x is the circular mean arg<e^{ikx}>
    and the variance uses displacements wrapped into [-pi, pi).
    """
    space = state.space
    dim = space.dim_of(motion_label)
    if kind == "oscillator":
        a = annihilation_matrix(dim).toarray()
        x = (a + a.conj().T) / np.sqrt(2.0)
        x_full = tensor_product_op(space, {motion_label: x})
        x2_full = tensor_product_op(space, {motion_label: x @ x})
        w, v = np.linalg.eigh(x)
        sin_x = (v * np.sin(w)) @ v.conj().T
        sin_full = tensor_product_op(space, {motion_label: sin_x})
        mean = expectation_value(x_full, state).real
        var = expectation_value(x2_full, state).real - mean ** 2
        return mean, var, expectation_value(sin_full, state).real
    if kind == "planewave":
        if dim % 2 == 0:
            raise ValueError("plane-wave ladder needs an odd mode count")
        if isinstance(state, StateVector):
            rho_m = partial_trace(state.normalize().to_density_matrix(), [motion_label])
        else:
            rho_m = partial_trace(state, [motion_label])
        rm = rho_m.entries
        m = dim
        # <e^{ikx}> = Tr(rho U) with U[n+1, n] = 1, i.e. the +1 diagonal of rho
        mean_exp = complex(np.sum(np.diagonal(rm, offset=1)))
        up = np.eye(m, k=-1)
        sin_m = (-0.5j) * up + (0.5j) * up.T
        mean_sin = float(np.trace(sin_m @ rm).real)
        mean_x = float(np.angle(mean_exp)) if abs(mean_exp) > 1e-14 else 0.0
        # position distribution on a grid over one wavelength
        xi = -np.pi + 2.0 * np.pi * np.arange(grid_points) / grid_points
        n_idx = np.arange(m) - (m - 1) // 2
        amp = np.exp(1j * np.outer(xi, n_idx))  # (grid, modes)
        p = np.einsum("jn,nk,jk->j", amp, rm, amp.conj()).real / grid_points
        p = np.clip(p, 0.0, None)
        p /= p.sum()
        var = float(np.sum(p * _wrap_angle(xi - mean_x) ** 2))
        return mean_x, var, mean_sin
    raise ValueError(f"unsupported motional factor kind {kind!r}")


# ---------------------------------------------------------------------------
# named observable sets for the propagators


@dataclass(frozen=True)
class Observable:
    """One named quantity recorded along a trajectory.

    ``kind`` is "op" for linear expectation values (safe to average over an
    ensemble) or "func" for nonlinear state functionals (negativity,
    variances), which ensemble averaging must evaluate on the averaged
    density matrix instead.
    """

    name: str
    kind: str  # "op" | "func"
    op: SparseOperator | None = None
    func: Callable[[State], complex] | None = None
    complex_valued: bool = False

    def evaluate(self, state: State) -> complex:
        if self.kind == "op":
            val = expectation_value(self.op, state)
            return val if self.complex_valued else val.real
        return self.func(state)


@dataclass(frozen=True)
class ObservableSet:
    entries: tuple[Observable, ...]

    def __post_init__(self):
        names = [o.name for o in self.entries]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate observable names: {names}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.entries)

    def evaluate(self, state: State) -> dict[str, complex]:
        return {o.name: o.evaluate(state) for o in self.entries}

    def linear(self) -> "ObservableSet":
        return ObservableSet(tuple(o for o in self.entries if o.kind == "op"))

    def functionals(self) -> "ObservableSet":
        return ObservableSet(tuple(o for o in self.entries if o.kind == "func"))
