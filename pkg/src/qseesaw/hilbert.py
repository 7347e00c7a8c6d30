"""Tensor-product Hilbert space algebra on top of numpy/scipy.

States and operators live on a :class:`HilbertSpace`, an ordered list of
labeled factors.  Composite indices are row-major over the factor list
(the first factor is the slowest index), which is exactly the convention
of ``numpy.kron`` / ``scipy.sparse.kron``.  All objects are immutable
after construction and safe to share between concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "HilbertSpace",
    "StateVector",
    "DensityMatrix",
    "SparseOperator",
    "TruncationError",
    "SpaceMismatchError",
    "annihilation_matrix",
    "number_matrix",
    "identity_on",
    "tensor_product_op",
    "coherent_state",
    "fock_state",
    "partial_trace",
    "partial_transpose",
    "hermitian_spectrum",
    "schmidt_coefficients",
    "expectation_value",
    "marginal_populations",
]

NORM_TOL = 1e-9
HERM_TOL = 1e-10


class TruncationError(ValueError):
    """A Fock cutoff is too small for the requested state."""


class SpaceMismatchError(ValueError):
    """Operands live on incompatible Hilbert spaces or labels."""


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of labeled factors.

    ``factors`` is a tuple of ``(label, dim)`` pairs.  Labels must be
    unique; dims must be >= 1.  The composite index of basis state
    ``(n_0, n_1, ...)`` is ``n_0*d_1*d_2*... + n_1*d_2*... + ...``.
    """

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(l), int(d)) for l, d in self.factors)
        object.__setattr__(self, "factors", factors)
        labels = [l for l, _ in factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate factor labels: {labels}")
        for l, d in factors:
            if d < 1:
                raise ValueError(f"factor {l!r} has dimension {d} < 1")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def axis(self, label: str) -> int:
        """Position of the labeled factor in the factor list."""
        for i, (l, _) in enumerate(self.factors):
            if l == label:
                return i
        raise SpaceMismatchError(f"unknown factor label {label!r}; have {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.factors[self.axis(label)][1]

    def __eq__(self, other):
        return isinstance(other, HilbertSpace) and self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)


def _require_same_space(a_space: HilbertSpace, b_space: HilbertSpace):
    if a_space != b_space:
        raise SpaceMismatchError(
            f"space mismatch: {a_space.factors} vs {b_space.factors}")


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector over a HilbertSpace.

    ``normalized`` records whether the amplitudes are unit norm; trajectory
    propagation runs with ``normalized=False`` between quantum jumps.
    """

    space: HilbertSpace
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != (self.space.dim,):
            raise SpaceMismatchError(
                f"amplitude vector of length {amp.shape} does not match space dim {self.space.dim}")
        amp = amp.copy()
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        if self.normalized and abs(self.norm() - 1.0) > NORM_TOL:
            raise ValueError(f"state flagged normalized has norm {self.norm()!r}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.space, self.amplitudes / n, normalized=True)

    def to_density_matrix(self) -> "DensityMatrix":
        psi = self.normalize().amplitudes
        return DensityMatrix(self.space, np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace matrix over a HilbertSpace."""

    space: HilbertSpace
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.complex128)
        d = self.space.dim
        if m.shape != (d, d):
            raise SpaceMismatchError(f"matrix shape {m.shape} does not match space dim {d}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def validate(self, herm_tol: float = HERM_TOL, trace_tol: float = NORM_TOL,
                 eig_tol: float = 1e-9) -> "DensityMatrix":
        """Check Hermiticity, unit trace and positivity; raise on violation."""
        m = self.entries
        herm_err = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if herm_err > herm_tol:
            raise ValueError(f"density matrix not Hermitian: max deviation {herm_err:.3e}")
        tr = self.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"density matrix trace {tr} differs from 1")
        evals = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        if evals.min() < -eig_tol:
            raise ValueError(f"density matrix has negative eigenvalue {evals.min():.3e}")
        return self


@dataclass(frozen=True)
class SparseOperator:
    """Complex sparse operator on a HilbertSpace (CSR storage).

    Supports ``+``, ``-``, scalar ``*``, ``@`` and ``dagger``; operands
    must share the space.  Entries are canonicalized (duplicates summed).
    """

    space: HilbertSpace
    matrix: sp.csr_matrix = field(repr=False)

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=np.complex128)
        d = self.space.dim
        if m.shape != (d, d):
            raise SpaceMismatchError(f"operator shape {m.shape} does not match space dim {d}")
        m.sum_duplicates()
        object.__setattr__(self, "matrix", m)

    def nonzeros(self) -> list[tuple[int, int, complex]]:
        coo = self.matrix.tocoo()
        return [(int(r), int(c), complex(v))
                for r, c, v in zip(coo.row, coo.col, coo.data) if v != 0]

    def dagger(self) -> "SparseOperator":
        return SparseOperator(self.space, self.matrix.conj().T.tocsr())

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        diff = self.matrix - self.matrix.conj().T
        return abs(diff).max() <= tol if diff.nnz else True

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.matrix.dot(amplitudes)

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        _require_same_space(self.space, other.space)
        return SparseOperator(self.space, (self.matrix + other.matrix).tocsr())

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        _require_same_space(self.space, other.space)
        return SparseOperator(self.space, (self.matrix - other.matrix).tocsr())

    def __mul__(self, scalar) -> "SparseOperator":
        return SparseOperator(self.space, (self.matrix * complex(scalar)).tocsr())

    __rmul__ = __mul__

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        _require_same_space(self.space, other.space)
        return SparseOperator(self.space, (self.matrix @ other.matrix).tocsr())


# ---------------------------------------------------------------------------
# elementary matrices


def annihilation_matrix(dim: int) -> sp.csr_matrix:
    """Truncated ladder operator: a|n> = sqrt(n)|n-1>, n < dim."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    n = np.arange(1, dim)
    return sp.csr_matrix((np.sqrt(n), (n - 1, n)), shape=(dim, dim), dtype=np.complex128)


def number_matrix(dim: int) -> sp.csr_matrix:
    return sp.diags(np.arange(dim, dtype=np.complex128), format="csr")


def identity_on(space: HilbertSpace) -> SparseOperator:
    return SparseOperator(space, sp.identity(space.dim, dtype=np.complex128, format="csr"))


def _factor_matrix(op, label: str, dim: int) -> sp.spmatrix:
    """Coerce a per-factor operand (SparseOperator / array / sparse) to a matrix."""
    if isinstance(op, SparseOperator):
        if op.space.dim != dim:
            raise SpaceMismatchError(
                f"operator for factor {label!r} has dim {op.space.dim}, expected {dim}")
        return op.matrix
    m = sp.csr_matrix(op, dtype=np.complex128)
    if m.shape != (dim, dim):
        raise SpaceMismatchError(
            f"operator for factor {label!r} has shape {m.shape}, expected ({dim}, {dim})")
    return m


def tensor_product_op(space: HilbertSpace, factor_ops: dict) -> SparseOperator:
    """Embed per-factor operators into the full space by Kronecker product.

    ``factor_ops`` maps factor labels to operators on that factor alone;
    unlisted factors receive the identity.
    """
    for label in factor_ops:
        space.axis(label)  # raises on unknown label
    result = None
    for label, dim in space.factors:
        m = (_factor_matrix(factor_ops[label], label, dim) if label in factor_ops
             else sp.identity(dim, dtype=np.complex128, format="csr"))
        result = m if result is None else sp.kron(result, m, format="csr")
    return SparseOperator(space, result)


# ---------------------------------------------------------------------------
# state constructors


def fock_state(space_or_dim, n: int, label: str = "field") -> StateVector:
    """Number state |n> on a single-factor space."""
    if isinstance(space_or_dim, HilbertSpace):
        space = space_or_dim
        if len(space.factors) != 1:
            raise SpaceMismatchError("fock_state wants a single-factor space")
    else:
        space = HilbertSpace(((label, int(space_or_dim)),))
    dim = space.dim
    if not 0 <= n < dim:
        raise ValueError(f"level {n} outside cutoff {dim}")
    amp = np.zeros(dim, dtype=np.complex128)
    amp[n] = 1.0
    return StateVector(space, amp)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Unnormalized truncated coherent amplitudes c_n = alpha^n e^{-|a|^2/2}/sqrt(n!)."""
    c = np.empty(cutoff, dtype=np.complex128)
    c[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, cutoff):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


def coherent_state(alpha: complex, cutoff: int, label: str = "field",
                   tol: float = 1e-8) -> StateVector:
    """Coherent state |alpha> truncated at ``cutoff`` levels, then renormalized.

    Raises :class:`TruncationError` when the pre-renormalization norm deficit
    ``1 - sum |c_n|^2`` exceeds ``tol`` (cutoff too small for this |alpha|).
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    c = coherent_amplitudes(alpha, cutoff)
    deficit = 1.0 - float(np.sum(np.abs(c) ** 2))
    if deficit > tol:
        raise TruncationError(
            f"coherent state |alpha|={abs(alpha):.3g} loses {deficit:.3e} norm at cutoff "
            f"{cutoff} (tolerance {tol:.1e})")
    space = HilbertSpace(((label, cutoff),))
    return StateVector(space, c / np.linalg.norm(c))


# ---------------------------------------------------------------------------
# reductions and spectra


def _as_tensor(entries: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
    return entries.reshape(dims + dims)


def partial_trace(rho: DensityMatrix, kept_labels) -> DensityMatrix:
    """Trace out every factor not listed; kept factors keep their original order."""
    kept = list(kept_labels)
    if not kept:
        raise ValueError("kept_labels must be nonempty")
    kept_axes = sorted(rho.space.axis(l) for l in kept)
    dims = rho.space.dims
    k = len(dims)
    t = _as_tensor(rho.entries, dims)
    # row axes 0..m-1, col axes m..2m-1 throughout; the col partner of row
    # axis `ax` sits at ax + m.  Tracing highest-first keeps lower positions stable.
    m_axes = k
    for ax in reversed(range(k)):
        if ax in kept_axes:
            continue
        t = np.trace(t, axis1=ax, axis2=ax + m_axes)
        m_axes -= 1
    sub = HilbertSpace(tuple(rho.space.factors[a] for a in kept_axes))
    return DensityMatrix(sub, t.reshape(sub.dim, sub.dim))


def partial_transpose(rho: DensityMatrix, transposed_label: str) -> np.ndarray:
    """Transpose the indices of one factor; returns a plain matrix.

    The result is Hermitian but in general not positive, so it is not
    wrapped in a DensityMatrix.
    """
    ax = rho.space.axis(transposed_label)
    dims = rho.space.dims
    k = len(dims)
    t = _as_tensor(rho.entries, dims)
    t = np.swapaxes(t, ax, ax + k)
    d = rho.space.dim
    return t.reshape(d, d)


def hermitian_spectrum(m: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Real eigenvalues (ascending) of a Hermitian matrix.

    The input is symmetrized before solving; deviations beyond ``tol``
    entrywise raise ValueError.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is non-Hermitian: max |m - m^dag| = {dev:.3e} > {tol:.1e}")
    return np.linalg.eigvalsh((m + m.conj().T) / 2.0)


def schmidt_coefficients(psi: StateVector, left_label: str) -> np.ndarray:
    """Squared Schmidt coefficients of the bipartition (labeled factor | rest).

    Returned descending; they sum to 1 for a normalized input.
    """
    if abs(psi.norm() - 1.0) > NORM_TOL:
        raise ValueError(f"schmidt_coefficients needs a normalized state, norm={psi.norm()!r}")
    ax = psi.space.axis(left_label)
    dims = psi.space.dims
    t = psi.amplitudes.reshape(dims)
    t = np.moveaxis(t, ax, 0)
    mat = t.reshape(dims[ax], -1)
    s = np.linalg.svd(mat, compute_uv=False)
    lam = np.sort(s ** 2)[::-1]
    return lam


def expectation_value(op: SparseOperator, state) -> complex:
    """<psi|O|psi> for a StateVector (normalized first) or Tr(rho O) for a DensityMatrix."""
    if isinstance(state, StateVector):
        _require_same_space(op.space, state.space)
        amp = state.amplitudes
        nrm2 = float(np.vdot(amp, amp).real)
        return complex(np.vdot(amp, op.matrix.dot(amp)) / nrm2)
    if isinstance(state, DensityMatrix):
        _require_same_space(op.space, state.space)
        # Tr(rho O) = sum_ij rho_ij O_ji
        return complex((op.matrix.dot(state.entries)).trace())
    raise TypeError(f"expected StateVector or DensityMatrix, got {type(state)}")


def marginal_populations(state, label: str) -> np.ndarray:
    """Probability distribution over the basis of one factor."""
    if isinstance(state, StateVector):
        space = state.space
        ax = space.axis(label)
        t = np.abs(state.amplitudes.reshape(space.dims)) ** 2
        other = tuple(i for i in range(len(space.dims)) if i != ax)
        p = t.sum(axis=other) if other else t
        return p / p.sum()
    if isinstance(state, DensityMatrix):
        space = state.space
        ax = space.axis(label)
        diag = np.real(np.diag(state.entries)).reshape(space.dims)
        other = tuple(i for i in range(len(space.dims)) if i != ax)
        p = diag.sum(axis=other) if other else diag
        return p / p.sum()
    raise TypeError(f"expected StateVector or DensityMatrix, got {type(state)}")
