"""Model builders: seesaw oscillator pair, two-site lattice+cavity, full
momentum-space single atom, and Gaussian-Wannier coupling coefficients.

Natural units throughout: hbar = 1, cavity linewidth kappa = 1 (unless a
params object overrides it), lengths in 1/k.  The kinetic scale enters only
through ``recoil_ratio`` = hbar k^2 / (m kappa).  Energies of the two-site
and full-space models are therefore quoted in units of (hbar) kappa; the
seesaw model is dimensionless on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import trapezoid

from .hilbert import (
    HilbertSpace,
    SparseOperator,
    annihilation_matrix,
    number_matrix,
    tensor_product_op,
)

__all__ = [
    "SeesawParams",
    "TwoSiteParams",
    "FullSpaceParams",
    "WannierData",
    "build_seesaw_hamiltonian",
    "classify_seesaw_stability",
    "twosite_atomic_ops",
    "build_twosite_hamiltonian",
    "eliminated_field_operator",
    "fullspace_motion_ops",
    "build_fullspace_hamiltonian",
    "compute_wannier_couplings",
]


# ---------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class SeesawParams:
    """Two position-coupled oscillators: particle coordinate x and tilt phi."""

    omega_x: float
    omega_phi: float
    J: float
    cutoff_x: int = 40
    cutoff_phi: int = 40

    def __post_init__(self):
        if self.omega_x <= 0 or self.omega_phi <= 0:
            raise ValueError("oscillator frequencies must be positive")
        if self.cutoff_x < 2 or self.cutoff_phi < 2:
            raise ValueError("Fock cutoffs must be >= 2")

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace((("x", self.cutoff_x), ("phi", self.cutoff_phi)))


@dataclass(frozen=True)
class TwoSiteParams:
    """Two-site lattice bosons coupled to one cavity mode.

    J: tunneling matrix element; Jtilde: cavity-scattering matrix element;
    U0: cavity shift per atom; Delta_c: pump-cavity detuning; all in units
    of kappa.  The atomic sector is the fixed-N symmetric subspace
    |n_left, N - n_left>, ordered by decreasing n_left (index 0 = all left).
    """

    J: float
    Jtilde: float
    U0: float
    Delta_c: float
    kappa: float = 1.0
    N_atoms: int = 1
    photon_cutoff: int = 8

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.N_atoms < 1:
            raise ValueError("N_atoms must be >= 1")
        if self.photon_cutoff < 2:
            raise ValueError("photon_cutoff must be >= 2")

    @property
    def atom_dim(self) -> int:
        return self.N_atoms + 1

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace((("atoms", self.atom_dim), ("field", self.photon_cutoff)))

    @property
    def detuning_eff(self) -> float:
        """Delta_c - U0 * N, the detuning dressed by the full atom number."""
        return self.Delta_c - self.U0 * self.N_atoms


@dataclass(frozen=True)
class FullSpaceParams:
    """Single atom on one wavelength (periodic) + one cavity mode.

    Plane-wave motional basis e^{i n k x}, n = -n_max..n_max, with
    n_momentum = 2 n_max + 1 modes.  V0 in units of hbar*kappa (negative),
    U0 and Delta_c in units of kappa, recoil_ratio = hbar k^2/(m kappa).
    """

    V0: float
    U0: float
    Delta_c: float
    kappa: float = 1.0
    recoil_ratio: float = 0.05
    n_momentum: int = 21
    photon_cutoff: int = 6

    def __post_init__(self):
        if self.V0 * self.U0 < 0:
            raise ValueError("V0*U0 must be >= 0 so sqrt(V0*U0) is real")
        if self.n_momentum % 2 == 0 or self.n_momentum < 9:
            raise ValueError("n_momentum must be odd and >= 9")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.photon_cutoff < 2:
            raise ValueError("photon_cutoff must be >= 2")

    @property
    def n_max(self) -> int:
        return (self.n_momentum - 1) // 2

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace((("motion", self.n_momentum), ("field", self.photon_cutoff)))


@dataclass(frozen=True)
class WannierData:
    """Tight-binding coefficients from the Gaussian (lowest-band) ansatz.

    J: tunneling matrix element <w_l|h|w_r> (negative for deep lattices);
    Jtilde: on-site cavity-coupling element, gauge-fixed positive for the
    site labeled "left"; gaussian_width: ground-state width in units 1/k;
    onsite_energy: <w|h|w>, the additive constant dropped by the two-site model.
    """

    J: float
    Jtilde: float
    gaussian_width: float
    onsite_energy: float


# ---------------------------------------------------------------------------
# seesaw model (Fock space of two oscillators)


def build_seesaw_hamiltonian(p: SeesawParams) -> SparseOperator:
    """H = w_x n_x + w_phi n_phi - (J/4)(a_phi + a_phi^dag)(a_x + a_x^dag)."""
    space = p.space
    ax = annihilation_matrix(p.cutoff_x)
    aphi = annihilation_matrix(p.cutoff_phi)
    xq = ax + ax.conj().T      # a + a^dag on each factor
    phiq = aphi + aphi.conj().T
    h = (p.omega_x * tensor_product_op(space, {"x": number_matrix(p.cutoff_x)})
         + p.omega_phi * tensor_product_op(space, {"phi": number_matrix(p.cutoff_phi)})
         - (p.J / 4.0) * tensor_product_op(space, {"x": xq, "phi": phiq}))
    return h


def classify_seesaw_stability(omega_x: float, omega_phi: float, J: float,
                              rel_tol: float = 1e-12) -> str:
    """Classical balance point: 'unstable' iff J > omega_x*omega_phi,
    'marginal' at equality (within rel_tol relative), else 'stable'."""
    if omega_x <= 0 or omega_phi <= 0:
        raise ValueError("frequencies must be positive")
    crit = omega_x * omega_phi
    if abs(J - crit) <= rel_tol * abs(crit):
        return "marginal"
    return "unstable" if J > crit else "stable"


# ---------------------------------------------------------------------------
# two-site model (fixed-N symmetric sector x Fock field)


def twosite_atomic_ops(N: int) -> dict[str, np.ndarray]:
    """Operators on the fixed-N two-mode sector |n_l, N-n_l>, n_l descending.

    Returns dense (N+1)x(N+1) matrices: 'tunnel' = b_l^dag b_r + b_r^dag b_l,
    'dz' = n_l - n_r, 'nl', 'nr', 'nlnr'.
    """
    d = N + 1
    nl = np.array([N - i for i in range(d)], dtype=float)
    nr = np.array([i for i in range(d)], dtype=float)
    tunnel = np.zeros((d, d))
    for i in range(d - 1):
        # b_l^dag b_r maps |n_l, n_r> -> sqrt((n_l+1) n_r)|n_l+1, n_r-1>,
        # i.e. index i+1 -> i in the descending-n_l ordering
        amp = math.sqrt((nl[i + 1] + 1.0) * nr[i + 1])
        tunnel[i, i + 1] = amp
        tunnel[i + 1, i] = amp
    return {
        "tunnel": tunnel,
        "dz": np.diag(nl - nr),
        "nl": np.diag(nl),
        "nr": np.diag(nr),
        "nlnr": np.diag(nl * nr),
    }


def build_twosite_hamiltonian(p: TwoSiteParams) -> tuple[SparseOperator, SparseOperator]:
    """H = J(b_l^dag b_r + h.c.) - (Delta_c - U0 N) a^dag a
           + Jtilde (a + a^dag)(n_l - n_r),  jump = sqrt(2 kappa) a.

    The total atom number commutes with H, so the atomic factor is the
    fixed-N sector and the cavity shift uses N directly.
    """
    space = p.space
    ops = twosite_atomic_ops(p.N_atoms)
    a = annihilation_matrix(p.photon_cutoff)
    quad = a + a.conj().T
    h = (p.J * tensor_product_op(space, {"atoms": ops["tunnel"]})
         - p.detuning_eff * tensor_product_op(space, {"field": number_matrix(p.photon_cutoff)})
         + p.Jtilde * tensor_product_op(space, {"atoms": ops["dz"], "field": quad}))
    jump = math.sqrt(2.0 * p.kappa) * tensor_product_op(space, {"field": a})
    return h, jump


def eliminated_field_operator(p: TwoSiteParams) -> SparseOperator:
    """Bad-cavity field slaved to the atoms:
    a_eff = -i Jtilde / (kappa - i(Delta_c - U0 N)) * (n_l - n_r),
    acting on the fixed-N atomic sector alone."""
    if p.kappa <= 0:
        raise ValueError("kappa must be positive")
    coeff = -1j * p.Jtilde / (p.kappa - 1j * p.detuning_eff)
    dz = twosite_atomic_ops(p.N_atoms)["dz"]
    space = HilbertSpace((("atoms", p.atom_dim),))
    return SparseOperator(space, sp.csr_matrix(coeff * dz))


# ---------------------------------------------------------------------------
# full-space model (plane waves x Fock field)


def fullspace_motion_ops(n_momentum: int) -> dict[str, sp.csr_matrix]:
    """Motional operators in the plane-wave ladder n = -n_max..n_max.

    'sin' couples n -> n+1 with -i/2 and n -> n-1 with +i/2 (the Fourier
    components of sin(kx)); 'sin2' is 1/2 on the diagonal and -1/4 on
    n -> n+-2; 'n2' is the squared mode index; 'expikx' raises n by one.
    Indices outside the range are dropped (open ladder).
    """
    m = n_momentum
    n_max = (m - 1) // 2
    idx = np.arange(m)
    up = sp.csr_matrix((np.ones(m - 1), (idx[1:], idx[:-1])), shape=(m, m),
                       dtype=np.complex128)  # e^{ikx}: n -> n+1
    sin_m = (-0.5j) * up + (0.5j) * up.conj().T
    up2 = sp.csr_matrix((np.ones(m - 2), (idx[2:], idx[:-2])), shape=(m, m),
                        dtype=np.complex128)
    sin2 = 0.5 * sp.identity(m, dtype=np.complex128, format="csr") - 0.25 * (up2 + up2.conj().T)
    nvals = np.arange(-n_max, n_max + 1, dtype=float)
    n2 = sp.diags((nvals ** 2).astype(np.complex128), format="csr")
    return {"expikx": up, "sin": sin_m.tocsr(), "sin2": sin2.tocsr(), "n2": n2}


def build_fullspace_hamiltonian(p: FullSpaceParams) -> tuple[SparseOperator, SparseOperator]:
    """H = (recoil/2) n^2 + V0 sin^2(kx) - (Delta_c - U0) a^dag a
           + sqrt(V0 U0) sin(kx) (a + a^dag),   jump = sqrt(2 kappa) a."""
    if p.V0 * p.U0 < 0:
        raise ValueError("V0*U0 must be >= 0 so sqrt(V0*U0) is real")
    space = p.space
    mo = fullspace_motion_ops(p.n_momentum)
    a = annihilation_matrix(p.photon_cutoff)
    quad = a + a.conj().T
    g = math.sqrt(p.V0 * p.U0)  # positive root; overall sign is a gauge choice
    h = ((p.recoil_ratio / 2.0) * tensor_product_op(space, {"motion": mo["n2"]})
         + p.V0 * tensor_product_op(space, {"motion": mo["sin2"]})
         - (p.Delta_c - p.U0) * tensor_product_op(space, {"field": number_matrix(p.photon_cutoff)})
         + g * tensor_product_op(space, {"motion": mo["sin"], "field": quad}))
    jump = math.sqrt(2.0 * p.kappa) * tensor_product_op(space, {"field": a})
    return h, jump


# ---------------------------------------------------------------------------
# Gaussian-Wannier coupling coefficients


def _gaussian(xi: np.ndarray, center: float, sigma2: float) -> np.ndarray:
    norm = (2.0 * math.pi * sigma2) ** -0.25
    return norm * np.exp(-((xi - center) ** 2) / (4.0 * sigma2))


def _gaussian_d2(xi: np.ndarray, center: float, sigma2: float) -> np.ndarray:
    d = xi - center
    return _gaussian(xi, center, sigma2) * (d * d / (4.0 * sigma2 * sigma2) - 1.0 / (2.0 * sigma2))


def compute_wannier_couplings(V0: float, U0: float, recoil_ratio: float,
                              n_grid: int = 8001) -> WannierData:
    """Tight-binding J, Jtilde from the harmonic (Gaussian) ground state of
    each well of V0 sin^2(kx), integrated over one wavelength.

    Requires V0 < 0 and U0 < 0 (red detuning).  Below |V0| = recoil_ratio
    the harmonic ansatz has no meaning (well shallower than the recoil
    scale) and a ValueError is raised.  The coupling element is gauge-fixed
    so the returned Jtilde (the left-site value) is positive.
    """
    if V0 >= 0 or U0 >= 0:
        raise ValueError("compute_wannier_couplings expects V0 < 0 and U0 < 0")
    if recoil_ratio <= 0:
        raise ValueError("recoil_ratio must be positive")
    v = -V0
    u = -U0
    if v < recoil_ratio:
        raise ValueError(
            f"lattice depth |V0|={v:g} below the recoil scale {recoil_ratio:g}: "
            "harmonic Wannier approximation invalid")
    # well bottoms at sin^2 = 1; harmonic frequency omega = sqrt(2 v r),
    # ground-state variance sigma^2 = r / (2 omega)
    omega = math.sqrt(2.0 * v * recoil_ratio)
    sigma2 = recoil_ratio / (2.0 * omega)

    xi = np.linspace(-math.pi, math.pi, n_grid)
    w_l = _gaussian(xi, -math.pi / 2.0, sigma2)
    w_r = _gaussian(xi, math.pi / 2.0, sigma2)
    h_w_r = -(recoil_ratio / 2.0) * _gaussian_d2(xi, math.pi / 2.0, sigma2) \
        + V0 * np.sin(xi) ** 2 * w_r
    h_w_l = -(recoil_ratio / 2.0) * _gaussian_d2(xi, -math.pi / 2.0, sigma2) \
        + V0 * np.sin(xi) ** 2 * w_l
    J = float(trapezoid(w_l * h_w_r, xi))
    onsite = float(trapezoid(w_l * h_w_l, xi))
    # site at +pi/2 has <sin> > 0; calling it "left" fixes Jtilde > 0
    # (the a -> -a gauge absorbs the overall sign)
    jtilde = math.sqrt(u * v) * float(trapezoid(w_r * w_r * np.sin(xi), xi))
    return WannierData(J=J, Jtilde=jtilde, gaussian_width=math.sqrt(sigma2),
                       onsite_energy=onsite)
