import math

import numpy as np
import pytest
from scipy.integrate import quad, trapezoid

from qseesaw.hilbert import HilbertSpace, hermitian_spectrum
from qseesaw.models import (
    FullSpaceParams,
    SeesawParams,
    TwoSiteParams,
    build_fullspace_hamiltonian,
    build_seesaw_hamiltonian,
    build_twosite_hamiltonian,
    classify_seesaw_stability,
    compute_wannier_couplings,
    eliminated_field_operator,
    fullspace_motion_ops,
    twosite_atomic_ops,
)


# ---------------------------------------------------------------------------
# seesaw


def test_seesaw_uncoupled_spectrum():
    p = SeesawParams(omega_x=1.0, omega_phi=3.0, J=0.0, cutoff_x=6, cutoff_phi=6)
    evals = hermitian_spectrum(build_seesaw_hamiltonian(p).toarray())
    expected = np.sort([nx * 1.0 + nphi * 3.0 for nx in range(6) for nphi in range(6)])
    assert np.allclose(evals, expected, atol=1e-10)


def test_seesaw_coupling_matrix_element():
    # <n_x=1, n_phi=0| H |n_x=0, n_phi=1> = -J/4
    p = SeesawParams(omega_x=1.0, omega_phi=3.0, J=16.0, cutoff_x=5, cutoff_phi=5)
    h = build_seesaw_hamiltonian(p).toarray()
    row = 1 * p.cutoff_phi + 0  # (n_x=1, n_phi=0), phi is the fast index
    col = 0 * p.cutoff_phi + 1  # (n_x=0, n_phi=1)
    assert h[row, col] == pytest.approx(-p.J / 4.0)


def test_seesaw_hermitian_entrywise():
    p = SeesawParams(omega_x=1.0, omega_phi=3.0, J=16.0, cutoff_x=10, cutoff_phi=8)
    h = build_seesaw_hamiltonian(p).toarray()
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_seesaw_params_validation():
    with pytest.raises(ValueError):
        SeesawParams(omega_x=-1.0, omega_phi=3.0, J=1.0)
    with pytest.raises(ValueError):
        SeesawParams(omega_x=1.0, omega_phi=3.0, J=1.0, cutoff_x=1)


@pytest.mark.parametrize("J, expected", [
    (1.5, "stable"),      # 0.5 * omega_x omega_phi
    (6.0, "unstable"),    # 2 * omega_x omega_phi
    (3.0, "marginal"),    # exactly at the product
])
def test_classify_seesaw_stability(J, expected):
    assert classify_seesaw_stability(1.0, 3.0, J) == expected


def test_classify_rejects_bad_frequencies():
    with pytest.raises(ValueError):
        classify_seesaw_stability(0.0, 1.0, 1.0)


# ---------------------------------------------------------------------------
# two-site model, checked against the unrestricted two-mode construction


def _twosite_oracle(p: TwoSiteParams) -> np.ndarray:
    """Build the two-site + field Hamiltonian on the full (unsymmetrized)
    two-mode Fock space and project onto the fixed-N sector, ordered by
    decreasing n_l.  Independent of the sector-basis construction."""
    N, pc = p.N_atoms, p.photon_cutoff
    d = N + 1
    a1 = np.diag(np.sqrt(np.arange(1, d)), k=1)  # mode annihilation, d levels

    def emb(op, which):
        mats = [np.eye(d), np.eye(d), np.eye(pc)]
        mats[which] = op
        return np.kron(np.kron(mats[0], mats[1]), mats[2])

    af = np.diag(np.sqrt(np.arange(1, pc)), k=1)
    bl, br, a = emb(a1, 0), emb(a1, 1), emb(af, 2)
    nl, nr = bl.conj().T @ bl, br.conj().T @ br
    h = (p.J * (bl.conj().T @ br + br.conj().T @ bl)
         - (p.Delta_c * np.eye(d * d * pc) - p.U0 * (nl + nr)) @ (a.conj().T @ a)
         + p.Jtilde * (a + a.conj().T) @ (nl - nr))
    # index of |n_l, n_r=N-n_l, m> in the kron ordering
    sector = [(N - i) * d * pc + i * pc + m for i in range(d) for m in range(pc)]
    return h[np.ix_(sector, sector)]


@pytest.mark.parametrize("N", [1, 2, 3])
def test_twosite_matches_two_mode_oracle(N):
    p = TwoSiteParams(J=0.37, Jtilde=1.1, U0=-0.8, Delta_c=-2.5, N_atoms=N,
                      photon_cutoff=4)
    h, _ = build_twosite_hamiltonian(p)
    assert np.allclose(h.toarray(), _twosite_oracle(p), atol=1e-12)


def test_twosite_single_atom_coupling_is_diagonal():
    ops = twosite_atomic_ops(1)
    assert np.allclose(ops["dz"], np.diag([1.0, -1.0]))


def test_twosite_fig4_parameters_build():
    p = TwoSiteParams(J=0.01, Jtilde=1.6, U0=-2.0, Delta_c=-6.0, N_atoms=2,
                      photon_cutoff=8)
    h, jump = build_twosite_hamiltonian(p)
    assert h.is_hermitian(1e-12)
    # jump operator is sqrt(2 kappa) times the photon ladder
    expected = math.sqrt(2.0) * np.kron(np.eye(3), np.diag(np.sqrt(np.arange(1, 8)), k=1))
    assert np.allclose(jump.toarray(), expected, atol=1e-12)


def test_twosite_atom_number_is_conserved():
    # the sector construction cannot leak atoms: [H, N] = 0 holds trivially,
    # and the two-mode oracle above confirms the block structure
    p = TwoSiteParams(J=0.5, Jtilde=0.9, U0=-1.0, Delta_c=-3.0, N_atoms=3,
                      photon_cutoff=3)
    h, _ = build_twosite_hamiltonian(p)
    n_op = np.kron(np.diag([3.0, 3.0, 3.0, 3.0]), np.eye(3))
    comm = h.toarray() @ n_op - n_op @ h.toarray()
    assert np.max(np.abs(comm)) == 0.0


def test_twosite_params_validation():
    with pytest.raises(ValueError):
        TwoSiteParams(J=0.0, Jtilde=0.0, U0=0.0, Delta_c=0.0, kappa=0.0)
    with pytest.raises(ValueError):
        TwoSiteParams(J=0.0, Jtilde=0.0, U0=0.0, Delta_c=0.0, N_atoms=0)
    with pytest.raises(ValueError):
        TwoSiteParams(J=0.0, Jtilde=0.0, U0=0.0, Delta_c=0.0, photon_cutoff=1)


# ---------------------------------------------------------------------------
# adiabatically eliminated field


def test_eliminated_field_annihilates_balanced_state():
    p = TwoSiteParams(J=0.01, Jtilde=1.6, U0=-2.0, Delta_c=-6.0, N_atoms=2)
    ae = eliminated_field_operator(p)
    mott = np.array([0.0, 1.0, 0.0], dtype=complex)  # |1, 1>
    out = ae.matrix.dot(mott)
    assert np.all(out == 0.0)


def test_eliminated_field_single_atom_photon_number_is_uniform():
    p = TwoSiteParams(J=0.01, Jtilde=1.6, U0=-2.0, Delta_c=-6.0, N_atoms=1)
    ae = eliminated_field_operator(p)
    prod = (ae.dagger() @ ae).toarray()
    expected = p.Jtilde ** 2 / (p.kappa ** 2 + p.detuning_eff ** 2)
    assert np.allclose(prod, expected * np.eye(2), atol=1e-12)


def test_eliminated_field_all_left_eigenvalue():
    p = TwoSiteParams(J=0.0, Jtilde=1.6, U0=-2.0, Delta_c=-6.0, N_atoms=2)
    ae = eliminated_field_operator(p)
    left = np.zeros(3, dtype=complex)
    left[0] = 1.0
    got = ae.matrix.dot(left)[0]
    expected = -1j * p.Jtilde * p.N_atoms / (p.kappa - 1j * p.detuning_eff)
    assert got == pytest.approx(expected, abs=1e-14)


# ---------------------------------------------------------------------------
# full-space model


def test_fullspace_free_spectrum():
    p = FullSpaceParams(V0=0.0, U0=0.0, Delta_c=-2.0, recoil_ratio=0.1,
                        n_momentum=9, photon_cutoff=3)
    h, _ = build_fullspace_hamiltonian(p)
    evals = hermitian_spectrum(h.toarray())
    expected = np.sort([0.05 * n ** 2 + 2.0 * m for n in range(-4, 5) for m in range(3)])
    assert np.allclose(evals, expected, atol=1e-10)


def test_fullspace_sin_matrix_elements():
    sin_m = fullspace_motion_ops(9)["sin"].toarray()
    for n in range(8):
        assert sin_m[n + 1, n] == pytest.approx(-0.5j)
        assert sin_m[n, n + 1] == pytest.approx(+0.5j)


def test_fullspace_sin_matrix_against_quadrature():
    # <m|sin(kx)|n> = (1/2pi) Int e^{-i m xi} sin(xi) e^{i n xi} d xi
    m_modes = 7
    n_max = 3
    sin_m = fullspace_motion_ops(m_modes)["sin"].toarray()
    xi = np.linspace(-math.pi, math.pi, 20001)
    for r in range(m_modes):
        for c in range(m_modes):
            integrand = np.exp(-1j * (r - n_max) * xi) * np.sin(xi) * np.exp(1j * (c - n_max) * xi)
            val = trapezoid(integrand, xi) / (2 * math.pi)
            assert sin_m[r, c] == pytest.approx(val, abs=1e-8)


def test_fullspace_caption_coupling_strength():
    p = FullSpaceParams(V0=-6.7, U0=-1.7, Delta_c=-12.0, recoil_ratio=0.05,
                        n_momentum=9, photon_cutoff=3)
    h, _ = build_fullspace_hamiltonian(p)
    assert h.is_hermitian(1e-12)
    # coupling element between |n, 0 ph> and |n+1, 1 ph> is -i/2 sqrt(V0 U0)
    hd = h.toarray()
    row = 5 * 3 + 1  # n=+1 (index 5), one photon
    col = 4 * 3 + 0  # n=0 (index 4), vacuum
    assert hd[row, col] == pytest.approx(-0.5j * math.sqrt(11.39), abs=1e-12)


def test_fullspace_rejects_mixed_sign_couplings():
    with pytest.raises(ValueError):
        FullSpaceParams(V0=-1.0, U0=0.5, Delta_c=-1.0)


def test_fullspace_params_validation():
    with pytest.raises(ValueError):
        FullSpaceParams(V0=-1.0, U0=-1.0, Delta_c=0.0, n_momentum=10)
    with pytest.raises(ValueError):
        FullSpaceParams(V0=-1.0, U0=-1.0, Delta_c=0.0, n_momentum=7)


# ---------------------------------------------------------------------------
# Wannier couplings


def test_wannier_sign_conventions():
    w = compute_wannier_couplings(-4.0, -0.25, 1.0)
    assert w.Jtilde > 0.0
    assert w.gaussian_width > 0.0
    # the two wells carry opposite coupling: the integral at -pi/2 is the
    # negative of the returned (+pi/2) value
    sigma2 = w.gaussian_width ** 2
    norm = (2 * math.pi * sigma2) ** -0.25

    def wsq(xi, center):
        return (norm * math.exp(-((xi - center) ** 2) / (4 * sigma2))) ** 2

    val_right_well, _ = quad(lambda x: wsq(x, -math.pi / 2) * math.sin(x), -math.pi, math.pi)
    val_left_well, _ = quad(lambda x: wsq(x, math.pi / 2) * math.sin(x), -math.pi, math.pi)
    assert val_right_well == pytest.approx(-val_left_well, rel=1e-9)


def test_wannier_tunneling_shrinks_with_depth():
    shallow = compute_wannier_couplings(-4.0, -0.25, 1.0)
    deep = compute_wannier_couplings(-8.0, -0.25, 1.0)
    assert abs(deep.J) < abs(shallow.J)


def test_wannier_validity_domain():
    with pytest.raises(ValueError):
        compute_wannier_couplings(-0.5, -0.25, 1.0)  # shallower than the recoil
    with pytest.raises(ValueError):
        compute_wannier_couplings(4.0, -0.25, 1.0)
    with pytest.raises(ValueError):
        compute_wannier_couplings(-4.0, 0.25, 1.0)


def test_wannier_quadrature_oracle():
    # the trapezoid-grid integrals must agree with adaptive quadrature
    v0, u0, r = -6.0, -0.5, 0.1
    w = compute_wannier_couplings(v0, u0, r)
    sigma2 = w.gaussian_width ** 2
    norm = (2 * math.pi * sigma2) ** -0.25

    def g(xi, c):
        return norm * math.exp(-((xi - c) ** 2) / (4 * sigma2))

    def g2(xi, c):
        d = xi - c
        return g(xi, c) * (d * d / (4 * sigma2 ** 2) - 1.0 / (2 * sigma2))

    def h_wr(xi):
        return -(r / 2) * g2(xi, math.pi / 2) + v0 * math.sin(xi) ** 2 * g(xi, math.pi / 2)

    J_quad, _ = quad(lambda x: g(x, -math.pi / 2) * h_wr(x), -math.pi, math.pi, limit=200)
    jt_quad, _ = quad(lambda x: math.sqrt(u0 * v0) * g(x, math.pi / 2) ** 2 * math.sin(x),
                      -math.pi, math.pi, limit=200)
    assert w.J == pytest.approx(J_quad, rel=1e-6)
    assert w.Jtilde == pytest.approx(jt_quad, rel=1e-6)


def test_deep_lattice_model_reduction():
    # lowest 2 x photon_cutoff levels of the full model reproduce the
    # two-site model built from the Gaussian couplings once the onsite
    # energy is removed; tolerance 10% of the block's spectral spread.
    # the compared block must sit below the band gap sqrt(2 |V0| r), which
    # bounds photon_cutoff * |dressed photon spacing| here
    v0, u0, dc, r, pc = -8.0, -0.05, -0.45, 0.1, 2
    fp = FullSpaceParams(V0=v0, U0=u0, Delta_c=dc, recoil_ratio=r,
                         n_momentum=41, photon_cutoff=pc)
    hf, _ = build_fullspace_hamiltonian(fp)
    full = np.sort(hermitian_spectrum(hf.toarray()))[: 2 * pc]

    wan = compute_wannier_couplings(v0, u0, r)
    tp = TwoSiteParams(J=wan.J, Jtilde=wan.Jtilde, U0=u0, Delta_c=dc, N_atoms=1,
                       photon_cutoff=pc)
    ht, _ = build_twosite_hamiltonian(tp)
    reduced = np.sort(hermitian_spectrum(ht.toarray()))

    spread = reduced.max() - reduced.min()
    assert np.max(np.abs((full - wan.onsite_energy) - reduced)) < 0.1 * spread
