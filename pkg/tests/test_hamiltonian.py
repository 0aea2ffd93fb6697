from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp

from deformed_aklt.eigensolver import gap
from deformed_aklt.hamiltonian import (assemble_H, assemble_HB, blocked_image, blocked_projector,
                                       cluster_hamiltonian, deformed_interaction, embed, grouped_term,
                                       logical_cz, q_projector, stabilizer_generator)
from deformed_aklt.lattice import build_lattice, coarse_grain
from deformed_aklt.spin import (clebsch_gordan, extremal_state, m_values, spin_dim,
                                total_spin_projector)
from deformed_aklt.states import build_psi, qubit_graph_state

H32 = Fraction(3, 2)


@pytest.mark.parametrize("S,rank", [(1, 5), (H32, 7), (2, 9)])
@pytest.mark.parametrize("delta", [0.0, 1e-6, 0.1, 0.5, 1.0])
def test_q_projector_rank_is_constant(S, rank, delta):
    Q = q_projector(S, S, "x", "y", delta)
    assert np.allclose(Q @ Q, Q, atol=1e-12) and np.allclose(Q, Q.conj().T, atol=1e-12)
    assert round(np.trace(Q).real) == rank


def test_mixed_spin_pair_rank():
    assert round(np.trace(q_projector(1, H32, "x", "z", 0.4)).real) == 6


@pytest.mark.parametrize("S", [1, H32])
def test_q_at_one_is_total_spin_projector(S):
    assert np.abs(q_projector(S, S, "y", "z", 1.0) - total_spin_projector(S, S, 2 * S)).max() < 1e-13


def test_q_matches_direct_image_at_moderate_delta():
    M = deformed_interaction(H32, H32, "x", "z", 0.1)
    U, s, _ = np.linalg.svd(M)
    U = U[:, s > 1e-10 * s[0]]
    assert np.abs(q_projector(H32, H32, "x", "z", 0.1) - U @ U.conj().T).max() < 1e-12


def test_deformed_interaction_needs_positive_delta():
    with pytest.raises(ValueError):
        deformed_interaction(1, 1, "x", "y", 0.0)


def _mp_projector(S, ax_i, ax_j, delta, dps=50):
    """High-precision oracle: projector onto the image of (D^-1 x D^-1) P^{2S}."""
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = dps
    d = spin_dim(S)
    ms = m_values(S)
    J = 2 * Fraction(S)
    # |J M> columns from exact Clebsch-Gordan rationals
    cols = []
    for M in m_values(J):
        col = [mp.mpf(0)] * (d * d)
        for a, m1 in enumerate(ms):
            m2 = M - m1
            if abs(m2) <= Fraction(S):
                col[a * d + ms.index(m2)] = mp.mpf(clebsch_gordan(S, S, J, M, m1, m2))
        cols.append(col)
    V = mp.matrix(d * d, len(cols))
    for c, col in enumerate(cols):
        for r, x in enumerate(col):
            V[r, c] = x

    def dinv(axis):
        out = mp.eye(d)
        ep = extremal_state(S, axis, 1)
        em = extremal_state(S, axis, -1)
        P = mp.matrix(d, d)
        for e in (ep, em):
            ev = [mp.mpc(complex(x)) for x in e]
            for r in range(d):
                for c in range(d):
                    P[r, c] += ev[r] * mp.conj(ev[c])
        return P + (out - P) / mp.mpf(delta)

    Di, Dj = dinv(ax_i), dinv(ax_j)
    K = mp.matrix(d * d, d * d)
    for a in range(d):
        for b in range(d):
            for c in range(d):
                for e in range(d):
                    K[a * d + c, b * d + e] = Di[a, b] * Dj[c, e]
    M = K * V
    Mh = M.transpose_conj()
    P = M * mp.inverse(Mh * M) * Mh
    return np.array([[complex(P[r, c]) for c in range(d * d)] for r in range(d * d)])


@pytest.mark.parametrize("delta", [1e-3, 1e-8])
def test_q_small_delta_against_high_precision(delta):
    ref = _mp_projector(1, "x", "y", delta)
    assert np.abs(q_projector(1, 1, "x", "y", delta) - ref).max() < 1e-10


def test_q_limit_is_continuous():
    Q0 = q_projector(1, 1, "x", "z", 0.0)
    assert np.abs(q_projector(1, 1, "x", "z", 1e-8) - Q0).max() < 1e-7


def test_embed_matches_kron():
    rng = np.random.default_rng(0)
    dims = [2, 3, 2]
    B = rng.standard_normal((4, 4))
    got = embed(B, (0, 2), dims).toarray()
    ref = np.einsum("acbd,ef->aecbfd", B.reshape(2, 2, 2, 2), np.eye(3)).reshape(12, 12)
    assert np.allclose(got, ref)
    got2 = embed(B, (2, 0), dims).toarray()
    ref2 = np.einsum("cadb,ef->aecbfd", B.reshape(2, 2, 2, 2), np.eye(3)).reshape(12, 12)
    assert np.allclose(got2, ref2)


def test_embed_cap():
    with pytest.raises(MemoryError):
        embed(np.eye(4), (0, 1), [4] * 12, cap=1000)


@pytest.mark.parametrize("delta", [0.0, 0.3, 1.0])
def test_psi_is_zero_energy_ground_state(ring6, delta):
    g, col, _ = ring6
    H = assemble_H(g, col, delta)
    psi = build_psi(g, col, delta)
    assert np.linalg.norm(H @ psi) < 1e-12


def test_ring_gap_at_aklt_point(ring6):
    g, col, _ = ring6
    E0, E1, dgap, _ = gap(assemble_H(g, col, 1.0))
    assert abs(E0) < 1e-10 and abs(dgap - 0.3478657293446657) < 1e-9


def test_cluster_hamiltonian(ring6):
    g = ring6[0]
    H = cluster_hamiltonian(g)
    G = qubit_graph_state(g)
    assert np.linalg.norm(H @ G) < 1e-12
    E0, E1, dgap, _ = gap(H)
    assert abs(dgap - 1) < 1e-12
    K0 = stabilizer_generator(g, 0)
    assert abs(K0 @ K0 - sp.identity(64)).max() < 1e-14


def test_blocked_projector_rank_on_ring(ring6):
    g, col, cov = ring6
    P = blocked_projector(g, col, cov.regions[0], cov.regions[1], 0.5)
    # four spin-1 sites, two open virtual legs
    assert P.matrix.shape == (81, 81) and P.rank == 81 - 4


def test_blocked_image_refuses_non_injective(honeycomb33):
    g, col, _ = honeycomb33
    with pytest.raises(ArithmeticError):
        blocked_image(g, col, (0,), (1,), 1.0)


def test_blocked_hamiltonian_unique_ground_state_at_zero(ring6):
    g, col, cov = ring6
    E0, E1, dgap, _ = gap(assemble_HB(g, col, cov, 0.0))
    assert abs(E0) < 1e-10 and dgap > 1 - 1e-9


def test_grouped_terms_sum_to_hamiltonian(ring6):
    g, col, cov = ring6
    cg = coarse_grain(g, cov)
    dims = g.physical_dims()
    total = sum(embed(t.matrix, t.sites, dims) for t in
                (grouped_term(g, col, cov, a, b, 0.4) for a, b in cg.edges))
    assert abs(total - assemble_H(g, col, 0.4)).max() < 1e-12


def test_grouped_term_needs_adjacent_regions(star11):
    g, col, cov = star11
    with pytest.raises(ValueError):
        grouped_term(g, col, cov, 0, 0, 0.4)


def test_logical_cz_is_diagonal_unitary_on_logical_space(ring6):
    g, col, _ = ring6
    W = logical_cz(g, col, (0, 1), [(0, 1)])
    Wd = W.toarray()
    assert np.allclose(Wd @ Wd.conj().T, np.eye(9))
    assert np.allclose(Wd, Wd.conj().T)
