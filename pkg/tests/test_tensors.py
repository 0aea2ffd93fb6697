from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from deformed_aklt.lattice import Region, build_lattice, three_colouring
from deformed_aklt.spin import spin_operators
from deformed_aklt.states import qubit_graph_state
from deformed_aklt.tensors import (DenseTensor, aklt_site_tensor, aklt_site_tensor_closed_form, block_map,
                                   contract, contract_network, doubled_gram, graph_site_tensor,
                                   hadamard_edge, singlet_edge)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_aklt_tensor_matches_binomial_closed_form(d):
    assert np.abs(aklt_site_tensor(d) - aklt_site_tensor_closed_form(d)).max() < 1e-14


@pytest.mark.parametrize("d", [2, 3])
def test_aklt_tensor_is_rotation_covariant(d):
    """R_S A = A (u x ... x u) for the same rotation in spin S = d/2 and spin 1/2."""
    rng = np.random.default_rng(d)
    n = rng.standard_normal(3)
    n /= np.linalg.norm(n)
    theta = 0.7
    gen = lambda S: sum(c * s for c, s in zip(n, spin_operators(S)))
    R = expm(-1j * theta * gen(Fraction(d, 2)))
    u = expm(-1j * theta * gen(Fraction(1, 2)))
    A = aklt_site_tensor(d)
    lhs = np.tensordot(R, A, axes=([1], [0]))
    rhs = A
    for k in range(d):
        rhs = np.moveaxis(np.tensordot(rhs, u, axes=([1 + k], [0])), -1, 1 + k)
    assert np.abs(lhs - rhs).max() < 1e-12


def test_contract_matches_einsum():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((2, 3, 4)) + 0j
    b = rng.standard_normal((4, 3, 5)) + 0j
    t = contract(DenseTensor(a, ("i", "j", "k")), DenseTensor(b, ("k2", "j2", "l")), [("j", "j2"), ("k", "k2")])
    assert t.labels == ("i", "l")
    assert np.allclose(t.data, np.einsum("ijk,kjl->il", a, b))


def test_contract_errors():
    t = DenseTensor(np.zeros((2, 3)), ("a", "b"))
    with pytest.raises(KeyError):
        contract(t, t.relabel({"a": "c", "b": "d"}), [("z", "c")])
    with pytest.raises(ValueError):
        contract(t, t.relabel({"a": "c", "b": "d"}), [("a", "d")])
    with pytest.raises(ValueError):
        contract(t, t, [("a", "a")])
    with pytest.raises(ValueError):
        DenseTensor(np.zeros((2, 2)), ("a", "a"))


def test_network_contraction_matches_einsum():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((2, 3)) + 0j
    y = rng.standard_normal((3, 4, 2)) + 0j
    z = rng.standard_normal((4, 5)) + 0j
    out = contract_network([DenseTensor(x, ("a", "b")), DenseTensor(y, ("b", "c", "d")),
                            DenseTensor(z, ("c", "e"))])
    ref = np.einsum("ab,bcd,ce->ade", x, y, z)
    assert np.allclose(out.transpose(("a", "d", "e")).data, ref)


def test_graph_tensors_with_hadamard_edges_give_graph_state():
    g = build_lattice("ring", (6, 1))
    net = [DenseTensor(graph_site_tensor(2), (("p", v), ("v", v, 0), ("v", v, 1))) for v in g.vertices]
    net += [DenseTensor(hadamard_edge(), (("v", i, g.leg(i, (i, j))), ("v", j, g.leg(j, (i, j)))))
            for i, j in g.edges]
    psi = contract_network(net).transpose([("p", v) for v in g.vertices]).data.ravel()
    ref = qubit_graph_state(g)
    overlap = np.vdot(ref, psi) / np.linalg.norm(psi)
    assert abs(abs(overlap) - 1) < 1e-12


def test_singlet_edge_is_antisymmetric():
    assert np.allclose(singlet_edge(), -singlet_edge().T)


def test_block_map_shapes_and_labels(star11):
    g, col, cov = star11
    B = block_map(g, col, cov.regions[0], 0.5)
    assert B.shape == (64, 8)
    assert B.out_labels == (("p", 0), ("p", 1), ("p", 2))


@pytest.mark.parametrize("delta", [0.0, 0.3, 1.0])
def test_doubled_network_equals_dense_gram(star11, delta):
    g, col, cov = star11
    B = block_map(g, col, cov.regions[1], delta).matrix
    G = doubled_gram(g, col, cov.regions[1].members, delta)
    assert np.abs(G - B.conj().T @ B).max() < 1e-13


def test_block_map_rejects_bad_regions(honeycomb33):
    g, col, _ = honeycomb33
    with pytest.raises(ValueError):
        block_map(g, col, (), 0.5)
    with pytest.raises(ValueError):
        block_map(g, col, (0, 7), 0.5)
