import numpy as np
import pytest

from deformed_aklt.lattice import LatticeGraph
from deformed_aklt.states import (build_psi, encoded_graph_state, fidelity, graph_state_fidelity,
                                  project_and_fit, qubit_graph_state, read_state, reduced_density,
                                  stabilizer_reduced_density, write_state)


def test_qubit_graph_state_bit_order():
    g = LatticeGraph.from_edges([(0, 1)])
    G = qubit_graph_state(g)
    assert np.allclose(G, np.array([1, 1, 1, -1]) / 2)


def test_graph_state_stabilised(ring6):
    from deformed_aklt.hamiltonian import stabilizer_generator
    g = ring6[0]
    G = qubit_graph_state(g)
    for v in g.vertices:
        assert np.allclose(stabilizer_generator(g, v) @ G, G)


def test_fidelity_properties():
    a = np.array([1, 1j, 0])
    assert np.isclose(fidelity(a, 3 * np.exp(0.4j) * a), 1)
    with pytest.raises(ValueError):
        fidelity(a, np.zeros(3))
    with pytest.raises(ValueError):
        fidelity(a, np.ones(4))


@pytest.mark.parametrize("delta", [0.0, 0.3, 1.0])
def test_projection_gives_rotated_graph_state(ring6, star11, delta):
    for g, col, _ in (ring6, star11):
        f, thetas = project_and_fit(build_psi(g, col, delta), g, col)
        assert f > 1 - 1e-12
        assert all(np.isclose(t % (np.pi / 2), 0) or np.isclose(t % (np.pi / 2), np.pi / 2) for t in thetas)


def test_psi_at_zero_is_encoded_graph_state(ring6):
    g, col, _ = ring6
    psi = build_psi(g, col, 0.0)
    _, thetas = project_and_fit(psi, g, col)
    assert abs(fidelity(psi, encoded_graph_state(g, col, thetas=thetas)) - 1) < 1e-12
    assert abs(graph_state_fidelity(g, col, 0.0) - 1) < 1e-12


def test_graph_fidelity_decreases_towards_aklt_point(ring6):
    g, col, _ = ring6
    fids = [graph_state_fidelity(g, col, d) for d in (0.0, 0.1, 0.3, 1.0)]
    assert all(b < a for a, b in zip(fids, fids[1:]))


def test_projection_fails_on_vanishing_state(ring6):
    g, col, _ = ring6
    psi = np.zeros(3 ** 6, dtype=complex)
    psi[3 ** 6 // 2] = 1  # every site in M = 0, orthogonal to |+-1>_z
    with pytest.raises(ArithmeticError):
        project_and_fit(psi, g, type(col)(("z",) * 6))


def test_reduced_density_matches_stabilizer_formula(ring6):
    g = ring6[0]
    G = qubit_graph_state(g)
    for sites in ([0], [0, 1], [0, 3], [1, 2, 3]):
        rho = reduced_density(G, sites, [2] * g.N)
        assert np.abs(rho - stabilizer_reduced_density(g, sites)).max() < 1e-13


def test_reduced_density_of_product_state():
    psi = np.kron([1, 0], [0.6, 0.8]).astype(complex)
    rho = reduced_density(psi, [1], [2, 2])
    assert np.allclose(rho, np.outer([0.6, 0.8], [0.6, 0.8]))


def test_state_dump_round_trip(tmp_path, ring6):
    g, col, _ = ring6
    psi = build_psi(g, col, 0.3)
    p = tmp_path / "psi.bin"
    write_state(p, psi, g.physical_dims())
    back, dims = read_state(p)
    assert dims == g.physical_dims() and np.array_equal(back, psi)
    with pytest.raises(ValueError):
        write_state(p, psi[:-1], g.physical_dims())


def test_state_cap(star11):
    g, col, _ = star11
    with pytest.raises(MemoryError):
        build_psi(g, col, 0.5, cap=100)
