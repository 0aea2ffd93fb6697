"""Full state vectors |psi(delta)>, encoded graph states and reduced density matrices."""
from itertools import product

import numpy as np

from .spin import logical_encoding
from .tensors import DenseTensor, _edge_tensors, _site_tensors, contract_network

STATE_CAP = 20_000_000


def _check_dim(dims, cap):
    total = int(np.prod(dims))
    if total > cap:
        raise MemoryError(f"state dimension {total} exceeds cap {cap}")
    return total


def build_psi(graph, coloring, delta, cap=STATE_CAP, normalize=True):
    """Contract the deformed AKLT network; amplitudes ordered by vertex id."""
    _check_dim(graph.physical_dims(), cap)
    net = _site_tensors(graph, coloring, graph.vertices, delta) + _edge_tensors(graph, graph.edges)
    T = contract_network(net).transpose(tuple(("p", v) for v in graph.vertices))
    psi = T.data.reshape(-1)
    if normalize:
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ArithmeticError("state vanishes")
        psi = psi / nrm
    return psi


def qubit_graph_state(graph):
    """CZ on every edge applied to |+>^N; qubit 0 is the most significant bit."""
    N = graph.N
    idx = np.arange(2 ** N, dtype=np.int64)
    sign = np.zeros(2 ** N, dtype=np.int64)
    for i, j in graph.edges:
        sign ^= ((idx >> (N - 1 - i)) & 1) & ((idx >> (N - 1 - j)) & 1)
    return ((-1.0) ** sign).astype(complex) / 2 ** (N / 2)


def encoded_graph_state(graph, coloring=None, encoding=None, thetas=None):
    """Graph state with qubit i embedded via the columns of encoding[i].

    ``encoding`` defaults to the logical spaces |+-S>_{c_i} of ``coloring``;
    ``thetas`` applies Z(theta_i) to each qubit first.
    """
    g = qubit_graph_state(graph)
    if thetas is not None:
        g = g * _phase_vector(graph.N, thetas)
    if encoding is None:
        if coloring is None:
            return g
        encoding = [logical_encoding(graph.spin[v], coloring[v]) for v in graph.vertices]
    for E in encoding:
        E = np.asarray(E)
        if E.shape[1] != 2 or np.abs(E.conj().T @ E - np.eye(2)).max() > 1e-10:
            raise ValueError("encoding columns must be orthonormal pairs")
    out = g.reshape((2,) * graph.N)
    for v, E in enumerate(encoding):
        out = np.moveaxis(np.tensordot(np.asarray(E), out, axes=([1], [v])), 0, v)
    return out.reshape(-1)


def build_graph_state(graph, encoding=None):
    return encoded_graph_state(graph, encoding=encoding)


def _phase_vector(N, thetas):
    idx = np.arange(2 ** N, dtype=np.int64)
    phase = np.zeros(2 ** N)
    for i, th in enumerate(thetas):
        phase += th * ((idx >> (N - 1 - i)) & 1)
    return np.exp(1j * phase)


def fidelity(a, b):
    """|<a|b>| after normalising both vectors."""
    a, b = np.asarray(a).ravel(), np.asarray(b).ravel()
    if a.shape != b.shape:
        raise ValueError("states have different dimensions")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("zero vector")
    return float(min(1.0, abs(np.vdot(a, b)) / (na * nb)))


def reduced_density(state, sites, dims, max_dim=10_000):
    """Partial trace of |state><state| keeping ``sites`` (in the given order)."""
    dims = list(dims)
    sites = list(sites)
    if len(set(sites)) != len(sites) or any(not 0 <= s < len(dims) for s in sites):
        raise ValueError(f"invalid site list {sites}")
    keep = int(np.prod([dims[s] for s in sites]))
    if keep > max_dim:
        raise MemoryError(f"reduced space of dimension {keep} exceeds {max_dim}")
    psi = np.asarray(state).reshape(dims)
    rest = [k for k in range(len(dims)) if k not in sites]
    psi = np.transpose(psi, sites + rest).reshape(keep, -1)
    rho = psi @ psi.conj().T
    return rho / np.trace(rho).real


_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)


def stabilizer_reduced_density(graph, region):
    """rho_A = 2^-|A| sum of stabilizer elements supported inside A.

    Only products of generators K_l with l in A can be supported in A; each
    candidate is multiplied out site by site and kept if it is the identity
    everywhere outside A.
    """
    region = sorted(region)
    if len(region) > 12:
        raise ValueError("region too large")
    inside = set(region)
    nbrs = [graph.neighbours(v) for v in graph.vertices]
    rho = np.zeros((2 ** len(region),) * 2, dtype=complex)
    for gamma in product((0, 1), repeat=len(region)):
        chosen = [l for l, g in zip(region, gamma) if g]
        factors = {v: _I2 for v in graph.vertices}
        for l in chosen:
            factors[l] = factors[l] @ _X
            for j in nbrs[l]:
                factors[j] = factors[j] @ _Z
        if any(not np.allclose(factors[v], _I2) for v in graph.vertices if v not in inside):
            continue
        term = np.ones((1, 1), dtype=complex)
        for v in region:
            term = np.kron(term, factors[v])
        rho += term
    return rho / 2 ** len(region)


def project_to_logical(state, graph, coloring):
    """Qubit amplitudes of (x_i P^{c_i}) |state> in the logical basis |+-S>_{c_i}."""
    out = np.asarray(state).reshape(graph.physical_dims())
    for v in graph.vertices:
        E = logical_encoding(graph.spin[v], coloring[v])
        out = np.moveaxis(np.tensordot(E.conj().T, out, axes=([1], [v])), 0, v)
    return out.reshape(-1)


QUARTER_TURNS = np.array([0.0, np.pi / 2, np.pi, 3 * np.pi / 2])


def project_and_fit(state, graph, coloring):
    """Project every site onto its logical space and match Z(theta)|G>.

    Each theta_i is read off from the phase of the amplitude obtained by
    flipping qubit i in the largest-amplitude configuration, then snapped to the
    nearest multiple of pi/2. Returns (fidelity, thetas).
    """
    phi = project_to_logical(state, graph, coloring)
    if np.linalg.norm(phi) < 1e-14 * max(1.0, np.linalg.norm(state)):
        raise ArithmeticError("projected state has zero norm")
    g = qubit_graph_state(graph)
    ratio = phi / g
    N = graph.N
    ref = int(np.argmax(np.abs(phi)))
    thetas = []
    for i in range(N):
        bit = (ref >> (N - 1 - i)) & 1
        flipped = ref ^ (1 << (N - 1 - i))
        if abs(phi[flipped]) < 1e-12 * abs(phi[ref]):
            thetas.append(0.0)
            continue
        ang = np.angle(ratio[flipped] / ratio[ref]) * (1 if bit == 0 else -1)
        k = int(np.round(ang / (np.pi / 2))) % 4
        thetas.append(float(QUARTER_TURNS[k]))
    target = g * _phase_vector(N, thetas)
    return fidelity(target, phi), thetas


def write_state(path, state, dims):
    """Header line ``dims: d1 d2 ...`` then little-endian complex128 amplitudes."""
    state = np.asarray(state, dtype="<c16").ravel()
    if state.size != int(np.prod(dims)):
        raise ValueError("state length does not match dims")
    with open(path, "wb") as fh:
        fh.write(("dims: " + " ".join(str(int(d)) for d in dims) + "\n").encode())
        fh.write(state.tobytes())


def read_state(path):
    with open(path, "rb") as fh:
        header = fh.readline().decode().strip()
        if not header.startswith("dims:"):
            raise ValueError("missing dims header")
        dims = [int(t) for t in header[5:].split()]
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != int(np.prod(dims)):
        raise ValueError("payload length does not match dims header")
    return data.astype(complex), dims


def graph_state_fidelity(graph, coloring, delta):
    """|<psi(delta)| Z(theta) |G>_encoded| with theta fitted from the projection."""
    psi = build_psi(graph, coloring, delta)
    _, thetas = project_and_fit(psi, graph, coloring)
    return fidelity(psi, encoded_graph_state(graph, coloring, thetas=thetas))
