"""Deformed two-body projectors Q(delta), H(delta), the cluster Hamiltonian and
blocked Hamiltonians built from region block maps."""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .spin import inverse_deformation, logical_encoding, pc_projector, total_spin_projector
from .tensors import block_map

RANK_RTOL = 1e-10
DENSE_CAP = 4096
SPARSE_CAP = 20_000_000


def numerical_rank(M, rtol=RANK_RTOL):
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def orthonormal_image(M, rtol=RANK_RTOL):
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    return U[:, s > rtol * s[0]]


def projector_onto(M, rtol=RANK_RTOL):
    U = orthonormal_image(M, rtol)
    return U @ U.conj().T


# ---------------------------------------------------------------------------
# two-site terms

def deformed_interaction(S_i, S_j, axis_i, axis_j, delta):
    """(D_i^-1 x D_j^-1) P^{S_i+S_j} (D_i^-1 x D_j^-1); needs delta > 0."""
    if delta <= 0:
        raise ValueError("deformed interaction is singular at delta = 0; use q_projector")
    Dinv = np.kron(inverse_deformation(S_i, axis_i, delta), inverse_deformation(S_j, axis_j, delta))
    P = total_spin_projector(S_i, S_j, Fraction(S_i) + Fraction(S_j))
    return Dinv @ P @ Dinv


def _reduce_columns(coeffs, tol=1e-12, max_iter=500):
    """Column-reduce a matrix polynomial sum_p delta^p coeffs[p].

    Returns (poly, val): poly has shape (degree+1, n, k) spanning the same
    column space for every delta > 0, and its leading columns poly[val[j], :, j]
    are linearly independent, so they span the delta -> 0+ limit.
    """
    poly = np.array(coeffs, dtype=complex)
    scale = max(np.abs(poly).max(), 1.0)
    k = poly.shape[2]
    for _ in range(max_iter):
        norms = np.linalg.norm(poly, axis=1)  # (P, k)
        val = []
        for j in range(k):
            nz = np.nonzero(norms[:, j] > tol * scale)[0]
            if nz.size == 0:
                raise ValueError("column vanishes identically; input columns are dependent")
            val.append(int(nz[0]))
        L = np.stack([poly[val[j], :, j] for j in range(k)], axis=1)
        _, s, Vh = np.linalg.svd(L)
        if s[-1] > 1e3 * tol * scale * max(1.0, s[0]):
            return poly, val
        c = Vh[-1].conj()
        involved = [j for j in range(k) if abs(c[j]) > 1e-8]
        top = max(involved, key=lambda j: (val[j], abs(c[j])))
        shifts = {j: val[top] - val[j] for j in involved}
        extra = max(shifts.values())
        new = np.zeros((poly.shape[0] + extra, poly.shape[1]), dtype=complex)
        for j in involved:
            new[shifts[j]:shifts[j] + poly.shape[0]] += c[j] * poly[:, :, j]
        new /= c[top]
        new[: val[top] + 1] = 0.0  # leading order cancels exactly
        if extra:
            poly = np.concatenate([poly, np.zeros((extra,) + poly.shape[1:], dtype=complex)], axis=0)
        poly[:, :, top] = new
    raise RuntimeError("column reduction did not terminate")


@lru_cache(maxsize=256)
def _q_reduced(S_i, S_j, axis_i, axis_j):
    S_i, S_j = Fraction(S_i), Fraction(S_j)
    P = total_spin_projector(S_i, S_j, S_i + S_j)
    V = orthonormal_image(P)
    Pi, Pj = pc_projector(S_i, axis_i), pc_projector(S_j, axis_j)
    Qi, Qj = np.eye(len(Pi)) - Pi, np.eye(len(Pj)) - Pj
    # delta^2 (D^-1 x D^-1) = delta^2 PP + delta (PQ + QP) + QQ
    coeffs = [np.kron(Qi, Qj) @ V, (np.kron(Pi, Qj) + np.kron(Qi, Pj)) @ V, np.kron(Pi, Pj) @ V]
    return _reduce_columns(coeffs)


def q_projector(S_i, S_j, axis_i, axis_j, delta):
    """Orthogonal projector Q(delta) onto the image of the deformed interaction.

    delta = 0 gives the delta -> 0+ limit.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    poly, val = _q_reduced(Fraction(S_i), Fraction(S_j), axis_i, axis_j)
    powers = np.arange(poly.shape[0])
    cols = []
    for j, v in enumerate(val):
        if delta == 0:
            cols.append(poly[v, :, j])
        else:
            w = np.where(powers >= v, float(delta) ** np.maximum(powers - v, 0), 0.0)
            # lower orders vanish by construction
            cols.append(np.tensordot(w, poly[:, :, j], axes=(0, 0)))
    M = np.stack(cols, axis=1)
    expected = int(2 * (Fraction(S_i) + Fraction(S_j)) + 1)
    U = orthonormal_image(M)
    if U.shape[1] != expected:
        raise ArithmeticError(f"Q rank {U.shape[1]} differs from expected {expected}")
    return U @ U.conj().T


# ---------------------------------------------------------------------------
# embedding

def _check_cap(dims, cap):
    total = int(np.prod(dims))
    if total > cap:
        raise MemoryError(f"Hilbert space dimension {total} exceeds cap {cap}")
    return total


def embed(op, sites, dims, cap=SPARSE_CAP):
    """Sparse matrix of ``op`` acting on ``sites`` (in that order) of a register with ``dims``."""
    dims = list(dims)
    total = _check_cap(dims, cap)
    sites = list(sites)
    strides = np.ones(len(dims), dtype=np.int64)
    for k in range(len(dims) - 2, -1, -1):
        strides[k] = strides[k + 1] * dims[k + 1]
    local_dims = [dims[s] for s in sites]
    nloc = int(np.prod(local_dims))
    op = op.toarray() if sp.issparse(op) else np.asarray(op)
    if op.shape != (nloc, nloc):
        raise ValueError(f"operator shape {op.shape} does not match local dims {local_dims}")
    idx = np.arange(total, dtype=np.int64)
    local = np.zeros(total, dtype=np.int64)
    offset = np.zeros(nloc, dtype=np.int64)
    lstr = 1
    for s, d in zip(reversed(sites), reversed(local_dims)):
        digit = (idx // strides[s]) % d
        local += digit * lstr
        lstr *= d
    for a in range(nloc):
        rem, off = a, 0
        for s, d in zip(reversed(sites), reversed(local_dims)):
            off += (rem % d) * strides[s]
            rem //= d
        offset[a] = off
    base = idx - offset[local]
    rows, cols, vals = [], [], []
    for b in range(nloc):
        cb = np.nonzero(local == b)[0]
        for a in np.nonzero(op[:, b])[0]:
            rows.append(base[cb] + offset[a])
            cols.append(cb)
            vals.append(np.full(cb.size, op[a, b]))
    if not rows:
        return sp.csr_matrix((total, total), dtype=complex)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(total, total), dtype=complex)


@dataclass(frozen=True)
class LocalTerm:
    """An operator supported on ``sites`` (sorted vertex ids) of a graph."""

    matrix: object
    sites: tuple
    delta: float = None

    @property
    def rank(self):
        M = self.matrix.toarray() if sp.issparse(self.matrix) else self.matrix
        return numerical_rank(M)

    def dense(self):
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.asarray(self.matrix)


def _edge_term(graph, coloring, edge, delta):
    i, j = edge
    return q_projector(graph.spin[i], graph.spin[j], coloring[i], coloring[j], delta)


def assemble_H(graph, coloring, delta, cap=SPARSE_CAP):
    """H(delta) = sum over edges of Q(delta)_ij on the full many-body space."""
    dims = graph.physical_dims()
    _check_cap(dims, cap)
    H = None
    for e in graph.edges:
        term = embed(_edge_term(graph, coloring, e, delta), e, dims, cap)
        H = term if H is None else H + term
    return H.tocsr()


_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


def stabilizer_generator(graph, i):
    """K_i = X_i prod_{j ~ i} Z_j as a sparse signed permutation on N qubits."""
    N = graph.N
    idx = np.arange(2 ** N, dtype=np.int64)
    bits = lambda v: (idx >> (N - 1 - v)) & 1
    parity = np.zeros(2 ** N, dtype=np.int64)
    for j in graph.neighbours(i):
        parity ^= bits(j)
    rows = idx ^ (1 << (N - 1 - i))
    # K_i|x> = (-1)^{sum_j x_j} |x xor e_i>, Z acts before X on other sites so order is irrelevant
    return sp.csr_matrix(((-1.0) ** parity, (rows, idx)), shape=(2 ** N, 2 ** N), dtype=complex)


def cluster_hamiltonian(graph, cap=SPARSE_CAP):
    """H^C = sum_i (I - K_i)/2 on N qubits."""
    _check_cap([2] * graph.N, cap)
    I = sp.identity(2 ** graph.N, dtype=complex, format="csr")
    H = sp.csr_matrix((2 ** graph.N, 2 ** graph.N), dtype=complex)
    for i in graph.vertices:
        H = H + 0.5 * (I - stabilizer_generator(graph, i))
    return H.tocsr()


# ---------------------------------------------------------------------------
# blocked Hamiltonian

def _members(region):
    return tuple(sorted(getattr(region, "members", region)))


def blocked_image(graph, coloring, region_a, region_b, delta):
    """Orthonormal basis of the image of the block map of R_a u R_b and its sites."""
    sites = tuple(sorted(set(_members(region_a)) | set(_members(region_b))))
    B = block_map(graph, coloring, sites, delta).matrix
    U = orthonormal_image(B)
    if U.shape[1] != B.shape[1]:
        raise ArithmeticError(f"block map of {sites} is not injective (rank {U.shape[1]} < {B.shape[1]})")
    return U, sites


def blocked_projector(graph, coloring, region_a, region_b, delta):
    """Projector onto the orthogonal complement of the image of B^(a,b)(delta)."""
    U, sites = blocked_image(graph, coloring, region_a, region_b, delta)
    if U.shape[0] > DENSE_CAP:
        raise MemoryError("local space too large for a dense projector; use blocked_image")
    return LocalTerm(np.eye(U.shape[0]) - U @ U.conj().T, sites, delta)


def assemble_HB(graph, coloring, covering, delta, cap=SPARSE_CAP):
    from .lattice import coarse_grain
    dims = graph.physical_dims()
    _check_cap(dims, cap)
    cg = coarse_grain(graph, covering)
    H = sp.csr_matrix((int(np.prod(dims)),) * 2, dtype=complex)
    for a, b in cg.edges:
        term = blocked_projector(graph, coloring, covering.regions[a], covering.regions[b], delta)
        H = H + embed(term.matrix, term.sites, dims, cap)
    return H.tocsr()


def grouped_term(graph, coloring, covering, a, b, delta):
    """h_ab: edges joining R_a and R_b at full weight plus each region's internal
    edges shared equally among that region's coarse-graph edges.

    With coarse degree equal to the number of outgoing edges r this is the usual
    1/r weighting; summing over coarse edges always reproduces H(delta).
    """
    from .lattice import coarse_grain
    cg = coarse_grain(graph, covering)
    key = tuple(sorted((a, b)))
    if key not in cg.crossing_edges:
        raise ValueError(f"regions {a} and {b} are not adjacent")
    sites = tuple(sorted(set(covering.regions[a].members) | set(covering.regions[b].members)))
    pos = {v: k for k, v in enumerate(sites)}
    dims = [graph.physical_dims()[v] for v in sites]
    weighted = [(e, 1.0) for e in cg.crossing_edges[key]]
    for c in key:
        w = 1.0 / cg.degree(c)
        weighted += [(e, w) for e in cg.internal_edges[c]]
    h = None
    for (i, j), w in weighted:
        t = w * embed(_edge_term(graph, coloring, (i, j), delta), (pos[i], pos[j]), dims)
        h = t if h is None else h + t
    return LocalTerm(h.tocsr(), sites, delta)


def logical_cz(graph, coloring, sites, edges):
    """W: product of logical CZ gates over ``edges``, acting on the register ``sites``.

    Each factor is I - 2 |1_L 1_L><1_L 1_L| with |1_L> = |-S>_c.
    """
    pos = {v: k for k, v in enumerate(sites)}
    dims = [graph.physical_dims()[v] for v in sites]
    total = int(np.prod(dims))
    W = sp.identity(total, dtype=complex, format="csr")
    for i, j in edges:
        pi = logical_encoding(graph.spin[i], coloring[i])[:, 1]
        pj = logical_encoding(graph.spin[j], coloring[j])[:, 1]
        v = np.kron(pi, pj)
        factor = np.eye(len(v)) - 2 * np.outer(v, v.conj())
        W = embed(factor, (pos[i], pos[j]), dims) @ W
    return W.tocsr()
