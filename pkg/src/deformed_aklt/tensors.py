"""Labelled dense tensors, the AKLT / graph-state site tensors and blocked maps."""
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .spin import coupled_states, deformation


@dataclass(frozen=True)
class DenseTensor:
    """Complex array with one hashable label per index.

    Labels used in this package are ``("p", site)`` for physical legs and
    ``("v", site, leg)`` for virtual legs; any hashable works for ``contract``.
    """

    data: np.ndarray
    labels: tuple

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate labels {self.labels}")
        if self.data.ndim != len(self.labels):
            raise ValueError("one label per index required")

    @property
    def dims(self):
        return self.data.shape

    def dim(self, label):
        return self.data.shape[self.labels.index(label)]

    def relabel(self, mapping):
        return DenseTensor(self.data, tuple(mapping.get(l, l) for l in self.labels))

    def transpose(self, labels):
        labels = tuple(labels)
        return DenseTensor(np.transpose(self.data, [self.labels.index(l) for l in labels]), labels)

    def to_matrix(self, row_labels, col_labels):
        t = self.transpose(tuple(row_labels) + tuple(col_labels))
        nr = int(np.prod([self.dim(l) for l in row_labels])) if row_labels else 1
        return t.data.reshape(nr, -1)


def contract(t1, t2, pairs=()):
    """Contract ``t1`` and ``t2`` over the given (label1, label2) pairs.

    Output labels are the uncontracted labels of ``t1`` followed by those of ``t2``.
    """
    pairs = list(pairs)
    ax1, ax2 = [], []
    for l1, l2 in pairs:
        if l1 not in t1.labels:
            raise KeyError(f"unknown label {l1!r} on first tensor")
        if l2 not in t2.labels:
            raise KeyError(f"unknown label {l2!r} on second tensor")
        if t1.dim(l1) != t2.dim(l2):
            raise ValueError(f"dimension mismatch on {l1!r}/{l2!r}: {t1.dim(l1)} vs {t2.dim(l2)}")
        ax1.append(t1.labels.index(l1))
        ax2.append(t2.labels.index(l2))
    rest1 = tuple(l for k, l in enumerate(t1.labels) if k not in ax1)
    rest2 = tuple(l for k, l in enumerate(t2.labels) if k not in ax2)
    if set(rest1) & set(rest2):
        raise ValueError(f"open labels collide: {set(rest1) & set(rest2)}")
    data = np.tensordot(t1.data, t2.data, axes=(ax1, ax2))
    return DenseTensor(data, rest1 + rest2)


def contract_network(tensors):
    """Contract a list of tensors over every label shared by exactly two of them.

    Greedy: repeatedly merge the connected pair with the smallest result.
    """
    tensors = list(tensors)
    if not tensors:
        raise ValueError("empty network")
    while len(tensors) > 1:
        best = None
        for a in range(len(tensors)):
            for b in range(a + 1, len(tensors)):
                shared = set(tensors[a].labels) & set(tensors[b].labels)
                if not shared:
                    continue
                size = np.prod([d for l, d in zip(tensors[a].labels, tensors[a].dims) if l not in shared]) * \
                    np.prod([d for l, d in zip(tensors[b].labels, tensors[b].dims) if l not in shared])
                if best is None or size < best[0]:
                    best = (size, a, b, shared)
        if best is None:
            # disconnected pieces: outer product
            a, b, shared = 0, 1, set()
        else:
            _, a, b, shared = best
        shared = sorted(shared, key=repr)
        merged = contract(tensors[a], tensors[b], [(l, l) for l in shared])
        tensors = [t for k, t in enumerate(tensors) if k not in (a, b)] + [merged]
    return tensors[0]


def aklt_site_tensor(d):
    """A[M, a_1..a_d]: d spin-1/2 particles coupled to total spin d/2.

    Virtual index 0 is m=+1/2, index 1 is m=-1/2. Built by coupling one
    spin-1/2 at a time with Clebsch-Gordan coefficients.
    """
    if not 1 <= d <= 6:
        raise ValueError(f"unsupported degree {d}")
    # T has shape (2S+1, 2, ..., 2) with S growing by 1/2 per step
    T = np.eye(2)
    S = Fraction(1, 2)
    for _ in range(d - 1):
        Snew = S + Fraction(1, 2)
        V = coupled_states(S, Fraction(1, 2), Snew)  # (dim_S*2, dim_Snew)
        V = V.reshape(int(2 * S + 1), 2, int(2 * Snew + 1))
        T = np.tensordot(V, T, axes=([0], [0]))  # (2, dim_Snew, 2...)
        T = np.moveaxis(T, 1, 0)
        # move the freshly coupled leg to the end
        T = np.moveaxis(T, 1, -1)
        S = Snew
    return T.astype(complex)


def aklt_site_tensor_closed_form(d):
    A = np.zeros((d + 1,) + (2,) * d, dtype=complex)
    for idx in np.ndindex(*(2,) * d):
        k = sum(idx)
        A[(k,) + idx] = 1 / np.sqrt(comb(d, k))
    return A


def graph_site_tensor(d):
    """C with C[0, 0..0] = C[1, 1..1] = 1."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    C = np.zeros((2,) * (d + 1), dtype=complex)
    C[(0,) * (d + 1)] = 1.0
    C[(1,) * (d + 1)] = 1.0
    return C


def singlet_edge():
    return np.array([[0, 1], [-1, 0]], dtype=complex)


def hadamard_edge():
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def z_rotation(theta):
    return np.diag([1.0, np.exp(1j * theta)])


def deformed_site_tensor(d, axis, delta):
    A = aklt_site_tensor(d)
    D = deformation(Fraction(d, 2), axis, delta)
    return np.tensordot(D, A, axes=([1], [0]))


# ---------------------------------------------------------------------------
# networks on graphs

def _site_tensors(graph, coloring, vertices, delta, scale=1.0):
    out = []
    for v in vertices:
        data = scale * deformed_site_tensor(graph.degree[v], coloring[v], delta)
        labels = (("p", v),) + tuple(("v", v, k) for k in range(graph.degree[v]))
        out.append(DenseTensor(data, labels))
    return out


def _edge_tensors(graph, edges):
    out = []
    for i, j in edges:
        out.append(DenseTensor(singlet_edge(), (("v", i, graph.leg(i, (i, j))), ("v", j, graph.leg(j, (i, j))))))
    return out


@dataclass(frozen=True)
class LinearMap:
    matrix: np.ndarray
    in_labels: tuple
    out_labels: tuple

    @property
    def shape(self):
        return self.matrix.shape


def _region_parts(graph, region):
    members = sorted(set(region))
    if not members:
        raise ValueError("empty region")
    if not graph.is_connected(members):
        raise ValueError("region is not connected")
    inside = set(members)
    interior = [e for e in graph.edges if e[0] in inside and e[1] in inside]
    open_legs = sorted(("v", v, graph.leg(v, e)) for e in graph.edges for v in e
                       if v in inside and (set(e) - {v}).pop() not in inside)
    return members, interior, open_legs


def block_map(graph, coloring, region, delta, scale=1.0):
    """Map from the outgoing virtual legs of ``region`` to its physical space.

    Output legs are ordered by vertex id; input legs by (vertex id, leg id).
    """
    members, interior, open_legs = _region_parts(graph, getattr(region, "members", region))
    net = _site_tensors(graph, coloring, members, delta, scale) + _edge_tensors(graph, interior)
    T = contract_network(net)
    out_labels = tuple(("p", v) for v in members)
    return LinearMap(T.to_matrix(out_labels, open_legs), tuple(open_legs), out_labels)


def doubled_gram(graph, coloring, region, delta, scale=1.0):
    """B^dagger B for a region, contracted site by site as a doubled network."""
    members, interior, open_legs = _region_parts(graph, getattr(region, "members", region))
    tensors = []
    for t in _site_tensors(graph, coloring, members, delta, scale):
        v = t.labels[0][1]
        bra = DenseTensor(t.data.conj(), tuple(("b",) + l for l in t.labels))
        # physical leg of bra carries label ("b", "p", v); pair it with the ket's physical leg
        E = contract(bra, t, [(("b", "p", v), ("p", v))])
        tensors.append(E)
    for e in _edge_tensors(graph, interior):
        tensors.append(e)
        tensors.append(DenseTensor(e.data.conj(), tuple(("b",) + l for l in e.labels)))
    T = contract_network(tensors)
    bra_legs = [("b",) + l for l in open_legs]
    return T.to_matrix(bra_legs, open_legs)
