"""Finite patches of three-colourable lattices, colourings and injective coverings."""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
import sys

KINDS = ("ring", "honeycomb", "star", "square_octagon", "cross", "square", "custom")
BOUNDARIES = ("periodic", "open")
COLOURS = ("x", "y", "z")


@dataclass(frozen=True)
class LatticeGraph:
    """Undirected simple graph with per-vertex spin S_v = degree/2.

    Vertex ids are dense integers in row-major unit-cell order. ``edges`` holds
    sorted pairs (i, j) with i < j.
    """

    n_vertices: int
    edges: tuple
    kind: str = "custom"
    boundary: str = "periodic"
    dims: tuple = (1, 1)
    degree: tuple = field(init=False)
    spin: tuple = field(init=False)

    def __post_init__(self):
        edges = tuple(sorted(tuple(sorted(map(int, e))) for e in self.edges))
        seen = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise ValueError(f"edge ({i}, {j}) has an endpoint outside 0..{self.n_vertices - 1}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        if self.kind not in KINDS:
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        deg = [0] * self.n_vertices
        for i, j in edges:
            deg[i] += 1
            deg[j] += 1
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "degree", tuple(deg))
        object.__setattr__(self, "spin", tuple(Fraction(d, 2) for d in deg))

    @classmethod
    def from_edges(cls, edges, n_vertices=None):
        edges = list(edges)
        if n_vertices is None:
            n_vertices = 1 + max(max(e) for e in edges)
        return cls(n_vertices, tuple(edges), kind="custom", boundary="open", dims=(n_vertices, 1))

    @property
    def vertices(self):
        return list(range(self.n_vertices))

    @property
    def N(self):
        return self.n_vertices

    def neighbours(self, v):
        return sorted([j for i, j in self.edges if i == v] + [i for i, j in self.edges if j == v])

    def incident_edges(self, v):
        """Edges touching ``v`` in sorted order; the position is the virtual-leg id."""
        return [e for e in self.edges if v in e]

    def leg(self, v, edge):
        return self.incident_edges(v).index(tuple(sorted(edge)))

    def physical_dims(self):
        return [int(2 * s + 1) for s in self.spin]

    def is_connected(self, subset=None):
        verts = set(self.vertices if subset is None else subset)
        if not verts:
            return False
        start = min(verts)
        stack, seen = [start], {start}
        while stack:
            v = stack.pop()
            for w in self.neighbours(v):
                if w in verts and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == verts


@dataclass(frozen=True)
class Coloring:
    colour: tuple

    def __getitem__(self, v):
        return self.colour[v]

    def __len__(self):
        return len(self.colour)

    def is_valid(self, graph):
        return len(self.colour) == graph.N and all(self.colour[i] != self.colour[j] for i, j in graph.edges)


@dataclass(frozen=True)
class Region:
    members: tuple
    outgoing_edges: tuple

    @property
    def r(self):
        return len(self.outgoing_edges)

    @classmethod
    def from_members(cls, graph, members):
        members = tuple(sorted(set(members)))
        if any(not 0 <= v < graph.N for v in members):
            raise ValueError("region member outside the graph")
        inside = set(members)
        out = []
        for i, j in graph.edges:
            if (i in inside) != (j in inside):
                out.append((i, j) if i in inside else (j, i))
        return cls(members, tuple(sorted(out)))

    def satisfies_injectivity_criterion(self):
        counts = {}
        for v, _ in self.outgoing_edges:
            counts[v] = counts.get(v, 0) + 1
        return all(c <= 1 for c in counts.values())


@dataclass(frozen=True)
class InjectiveCovering:
    regions: tuple
    uniform_r: int

    def region_of(self):
        return {v: a for a, reg in enumerate(self.regions) for v in reg.members}


@dataclass(frozen=True)
class CoarseGraph:
    nodes: tuple
    edges: tuple
    crossing_edges: dict
    internal_edges: dict

    def degree(self, a):
        return sum(a in e for e in self.edges)


# ---------------------------------------------------------------------------
# unit cells: (sites per cell, bonds (site_a, site_b, dx, dy))

def _honeycomb_cell():
    return 2, [(0, 1, 0, 0), (0, 1, -1, 0), (0, 1, 0, -1)]


def _star_cell():
    # honeycomb with each site replaced by a triangle; bond k joins a_k to b_k
    bonds = [(0, 1, 0, 0), (1, 2, 0, 0), (0, 2, 0, 0),
             (3, 4, 0, 0), (4, 5, 0, 0), (3, 5, 0, 0)]
    for k, (dx, dy) in enumerate([(0, 0), (-1, 0), (0, -1)]):
        bonds.append((k, 3 + k, dx, dy))
    return 6, bonds


def _square_octagon_cell():
    # rotated square t=0, r=1, b=2, l=3; r joins l of the right cell, t joins b above
    bonds = [(0, 1, 0, 0), (1, 2, 0, 0), (2, 3, 0, 0), (0, 3, 0, 0),
             (1, 3, 1, 0), (0, 2, 0, 1)]
    return 4, bonds


def _cross_cell():
    # honeycomb with sites replaced by hexagons and bonds by squares
    bonds = []
    for h in (0, 6):
        bonds += [(h + k, h + (k + 1) % 6, 0, 0) for k in range(6)]
    for k, (dx, dy) in enumerate([(0, 0), (-1, 0), (0, -1)]):
        bonds.append((2 * k, 6 + 2 * k + 1, dx, dy))
        bonds.append((2 * k + 1, 6 + 2 * k, dx, dy))
    return 12, bonds


def _square_cell():
    return 1, [(0, 0, 1, 0), (0, 0, 0, 1)]


_CELLS = {
    "honeycomb": _honeycomb_cell,
    "star": _star_cell,
    "square_octagon": _square_octagon_cell,
    "cross": _cross_cell,
    "square": _square_cell,
}


def _cell_index(nx, ny, i, j):
    return j * nx + i


def build_lattice(kind, dims=(1, 1), boundary="periodic"):
    """Build a finite patch of a lattice.

    ``dims`` counts unit cells (nx, ny); for ``ring`` only nx is used and gives
    the number of sites.
    """
    if boundary not in BOUNDARIES:
        raise ValueError(f"unknown boundary {boundary!r}")
    dims = tuple(int(d) for d in dims)
    if len(dims) == 1:
        dims = (dims[0], 1)
    if len(dims) != 2 or min(dims) < 1:
        raise ValueError(f"dims must be two positive integers, got {dims}")
    nx, ny = dims

    if kind == "ring":
        if nx < 3:
            raise ValueError("a ring needs at least 3 sites")
        if boundary == "periodic" and nx % 3:
            raise ValueError("periodic ring length must be divisible by 3 to be three-coloured")
        edges = [(i, i + 1) for i in range(nx - 1)]
        if boundary == "periodic":
            edges.append((0, nx - 1))
        return LatticeGraph(nx, tuple(edges), kind="ring", boundary=boundary, dims=(nx, 1))

    if kind not in _CELLS:
        raise ValueError(f"unsupported lattice kind {kind!r}")
    n_sites, bonds = _CELLS[kind]()
    edges = []
    for j, i in product(range(ny), range(nx)):
        for a, b, dx, dy in bonds:
            ti, tj = i + dx, j + dy
            if boundary == "open" and not (0 <= ti < nx and 0 <= tj < ny):
                continue
            u = _cell_index(nx, ny, i, j) * n_sites + a
            v = _cell_index(nx, ny, ti % nx, tj % ny) * n_sites + b
            edges.append((u, v))
    canon = [tuple(sorted(e)) for e in edges]
    if any(u == v for u, v in canon) or len(set(canon)) != len(canon):
        raise ValueError(f"dims {dims} too small for a {boundary} {kind} lattice: wraparound creates "
                         "self-loops or duplicate edges")
    return LatticeGraph(nx * ny * n_sites, tuple(canon), kind=kind, boundary=boundary, dims=dims)


# ---------------------------------------------------------------------------
# colourings

def _canonical_colouring(graph):
    nx, ny = graph.dims
    if graph.kind == "ring":
        if graph.N % 3 == 0:
            return [COLOURS[v % 3] for v in graph.vertices]
        return None
    if graph.kind == "star":
        # triangle a_k gets colour k, b_k gets colour k+1: every triangle is xyz
        cell = [COLOURS[k] for k in range(3)] + [COLOURS[(k + 1) % 3] for k in range(3)]
        return [cell[v % 6] for v in graph.vertices]
    if graph.kind == "honeycomb":
        # sublattice colouring keeps every hexagon region identical
        return ["x" if v % 2 == 0 else "y" for v in graph.vertices]
    return None


def three_colouring(graph):
    """Deterministic proper colouring with labels x, y, z.

    Known lattice kinds use a fixed unit-cell pattern when it is valid; otherwise
    an exhaustive backtracking search in vertex order is used.
    """
    canon = _canonical_colouring(graph)
    if canon is not None:
        col = Coloring(tuple(canon))
        if col.is_valid(graph):
            return col
    nbrs = [graph.neighbours(v) for v in graph.vertices]
    colour = [None] * graph.N

    def assign(v):
        if v == graph.N:
            return True
        for c in COLOURS:
            if all(colour[w] != c for w in nbrs[v]):
                colour[v] = c
                if assign(v + 1):
                    return True
        colour[v] = None
        return False

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * graph.N + 100))
    try:
        ok = assign(0)
    finally:
        sys.setrecursionlimit(limit)
    if not ok:
        raise ValueError("graph is not three-colourable")
    return Coloring(tuple(colour))


# ---------------------------------------------------------------------------
# coverings

def _canonical_regions(graph):
    nx, ny = graph.dims
    if graph.kind == "ring":
        if graph.boundary != "periodic" or graph.N % 2:
            return None
        return [(v, v + 1) for v in range(0, graph.N, 2)]
    if graph.kind == "star":
        return [tuple(range(6 * c + 3 * t, 6 * c + 3 * t + 3)) for c in range(nx * ny) for t in (0, 1)]
    if graph.kind == "square_octagon":
        return [tuple(range(4 * c, 4 * c + 4)) for c in range(nx * ny)]
    if graph.kind == "cross":
        return [tuple(range(12 * c + 6 * h, 12 * c + 6 * h + 6)) for c in range(nx * ny) for h in (0, 1)]
    if graph.kind == "honeycomb":
        if graph.boundary != "periodic" or nx % 3 or ny % 3:
            return None
        regions = []
        for j, i in product(range(ny), range(nx)):
            if (i + 2 * j) % 3:
                continue

            def A(di, dj):
                return 2 * _cell_index(nx, ny, (i + di) % nx, (j + dj) % ny)

            def B(di, dj):
                return A(di, dj) + 1

            regions.append((A(0, 0), B(0, 0), A(0, 1), B(-1, 1), A(-1, 1), B(-1, 0)))
        return regions
    return None


def injective_covering(graph):
    """Canonical injective covering, or None when the lattice has none."""
    regions = _canonical_regions(graph)
    if regions is None:
        return None
    regs = tuple(Region.from_members(graph, m) for m in regions)
    cover = set()
    for reg in regs:
        if cover & set(reg.members) or not reg.satisfies_injectivity_criterion():
            return None
        if not graph.is_connected(reg.members):
            return None
        cover |= set(reg.members)
    if cover != set(graph.vertices):
        return None
    rs = {reg.r for reg in regs}
    if len(rs) != 1:
        return None
    return InjectiveCovering(regs, rs.pop())


def coarse_grain(graph, covering):
    owner = {}
    for a, reg in enumerate(covering.regions):
        for v in reg.members:
            if v in owner:
                raise ValueError(f"vertex {v} appears in two regions")
            owner[v] = a
    if set(owner) != set(graph.vertices):
        raise ValueError("covering does not cover every vertex")
    crossing, internal = {}, {a: [] for a in range(len(covering.regions))}
    for i, j in graph.edges:
        a, b = owner[i], owner[j]
        if a == b:
            internal[a].append((i, j))
        else:
            crossing.setdefault(tuple(sorted((a, b))), []).append((i, j))
    crossing = {k: tuple(v) for k, v in crossing.items()}
    internal = {k: tuple(v) for k, v in internal.items()}
    return CoarseGraph(tuple(range(len(covering.regions))), tuple(sorted(crossing)), crossing, internal)
