"""Executable numerical checks of the structural claims about H(delta), H^B(delta)
and the graph-state limit, at sizes that fit in memory."""
from dataclasses import asdict, dataclass, field
from itertools import combinations
import json

import numpy as np
import scipy.sparse.linalg as spla
from scipy.linalg import polar

from .certify import stability_delta_prime
from .eigensolver import degeneracy_count, gap
from .hamiltonian import (assemble_H, assemble_HB, blocked_image, blocked_projector, embed,
                          grouped_term, logical_cz, orthonormal_image)
from .lattice import Region, build_lattice, coarse_grain, injective_covering, three_colouring
from .states import (build_psi, project_and_fit, qubit_graph_state, reduced_density,
                     stabilizer_reduced_density)
from .tensors import block_map

ALGEBRAIC_TOL = 1e-12
SOLVER_TOL = 1e-9
DENSE_LOCAL_CAP = 2048
DENSE_FALLBACK_CAP = 4096


class PreconditionError(ValueError):
    pass


@dataclass
class CheckReport:
    name: str
    claim: str
    passed: bool
    residual: float
    tolerance: float
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), default=_jsonable, sort_keys=True)

    def summary(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: residual={self.residual:.3e} (tol {self.tolerance:.1e})"


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


# ---------------------------------------------------------------------------

def is_nontrivial(graph):
    if min(graph.degree) < 2:
        return False, "a vertex has degree < 2"
    seen = {}
    for v in graph.vertices:
        key = tuple(graph.neighbours(v))
        if key in seen:
            return False, f"vertices {seen[key]} and {v} share the neighbour set {list(key)}"
        seen[key] = v
    return True, ""


def check_reduced_density(graph):
    """Every two-qubit marginal of a nontrivial graph state is I/4."""
    ok, why = is_nontrivial(graph)
    if not ok:
        raise PreconditionError(f"graph state is trivial: {why}")
    g = qubit_graph_state(graph)
    worst, worst_oracle = 0.0, 0.0
    for i, j in combinations(graph.vertices, 2):
        rho = reduced_density(g, [i, j], [2] * graph.N)
        worst = max(worst, float(np.abs(rho - np.eye(4) / 4).max()))
        if graph.N <= 10:
            worst_oracle = max(worst_oracle, float(np.abs(rho - stabilizer_reduced_density(graph, [i, j])).max()))
    residual = max(worst, worst_oracle)
    return CheckReport("reduced_density", "two-site marginals of nontrivial graph states are maximally mixed",
                       residual < ALGEBRAIC_TOL, residual, ALGEBRAIC_TOL,
                       {"lattice": graph.kind, "N": graph.N, "max_dev_from_I/4": worst,
                        "max_dev_from_stabilizer_sum": worst_oracle})


def check_gap_collapse(graph, coloring, deltas=(0.3, 0.1, 0.03, 0.01, 0.003), covering=None,
                       tol=1e-10, seed=0):
    """Finite-size gap of H(delta) shrinks as delta -> 0 while H^B(delta) stays gapped."""
    deltas = sorted(deltas, reverse=True)
    gaps = [gap(assemble_H(graph, coloring, d), tol, seed)[2] for d in deltas]
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    ratio = gaps[-1] / gaps[0]
    deg0 = degeneracy_count(assemble_H(graph, coloring, 0.0), 0.0, SOLVER_TOL)
    params = {"lattice": graph.kind, "N": graph.N, "deltas": deltas, "gaps": gaps,
              "ground_degeneracy_at_0": deg0, "strictly_decreasing": decreasing}
    passed = decreasing and ratio < 1 / 3 and deg0 >= 2 ** graph.N
    if covering is not None:
        hb = [gap(assemble_HB(graph, coloring, covering, d), tol, seed)[2] for d in deltas]
        params["blocked_gaps"] = hb
        params["blocked_no_collapse"] = bool(min(hb) > max(hb) / 3)
        passed = passed and params["blocked_no_collapse"]
    return CheckReport("gap_collapse", "two-body gap closes as the ground state approaches a graph state",
                       passed, ratio, 1 / 3, params)


def default_injectivity_regions(graph, covering=None):
    covering = covering if covering is not None else injective_covering(graph)
    regions = []
    if covering is not None:
        regions.append(covering.regions[0].members)
    v = next((u for u in graph.vertices if graph.degree[u] >= 2), 0)
    regions.append((v,))
    w = graph.neighbours(v)[0]
    regions.append(tuple(sorted((v, w))))
    return regions


def check_injectivity(graph, coloring, regions=None, deltas=(0.0, 0.5, 1.0)):
    """Block map has full rank 2^r exactly when each vertex has at most one outgoing edge."""
    regions = regions if regions is not None else default_injectivity_regions(graph)
    rows, mismatches, null_res = [], 0, 0.0
    for members in regions:
        reg = Region.from_members(graph, members)
        criterion = reg.satisfies_injectivity_criterion()
        for d in deltas:
            B = block_map(graph, coloring, reg.members, d)
            s = np.linalg.svd(B.matrix, compute_uv=False)
            rank = int(np.sum(s > 1e-10 * s[0]))
            full = rank == 2 ** reg.r
            mismatches += int(full != criterion)
            rows.append({"region": list(reg.members), "r": reg.r, "delta": d, "rank": rank,
                         "criterion": criterion})
        if not criterion:
            # antisymmetric input on two outgoing legs of one vertex is annihilated at delta = 1
            counts = {}
            for v, _ in reg.outgoing_edges:
                counts.setdefault(v, []).append(_)
            v = next(u for u, outs in counts.items() if len(outs) >= 2)
            B = block_map(graph, coloring, reg.members, 1.0)
            legs = [("v", v, graph.leg(v, (v, w))) for w in counts[v][:2]]
            x = np.zeros((2,) * len(B.in_labels), dtype=complex)
            pos = [B.in_labels.index(l) for l in legs]
            for a, b, sign in ((0, 1, 1), (1, 0, -1)):
                idx = [0] * len(B.in_labels)
                idx[pos[0]], idx[pos[1]] = a, b
                x[tuple(idx)] = sign
            null_res = max(null_res, float(np.linalg.norm(B.matrix @ x.ravel())))
    residual = float(mismatches) + null_res
    return CheckReport("injectivity", "region injective iff each vertex has at most one outgoing edge",
                       mismatches == 0 and null_res < ALGEBRAIC_TOL, residual, ALGEBRAIC_TOL,
                       {"lattice": graph.kind, "ranks": rows, "singlet_null_residual": null_res})


def check_conversion(graph, coloring, deltas=(0.0, 0.3, 1.0)):
    """Local logical projections map psi(delta) to a graph state up to Z rotations."""
    valid = coloring.is_valid(graph)
    fids, thetas = [], []
    for d in deltas:
        f, th = project_and_fit(build_psi(graph, coloring, d), graph, coloring)
        fids.append(f)
        thetas.append(th)
    residual = 1.0 - min(fids)
    params = {"lattice": graph.kind, "N": graph.N, "deltas": list(deltas), "fidelities": fids,
              "thetas": thetas, "colouring_valid": valid}
    if not valid:
        params["error"] = "configuration error: adjacent sites share a colour"
    return CheckReport("conversion", "projected psi(delta) equals a z-rotated graph state",
                       valid and residual <= SOLVER_TOL, residual, SOLVER_TOL, params)


def _edge_signature(graph, coloring, sites):
    pos = {v: k for k, v in enumerate(sites)}
    inner = sorted((pos[i], pos[j]) for i, j in graph.edges if i in pos and j in pos)
    outer = sorted(pos[i] if i in pos else pos[j] for i, j in graph.edges if (i in pos) != (j in pos))
    return tuple(coloring[v] for v in sites), tuple(inner), tuple(outer)


def representative_coarse_edges(graph, coloring, covering):
    """One coarse edge per distinct local structure (colours and edges of R_a u R_b)."""
    cg = coarse_grain(graph, covering)
    reps, seen = [], set()
    for a, b in cg.edges:
        sites = tuple(sorted(set(covering.regions[a].members) | set(covering.regions[b].members)))
        key = (_edge_signature(graph, coloring, sites), cg.degree(a), cg.degree(b))
        if key not in seen:
            seen.add(key)
            reps.append((a, b))
    return reps


def _sym_eigpair(op, n, which, seed=0, maxiter=60):
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    w, v = spla.eigsh(op, k=1, which=which, v0=v0, tol=1e-12, ncv=24, maxiter=maxiter)
    return float(w[0]), v[:, 0]


def local_term_spectrum(graph, coloring, covering, a, b, delta, zero_tol=SOLVER_TOL, seed=0):
    """Kernel and sandwich data for one grouped term h_ab against Pi^(a,b)."""
    h = grouped_term(graph, coloring, covering, a, b, delta).matrix
    U, _ = blocked_image(graph, coloring, covering.regions[a], covering.regions[b], delta)
    n, k_img = U.shape
    image_in_kernel = float(np.linalg.norm(h @ U))
    if n <= DENSE_LOCAL_CAP:
        w, V = np.linalg.eigh(h.toarray())
        kern = V[:, w < zero_tol]
        ker_dim = kern.shape[1]
        cross = float(np.linalg.norm(kern - U @ (U.conj().T @ kern))) if ker_dim else 0.0
        nz = w[w >= zero_tol]
        lam_min, lam_max = float(nz[0]), float(nz[-1])
        Pi = np.eye(n) - U @ U.conj().T
        low = float(np.linalg.eigvalsh(h.toarray() - lam_min * Pi)[0])
        high = float(np.linalg.eigvalsh(lam_max * Pi - h.toarray())[0])
    else:
        lam_max, vmax = _sym_eigpair(h, n, "LA", seed)
        c = lam_max + 1.0
        deflated = spla.LinearOperator((n, n), dtype=complex,
                                       matvec=lambda x: h @ x + c * (U @ (U.conj().T @ x)))
        try:
            lam_min, vmin = _sym_eigpair(deflated, n, "SA", seed)
            ker_dim = k_img + (1 if lam_min < zero_tol else 0)
        except spla.ArpackNoConvergence:
            # small delta clusters the low spectrum; fall back to a dense solve
            if n > DENSE_FALLBACK_CAP:
                raise
            w = np.linalg.eigvalsh(h.toarray())
            lam_min, vmin = float(w[int(np.argmax(w >= zero_tol))]), None
            ker_dim = int(np.sum(w < zero_tol))
        cross = image_in_kernel
        # with h U ~ 0, h is block diagonal w.r.t. ran U; Weyl bounds the sandwich
        # minima by the coupling norm plus the Ritz residuals
        coupling = 2 * image_in_kernel
        r_min = (float(np.linalg.norm(deflated @ vmin - lam_min * vmin)) if vmin is not None
                 else 1e-13 * lam_max)
        r_max = float(np.linalg.norm(h @ vmax - lam_max * vmax))
        low, high = -(coupling + r_min), -(coupling + r_max)
    return {"a": a, "b": b, "delta": delta, "dim": n, "kernel_dim_h": int(ker_dim),
            "kernel_dim_Pi": int(k_img), "image_in_kernel_residual": image_in_kernel,
            "cross_projection_residual": cross, "lambda_min": lam_min, "lambda_max": lam_max,
            "sandwich_lower": low, "sandwich_upper": high}


def check_block_equivalence(graph, coloring, covering, deltas=(0.1, 0.5, 1.0), trend_deltas=(0.3, 0.03),
                            edges=None, seed=0):
    """Grouped two-body terms share their kernel with the blocked projectors, and
    lambda_min Pi <= h_ab <= lambda_max Pi."""
    if any(d <= 0 for d in deltas):
        raise PreconditionError("block equivalence needs delta > 0")
    edges = edges if edges is not None else representative_coarse_edges(graph, coloring, covering)
    rows, ok, residual = [], True, 0.0
    for d in deltas:
        for a, b in edges:
            row = local_term_spectrum(graph, coloring, covering, a, b, d, seed=seed)
            rows.append(row)
            ok &= row["kernel_dim_h"] == row["kernel_dim_Pi"]
            ok &= row["cross_projection_residual"] < SOLVER_TOL and row["image_in_kernel_residual"] < SOLVER_TOL
            ok &= row["sandwich_lower"] >= -SOLVER_TOL and row["sandwich_upper"] >= -SOLVER_TOL
            residual = max(residual, -row["sandwich_lower"], -row["sandwich_upper"],
                           row["cross_projection_residual"])
    trend = []
    for d in sorted(trend_deltas, reverse=True):
        a, b = edges[0]
        trend.append((d, local_term_spectrum(graph, coloring, covering, a, b, d, seed=seed)["lambda_min"]))
    decreasing = all(y[1] < x[1] for x, y in zip(trend, trend[1:]))
    return CheckReport("block_equivalence", "grouped terms are sandwiched between multiples of the blocked projectors",
                       bool(ok and decreasing), max(residual, 0.0), SOLVER_TOL,
                       {"lattice": graph.kind, "terms": rows, "lambda_min_trend": trend,
                        "lambda_min_decreasing": decreasing})


def check_commuting_blocked(graph, coloring, covering, tol=1e-10, seed=0):
    """At delta = 0 the region-local CZ products make the blocked projectors commute."""
    dims = graph.physical_dims()
    cg = coarse_grain(graph, covering)
    internal = [e for a in cg.nodes for e in cg.internal_edges[a]]
    W = logical_cz(graph, coloring, tuple(graph.vertices), internal)
    raw, conj = [], []
    for a, b in cg.edges:
        P = blocked_projector(graph, coloring, covering.regions[a], covering.regions[b], 0.0)
        full = embed(P.matrix, P.sites, dims)
        raw.append(full)
        conj.append(W @ full @ W.conj().T)

    def worst(ops):
        out = 0.0
        for A, B in combinations(ops, 2):
            C = A @ B - B @ A
            out = max(out, float(abs(C).max()) if C.nnz else 0.0)
        return out

    comm, comm_raw = worst(conj), worst(raw)
    E0, E1, dgap, _ = gap(assemble_HB(graph, coloring, covering, 0.0), tol, seed)
    # product form of the conjugated ground state: pure marginals on each crossing edge
    phi = W @ build_psi(graph, coloring, 0.0)
    purity_def = 0.0
    for key, es in cg.crossing_edges.items():
        for j, k in es:
            rho = reduced_density(phi, [j, k], dims)
            purity_def = max(purity_def, abs(1.0 - float(np.trace(rho @ rho).real)))
    passed = comm < ALGEBRAIC_TOL and dgap >= 1 - SOLVER_TOL and purity_def < 1e-10
    return CheckReport("commuting_blocked", "conjugated blocked projectors commute and H^B(0) has unit gap",
                       passed, max(comm, purity_def), ALGEBRAIC_TOL,
                       {"lattice": graph.kind, "max_commutator": comm, "max_commutator_unconjugated": comm_raw,
                        "unconjugated_commute": comm_raw < ALGEBRAIC_TOL, "HB0_gap": dgap, "HB0_E0": E0,
                        "product_form_purity_defect": purity_def})


def _embed_pair(term, sites, union, dims):
    pos = {v: k for k, v in enumerate(union)}
    return embed(np.asarray(term), [pos[s] for s in sites], [dims[v] for v in union]).toarray()


def check_sufficient_condition(term_a, term_b, r, Delta, dims=None):
    """h1 h2 + h2 h1 >= -(1 - Delta)/(2(r - 1)) (h1 + h2) for two terms sharing one site.

    ``term_a`` and ``term_b`` are (matrix, sites) pairs; ``dims`` maps site ->
    local dimension (default 2).
    """
    (h1, s1), (h2, s2) = term_a, term_b
    shared = set(s1) & set(s2)
    if len(shared) != 1:
        raise PreconditionError("terms must overlap on exactly one site")
    union = tuple(sorted(set(s1) | set(s2)))
    dims = dims or {v: 2 for v in union}
    A = _embed_pair(h1, s1, union, dims)
    B = _embed_pair(h2, s2, union, dims)
    M = A @ B + B @ A + (1 - Delta) / (2 * (r - 1)) * (A + B)
    m = float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0])
    return CheckReport("sufficient_condition", "anticommutator bound on overlapping terms",
                       m >= -SOLVER_TOL, max(0.0, -m), SOLVER_TOL, {"r": r, "Delta": Delta, "min_eig": m})


def random_projector(dim, rank, rng):
    X = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    Q, _ = np.linalg.qr(X)
    return Q @ Q.conj().T


def lambda_operator(graph, coloring, region, delta):
    """Lambda = gamma^-1 Q^-1 on img B (identity elsewhere) and mu = max eig Lambda^2."""
    B = block_map(graph, coloring, tuple(region), delta).matrix
    _, P = polar(B, side="left")
    w, V = np.linalg.eigh((P + P.conj().T) / 2)
    n = B.shape[1]
    q, Vi = w[-n:], V[:, -n:]
    Lam = Vi @ np.diag(q[-1] / q) @ Vi.conj().T + np.eye(B.shape[0]) - Vi @ Vi.conj().T
    return Lam, float((q[-1] / q[0]) ** 2)


def deformed_terms(graph, coloring, covering, a, b, c, delta):
    """Commuting h_ab, h_bc and their Lambda-conjugates h'_ab, h'_bc.

    h_xy projects out the image of (Lambda_x (x) Lambda_y) B^(x,y). The regions
    must be listed in vertex order so the union basis factorises as x then y.
    """
    regs = {k: covering.regions[k].members for k in (a, b, c)}
    lams = {k: lambda_operator(graph, coloring, regs[k], delta) for k in regs}
    out = []
    for x, y in ((a, b), (b, c)):
        union = tuple(sorted(regs[x] + regs[y]))
        if union != tuple(regs[x]) + tuple(regs[y]):
            raise PreconditionError("regions must be consecutive in vertex order")
        LL = np.kron(lams[x][0], lams[y][0])
        U = orthonormal_image(LL @ block_map(graph, coloring, union, delta).matrix)
        h = np.eye(U.shape[0]) - U @ U.conj().T
        out.append((h, LL @ h @ LL, (x, y)))
    mu = max(v[1] for v in lams.values())
    dims = {k: lams[k][0].shape[0] for k in regs}
    return out, mu, dims


def stability_suite(delta=0.1, seed=0):
    """Commuting pair (pass), Lambda-deformed ring terms at Delta' (pass) and a
    random projector pair at Delta = 1 (must fail)."""
    rng = np.random.default_rng(seed)
    P = np.diag([0.0, 0.0, 0.0, 1.0])
    commuting = check_sufficient_condition((P, (0, 1)), (P, (1, 2)), 3, 1.0)

    g = build_lattice("ring", (6, 1))
    col = three_colouring(g)
    cov = injective_covering(g)
    ((h1, hp1, s1), (h2, hp2, s2)), mu, dims = deformed_terms(g, col, cov, 0, 1, 2, delta)
    r = coarse_grain(g, cov).degree(1)
    Dp = stability_delta_prime(1.0, mu, r)
    deformed = check_sufficient_condition((hp1, s1), (hp2, s2), r, Dp, dims)
    I = np.eye(dims[2])
    A, B = np.kron(h1, I), np.kron(np.eye(dims[0]), h2)
    undeformed_comm = float(np.abs(A @ B - B @ A).max())

    negative = check_sufficient_condition((random_projector(4, 2, rng), (0, 1)),
                                          (random_projector(4, 2, rng), (1, 2)), 3, 1.0)
    passed = commuting.passed and deformed.passed and not negative.passed and Dp > 0
    return CheckReport("sufficient_condition", "anticommutator bound holds for commuting and Lambda-deformed terms",
                       passed, max(commuting.residual, deformed.residual), SOLVER_TOL,
                       {"commuting_min_eig": commuting.params["min_eig"],
                        "deformed_delta": delta, "mu": mu, "r": r, "Delta_prime": Dp,
                        "deformed_min_eig": deformed.params["min_eig"],
                        "undeformed_commutator": undeformed_comm,
                        "negative_witness_min_eig": negative.params["min_eig"],
                        "negative_witness_fails": not negative.passed})


SUITES = {
    "reduced-density": ("reduced_density",),
    "gap-collapse": ("gap_collapse",),
    "injectivity": ("injectivity",),
    "conversion": ("conversion",),
    "block-equivalence": ("block_equivalence",),
    "commuting-blocked": ("commuting_blocked",),
    "sufficient-condition": ("sufficient_condition",),
}
SUITES["lemmas"] = ("reduced_density", "injectivity", "conversion", "commuting_blocked",
                    "sufficient_condition")
SUITES["all"] = ("reduced_density", "gap_collapse", "injectivity", "conversion",
                 "block_equivalence", "commuting_blocked", "sufficient_condition")

DEFAULT_LATTICE = {
    "reduced_density": ("ring", (6, 1)),
    "gap_collapse": ("ring", (6, 1)),
    "injectivity": ("honeycomb", (3, 3)),
    "conversion": ("ring", (6, 1)),
    "block_equivalence": ("ring", (6, 1)),
    "commuting_blocked": ("ring", (6, 1)),
}


def run_check(name, graph=None, seed=0):
    """Run one named check on ``graph`` or on its default instance."""
    if name == "sufficient_condition":
        return stability_suite(seed=seed)
    if graph is None:
        kind, dims = DEFAULT_LATTICE[name]
        graph = build_lattice(kind, dims)
    col = three_colouring(graph)
    if name == "reduced_density":
        return check_reduced_density(graph)
    if name == "gap_collapse":
        return check_gap_collapse(graph, col, covering=injective_covering(graph), seed=seed)
    if name == "injectivity":
        return check_injectivity(graph, col)
    if name == "conversion":
        return check_conversion(graph, col)
    cov = injective_covering(graph)
    if cov is None:
        raise PreconditionError(f"lattice {graph.kind!r} has no injective covering")
    if name == "block_equivalence":
        return check_block_equivalence(graph, col, cov, seed=seed)
    if name == "commuting_blocked":
        return check_commuting_blocked(graph, col, cov, seed=seed)
    raise KeyError(name)


def run_suite(suite, graph=None, seed=0):
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    return [run_check(n, graph, seed) for n in SUITES[suite]]
