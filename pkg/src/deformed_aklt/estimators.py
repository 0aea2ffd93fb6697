"""scikit-learn style wrappers: a delta column in, spectral features out."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .certify import certify, find_delta_c
from .eigensolver import gap
from .hamiltonian import SPARSE_CAP, assemble_H
from .lattice import build_lattice, injective_covering, three_colouring
from .states import graph_state_fidelity

GAP_SCAN_COLUMNS = ("E0", "E1", "gap", "graph_fidelity", "converged")


def check_deltas(X):
    """Coerce deltas to a float column vector and require every entry in [0, 1]."""
    X = check_array(np.asarray(X, dtype=float).reshape(-1, 1) if np.ndim(X) <= 1 else X,
                    ensure_2d=True, dtype=float)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single delta column, got shape {X.shape}")
    if np.any(X < 0) or np.any(X > 1):
        raise ValueError("delta values must lie in [0, 1]")
    return X[:, 0]


def check_dims(dims):
    dims = tuple(int(d) for d in np.atleast_1d(dims))
    if len(dims) == 1:
        dims = (dims[0], 1)
    if len(dims) != 2 or min(dims) < 1:
        raise ValueError(f"dims must be one or two positive integers, got {dims}")
    return dims


class GapScanner(BaseEstimator, TransformerMixin):
    """Spectral gap of H(delta) along a column of deltas.

    ``fit`` builds the lattice and colouring; ``transform`` returns one row
    ``[E0, E1, gap, graph_fidelity, converged]`` per delta.
    """

    def __init__(self, lattice="ring", dims=(6, 1), boundary="periodic", tol=1e-10, seed=0,
                 method="auto", cap=SPARSE_CAP):
        self.lattice = lattice
        self.dims = dims
        self.boundary = boundary
        self.tol = tol
        self.seed = seed
        self.method = method
        self.cap = cap

    def fit(self, X=None, y=None):
        self.graph_ = build_lattice(self.lattice, check_dims(self.dims), self.boundary)
        self.coloring_ = three_colouring(self.graph_)
        return self

    def scan_point(self, delta):
        check_is_fitted(self, "graph_")
        H = assemble_H(self.graph_, self.coloring_, delta, self.cap)
        E0, E1, g, res = gap(H, self.tol, self.seed, self.method)
        fid = graph_state_fidelity(self.graph_, self.coloring_, delta)
        return [E0, E1, g, fid, float(res.converged)]

    def transform(self, X):
        check_is_fitted(self, "graph_")
        return np.array([self.scan_point(d) for d in check_deltas(X)], dtype=float).reshape(-1, 5)


class GapCertifier(BaseEstimator):
    """Threshold certificate on one injective region of a coverable lattice.

    ``fit`` locates delta_c; ``predict`` returns 1 where gamma_max/gamma_min < mu0.
    """

    def __init__(self, lattice="star", dims=(1, 1), boundary="periodic", region_index=0,
                 tol=1e-4, method="doubled"):
        self.lattice = lattice
        self.dims = dims
        self.boundary = boundary
        self.region_index = region_index
        self.tol = tol
        self.method = method

    def fit(self, X=None, y=None):
        self.graph_ = build_lattice(self.lattice, check_dims(self.dims), self.boundary)
        self.coloring_ = three_colouring(self.graph_)
        covering = injective_covering(self.graph_)
        if covering is None:
            raise ValueError(f"lattice {self.lattice!r} has no injective covering")
        self.region_ = covering.regions[self.region_index]
        self.delta_c_, self.bracket_ = find_delta_c(self.graph_, self.coloring_, self.region_,
                                                    self.tol, method=self.method)
        return self

    def certificates(self, X):
        check_is_fitted(self, "delta_c_")
        return [certify(self.graph_, self.coloring_, self.region_, d, self.method) for d in check_deltas(X)]

    def decision_function(self, X):
        """mu0 - ratio; positive means certified."""
        return np.array([c.mu0 - c.ratio for c in self.certificates(X)])

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)

    def transform(self, X):
        return np.array([[c.gamma_min, c.gamma_max, c.ratio] for c in self.certificates(X)])
