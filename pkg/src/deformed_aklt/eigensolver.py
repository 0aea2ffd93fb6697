"""Lowest eigenvalues, spectral gaps and degeneracy counts of Hermitian operators."""
from dataclasses import dataclass, field
import logging

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

logger = logging.getLogger(__name__)

DEGENERACY_THRESHOLD = 1e-8
DENSE_CAP = 4096
AUTO_DENSE_CAP = 2048


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool
    seed: int
    method: str = "krylov"
    eigenvectors: np.ndarray = field(default=None, repr=False)


def _dense(op):
    if sp.issparse(op):
        return op.toarray()
    if isinstance(op, spla.LinearOperator):
        return op @ np.eye(op.shape[0], dtype=op.dtype)
    return np.asarray(op)


def _check_hermitian(M, tol=1e-10):
    if M.shape[0] != M.shape[1]:
        raise ValueError("operator is not square")
    scale = max(1.0, float(np.abs(M).max())) if M.size else 1.0
    if np.abs(M - M.conj().T).max() > tol * scale:
        raise ValueError("operator is not Hermitian")


def dense_eigs(op, k=None):
    M = _dense(op)
    _check_hermitian(M)
    w, V = np.linalg.eigh(M)
    k = len(w) if k is None else min(k, len(w))
    res = np.linalg.norm(M @ V[:, :k] - V[:, :k] * w[:k], axis=0)
    return SpectrumResult(w[:k], res, 1, True, None, "dense", V[:, :k])


def lowest_eigs(op, k=1, tol=1e-10, seed=0, maxiter=None, ncv=None):
    """k smallest eigenvalues by implicitly restarted Lanczos (ARPACK).

    The start vector is drawn from ``seed``. Non-convergence is reported in the
    result rather than raised.
    """
    n = op.shape[0]
    if k < 1:
        raise ValueError("k must be positive")
    if k >= n - 1:
        out = dense_eigs(op, k)
        out.seed = seed
        return out
    rng = np.random.default_rng(seed)
    dtype = getattr(op, "dtype", complex)
    v0 = rng.standard_normal(n)
    if np.issubdtype(dtype, np.complexfloating):
        v0 = v0 + 1j * rng.standard_normal(n)
    ncv = min(n, ncv or 4 * k + 20)
    maxiter = maxiter or 100 * n
    counter = {"n": 0}
    A = spla.aslinearoperator(op)

    def mv(x):
        counter["n"] += 1
        return A.matvec(x)

    L = spla.LinearOperator((n, n), matvec=mv, dtype=dtype)
    converged = True
    try:
        w, V = spla.eigsh(L, k=k, which="SA", v0=v0, ncv=ncv, tol=tol, maxiter=maxiter)
    except spla.ArpackNoConvergence as err:
        logger.warning("Krylov solver did not converge: %d of %d eigenpairs", len(err.eigenvalues), k)
        w, V = err.eigenvalues, err.eigenvectors
        converged = False
    order = np.argsort(w)
    w, V = w[order], V[:, order]
    res = np.array([np.linalg.norm(A.matvec(V[:, j]) - w[j] * V[:, j]) for j in range(len(w))])
    if converged and len(w) and res.max() > max(1e3 * tol, 1e-8) * max(1.0, abs(w).max()):
        converged = False
    return SpectrumResult(w, res, counter["n"], converged, seed, "krylov", V)


def gap(op, tol=1e-10, seed=0, method="auto", threshold=DEGENERACY_THRESHOLD, k=4):
    """(E0, E1, gap) where E1 is the lowest level more than ``threshold`` above E0.

    ``method`` is ``dense``, ``krylov`` or ``auto`` (dense up to AUTO_DENSE_CAP).
    Returns the SpectrumResult as a fourth element.
    """
    n = op.shape[0]
    if method == "auto":
        method = "dense" if n <= AUTO_DENSE_CAP else "krylov"
    if method == "dense":
        res = dense_eigs(op)
    elif method == "krylov":
        kk = min(k, n - 2)
        while True:
            res = lowest_eigs(op, kk, tol, seed)
            w = res.eigenvalues
            if len(w) and (w[-1] - w[0] > threshold or kk >= n - 2 or not res.converged):
                break
            kk = min(2 * kk, n - 2)
    else:
        raise ValueError(f"unknown method {method!r}")
    w = res.eigenvalues
    E0 = float(w[0])
    above = w[w > E0 + threshold]
    E1 = float(above[0]) if above.size else float("nan")
    return E0, E1, E1 - E0, res


def degeneracy_count(op, energy=0.0, threshold=DEGENERACY_THRESHOLD, cap=DENSE_CAP):
    """Number of eigenvalues within ``threshold`` of ``energy`` (dense solve)."""
    if op.shape[0] > cap:
        raise MemoryError(f"dimension {op.shape[0]} too large for reliable counting (cap {cap})")
    M = _dense(op)
    _check_hermitian(M)
    w = np.linalg.eigvalsh(M)
    return int(np.sum(np.abs(w - energy) <= threshold))


def min_eig(M):
    M = _dense(M)
    _check_hermitian(M)
    return float(np.linalg.eigvalsh(M)[0])
