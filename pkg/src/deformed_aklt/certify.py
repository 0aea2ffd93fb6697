"""Gap certificates from the spectrum of B^dagger B on an injective region."""
from dataclasses import asdict, dataclass, field
import math

import numpy as np
from scipy.linalg import polar

from .tensors import block_map, doubled_gram

GRID_POINTS = 21
BISECTION_TOL = 1e-4


class CertificationError(ValueError):
    pass


def mu0(r):
    """Threshold ratio 1/2 + 1/2 sqrt((r+1)/(r-1)) for r outgoing edges per region."""
    if int(r) != r or r < 2:
        raise ValueError(f"r must be an integer >= 2, got {r}")
    return 0.5 + 0.5 * math.sqrt((r + 1) / (r - 1))


def stability_delta_prime(Delta, mu, r):
    """Gap parameter of the deformed terms: 1 - mu [1 - Delta + 2(r-1)(mu-1)]."""
    if not 0 < Delta <= 1:
        raise ValueError("Delta must lie in (0, 1]")
    if mu < 1:
        raise ValueError("mu must be >= 1")
    if r < 2:
        raise ValueError("r must be >= 2")
    return 1.0 - mu * (1.0 - Delta + 2.0 * (r - 1) * (mu - 1.0))


def _members(region):
    return tuple(sorted(getattr(region, "members", region)))


def btb_spectrum(graph, coloring, region, delta, method="doubled", rank_rtol=1e-10, scale=1.0):
    """(gamma_min, gamma_max) of B^dagger B for ``region``.

    ``method="doubled"`` contracts the doubled network; ``"dense"`` builds the
    block map first and multiplies.
    """
    if method == "doubled":
        G = doubled_gram(graph, coloring, _members(region), delta, scale)
    elif method == "dense":
        B = block_map(graph, coloring, _members(region), delta, scale).matrix
        G = B.conj().T @ B
    else:
        raise ValueError(f"unknown method {method!r}")
    w = np.linalg.eigvalsh((G + G.conj().T) / 2)
    if w[-1] <= 0 or w[0] <= rank_rtol * w[-1]:
        raise CertificationError("region is not injective: B^dagger B is singular")
    return float(w[0]), float(w[-1])


def lambda_mu(graph, coloring, region, delta):
    """Largest eigenvalue of Lambda^2, with Lambda = Q^-1 / gamma from B = Q W.

    Q is the positive polar factor restricted to the image of B and gamma the
    smallest eigenvalue of Q^-1, so Lambda >= 1.
    """
    B = block_map(graph, coloring, _members(region), delta).matrix
    _, P = polar(B, side="left")
    q = np.linalg.eigvalsh((P + P.conj().T) / 2)[-B.shape[1]:]
    if q[0] <= 1e-10 * q[-1]:
        raise CertificationError("region is not injective: Q is singular")
    Lam = q[-1] / q          # eigenvalues of gamma^-1 Q^-1 on the image
    return float(np.max(Lam) ** 2)


@dataclass
class GapCertificate:
    lattice: str
    region: tuple
    r: int
    delta: float
    gamma_min: float
    gamma_max: float
    ratio: float
    mu0: float
    verdict: str
    tolerance: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["region"] = list(self.region)
        return d


def _region_r(graph, region):
    inside = set(_members(region))
    return sum((i in inside) != (j in inside) for i, j in graph.edges)


def certify(graph, coloring, region, delta, method="doubled"):
    r = _region_r(graph, region)
    g_min, g_max = btb_spectrum(graph, coloring, region, delta, method)
    threshold = mu0(r)
    ratio = g_max / g_min
    return GapCertificate(
        lattice=graph.kind, region=_members(region), r=r, delta=float(delta),
        gamma_min=g_min, gamma_max=g_max, ratio=ratio, mu0=threshold,
        verdict="certified_gapped" if ratio < threshold else "not_certified",
        tolerance={"rank_rtol": 1e-10, "method": method},
    )


def ratio_curve(graph, coloring, region, deltas, method="doubled"):
    out = []
    for d in deltas:
        g_min, g_max = btb_spectrum(graph, coloring, region, d, method)
        out.append(g_max / g_min)
    return np.array(out)


def find_delta_c(graph, coloring, region, tol=BISECTION_TOL, grid_points=GRID_POINTS, method="doubled"):
    """Largest delta with gamma_max/gamma_min < mu0(r), by bisection.

    The ratio is first scanned on a uniform grid over [0, 1]. Bisection runs
    only if the scan crosses the threshold and is monotone non-decreasing from
    0 up to the first grid point past the crossing. Returns (delta_c, (lo, hi)).
    """
    r = _region_r(graph, region)
    threshold = mu0(r) if r >= 2 else math.inf
    grid = np.linspace(0.0, 1.0, grid_points)
    f = ratio_curve(graph, coloring, region, grid, method) - threshold
    above = np.nonzero(f >= 0)[0]
    if f[0] >= 0 or above.size == 0:
        raise CertificationError("ratio - mu0 does not change sign on [0, 1]")
    hi_idx = above[0]
    if np.any(np.diff(f[: hi_idx + 1]) < -1e-12):
        raise CertificationError("ratio is not monotone below the crossing; refusing to bisect")
    lo, hi = float(grid[hi_idx - 1]), float(grid[hi_idx])

    def g(d):
        return ratio_curve(graph, coloring, region, [d], method)[0] - threshold

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), (lo, hi)
