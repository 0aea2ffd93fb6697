import math

import numpy as np
import pytest

from deformed_aklt.certify import (CertificationError, btb_spectrum, certify, find_delta_c, lambda_mu, mu0,
                                   ratio_curve, stability_delta_prime)
from deformed_aklt.lattice import build_lattice, injective_covering, three_colouring


def test_mu0_formula_and_limits():
    assert math.isclose(mu0(3), 0.5 + 0.5 * math.sqrt(2))
    vals = [mu0(r) for r in range(2, 40)]
    assert all(b < a for a, b in zip(vals, vals[1:])) and vals[-1] > 1
    for bad in (1, 0, 2.5):
        with pytest.raises(ValueError):
            mu0(bad)


def test_stability_formula():
    assert stability_delta_prime(1.0, 1.0, 3) == 1.0
    assert math.isclose(stability_delta_prime(0.5, 1.0, 4), 0.5)
    for args in ((0.0, 1.0, 3), (1.0, 0.9, 3), (1.0, 1.1, 1)):
        with pytest.raises(ValueError):
            stability_delta_prime(*args)


def test_ratio_is_one_at_zero_and_identity_gram(star11):
    g, col, cov = star11
    gmin, gmax = btb_spectrum(g, col, cov.regions[0], 0.0)
    assert abs(gmax / gmin - 1) < 1e-12


@pytest.mark.parametrize("delta", [0.2, 0.5, 0.9])
def test_doubled_and_dense_routes_agree(star11, delta):
    g, col, cov = star11
    a = btb_spectrum(g, col, cov.regions[0], delta, "doubled")
    b = btb_spectrum(g, col, cov.regions[0], delta, "dense")
    assert np.allclose(a, b, rtol=1e-12)
    with pytest.raises(ValueError):
        btb_spectrum(g, col, cov.regions[0], delta, "other")


def test_ratio_is_scale_free(star11):
    g, col, cov = star11
    a = btb_spectrum(g, col, cov.regions[0], 0.4)
    b = btb_spectrum(g, col, cov.regions[0], 0.4, scale=2.0)
    assert abs(a[1] / a[0] - b[1] / b[0]) < 1e-10


def test_polar_decomposition_route(star11):
    g, col, cov = star11
    gmin, gmax = btb_spectrum(g, col, cov.regions[0], 0.5)
    assert abs(lambda_mu(g, col, cov.regions[0], 0.5) - gmax / gmin) < 1e-10


def test_aklt_point_ratio_on_triangle(star11):
    g, col, cov = star11
    gmin, gmax = btb_spectrum(g, col, cov.regions[0], 1.0)
    assert abs(gmax / gmin - 5 / 3) < 1e-12


def test_non_injective_region_rejected(honeycomb33):
    g, col, _ = honeycomb33
    with pytest.raises(CertificationError):
        btb_spectrum(g, col, (0,), 0.0)


def test_certify_verdicts(star11):
    g, col, cov = star11
    c = certify(g, col, cov.regions[0], 0.1)
    assert c.verdict == "certified_gapped" and c.r == 3 and c.ratio >= 1
    assert certify(g, col, cov.regions[0], 1.0).verdict == "not_certified"
    assert certify(g, col, cov.regions[0], 0.0).verdict == "certified_gapped"
    d = c.to_dict()
    assert d["region"] == [0, 1, 2] and set(d) >= {"gamma_min", "gamma_max", "mu0", "verdict"}


def test_bracket_is_consistent(star11):
    g, col, cov = star11
    dc, (lo, hi) = find_delta_c(g, col, cov.regions[0], tol=1e-5)
    assert hi - lo <= 1e-5 and lo <= dc <= hi
    assert certify(g, col, cov.regions[0], lo).verdict == "certified_gapped"
    assert certify(g, col, cov.regions[0], hi).verdict == "not_certified"


def test_threshold_values_per_region_type():
    sq = build_lattice("square_octagon", (2, 2))
    dc, _ = find_delta_c(sq, three_colouring(sq), injective_covering(sq).regions[0])
    assert abs(dc - 0.1341) < 5e-4
    ring = build_lattice("ring", (6, 1))
    dc, _ = find_delta_c(ring, three_colouring(ring), injective_covering(ring).regions[0])
    assert abs(dc - 0.463) < 1e-3


def test_single_site_has_no_crossing():
    g = build_lattice("ring", (3, 1), "open")
    col = three_colouring(g)
    # an end site has a single outgoing edge: the ratio never reaches an infinite threshold
    with pytest.raises(CertificationError):
        find_delta_c(g, col, (0,))


def test_ratio_curve_not_monotone_after_crossing(star11):
    g, col, cov = star11
    curve = ratio_curve(g, col, cov.regions[0], np.linspace(0.6, 1.0, 9))
    assert curve.max() > curve[-1]  # peaks before the AKLT point; bisection stays below the crossing
