import json

import numpy as np
import pytest

from deformed_aklt.lattice import Coloring, LatticeGraph, build_lattice, three_colouring
from deformed_aklt.verification import (PreconditionError, check_block_equivalence, check_commuting_blocked,
                                        check_conversion, check_gap_collapse, check_injectivity,
                                        check_reduced_density, check_sufficient_condition, deformed_terms,
                                        is_nontrivial, random_projector, run_suite, stability_suite)


def test_reduced_density_on_ring(ring6):
    rep = check_reduced_density(ring6[0])
    assert rep.passed and rep.residual < 1e-12


def test_reduced_density_precondition_on_four_ring():
    g = LatticeGraph.from_edges([(0, 1), (1, 2), (2, 3), (0, 3)])
    ok, why = is_nontrivial(g)
    assert not ok and "0" in why and "2" in why
    with pytest.raises(PreconditionError):
        check_reduced_density(g)


def test_reduced_density_precondition_on_leaf():
    with pytest.raises(PreconditionError):
        check_reduced_density(LatticeGraph.from_edges([(0, 1), (1, 2)]))


def test_gap_collapse_ring(ring6):
    g, col, cov = ring6
    rep = check_gap_collapse(g, col, covering=cov)
    assert rep.passed
    assert rep.params["ground_degeneracy_at_0"] == 64
    assert min(rep.params["blocked_gaps"]) > 0.9


def test_gap_collapse_fails_on_a_rising_grid(ring6):
    g, col, _ = ring6
    rep = check_gap_collapse(g, col, deltas=(0.5, 0.6))
    assert not rep.passed


def test_injectivity_both_directions(honeycomb33, star11):
    g, col, _ = honeycomb33
    rep = check_injectivity(g, col)
    assert rep.passed
    single = [r for r in rep.params["ranks"] if r["region"] == [0]]
    assert all(r["rank"] < 8 for r in single)
    assert rep.params["singlet_null_residual"] < 1e-12
    g, col, cov = star11
    rep = check_injectivity(g, col, regions=[cov.regions[0].members])
    assert rep.passed and all(r["rank"] == 8 for r in rep.params["ranks"])


def test_square_lattice_rank_jumps_off_zero():
    g = build_lattice("square", (3, 3))
    col = three_colouring(g)
    rep = check_injectivity(g, col, regions=[(0, 1, 3, 4)])
    ranks = {r["delta"]: r["rank"] for r in rep.params["ranks"]}
    assert ranks[0.0] < ranks[0.5]


def test_conversion_and_invalid_colouring(ring6):
    g, col, _ = ring6
    assert check_conversion(g, col).passed
    bad = Coloring(("x", "x", "y", "z", "x", "y"))
    rep = check_conversion(g, bad, deltas=(0.3,))
    assert not rep.passed and not rep.params["colouring_valid"]


def test_block_equivalence_ring(ring6):
    g, col, cov = ring6
    rep = check_block_equivalence(g, col, cov)
    assert rep.passed and rep.params["lambda_min_decreasing"]
    for row in rep.params["terms"]:
        assert row["kernel_dim_h"] == row["kernel_dim_Pi"] == 4


def test_block_equivalence_needs_positive_delta(ring6):
    g, col, cov = ring6
    with pytest.raises(PreconditionError):
        check_block_equivalence(g, col, cov, deltas=(0.0,))


def test_commuting_blocked_ring(ring6):
    g, col, cov = ring6
    rep = check_commuting_blocked(g, col, cov)
    assert rep.passed and rep.params["max_commutator"] < 1e-12 and rep.params["HB0_gap"] > 1 - 1e-9


def test_sufficient_condition_cases():
    P = np.diag([0.0, 0.0, 0.0, 1.0])
    assert check_sufficient_condition((P, (0, 1)), (P, (1, 2)), 3, 1.0).passed
    rng = np.random.default_rng(0)
    rep = check_sufficient_condition((random_projector(4, 2, rng), (0, 1)),
                                     (random_projector(4, 2, rng), (1, 2)), 3, 1.0)
    assert not rep.passed
    with pytest.raises(PreconditionError):
        check_sufficient_condition((P, (0, 1)), (P, (2, 3)), 3, 1.0)


def test_deformed_terms_commute_before_conjugation(ring6):
    g, col, cov = ring6
    (t1, t2), mu, dims = deformed_terms(g, col, cov, 0, 1, 2, 0.2)
    A = np.kron(t1[0], np.eye(dims[2]))
    B = np.kron(np.eye(dims[0]), t2[0])
    assert np.abs(A @ B - B @ A).max() < 1e-12 and mu > 1


def test_stability_suite():
    rep = stability_suite()
    assert rep.passed and rep.params["Delta_prime"] > 0 and rep.params["negative_witness_fails"]


def test_reports_are_reproducible_and_serialisable():
    a = [r.to_json() for r in run_suite("lemmas")]
    b = [r.to_json() for r in run_suite("lemmas")]
    assert a == b
    assert all("claim" in json.loads(s) for s in a)
    with pytest.raises(KeyError):
        run_suite("nope")
