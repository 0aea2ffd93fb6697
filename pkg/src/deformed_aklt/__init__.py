"""Deformed AKLT antiferromagnets on trivalent lattices: Hamiltonians, ground
states, spectral gaps and threshold gap certificates."""
from .certify import GapCertificate, btb_spectrum, certify, find_delta_c, lambda_mu, mu0, stability_delta_prime
from .eigensolver import gap, lowest_eigs
from .estimators import GapCertifier, GapScanner
from .hamiltonian import assemble_H, assemble_HB, blocked_projector, q_projector
from .lattice import build_lattice, coarse_grain, injective_covering, three_colouring
from .states import build_psi, fidelity, project_and_fit
from .verification import CheckReport, run_suite

__version__ = "0.1.0"
