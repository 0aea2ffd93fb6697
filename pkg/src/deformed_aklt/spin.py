"""Spin-S matrices, extremal axis states, projectors and Clebsch-Gordan coefficients.

Basis order for a spin-S particle is |M> with M = S, S-1, ..., -S, so that
index 0 is the highest-weight state along z.
"""
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np
from scipy.linalg import expm

AXES = ("x", "y", "z")
MAX_SPIN = 3


def _as_spin(S, max_spin=MAX_SPIN, min_spin=Fraction(1, 2)):
    twoS = 2 * Fraction(S).limit_denominator(1000)
    if twoS.denominator != 1 or twoS < 2 * min_spin or twoS > 2 * max_spin:
        raise ValueError(f"unsupported spin S={S}")
    return Fraction(int(twoS), 2)


def spin_dim(S):
    return int(2 * _as_spin(S) + 1)


def m_values(S):
    S = _as_spin(S, 2 * MAX_SPIN, 0)
    return [S - k for k in range(int(2 * S) + 1)]


@lru_cache(maxsize=None)
def _spin_operators(S):
    d = int(2 * S + 1)
    m = np.array([float(S - k) for k in range(d)])
    s = float(S)
    splus = np.zeros((d, d))
    for k in range(1, d):
        splus[k - 1, k] = math.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    sx = (splus + splus.T) / 2
    sy = (splus - splus.T) / 2j
    sz = np.diag(m)
    return sx.astype(complex), sy.astype(complex), sz.astype(complex)


def spin_operators(S):
    """Return (Sx, Sy, Sz) for spin ``S`` in the fixed descending-M basis."""
    return tuple(a.copy() for a in _spin_operators(_as_spin(S)))


def _rotation_to(S, axis):
    sx, sy, _ = _spin_operators(S)
    if axis == "z":
        return np.eye(sx.shape[0], dtype=complex)
    if axis == "x":
        return expm(-0.5j * np.pi * sy)
    if axis == "y":
        return expm(0.5j * np.pi * sx)
    raise ValueError(f"unknown axis {axis!r}")


def extremal_state(S, axis, sign):
    """Unit eigenvector of S^axis with eigenvalue sign*S.

    Phases follow from rotating |+-S>_z: exp(-i pi/2 Sy) for x and
    exp(+i pi/2 Sx) for y.
    """
    S = _as_spin(S)
    if sign not in (1, -1, "+", "-"):
        raise ValueError("sign must be +1 or -1")
    sign = 1 if sign in (1, "+") else -1
    d = int(2 * S + 1)
    v = np.zeros(d, dtype=complex)
    v[0 if sign > 0 else d - 1] = 1.0
    return _rotation_to(S, axis) @ v


def logical_encoding(S, axis):
    """dim x 2 isometry whose columns are |+S>_axis and |-S>_axis (logical 0, 1)."""
    return np.column_stack([extremal_state(S, axis, 1), extremal_state(S, axis, -1)])


def pc_projector(S, axis):
    E = logical_encoding(S, axis)
    return E @ E.conj().T


def deformation(S, axis, delta):
    """D(delta) = (1 - delta) P^axis + delta I."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    P = pc_projector(S, axis)
    return (1.0 - delta) * P + delta * np.eye(P.shape[0])


def inverse_deformation(S, axis, delta):
    if not 0.0 < delta <= 1.0:
        raise ValueError("D(delta) is singular unless 0 < delta <= 1")
    P = pc_projector(S, axis)
    return P + (np.eye(P.shape[0]) - P) / delta


def _fact(n):
    return math.factorial(int(n))


def clebsch_gordan(S1, S2, J, M, m1, m2):
    """<S1 m1; S2 m2 | J M> in the Condon-Shortley convention (Racah's formula).

    Evaluated exactly in rationals; only the final square root is floating point.
    """
    S1, S2, J = Fraction(S1), Fraction(S2), Fraction(J)
    M, m1, m2 = Fraction(M), Fraction(m1), Fraction(m2)
    for j, m in ((S1, m1), (S2, m2), (J, M)):
        if (2 * j).denominator != 1 or j < 0 or abs(m) > j or (j - m).denominator != 1:
            raise ValueError("invalid angular momentum quantum numbers")
    if not abs(S1 - S2) <= J <= S1 + S2 or (S1 + S2 - J).denominator != 1:
        raise ValueError(f"J={J} outside the coupling range of {S1} x {S2}")
    if M != m1 + m2:
        return 0.0
    pref = Fraction(
        (2 * J + 1) * _fact(J + S1 - S2) * _fact(J - S1 + S2) * _fact(S1 + S2 - J),
        _fact(S1 + S2 + J + 1),
    )
    pref *= (_fact(J + M) * _fact(J - M) * _fact(S1 - m1) * _fact(S1 + m1)
             * _fact(S2 - m2) * _fact(S2 + m2))
    total = Fraction(0)
    kmin = max(0, int(S2 - J - m1), int(S1 + m2 - J))
    kmax = min(int(S1 + S2 - J), int(S1 - m1), int(S2 + m2))
    for k in range(kmin, kmax + 1):
        den = (_fact(k) * _fact(S1 + S2 - J - k) * _fact(S1 - m1 - k) * _fact(S2 + m2 - k)
               * _fact(J - S2 + m1 + k) * _fact(J - S1 - m2 + k))
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0.0
    return float(np.sign(total)) * math.sqrt(pref * total * total)


def coupled_states(S1, S2, J):
    """Columns |J M> (M = J..-J) expanded in the product basis of S1 x S2."""
    ms1, ms2, Ms = m_values(S1), m_values(S2), m_values(J)
    out = np.zeros((len(ms1) * len(ms2), len(Ms)))
    for c, M in enumerate(Ms):
        for a, m1 in enumerate(ms1):
            m2 = M - m1
            if abs(m2) <= Fraction(S2):
                b = ms2.index(m2)
                out[a * len(ms2) + b, c] = clebsch_gordan(S1, S2, J, M, m1, m2)
    return out


def total_spin_projector(S1, S2, J):
    """Projector onto total spin J of two particles with spins S1 and S2."""
    V = coupled_states(S1, S2, J)
    return (V @ V.T).astype(complex)
