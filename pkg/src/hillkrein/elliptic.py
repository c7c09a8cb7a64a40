"""Complete elliptic integrals and Jacobi elliptic functions.

Everything here is parametrized by the modulus ``k`` (never the parameter
``m = k**2``).  K and E come from the arithmetic-geometric mean, the Jacobi
functions from the descending Landen transformation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EllipticDomainError",
    "JacobiTriple",
    "complete_K",
    "complete_E",
    "dK_dk",
    "dE_dk",
    "jacobi",
]

_AGM_RTOL = 1e-15
_LANDEN_MAX_DEPTH = 16
_TRIG_LIMIT = 1e-8


class EllipticDomainError(ValueError):
    """Modulus outside the admissible interval."""


@dataclass(frozen=True)
class JacobiTriple:
    sn: np.ndarray
    cn: np.ndarray
    dn: np.ndarray


def _complementary(k: float) -> float:
    # sqrt(1 - k^2) without cancellation near k = 1
    return math.sqrt((1.0 - k) * (1.0 + k))


def _agm_sequence(k: float):
    """Return the AGM triples (a_n, b_n, c_n) started from (1, k', k)."""
    a, b, c = 1.0, _complementary(k), k
    seq = [(a, b, c)]
    for _ in range(64):
        if abs(a - b) <= _AGM_RTOL * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        seq.append((a, b, c))
    return seq


def complete_K(k: float) -> float:
    """Complete elliptic integral of the first kind, K(k) for 0 <= k < 1."""
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise EllipticDomainError(f"complete_K needs 0 <= k < 1, got k={k!r}")
    a = _agm_sequence(k)[-1][0]
    return math.pi / (2.0 * a)


def complete_E(k: float) -> float:
    """Complete elliptic integral of the second kind, E(k) for 0 <= k <= 1.

    Uses ``E = K * (1 - sum_n 2**(n-1) c_n**2)`` over the AGM sequence.
    """
    k = float(k)
    if not 0.0 <= k <= 1.0:
        raise EllipticDomainError(f"complete_E needs 0 <= k <= 1, got k={k!r}")
    if k == 1.0:
        return 1.0
    seq = _agm_sequence(k)
    s = sum(2.0 ** (n - 1) * c * c for n, (_, _, c) in enumerate(seq))
    return math.pi / (2.0 * seq[-1][0]) * (1.0 - s)


def dK_dk(k: float) -> float:
    """dK/dk = (E - (1-k^2) K) / (k (1-k^2)), for 0 < k < 1."""
    k = float(k)
    if not 0.0 < k < 1.0:
        raise EllipticDomainError(f"dK_dk needs 0 < k < 1, got k={k!r}")
    kp2 = (1.0 - k) * (1.0 + k)
    return (complete_E(k) - kp2 * complete_K(k)) / (k * kp2)


def dE_dk(k: float) -> float:
    """dE/dk = (E - K) / k, for 0 < k < 1."""
    k = float(k)
    if not 0.0 < k < 1.0:
        raise EllipticDomainError(f"dE_dk needs 0 < k < 1, got k={k!r}")
    return (complete_E(k) - complete_K(k)) / k


def jacobi(u, k: float) -> JacobiTriple:
    """Evaluate sn, cn, dn at ``u`` (scalar or array) for modulus ``k``.

    Descending Landen transformation; for k below 1e-8 the trigonometric
    limit (sin u, cos u, 1) is returned.
    """
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise EllipticDomainError(f"jacobi needs 0 <= k < 1, got k={k!r}")
    u = np.asarray(u, dtype=float)
    if k < _TRIG_LIMIT:
        return JacobiTriple(np.sin(u), np.cos(u), np.ones_like(u))

    seq = _agm_sequence(k)[: _LANDEN_MAX_DEPTH + 1]
    depth = len(seq) - 1
    phi = (2.0 ** depth) * seq[-1][0] * u
    for n in range(depth, 0, -1):
        a_n, _, c_n = seq[n]
        phi = 0.5 * (phi + np.arcsin(c_n / a_n * np.sin(phi)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    # cn / cos(phi_1 - phi_0) is 0/0 at odd multiples of K; dn >= k' > 0 here
    dn = np.sqrt(1.0 - k * k * sn * sn)
    return JacobiTriple(sn, cn, dn)
