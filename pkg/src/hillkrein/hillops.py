"""Fourier discretization of Hill operators ``-d^2/dx^2 + omega + q(x)``.

Operators act on the full periodic space or on its odd / even subspace.  The
parity restrictions are Galerkin projections of the full matrix onto the
grid-orthonormal sine basis (n = 1..N/2-1) or cosine basis (n = 0..N/2), so
the odd and even spectra partition the full one exactly when q is even.

Vectors passed in and out of this module are always grid samples of length N;
the parity coordinates stay internal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import linalg

from .elliptic import complete_K, jacobi
from .grid import Grid
from .waves import Family, WaveDomainError, WaveProfile, wave_samples

__all__ = [
    "Parity",
    "ParityError",
    "NotInRange",
    "DiscreteOperator",
    "SpectralSummary",
    "parity_basis",
    "hill_operator",
    "assemble_hill",
    "spectral_summary",
    "analytic_cnoidal_eigs",
    "solve_on_range",
    "inv_quadratic_form",
]

DEFAULT_ZERO_TOL = 1e-6
_EVEN_TOL = 1e-10
_RANGE_TOL = 1e-8


class Parity(str, enum.Enum):
    FULL = "full"
    ODD = "odd"
    EVEN = "even"


class ParityError(ValueError):
    """Potential is not even, so the requested parity subspace is not invariant."""


class NotInRange(ValueError):
    """Right-hand side has a component along the operator kernel."""


def parity_basis(grid: Grid, parity) -> np.ndarray | None:
    """Columns orthonormal in R^N spanning the parity subspace (None for full)."""
    parity = Parity(parity)
    if parity is Parity.FULL:
        return None
    x = 2.0 * np.pi * grid.nodes / grid.L
    N = grid.N
    if parity is Parity.ODD:
        n = np.arange(1, N // 2)
        P = np.sin(np.outer(x, n)) * np.sqrt(2.0 / N)
    else:
        n = np.arange(0, N // 2 + 1)
        P = np.cos(np.outer(x, n)) * np.sqrt(2.0 / N)
        P[:, 0] /= np.sqrt(2.0)
        P[:, -1] /= np.sqrt(2.0)
    return P


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Symmetric matrix of a Hill operator in parity coordinates."""

    matrix: np.ndarray
    parity: Parity
    beta: float
    omega: float
    grid: Grid
    basis: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def to_coords(self, samples) -> np.ndarray:
        samples = np.asarray(samples, dtype=float)
        return samples if self.basis is None else self.basis.T @ samples

    def to_samples(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        return coords if self.basis is None else self.basis @ coords

    def apply(self, samples) -> np.ndarray:
        return self.to_samples(self.matrix @ self.to_coords(samples))

    @cached_property
    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        return linalg.eigh(self.matrix)


def hill_operator(potential, omega: float, grid: Grid, parity="full", beta: float = float("nan")) -> DiscreteOperator:
    """Operator ``-d^2 + omega + diag(potential)`` restricted to ``parity``."""
    parity = Parity(parity)
    q = np.asarray(potential, dtype=float)
    full = grid.neg_laplacian + np.diag(omega + q)
    P = parity_basis(grid, parity)
    if P is None:
        mat = full
    else:
        dev = np.max(np.abs(q - grid.reflect(q)))
        if dev > _EVEN_TOL * max(1.0, np.max(np.abs(q))):
            raise ParityError(f"potential is not even (deviation {dev:.3g}); {parity.value} subspace not invariant")
        mat = P.T @ full @ P
    mat = 0.5 * (mat + mat.T)
    return DiscreteOperator(mat, parity, beta, omega, grid, P)


def assemble_hill(beta: float, profile: WaveProfile, grid: Grid, parity="full") -> DiscreteOperator:
    """Discretize ``-d^2 + omega - beta * phi^2`` for the given wave."""
    if abs(grid.L - profile.L) > 1e-12 * profile.L:
        raise ValueError(f"grid period {grid.L} differs from wave period {profile.L}")
    phi = wave_samples(profile, grid)
    return hill_operator(-beta * phi**2, profile.omega, grid, parity, beta)


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray
    n_neg: int
    z_ker: int
    kernel_vectors: list = field(repr=False)
    threshold: float = 0.0


def spectral_summary(op: DiscreteOperator, zero_tol: float = DEFAULT_ZERO_TOL) -> SpectralSummary:
    """Count negative and (numerically) zero eigenvalues of ``op``.

    An eigenvalue is zero when ``|lam| <= zero_tol * max(1, omega)``.  Kernel
    vectors are returned as grid samples, orthonormal for the L2 inner product.
    """
    if not zero_tol > 0:
        raise ValueError("zero_tol must be positive")
    vals, vecs = op.eigh
    thr = zero_tol * max(1.0, abs(op.omega))
    neg = int(np.sum(vals < -thr))
    zero_idx = np.flatnonzero(np.abs(vals) <= thr)
    scale = 1.0 / np.sqrt(op.grid.weight)
    kernel = [op.to_samples(vecs[:, i]) * scale for i in zero_idx]
    return SpectralSummary(vals.copy(), neg, len(zero_idx), kernel, thr)


def analytic_cnoidal_eigs(which: str, k: float, L: float) -> list[tuple[float, Callable]]:
    """Lowest eigenpairs of the cnoidal Hill operators with beta = 3c (L1) or c (L2).

    ``L1 = -d^2 + w - 3 phi~^2`` has eigenvalues
    ``(1 - 2k^2 - 2a) s``, ``-3k^2 s`` and ``0`` with ``s = 16K^2/L^2`` and
    ``a = sqrt(1 - k^2 + k^4)``; ``L2 = -d^2 + w - phi~^2`` has ``(k^2-1) s`` and 0.
    Eigenfunctions are returned unnormalized as callables of x.
    """
    if not 1.0 / np.sqrt(2.0) < k < 1.0:
        raise WaveDomainError(f"cnoidal modulus must be in (1/sqrt2, 1), got {k!r}")
    K = complete_K(k)
    s = 16.0 * K * K / L**2
    r = 4.0 * K / L
    a = np.sqrt(1.0 - k * k + k**4)

    def jac(x):
        return jacobi(r * np.asarray(x, dtype=float), k)

    which = which.upper()
    if which == "L1":
        return [
            ((1.0 - 2.0 * k * k - 2.0 * a) * s, lambda x: k * k * jac(x).sn ** 2 - (1.0 + k * k + a) / 3.0),
            (-3.0 * k * k * s, lambda x: jac(x).cn * jac(x).dn),
            (0.0, lambda x: -r * jac(x).sn * jac(x).dn),
        ]
    if which == "L2":
        return [
            ((k * k - 1.0) * s, lambda x: jac(x).dn),
            (0.0, lambda x: jac(x).cn),
        ]
    raise ValueError(f"which must be 'L1' or 'L2', got {which!r}")


def _kernel_coords(op: DiscreteOperator, zero_tol: float) -> np.ndarray:
    vals, vecs = op.eigh
    thr = zero_tol * max(1.0, abs(op.omega))
    return vecs[:, np.abs(vals) <= thr]


def _range_coords(op: DiscreteOperator, rhs, zero_tol: float) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=float)
    c = op.to_coords(rhs)
    if op.basis is not None:
        leak = np.linalg.norm(op.basis @ c - rhs)
        if leak > 1e-8 * max(np.linalg.norm(rhs), 1e-300):
            raise ParityError(f"right-hand side is not in the {op.parity.value} subspace")
    ker = _kernel_coords(op, zero_tol)
    if ker.shape[1]:
        proj = ker.T @ c
        cn = np.linalg.norm(c)
        if np.max(np.abs(proj)) > _RANGE_TOL * cn:
            raise NotInRange(
                f"rhs has kernel component {np.max(np.abs(proj)):.3g} (|rhs| = {cn:.3g})"
            )
        c = c - ker @ proj
    return c


def solve_on_range(op: DiscreteOperator, rhs, zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """Solution of ``op x = rhs`` orthogonal to the kernel (grid samples).

    Raises NotInRange if rhs is not orthogonal to the numerical kernel.
    """
    c = _range_coords(op, rhs, zero_tol)
    vals, vecs = op.eigh
    thr = zero_tol * max(1.0, abs(op.omega))
    keep = np.abs(vals) > thr
    coef = (vecs[:, keep].T @ c) / vals[keep]
    return op.to_samples(vecs[:, keep] @ coef)


def _solve_deflated(op: DiscreteOperator, rhs, zero_tol: float) -> np.ndarray:
    c = _range_coords(op, rhs, zero_tol)
    ker = _kernel_coords(op, zero_tol)
    shift = max(1.0, abs(op.omega))
    A = op.matrix + shift * (ker @ ker.T)
    x = linalg.solve(A, c, assume_a="sym")
    x -= ker @ (ker.T @ x)
    return op.to_samples(x)


def inv_quadratic_form(op: DiscreteOperator, b, zero_tol: float = DEFAULT_ZERO_TOL,
                       method: str = "eigen") -> float:
    """``(op^{-1} b, b)`` in the L2 inner product, with op inverted on its range.

    ``method="eigen"`` solves in the eigenbasis; ``"deflated"`` solves the
    kernel-shifted system ``A + s P_ker`` directly.  Both should agree.
    """
    b = np.asarray(b, dtype=float)
    if not np.any(b):
        return 0.0
    if method == "eigen":
        x = solve_on_range(op, b, zero_tol)
    elif method == "deflated":
        x = _solve_deflated(op, b, zero_tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return op.grid.inner(x, b)
