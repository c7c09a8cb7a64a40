"""Uniform periodic grids and Fourier spectral helpers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["Grid", "GridError"]


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Nodes ``x_j = j L / N`` on one period ``[0, L)``.

    ``N`` must be a multiple of 4 (so ``L/4`` is a node) and at least 64.
    """

    N: int
    L: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 64 or self.N % 4:
            raise GridError(f"grid N must be a multiple of 4 and >= 64, got {self.N!r}")
        if not (np.isfinite(self.L) and self.L > 0):
            raise GridError(f"period L must be positive, got {self.L!r}")

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.N) * (self.L / self.N)

    @property
    def weight(self) -> float:
        """Trapezoid weight, so that ``weight * f @ g`` approximates the integral."""
        return self.L / self.N

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.L / self.N)

    @cached_property
    def neg_laplacian(self) -> np.ndarray:
        """Dense symmetric Fourier matrix of ``-d^2/dx^2``."""
        eye = np.eye(self.N)
        mat = np.fft.ifft(self.wavenumbers[:, None] ** 2 * np.fft.fft(eye, axis=0), axis=0).real
        return 0.5 * (mat + mat.T)

    def inner(self, f, g) -> float:
        return self.weight * float(np.dot(f, g))

    def norm(self, f) -> float:
        return float(np.sqrt(self.inner(f, f)))

    def derivative(self, f, order: int = 1) -> np.ndarray:
        """Spectral derivative of periodic samples (Nyquist mode dropped for odd orders)."""
        ik = 1j * self.wavenumbers
        if order % 2:
            ik = ik.copy()
            ik[self.N // 2] = 0.0
        return np.fft.ifft(ik**order * np.fft.fft(f)).real

    def reflect(self, f) -> np.ndarray:
        """Samples of ``f(-x)`` given samples of ``f(x)``."""
        f = np.asarray(f)
        return np.roll(f[..., ::-1], 1, axis=-1)
