"""Periodic standing-wave profiles of the coupled cubic NLS system.

Three profile families solve ``-phi'' + omega*phi - c*phi**3 = 0`` with
``c = kappa1 + gamma*B**2`` (``c = kappa1`` for semi-trivial waves):

* dnoidal  ``phi = (2*sqrt(2)*K/L) c^(-1/2) dn(2Kx/L, k)``,  k in (0, 1)
* cnoidal  ``phi = sqrt(2w) k / sqrt(2k^2-1) c^(-1/2) cn(4Kx/L, k)``,  k in (1/sqrt2, 1)
* snoidal  the cnoidal wave shifted by L/4, an odd function built from sn/dn
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .elliptic import complete_E, complete_K, dE_dk, dK_dk, jacobi
from .grid import Grid

__all__ = [
    "WaveDomainError",
    "BMode",
    "Family",
    "ModelParams",
    "WaveProfile",
    "coupling_B",
    "omega_from_k",
    "k_from_omega",
    "eval_wave",
    "eval_wave_derivative",
    "wave_samples",
    "ode_residual",
    "l2_norm_sq",
    "d_l2_domega",
    "conserved_E",
    "conserved_F",
]

_EQ_TOL = 1e-12
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class WaveDomainError(ValueError):
    """Parameters outside the region where a wave family exists."""


class BMode(str, enum.Enum):
    DERIVED = "derived"
    FREE = "free"
    SEMITRIVIAL = "semitrivial"


class Family(str, enum.Enum):
    DNOIDAL = "dnoidal"
    CNOIDAL = "cnoidal"
    SNOIDAL = "snoidal"  # cnoidal wave shifted by L/4

    @property
    def k_range(self) -> tuple[float, float]:
        return (0.0, 1.0) if self is Family.DNOIDAL else (_INV_SQRT2, 1.0)


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= _EQ_TOL * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class ModelParams:
    """Coupling constants and how the second-component factor B is fixed.

    ``DERIVED`` takes ``B = sqrt((kappa1-gamma)/(kappa2-gamma))``;
    ``FREE`` requires ``gamma == kappa1 == kappa2`` and uses the supplied ``B``;
    ``SEMITRIVIAL`` is the wave ``(phi, 0)``.
    """

    kappa1: float
    kappa2: float
    gamma: float
    mode: BMode = BMode.DERIVED
    B_free: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", BMode(self.mode))
        k1, k2, g = self.kappa1, self.kappa2, self.gamma
        if not (k1 > 0 and k2 > 0):
            raise WaveDomainError(f"kappa1 and kappa2 must be positive, got {k1!r}, {k2!r}")
        if not g >= 0:
            raise WaveDomainError(f"gamma must be nonnegative, got {g!r}")
        if self.mode is BMode.FREE:
            if self.B_free is None or not np.isfinite(self.B_free):
                raise WaveDomainError("free B mode needs a finite B value")
            if not (_close(g, k1) and _close(g, k2)):
                raise WaveDomainError("free B mode requires gamma == kappa1 == kappa2")
        elif self.mode is BMode.DERIVED:
            if self.B_free is not None:
                raise WaveDomainError("B is derived from the couplings here; drop the explicit B")
            if g != 0:
                if _close(g, k1) and _close(g, k2):
                    raise WaveDomainError("gamma == kappa1 == kappa2 leaves B free; pass a B value")
                if _close(g, k2) or _close(g, k1):
                    raise WaveDomainError("gamma equal to exactly one of kappa1, kappa2 gives no multiple wave")
                if (k1 - g) / (k2 - g) <= 0:
                    raise WaveDomainError(
                        f"gamma={g} lies between kappa1={k1} and kappa2={k2}: B is not real"
                    )
        if self.mode is not BMode.SEMITRIVIAL:
            B = self.B
            lhs, rhs = k1 + g * B * B, k2 * B * B + g
            if abs(lhs - rhs) > _EQ_TOL * max(1.0, abs(lhs)):
                raise WaveDomainError(f"multiple-wave constraint fails: {lhs} != {rhs}")

    @property
    def B(self) -> float:
        return coupling_B(self)

    @property
    def cscale(self) -> float:
        """Cubic coefficient of the profile ODE."""
        if self.mode is BMode.SEMITRIVIAL:
            return self.kappa1
        return self.kappa1 + self.gamma * self.B**2


def coupling_B(params: ModelParams) -> float:
    if params.mode is BMode.SEMITRIVIAL:
        return 0.0
    if params.mode is BMode.FREE:
        return float(params.B_free)
    k1, k2, g = params.kappa1, params.kappa2, params.gamma
    if g == 0:
        return math.sqrt(k1 / k2)
    rad = (k1 - g) / (k2 - g)
    if rad <= 0:
        raise WaveDomainError(f"B radicand {rad} is not positive")
    return math.sqrt(rad)


def _check_k(family: Family, k: float, closed_low: bool = False) -> None:
    lo, hi = family.k_range
    ok = (lo <= k < hi) if closed_low else (lo < k < hi)
    if not ok:
        raise WaveDomainError(f"modulus k={k!r} outside the {family.value} interval ({lo:.6g}, {hi})")


def omega_from_k(family, L: float, k: float) -> float:
    """Frequency of the L-periodic wave with modulus ``k``.

    The lower end of the modulus interval is accepted and gives the limiting
    frequency (2*pi^2/L^2 for dnoidal, 0 for cnoidal).
    """
    family = Family(family)
    _check_k(family, k, closed_low=True)
    K = complete_K(k)
    if family is Family.DNOIDAL:
        return 4.0 * (2.0 - k * k) * K * K / L**2
    return 16.0 * K * K * (2.0 * k * k - 1.0) / L**2


def _domega_dk(family: Family, L: float, k: float) -> float:
    K, Kp = complete_K(k), dK_dk(k)
    if family is Family.DNOIDAL:
        return 4.0 / L**2 * (-2.0 * k * K * K + 2.0 * (2.0 - k * k) * K * Kp)
    return 16.0 / L**2 * (2.0 * K * Kp * (2.0 * k * k - 1.0) + 4.0 * k * K * K)


def k_from_omega(family, L: float, omega: float) -> float:
    """Invert :func:`omega_from_k` by bisection on the monotone map."""
    family = Family(family)
    lo, _ = family.k_range
    hi = math.nextafter(1.0, 0.0)
    w_lo = omega_from_k(family, L, lo)
    if not omega > w_lo:
        raise WaveDomainError(
            f"{family.value} waves need omega > {w_lo:.17g} for L={L}, got {omega!r}"
        )
    if not omega < omega_from_k(family, L, hi):
        raise WaveDomainError(f"omega={omega!r} is beyond the representable modulus range")
    try:
        return optimize.bisect(
            lambda k: omega_from_k(family, L, k) - omega,
            lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=200,
        )
    except RuntimeError as exc:  # scipy signals the iteration cap this way
        raise WaveDomainError(f"bisection did not converge: {exc}") from exc


@dataclass(frozen=True)
class WaveProfile:
    """One member of a wave family; ``cscale`` is the cubic coefficient c."""

    family: Family
    L: float
    k: float
    omega: float
    cscale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.L > 0:
            raise WaveDomainError(f"period must be positive, got {self.L!r}")
        _check_k(self.family, self.k)
        if not self.cscale > 0:
            raise WaveDomainError(f"cscale must be positive, got {self.cscale!r}")
        expected = omega_from_k(self.family, self.L, self.k)
        if abs(expected - self.omega) > 1e-10 * max(1.0, abs(expected)):
            raise WaveDomainError(f"omega={self.omega} does not match k={self.k} (expected {expected})")

    @classmethod
    def from_k(cls, family, L: float, k: float, cscale: float = 1.0) -> "WaveProfile":
        return cls(Family(family), L, k, omega_from_k(family, L, k), cscale)

    @classmethod
    def from_omega(cls, family, L: float, omega: float, cscale: float = 1.0) -> "WaveProfile":
        k = k_from_omega(family, L, omega)
        return cls(Family(family), L, k, omega_from_k(family, L, k), cscale)

    def with_k(self, k: float) -> "WaveProfile":
        return WaveProfile.from_k(self.family, self.L, k, self.cscale)

    @property
    def K(self) -> float:
        return complete_K(self.k)

    @property
    def rate(self) -> float:
        """Scale factor in the elliptic-function argument (2K/L or 4K/L)."""
        return (2.0 if self.family is Family.DNOIDAL else 4.0) * self.K / self.L

    @property
    def amplitude(self) -> float:
        """Prefactor multiplying dn, cn or sn/dn."""
        K, k, L = self.K, self.k, self.L
        if self.family is Family.DNOIDAL:
            a = 2.0 * math.sqrt(2.0) * K / L
        else:
            # sqrt(2w) k / sqrt(2k^2-1) simplifies to 4 sqrt(2) K k / L
            a = 4.0 * math.sqrt(2.0) * K * k / L
            if self.family is Family.SNOIDAL:
                a *= math.sqrt((1.0 - k) * (1.0 + k))
        return a / math.sqrt(self.cscale)


def eval_wave(profile: WaveProfile, x) -> np.ndarray:
    t = jacobi(profile.rate * np.asarray(x, dtype=float), profile.k)
    if profile.family is Family.DNOIDAL:
        f = t.dn
    elif profile.family is Family.CNOIDAL:
        f = t.cn
    else:
        f = t.sn / t.dn
    return profile.amplitude * f


def eval_wave_derivative(profile: WaveProfile, x) -> np.ndarray:
    """Closed-form x-derivative of :func:`eval_wave`."""
    k = profile.k
    t = jacobi(profile.rate * np.asarray(x, dtype=float), k)
    if profile.family is Family.DNOIDAL:
        f = -k * k * t.sn * t.cn
    elif profile.family is Family.CNOIDAL:
        f = -t.sn * t.dn
    else:
        f = t.cn / t.dn**2
    return profile.amplitude * profile.rate * f


def wave_samples(profile: WaveProfile, grid: Grid) -> np.ndarray:
    return eval_wave(profile, grid.nodes)


def ode_residual(profile: WaveProfile, grid: Grid) -> float:
    """Sup norm of ``-phi'' + omega*phi - c*phi^3`` on the grid (spectral phi'')."""
    phi = wave_samples(profile, grid)
    res = -grid.derivative(phi, 2) + profile.omega * phi - profile.cscale * phi**3
    return float(np.max(np.abs(res)))


def _norm_core(family: Family, k: float) -> tuple[float, float]:
    """Return (G(k), G'(k)) with ||phi||^2 = G(k) / (L c) for the family."""
    K, E = complete_K(k), complete_E(k)
    Kp, Ep = dK_dk(k), dE_dk(k)
    if family is Family.DNOIDAL:
        return 8.0 * E * K, 8.0 * (Ep * K + E * Kp)
    kp2 = (1.0 - k) * (1.0 + k)
    inner = E - kp2 * K
    d_inner = Ep + 2.0 * k * K - kp2 * Kp
    return 32.0 * K * inner, 32.0 * (Kp * inner + K * d_inner)


def l2_norm_sq(profile: WaveProfile) -> float:
    """Closed form of the integral of phi^2 over one period."""
    G, _ = _norm_core(profile.family, profile.k)
    return G / (profile.L * profile.cscale)


def d_l2_domega(profile: WaveProfile) -> float:
    """d/d omega of :func:`l2_norm_sq` along the family at fixed L and c."""
    _, dG = _norm_core(profile.family, profile.k)
    return dG / (profile.L * profile.cscale) / _domega_dk(profile.family, profile.L, profile.k)


def _complex_derivative(grid: Grid, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    return grid.derivative(f.real) + 1j * grid.derivative(f.imag)


def conserved_E(u, v, grid: Grid, params: ModelParams) -> float:
    """Energy functional evaluated on grid samples of the complex fields."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    ux, vx = _complex_derivative(grid, u), _complex_derivative(grid, v)
    au, av = np.abs(u) ** 2, np.abs(v) ** 2
    density = (
        np.abs(ux) ** 2 + np.abs(vx) ** 2
        - 0.5 * params.kappa1 * au**2 - 0.5 * params.kappa2 * av**2
    )
    coupling = np.real(u**2 * np.conj(v) ** 2)
    return 0.5 * grid.weight * float(density.sum()) - 0.5 * params.gamma * grid.weight * float(coupling.sum())


def conserved_F(u, v, grid: Grid) -> float:
    """Mass functional ``(1/2) int |u|^2 + |v|^2``."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return 0.5 * grid.weight * float((np.abs(u) ** 2 + np.abs(v) ** 2).sum())
