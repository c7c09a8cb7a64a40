"""Initial-value construction of ``(L2^{-1} phi', phi')`` for cnoidal waves.

Here ``phi`` is the cnoidal wave at unit amplitude scale and
``L2 = -d^2 + omega - phi^2``.  Its kernel is spanned by phi itself, so the
odd function phi' lies in the range.  The inverse is built from two IVPs:

* ``y`` solves ``-y'' + omega y - phi^2 y = 0`` with ``y(0) = 0``,
  ``y'(0) = 1/phi(0)``.  It is odd, the Wronskian ``phi y' - phi' y`` is
  identically 1, and ``y(L) != 0`` because y is not periodic.
* ``chi`` solves ``-chi'' + omega chi - phi^2 chi = phi'`` with ``chi(0) = 0``
  and ``chi'(0) = -(1/y(L)) int_0^L phi' y``, which makes chi the odd periodic
  solution, i.e. ``chi = L2^{-1} phi'``.

``eta(k) = L (chi, phi')``.  Quadratures are carried as extra components of
the ODE state, so they share the integrator's adaptive steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .waves import Family, WaveDomainError, WaveProfile, eval_wave, eval_wave_derivative

__all__ = [
    "IvpFailure",
    "IvpSolution",
    "EtaSample",
    "cnoidal_unit",
    "solve_y",
    "solve_chi",
    "wronskian",
    "oddness_defect",
    "eta",
    "eta_curve",
]

DEFAULT_RTOL = 1e-10
_ATOL_FACTOR = 1e-12
_NONPERIODIC_TOL = 1e-8
_N_NODES = 513


class IvpFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class IvpSolution:
    """Solution sampled on a uniform grid of ``[0, L]`` (both ends included).

    ``integral`` is the quadrature carried along the integration: for y it is
    ``int_0^L phi' y``, for chi it is ``int_0^L chi phi'``.
    """

    nodes: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    yprime: np.ndarray = field(repr=False)
    integral: float
    dense: object = field(repr=False, default=None)

    def __call__(self, x) -> np.ndarray:
        return self.dense(x)[0]


def cnoidal_unit(k: float, L: float) -> WaveProfile:
    """Cnoidal wave with amplitude scale 1 (the proof's normalization)."""
    return WaveProfile.from_k(Family.CNOIDAL, L, k, 1.0)


def _check_profile(profile: WaveProfile) -> None:
    if profile.family is not Family.CNOIDAL:
        raise WaveDomainError(f"the eta construction is for cnoidal waves, got {profile.family.value}")
    if profile.cscale != 1.0:
        raise WaveDomainError("the eta construction uses the unit-scale wave (cscale = 1)")


def _integrate(rhs, y0, L: float, rtol: float):
    scale = max(1.0, float(np.max(np.abs(y0))))
    sol = solve_ivp(rhs, (0.0, L), y0, method="DOP853", rtol=rtol,
                    atol=_ATOL_FACTOR * scale, dense_output=True)
    if not sol.success:
        raise IvpFailure(sol.message)
    return sol


def _pack(sol, L: float, n_nodes: int) -> IvpSolution:
    nodes = np.linspace(0.0, L, n_nodes)
    vals = sol.sol(nodes)
    return IvpSolution(nodes, vals[0], vals[1], float(sol.y[2, -1]), sol.sol)


def solve_y(profile: WaveProfile, rtol: float = DEFAULT_RTOL, n_nodes: int = _N_NODES) -> IvpSolution:
    """Odd, non-periodic solution of the homogeneous equation.

    Raises IvpFailure when ``|y(L)| <= 1e-8 max|y|``, since chi's initial
    slope divides by y(L).
    """
    _check_profile(profile)
    w, L = profile.omega, profile.L
    phi0 = float(eval_wave(profile, 0.0))

    def rhs(x, s):
        p, dp = eval_wave(profile, x), eval_wave_derivative(profile, x)
        return [s[1], (w - p * p) * s[0], dp * s[0]]

    sol = _integrate(rhs, [0.0, 1.0 / phi0, 0.0], L, rtol)
    out = _pack(sol, L, n_nodes)
    if abs(out.y[-1]) <= _NONPERIODIC_TOL * np.max(np.abs(out.y)):
        raise IvpFailure(f"y(L) = {out.y[-1]:.3e} is numerically zero; y looks periodic")
    return out


def solve_chi(profile: WaveProfile, ysol: IvpSolution, rtol: float = DEFAULT_RTOL,
              n_nodes: int = _N_NODES) -> IvpSolution:
    """Odd periodic solution of ``L2 chi = phi'``; ``integral`` is ``int chi phi'``."""
    _check_profile(profile)
    w, L = profile.omega, profile.L
    slope = -ysol.integral / ysol.y[-1]

    def rhs(x, s):
        p, dp = eval_wave(profile, x), eval_wave_derivative(profile, x)
        return [s[1], (w - p * p) * s[0] - dp, s[0] * dp]

    sol = _integrate(rhs, [0.0, slope, 0.0], L, rtol)
    return _pack(sol, L, n_nodes)


def wronskian(profile: WaveProfile, ysol: IvpSolution) -> np.ndarray:
    """``phi y' - phi' y`` on the solution nodes (identically 1 in exact arithmetic)."""
    x = ysol.nodes
    return eval_wave(profile, x) * ysol.yprime - eval_wave_derivative(profile, x) * ysol.y


def oddness_defect(profile: WaveProfile, h: float, rtol: float = DEFAULT_RTOL) -> float:
    """``|y(h) + y(-h)|`` from forward and backward integration of the y problem."""
    _check_profile(profile)
    w = profile.omega
    phi0 = float(eval_wave(profile, 0.0))

    def rhs(x, s):
        p = eval_wave(profile, x)
        return [s[1], (w - p * p) * s[0]]

    ends = []
    for t in (h, -h):
        sol = solve_ivp(rhs, (0.0, t), [0.0, 1.0 / phi0], method="DOP853", rtol=rtol,
                        atol=_ATOL_FACTOR)
        if not sol.success:
            raise IvpFailure(sol.message)
        ends.append(sol.y[0, -1])
    return abs(ends[0] + ends[1])


@dataclass(frozen=True)
class EtaSample:
    k: float
    eta: float
    chi_phi_inner: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def eta(k: float, L: float = 2.0 * math.pi, rtol: float = DEFAULT_RTOL) -> EtaSample:
    """``eta(k) = L (chi, phi')`` for the unit-scale cnoidal wave of period L."""
    lo, hi = Family.CNOIDAL.k_range
    if not lo < k < hi:
        raise WaveDomainError(f"cnoidal modulus must be in (1/sqrt2, 1), got {k!r}")
    profile = cnoidal_unit(k, L)
    ysol = solve_y(profile, rtol)
    chi = solve_chi(profile, ysol, rtol)
    inner = chi.integral
    return EtaSample(float(k), L * inner, inner)


def eta_curve(k_min: float, k_max: float, n_points: int, L: float = 2.0 * math.pi,
              rtol: float = DEFAULT_RTOL) -> list[EtaSample]:
    """Uniform samples of eta on ``[k_min, k_max]``; failed samples carry ``error``."""
    lo, hi = Family.CNOIDAL.k_range
    if not lo < k_min < k_max < hi:
        raise WaveDomainError(f"need 1/sqrt2 < k_min < k_max < 1, got ({k_min!r}, {k_max!r})")
    if int(n_points) != n_points or n_points < 2:
        raise ValueError(f"n_points must be an integer >= 2, got {n_points!r}")
    out = []
    for k in np.linspace(k_min, k_max, int(n_points)):
        try:
            out.append(eta(float(k), L, rtol))
        except (IvpFailure, WaveDomainError) as exc:
            out.append(EtaSample(float(k), float("nan"), float("nan"), str(exc)))
    return out
