"""Spectral stability of periodic standing waves of the coupled cubic NLS system.

Periodic multiple waves ``(phi, B phi)`` and semi-trivial waves ``(phi, 0)``
built from Jacobi elliptic functions are tested for spectral stability by the
Hamiltonian-Krein index ``n(L) - n(V)``, with the spectrum of ``J L`` computed
directly as an independent check.
"""

from .stability import FullReport, Verdict, full_report
from .waves import BMode, Family, ModelParams, WaveProfile

__all__ = ["BMode", "Family", "FullReport", "ModelParams", "Verdict", "WaveProfile", "full_report"]
__version__ = "0.1.0"
