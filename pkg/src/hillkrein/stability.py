"""Krein-index stability verdicts for multiple and semi-trivial standing waves.

The linearization about ``Phi = (phi, B phi, 0, 0)`` (components ordered
Re u, Re v, Im u, Im v) is ``L = (-d^2 + omega) Id - phi^2 S`` and the
spectral problem is ``J L w = lambda w``.  S is block diagonal with two 2x2
blocks, so an orthogonal R brings L to ``diag(L1, L3, L2, L4)`` with scalar
Hill operators ``Li = -d^2 + omega - beta_i phi^2``.  Counting negative
eigenvalues of the Li and the signs of the matrix
``V_jl = (L^{-1} J Theta_j, J Theta_l)`` over a kernel basis gives the
Krein index ``n(L) - n(V)``: zero means stable, odd means unstable.

The block numbering follows the general formulas throughout; when
gamma == kappa1 == kappa2 the operator with ``beta = -(1+B^2) gamma`` is
therefore called L4 here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .grid import Grid
from .hillops import (
    DEFAULT_ZERO_TOL,
    DiscreteOperator,
    NotInRange,
    Parity,
    SpectralSummary,
    assemble_hill,
    parity_basis,
    solve_on_range,
    spectral_summary,
)
from .waves import (
    BMode,
    Family,
    ModelParams,
    WaveDomainError,
    WaveProfile,
    eval_wave_derivative,
    wave_samples,
)

__all__ = [
    "Scenario",
    "Case",
    "CaseTag",
    "Verdict",
    "BlockData",
    "KernelVector",
    "KreinReport",
    "JLReport",
    "FullReport",
    "AgreementFailure",
    "KernelVerificationError",
    "classify",
    "betas",
    "s_matrix",
    "block_data",
    "slot_operators",
    "kernel_basis",
    "linearized_matrix",
    "build_V",
    "build_V_direct",
    "krein_verdict",
    "assemble_JL",
    "jl_spectrum",
    "make_profile",
    "full_report",
]

_TIE = 1e-12
J4 = np.array(
    [[0, 0, 1, 0],
     [0, 0, 0, 1],
     [-1, 0, 0, 0],
     [0, -1, 0, 0]], dtype=float,
)
SLOT_LABELS = ("L1", "L3", "L2", "L4")
TRICHOTOMY = "trichotomy: comparison theorem leaves n(L3) undetermined"


class Scenario(str, enum.Enum):
    MULTIPLE = "multiple"
    SEMITRIVIAL = "semitrivial"


class Case(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"


class Verdict(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    INCONCLUSIVE = "inconclusive"


class KernelVerificationError(RuntimeError):
    pass


class AgreementFailure(RuntimeError):
    """Krein count and direct J L spectrum give opposite verdicts."""

    def __init__(self, report: "FullReport"):
        super().__init__(
            f"Krein verdict {report.krein.verdict.value} disagrees with "
            f"J L verdict {report.jl.verdict.value} (max Re = {report.jl.max_re:.3e})"
        )
        self.report = report


@dataclass(frozen=True)
class CaseTag:
    scenario: Scenario
    case: Case

    def __str__(self):
        return f"{self.scenario.value}/{self.case.value}"


def _eq(a: float, b: float) -> bool:
    return abs(a - b) <= _TIE * max(1.0, abs(a), abs(b))


def classify(params: ModelParams) -> CaseTag:
    k1, k2, g = params.kappa1, params.kappa2, params.gamma
    if params.mode is BMode.SEMITRIVIAL:
        if _eq(g, k1):
            return CaseTag(Scenario.SEMITRIVIAL, Case.II)
        if _eq(g, 3 * k1):
            return CaseTag(Scenario.SEMITRIVIAL, Case.IV)
        if 0 < g < k1:
            return CaseTag(Scenario.SEMITRIVIAL, Case.I)
        if k1 < g < 3 * k1:
            return CaseTag(Scenario.SEMITRIVIAL, Case.III)
        raise WaveDomainError(f"semi-trivial waves are classified for 0 < gamma <= 3 kappa1, got gamma={g}")
    if params.mode is BMode.FREE:
        return CaseTag(Scenario.MULTIPLE, Case.IV)
    if g == 0:
        return CaseTag(Scenario.MULTIPLE, Case.III)
    if 0 < g < min(k1, k2):
        return CaseTag(Scenario.MULTIPLE, Case.I)
    if g > max(k1, k2):
        return CaseTag(Scenario.MULTIPLE, Case.II)
    raise WaveDomainError(f"gamma={g} is not in an admissible multiple-wave region")


def betas(params: ModelParams) -> tuple[float, float, float, float]:
    """Closed-form (beta1, beta2, beta3, beta4) for a derived-B multiple wave."""
    k1, k2, g = params.kappa1, params.kappa2, params.gamma
    if params.mode is not BMode.DERIVED:
        raise WaveDomainError("closed-form betas apply to derived-B multiple waves only")
    d = g - k2
    if d == 0:
        raise WaveDomainError("betas are undefined at gamma == kappa2")
    b1 = 3 * (g * g - k1 * k2) / d
    b2 = (g * g - k1 * k2) / d
    b3 = (-g * g + 2 * g * (k1 + k2) - 3 * k1 * k2) / d
    b4 = (-3 * g * g + 2 * g * (k1 + k2) - k1 * k2) / d
    return b1, b2, b3, b4


def s_matrix(params: ModelParams) -> np.ndarray:
    """4x4 coupling matrix S of the linearization."""
    k1, k2, g = params.kappa1, params.kappa2, params.gamma
    B = params.B
    return np.array([
        [3 * k1 + g * B * B, 2 * g * B, 0, 0],
        [2 * g * B, 3 * k2 * B * B + g, 0, 0],
        [0, 0, k1 - g * B * B, 2 * g * B],
        [0, 0, 2 * g * B, k2 * B * B - g],
    ])


@dataclass(frozen=True)
class BlockData:
    """Diagonalization ``S = R M R^{-1}``; slot i of M carries ``slot_labels[i]``."""

    betas: tuple[float, float, float, float]
    S: np.ndarray
    R: np.ndarray
    M: np.ndarray
    slot_labels: tuple[str, str, str, str] = SLOT_LABELS

    @property
    def slot_betas(self) -> tuple[float, float, float, float]:
        return tuple(float(x) for x in np.diag(self.M))

    def similarity_error(self) -> float:
        return float(np.max(np.abs(self.S - self.R @ self.M @ np.linalg.inv(self.R))))


def block_data(params: ModelParams) -> BlockData:
    S = s_matrix(params)
    k1, g = params.kappa1, params.gamma
    if params.mode is BMode.SEMITRIVIAL:
        b = (3 * k1, k1, g, -g)
        R = np.eye(4)
    elif params.mode is BMode.DERIVED and g == 0:
        b = (3 * k1, k1, 3 * k1, k1)
        R = np.eye(4)
    else:
        B = params.B
        if params.mode is BMode.FREE:
            c = (1 + B * B) * g
            b = (3 * c, c, c, -c)
        else:
            b = betas(params)
        # (1, B) and (-B, 1) are eigenvectors of both 2x2 blocks of S
        Q = np.array([[1.0, -B], [B, 1.0]]) / math.sqrt(1 + B * B)
        R = linalg.block_diag(Q, Q)
    M = np.diag([b[0], b[2], b[1], b[3]])
    data = BlockData(tuple(float(x) for x in b), S, R, M)
    err = data.similarity_error()
    if err > 1e-10 * max(1.0, np.max(np.abs(S))):
        raise ArithmeticError(f"S = R M R^-1 fails by {err:.3e}")
    return data


def slot_operators(profile: WaveProfile, data: BlockData, grid: Grid, parity) -> list[DiscreteOperator]:
    """Scalar Hill operators for the four diagonal slots of ``R^{-1} L R``."""
    return [assemble_hill(beta, profile, grid, parity) for beta in data.slot_betas]


@dataclass(frozen=True)
class KernelVector:
    label: str
    values: np.ndarray = field(repr=False)  # shape (4, N)


def _full_basis(tag: CaseTag, f: np.ndarray, fp: np.ndarray, B: float) -> list[KernelVector]:
    z = np.zeros_like(f)
    rows = []
    if tag.scenario is Scenario.MULTIPLE:
        if tag.case in (Case.I, Case.II):
            rows = [("(phi', B phi', 0, 0)", (fp, B * fp, z, z)),
                    ("(0, 0, phi, B phi)", (z, z, f, B * f))]
        elif tag.case is Case.III:
            rows = [("(phi', 0, 0, 0)", (fp, z, z, z)),
                    ("(0, phi', 0, 0)", (z, fp, z, z)),
                    ("(0, 0, phi, 0)", (z, z, f, z)),
                    ("(0, 0, 0, phi)", (z, z, z, f))]
        else:
            rows = [("(phi', B phi', 0, 0)", (fp, B * fp, z, z)),
                    ("(-B phi, phi, 0, 0)", (-B * f, f, z, z)),
                    ("(0, 0, phi, B phi)", (z, z, f, B * f))]
    else:
        if tag.case in (Case.I, Case.III):
            rows = [("(phi', 0, 0, 0)", (fp, z, z, z)),
                    ("(0, 0, phi, 0)", (z, z, f, z))]
        elif tag.case is Case.II:
            rows = [("(phi', 0, 0, 0)", (fp, z, z, z)),
                    ("(0, phi, 0, 0)", (z, f, z, z)),
                    ("(0, 0, phi, 0)", (z, z, f, z))]
        else:
            rows = [("(phi', 0, 0, 0)", (fp, z, z, z)),
                    ("(0, phi', 0, 0)", (z, fp, z, z)),
                    ("(0, 0, phi, 0)", (z, z, f, z))]
    return [KernelVector(label, np.array(vals)) for label, vals in rows]


def _has_parity(grid: Grid, values: np.ndarray, parity: Parity) -> bool:
    if parity is Parity.FULL:
        return True
    sign = -1.0 if parity is Parity.ODD else 1.0
    scale = max(np.max(np.abs(values)), 1e-300)
    return bool(np.max(np.abs(grid.reflect(values) - sign * values)) <= 1e-10 * scale)


def apply_linearized(profile: WaveProfile, params: ModelParams, grid: Grid, values: np.ndarray) -> np.ndarray:
    """Full-space action of L on 4-component grid samples of shape (4, N)."""
    phi2 = wave_samples(profile, grid) ** 2
    H0 = grid.neg_laplacian + profile.omega * np.eye(grid.N)
    S = s_matrix(params)
    return values @ H0.T - phi2 * (S @ values)


def kernel_basis(tag: CaseTag, profile: WaveProfile, params: ModelParams, grid: Grid,
                 parity="full", tol: float = 1e-6) -> list[KernelVector]:
    """Closed-form kernel vectors of L for the case, restricted to ``parity``.

    The full-space basis is filtered to the vectors lying in the parity
    subspace; every returned vector is checked to be annihilated by L.
    """
    parity = Parity(parity)
    f = wave_samples(profile, grid)
    fp = eval_wave_derivative(profile, grid.nodes)
    out = [kv for kv in _full_basis(tag, f, fp, params.B) if _has_parity(grid, kv.values, parity)]
    scale = max(1.0, abs(profile.omega))
    for kv in out:
        res = np.linalg.norm(apply_linearized(profile, params, grid, kv.values))
        if res > tol * scale * np.linalg.norm(kv.values):
            raise KernelVerificationError(f"{kv.label} is not in the kernel (|L Theta| = {res:.3e})")
    return out


def linearized_matrix(profile: WaveProfile, params: ModelParams, grid: Grid, parity="full") -> np.ndarray:
    """Symmetric 4M x 4M matrix of L in parity coordinates (component-major)."""
    P = parity_basis(grid, parity)
    phi2 = wave_samples(profile, grid) ** 2
    H0 = grid.neg_laplacian + profile.omega * np.eye(grid.N)
    W = np.diag(phi2)
    if P is not None:
        H0, W = P.T @ H0 @ P, P.T @ W @ P
    S = s_matrix(params)
    mat = np.kron(np.eye(4), H0) - np.kron(S, W)
    return 0.5 * (mat + mat.T)


def _apply_J(values: np.ndarray) -> np.ndarray:
    return J4 @ values


def build_V(kernel: list[KernelVector], data: BlockData, ops: list[DiscreteOperator],
            zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """V over the kernel basis, inverting the diagonal slot operators blockwise."""
    grid = ops[0].grid
    Rinv = np.linalg.inv(data.R)
    ys = []
    for kv in kernel:
        y = Rinv @ _apply_J(kv.values)
        # rotation leaves O(eps) residue in slots that are exactly zero
        y[np.max(np.abs(y), axis=1) <= 1e-13 * np.max(np.abs(y))] = 0.0
        ys.append(y)
    xs = []
    for kv, y in zip(kernel, ys):
        x = np.zeros_like(y)
        for s, op in enumerate(ops):
            if not np.any(y[s]):
                continue
            try:
                x[s] = solve_on_range(op, y[s], zero_tol)
            except NotInRange as exc:
                raise NotInRange(f"{kv.label}: component in slot {data.slot_labels[s]}: {exc}") from exc
        xs.append(x)
    n = len(kernel)
    V = np.empty((n, n))
    for j in range(n):
        for l in range(n):
            V[j, l] = sum(grid.inner(xs[j][s], ys[l][s]) for s in range(4))
    return V


def build_V_direct(kernel: list[KernelVector], profile: WaveProfile, params: ModelParams,
                   grid: Grid, parity="full", zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """V from the coupled 4-component matrix, without the block diagonalization."""
    P = parity_basis(grid, parity)
    A = linearized_matrix(profile, params, grid, parity)
    vals, vecs = linalg.eigh(A)
    thr = zero_tol * max(1.0, abs(profile.omega))
    keep = np.abs(vals) > thr

    def coords(values):
        return np.concatenate([c if P is None else P.T @ c for c in values])

    bs = [coords(_apply_J(kv.values)) for kv in kernel]
    xs = [vecs[:, keep] @ ((vecs[:, keep].T @ b) / vals[keep]) for b in bs]
    return np.array([[grid.weight * float(x @ b) for b in bs] for x in xs])


def krein_verdict(n_L: int, n_V: int) -> Verdict:
    diff = n_L - n_V
    if diff == 0:
        return Verdict.STABLE
    if diff % 2:
        return Verdict.UNSTABLE
    return Verdict.INCONCLUSIVE


@dataclass
class KreinReport:
    n_L: int
    z_L: int
    n_V: int
    diff: int
    verdict: Verdict
    V: np.ndarray
    kernel_labels: list[str]
    reason: str | None = None


@dataclass
class JLReport:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    max_re: float
    re_tol: float
    verdict: Verdict

    @property
    def trusted(self) -> np.ndarray:
        return self.residuals <= 1e-6


def assemble_JL(profile: WaveProfile, params: ModelParams, grid: Grid, parity="full") -> np.ndarray:
    """Real matrix of J L in parity coordinates."""
    A = linearized_matrix(profile, params, grid, parity)
    M = A.shape[0] // 4
    return np.kron(J4, np.eye(M)) @ A


def jl_spectrum(JL: np.ndarray, re_tol: float, residual_tol: float = 1e-6) -> JLReport:
    """Eigenvalues of J L with relative residuals; stable iff max |Re| <= re_tol.

    Eigenpairs whose relative residual exceeds ``residual_tol`` are kept in
    the report but ignored for the verdict.
    """
    if not re_tol > 0:
        raise ValueError("re_tol must be positive")
    lam, vecs = linalg.eig(JL)  # LAPACK geev balances internally
    scale = max(np.linalg.norm(JL, 1), 1e-300)
    res = np.linalg.norm(JL @ vecs - vecs * lam, axis=0) / (scale * np.linalg.norm(vecs, axis=0))
    ok = res <= residual_tol
    max_re = float(np.max(np.abs(lam.real[ok]))) if np.any(ok) else float("nan")
    verdict = Verdict.STABLE if max_re <= re_tol else Verdict.UNSTABLE
    order = np.lexsort((lam.imag, -lam.real))
    return JLReport(lam[order], res[order], max_re, re_tol, verdict)


@dataclass
class FullReport:
    tag: CaseTag
    params: ModelParams
    profile: WaveProfile
    parity: Parity
    grid: Grid
    blocks: dict[str, SpectralSummary]
    krein: KreinReport
    jl: JLReport
    backed: bool  # Krein verdict is definite, so J L has index-theory backing

    @property
    def agree(self) -> bool | None:
        if not self.backed:
            return None
        return self.krein.verdict is self.jl.verdict


def make_profile(params: ModelParams, family, L: float, *, omega: float | None = None,
                 k: float | None = None) -> WaveProfile:
    if (omega is None) == (k is None):
        raise ValueError("give exactly one of omega or k")
    if k is not None:
        return WaveProfile.from_k(family, L, k, params.cscale)
    return WaveProfile.from_omega(family, L, omega, params.cscale)


def _refusal(tag: CaseTag, family: Family, parity: Parity) -> str | None:
    if family is Family.DNOIDAL or parity is Parity.ODD:
        return None
    if tag == CaseTag(Scenario.MULTIPLE, Case.II) or tag == CaseTag(Scenario.SEMITRIVIAL, Case.I):
        return TRICHOTOMY
    return None


def _count_negative(V: np.ndarray) -> tuple[int, bool]:
    if V.size == 0:
        return 0, True
    ev = np.linalg.eigvalsh(0.5 * (V + V.T))
    thr = 1e-10 * max(np.max(np.abs(ev)), 1e-300)
    return int(np.sum(ev < -thr)), bool(np.all(np.abs(ev) > thr))


def full_report(params: ModelParams, family, L: float, *, omega: float | None = None,
                k: float | None = None, parity="full", N: int = 256,
                zero_tol: float = DEFAULT_ZERO_TOL, re_tol: float | None = None,
                check_agreement: bool = True) -> FullReport:
    """Classify, count, build V, decide, and cross-check against the J L spectrum.

    Raises AgreementFailure when both verdicts are definite and differ
    (unless ``check_agreement`` is False).
    """
    family = Family(family)
    parity = Parity(parity)
    tag = classify(params)
    profile = make_profile(params, family, L, omega=omega, k=k)
    grid = Grid(N, L)
    data = block_data(params)
    ops = slot_operators(profile, data, grid, parity)
    summaries = [spectral_summary(op, zero_tol) for op in ops]
    blocks = {data.slot_labels[i]: summaries[i] for i in range(4)}
    n_L = sum(s.n_neg for s in summaries)
    z_L = sum(s.z_ker for s in summaries)

    reason = _refusal(tag, family, parity)
    kernel = kernel_basis(tag, profile, params, grid, parity)
    labels = [kv.label for kv in kernel]
    try:
        V = build_V(kernel, data, ops, zero_tol)
        n_V, nonsingular = _count_negative(V)
    except NotInRange as exc:
        V, n_V, nonsingular = np.full((len(kernel), len(kernel)), np.nan), 0, False
        reason = reason or f"V undefined: {exc}"
    if reason is None and z_L != len(kernel):
        reason = f"measured kernel dimension {z_L} differs from closed-form basis size {len(kernel)}"
    if reason is None and not nonsingular:
        reason = "V is singular"
    verdict = Verdict.INCONCLUSIVE if reason else krein_verdict(n_L, n_V)
    krein = KreinReport(n_L, z_L, n_V, n_L - n_V, verdict, V, labels, reason)

    if re_tol is None:
        re_tol = 1e-4 * abs(profile.omega)
    jl = jl_spectrum(assemble_JL(profile, params, grid, parity), re_tol)
    backed = verdict is not Verdict.INCONCLUSIVE
    report = FullReport(tag, params, profile, parity, grid, blocks, krein, jl, backed)
    if check_agreement and report.agree is False:
        raise AgreementFailure(report)
    return report
