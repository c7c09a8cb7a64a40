"""Command-line front end.

Subcommands::

    report          Krein and J L verdicts for one configuration (JSON)
    eta-curve       eta(k) samples for the cnoidal family (CSV: k,eta)
    theorem-table   canonical regression table for one theorem (CSV)
    jl-spectrum     eigenvalues of J L with residuals (CSV)
    wave-dump       wave samples x, phi(x) (CSV)

Exit codes: 0 ok, 1 input error, 2 Krein / J L disagreement, 3 a theorem
table row does not match the published verdict.  Data goes to stdout (or
``--out``), logs go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .etaprobe import DEFAULT_RTOL, eta_curve
from .grid import Grid, GridError
from .hillops import DEFAULT_ZERO_TOL, Parity
from .stability import (
    AgreementFailure,
    FullReport,
    Verdict,
    assemble_JL,
    block_data,
    classify,
    full_report,
    jl_spectrum,
    make_profile,
)
from .waves import BMode, Family, ModelParams, WaveDomainError, WaveProfile, wave_samples

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_AGREEMENT, EXIT_THEOREM = 0, 1, 2, 3
N_LEADING = 8
N_BLOCK_EIGS = 6

log = logging.getLogger("hillkrein")


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    family: Family
    L: float
    omega: float | None
    k: float | None
    parity: Parity
    grid_n: int
    zero_tol: float
    re_tol: float | None
    ivp_tol: float

    def profile(self) -> WaveProfile:
        return make_profile(self.params, self.family, self.L, omega=self.omega, k=self.k)

    def as_dict(self) -> dict:
        p = self.params
        return {
            "kappa1": p.kappa1,
            "kappa2": p.kappa2,
            "gamma": p.gamma,
            "b_mode": p.mode.value,
            "B": p.B,
            "family": self.family.value,
            "L": self.L,
            "k": self.k,
            "omega": self.omega,
            "parity": self.parity.value,
            "N": self.grid_n,
            "zero_tol": self.zero_tol,
            "re_tol": self.re_tol,
            "ivp_tol": self.ivp_tol,
        }


def _number(cfg: dict, name: str, required: bool = False, positive: bool = False):
    val = cfg.get(name)
    if val is None:
        if required:
            raise ConfigError(name, "is required")
        return None
    if isinstance(val, bool):
        raise ConfigError(name, f"expected a number, got {val!r}")
    try:
        val = float(val)
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected a number, got {val!r}") from None
    if not math.isfinite(val):
        raise ConfigError(name, f"must be finite, got {val!r}")
    if positive and not val > 0:
        raise ConfigError(name, f"must be positive, got {val!r}")
    return val


def _choice(cfg: dict, name: str, enum_cls, default=None):
    val = cfg.get(name, default)
    if val is None:
        raise ConfigError(name, "is required")
    try:
        return enum_cls(str(val).lower())
    except ValueError:
        choices = ", ".join(e.value for e in enum_cls)
        raise ConfigError(name, f"must be one of {choices}, got {val!r}") from None


def _params(cfg: dict) -> ModelParams:
    k1 = _number(cfg, "kappa1", required=True)
    k2 = _number(cfg, "kappa2", required=True)
    g = _number(cfg, "gamma", required=True)
    B = _number(cfg, "B")
    semi = cfg.get("semi_trivial") or False
    if not isinstance(semi, bool):
        raise ConfigError("semi_trivial", f"expected true/false, got {semi!r}")
    if semi and B is not None:
        raise ConfigError("B", "semi-trivial waves have B = 0; drop B")
    mode = BMode.SEMITRIVIAL if semi else (BMode.FREE if B is not None else BMode.DERIVED)
    try:
        params = ModelParams(k1, k2, g, mode, B)
        classify(params)
    except WaveDomainError as exc:
        raise ConfigError("gamma", str(exc)) from None
    return params


def build_config(cfg: dict) -> RunConfig:
    """Validate a merged flag/file mapping; ConfigError names the offending field."""
    params = _params(cfg)
    family = _choice(cfg, "family", Family)
    parity = _choice(cfg, "parity", Parity, "full")
    L = _number(cfg, "L", positive=True)
    L = 2.0 * math.pi if L is None else L
    k = _number(cfg, "k")
    omega = _number(cfg, "omega")
    if (k is None) == (omega is None):
        raise ConfigError("k", "give exactly one of k or omega")
    n = cfg.get("N", 256)
    if isinstance(n, bool) or not isinstance(n, (int, float)) or int(n) != n:
        raise ConfigError("N", f"expected an integer, got {n!r}")
    try:
        Grid(int(n), L)
    except GridError as exc:
        raise ConfigError("N", str(exc)) from None
    zero_tol = _number(cfg, "zero_tol", positive=True) or DEFAULT_ZERO_TOL
    re_tol = _number(cfg, "re_tol", positive=True)
    ivp_tol = _number(cfg, "ivp_tol", positive=True) or DEFAULT_RTOL
    conf = RunConfig(params, family, L, omega, k, parity, int(n), zero_tol, re_tol, ivp_tol)
    try:
        conf.profile()
    except WaveDomainError as exc:
        raise ConfigError("k" if k is not None else "omega", str(exc)) from None
    return conf


# -- serialization -----------------------------------------------------------

def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def report_to_dict(rep: FullReport, conf: RunConfig) -> dict:
    kr, jl = rep.krein, rep.jl
    data = block_data(rep.params)
    blocks = []
    for slot, summ in rep.blocks.items():
        blocks.append({
            "slot": slot,
            "beta": _num(data.slot_betas[data.slot_labels.index(slot)]),
            "n_neg": summ.n_neg,
            "z_ker": summ.z_ker,
            "lowest_eigenvalues": [_num(v) for v in summ.eigenvalues[:N_BLOCK_EIGS]],
        })
    order = np.argsort(-jl.eigenvalues.real, kind="stable")[:N_LEADING]
    return {
        "schema_version": SCHEMA_VERSION,
        "config": {key: (_num(v) if isinstance(v, float) else v) for key, v in conf.as_dict().items()},
        "wave": {"k": _num(rep.profile.k), "omega": _num(rep.profile.omega), "cscale": _num(rep.profile.cscale)},
        "case": {"scenario": rep.tag.scenario.value, "case": rep.tag.case.value},
        "blocks": blocks,
        "krein": {
            "n_L": kr.n_L,
            "z_L": kr.z_L,
            "n_V": kr.n_V,
            "diff": kr.diff,
            "verdict": kr.verdict.value,
            "V": [[_num(v) for v in row] for row in kr.V],
            "kernel_labels": list(kr.kernel_labels),
            "reason": kr.reason,
        },
        "jl": {
            "verdict": jl.verdict.value,
            "max_re": _num(jl.max_re),
            "re_tol": _num(jl.re_tol),
            "backed": rep.backed,
            "agree": rep.agree,
            "leading_eigenvalues": [
                {"re": _num(jl.eigenvalues[i].real), "im": _num(jl.eigenvalues[i].imag),
                 "residual": _num(jl.residuals[i])}
                for i in order
            ],
        },
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt(x: float) -> str:
    return "nan" if not math.isfinite(x) else format(float(x), ".17g")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError("out", f"cannot write {out!r}: {exc.strerror}") from None


# -- theorem tables ----------------------------------------------------------

_L0 = 2.0 * math.pi
_K0 = 0.8
_N0 = 256
_MULTIPLE = [
    ("I", (2.0, 3.0, 1.0, None)),
    ("II", (2.0, 3.0, 5.0, None)),
    ("III", (2.0, 3.0, 0.0, None)),
    ("IV", (1.0, 1.0, 1.0, 0.7)),
]
_SEMI = [("I", 1.0), ("II", 2.0), ("III", 4.0), ("IV", 6.0)]
_U, _S, _X = Verdict.UNSTABLE, Verdict.STABLE, Verdict.INCONCLUSIVE
THEOREMS = {
    "1.3": ("multiple", Family.DNOIDAL, Parity.FULL, (_U, _S, _S, _S)),
    "1.4": ("multiple", Family.CNOIDAL, Parity.FULL, (_X, _X, _X, _U)),
    "1.5": ("multiple", Family.SNOIDAL, Parity.ODD, (_U, _S, _S, _S)),
    "1.6": ("semitrivial", Family.CNOIDAL, Parity.FULL, (_X, _U, _X, _X)),
    "1.7": ("semitrivial", Family.SNOIDAL, Parity.ODD, (_S, _S, _U, _U)),
}
TABLE_HEADER = ["case", "kappa1", "kappa2", "gamma", "B", "n_L", "z_L", "n_V", "diff",
                "krein_verdict", "jl_verdict", "paper_verdict", "match"]


def theorem_configs(theorem: str, N: int = _N0) -> list[tuple[str, RunConfig, Verdict]]:
    if theorem not in THEOREMS:
        raise ConfigError("theorem", f"must be one of {', '.join(THEOREMS)}, got {theorem!r}")
    scenario, family, parity, expected = THEOREMS[theorem]
    rows = []
    for i in range(4):
        if scenario == "multiple":
            name, (k1, k2, g, B) = _MULTIPLE[i]
            cfg = {"kappa1": k1, "kappa2": k2, "gamma": g, "B": B}
        else:
            name, g = _SEMI[i]
            cfg = {"kappa1": 2.0, "kappa2": 3.0, "gamma": g, "semi_trivial": True}
        cfg.update(family=family.value, parity=parity.value, L=_L0, k=_K0, N=N)
        rows.append((name, build_config(cfg), expected[i]))
    return rows


def _run(conf: RunConfig, check_agreement: bool) -> FullReport:
    return full_report(conf.params, conf.family, conf.L, omega=conf.omega, k=conf.k,
                       parity=conf.parity, N=conf.grid_n, zero_tol=conf.zero_tol,
                       re_tol=conf.re_tol, check_agreement=check_agreement)


def worker_count() -> int:
    raw = os.environ.get("HILLKREIN_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError("HILLKREIN_THREADS", f"expected a positive integer, got {raw!r}") from None
        if n < 1:
            raise ConfigError("HILLKREIN_THREADS", f"expected a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


def theorem_table(theorem: str, N: int = _N0) -> tuple[list[list], bool]:
    """Rows of the regression table and whether every row matches."""
    configs = theorem_configs(theorem, N)
    with ThreadPoolExecutor(max_workers=min(worker_count(), len(configs))) as pool:
        reports = list(pool.map(lambda c: _run(c[1], False), configs))
    rows, all_ok = [], True
    for (name, conf, expected), rep in zip(configs, reports):
        kr = rep.krein
        ok = kr.verdict is expected and rep.agree is not False
        all_ok &= ok
        p = conf.params
        rows.append([name, _fmt(p.kappa1), _fmt(p.kappa2), _fmt(p.gamma), _fmt(p.B),
                     kr.n_L, kr.z_L, kr.n_V, kr.diff, kr.verdict.value, rep.jl.verdict.value,
                     expected.value, "yes" if ok else "no"])
    return rows, all_ok


# -- argument parsing --------------------------------------------------------

def _model_flags(p: argparse.ArgumentParser, wave_only: bool = False) -> None:
    p.add_argument("--config", help="JSON file with the same keys as the flags; flags override it")
    p.add_argument("--kappa1", type=float)
    p.add_argument("--kappa2", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--B", type=float, help="free B (requires gamma == kappa1 == kappa2)")
    p.add_argument("--semi-trivial", dest="semi_trivial", action="store_const", const=True,
                   help="the wave (phi, 0)")
    p.add_argument("--family", choices=[f.value for f in Family])
    p.add_argument("-L", dest="L", type=float, help="period (default 2 pi)")
    p.add_argument("--k", type=float, help="elliptic modulus")
    p.add_argument("--omega", type=float, help="frequency")
    p.add_argument("--N", type=int, help="grid size (multiple of 4, >= 64; default 256)")
    if not wave_only:
        p.add_argument("--parity", choices=[q.value for q in Parity])
        p.add_argument("--zero-tol", dest="zero_tol", type=float)
        p.add_argument("--re-tol", dest="re_tol", type=float)
    p.add_argument("--out", help="write to this file instead of stdout")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hillkrein", description="Spectral stability of periodic NLS standing waves")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    _model_flags(sub.add_parser("report", help="Krein and J L verdicts as JSON"))
    _model_flags(sub.add_parser("jl-spectrum", help="eigenvalues of J L as CSV"))
    _model_flags(sub.add_parser("wave-dump", help="wave samples as CSV"), wave_only=True)

    p = sub.add_parser("eta-curve", help="eta(k) for the cnoidal family as CSV")
    p.add_argument("--k-min", dest="k_min", type=float, default=0.72)
    p.add_argument("--k-max", dest="k_max", type=float, default=0.99)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("-L", dest="L", type=float, default=2.0 * math.pi)
    p.add_argument("--ivp-tol", dest="ivp_tol", type=float, default=DEFAULT_RTOL)
    p.add_argument("--out")

    p = sub.add_parser("theorem-table", help="canonical regression table for one theorem")
    p.add_argument("theorem", choices=sorted(THEOREMS))
    p.add_argument("--N", type=int, default=_N0)
    p.add_argument("--out", help="also write the table to this CSV file")
    return ap


_MODEL_KEYS = ("kappa1", "kappa2", "gamma", "B", "semi_trivial", "family", "L", "k", "omega",
               "N", "parity", "zero_tol", "re_tol", "ivp_tol")


def merged_config(args: argparse.Namespace) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config!r}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config", "top level must be an object")
        unknown = sorted(set(cfg) - set(_MODEL_KEYS))
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
    for key in _MODEL_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


# -- commands ----------------------------------------------------------------

def cmd_report(args) -> int:
    conf = build_config(merged_config(args))
    code = EXIT_OK
    try:
        rep = _run(conf, True)
    except AgreementFailure as exc:
        log.error("%s", exc)
        rep, code = exc.report, EXIT_AGREEMENT
    _emit(dumps(report_to_dict(rep, conf)), args.out)
    log.info("%s: krein %s, J L %s", rep.tag, rep.krein.verdict.value, rep.jl.verdict.value)
    return code


def cmd_jl_spectrum(args) -> int:
    conf = build_config(merged_config(args))
    profile = conf.profile()
    re_tol = conf.re_tol if conf.re_tol is not None else 1e-4 * abs(profile.omega)
    grid = Grid(conf.grid_n, conf.L)
    jl = jl_spectrum(assemble_JL(profile, conf.params, grid, conf.parity), re_tol)
    rows = [[_fmt(z.real), _fmt(z.imag), _fmt(r)] for z, r in zip(jl.eigenvalues, jl.residuals)]
    _emit(_csv_text(["re", "im", "residual"], rows), args.out)
    log.info("J L verdict %s (max |Re| = %.3e, tol %.1e)", jl.verdict.value, jl.max_re, re_tol)
    return EXIT_OK


def cmd_wave_dump(args) -> int:
    cfg = merged_config(args)
    family = _choice(cfg, "family", Family)
    L = _number(cfg, "L", positive=True) or 2.0 * math.pi
    if any(cfg.get(key) is not None for key in ("kappa1", "kappa2", "gamma")):
        cscale = _params(cfg).cscale
    else:
        cscale = 1.0
    k, omega = _number(cfg, "k"), _number(cfg, "omega")
    if (k is None) == (omega is None):
        raise ConfigError("k", "give exactly one of k or omega")
    n = cfg.get("N", 256)
    try:
        grid = Grid(int(n), L)
    except (GridError, TypeError, ValueError) as exc:
        raise ConfigError("N", str(exc)) from None
    try:
        profile = (WaveProfile.from_k(family, L, k, cscale) if k is not None
                   else WaveProfile.from_omega(family, L, omega, cscale))
    except WaveDomainError as exc:
        raise ConfigError("k" if k is not None else "omega", str(exc)) from None
    phi = wave_samples(profile, grid)
    rows = [[_fmt(x), _fmt(v)] for x, v in zip(grid.nodes, phi)]
    _emit(_csv_text(["x", "phi"], rows), args.out)
    return EXIT_OK


def cmd_eta_curve(args) -> int:
    try:
        samples = eta_curve(args.k_min, args.k_max, args.n, args.L, args.ivp_tol)
    except WaveDomainError as exc:
        raise ConfigError("k_min", str(exc)) from None
    except ValueError as exc:
        raise ConfigError("n", str(exc)) from None
    for s in samples:
        if not s.ok:
            log.warning("k=%s failed: %s", _fmt(s.k), s.error)
    rows = [[_fmt(s.k), _fmt(s.eta)] for s in samples]
    _emit(_csv_text(["k", "eta"], rows), args.out)
    return EXIT_OK


def cmd_theorem_table(args) -> int:
    rows, ok = theorem_table(args.theorem, args.N)
    text = _csv_text(TABLE_HEADER, rows)
    sys.stdout.write(text)
    sys.stdout.flush()
    if args.out:
        _emit(text, args.out)
    if not ok:
        log.error("theorem %s: some rows do not match the published verdicts", args.theorem)
        return EXIT_THEOREM
    return EXIT_OK


COMMANDS = {
    "report": cmd_report,
    "jl-spectrum": cmd_jl_spectrum,
    "wave-dump": cmd_wave_dump,
    "eta-curve": cmd_eta_curve,
    "theorem-table": cmd_theorem_table,
}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; that code is reserved here
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
