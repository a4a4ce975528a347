"""
Command-line interface.

    inhomqw walk --alpha 1/3 --theta 1/12 --steps 300
    inhomqw spectrum --alpha 1/12
    inhomqw verify --qmax 12
    inhomqw butterfly --qmax 60 --output butterfly.csv --plot-script butterfly.gp

Exit codes: 0 success, 2 invalid input, 3 numerical failure,
4 a symmetry check failed, 5 output could not be written.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, TextIO, Union

import numpy as np

from inhomqw import butterfly as bf
from inhomqw import walk as wk
from inhomqw.core import AlphaPQ, parse_fraction
from inhomqw.errors import ComputationError, ValidationError
from inhomqw.spectral import (
    CWMatrix,
    Tolerances,
    build_cw_matrix,
    canonical_arg,
    eigenpairs,
    verify_all,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_COMPUTATION = 3
EXIT_VERIFY_FAILED = 4
EXIT_IO = 5

SPINOR_TOL = 1e-12
SPINOR_RENORMALIZE_TOL = 1e-6


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_number(text: str) -> Union[Fraction, float]:
    """Exact rational for ``"p/q"`` or integer literals, float otherwise."""
    s = text.strip()
    try:
        return parse_fraction(s)
    except ValidationError:
        if "/" in s:
            raise
    try:
        v = float(s)
    except ValueError:
        raise ValidationError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ValidationError(f"not a finite number: {text!r}")
    return v


def parse_alpha_pq(text: str) -> AlphaPQ:
    """Read ``"P/D"`` literally as P/(4Q) with D = 4Q; no reduction."""
    num, sep, den = text.strip().partition("/")
    if not sep:
        raise ValidationError(f"spectral commands need an exact literal P/(4Q), got {text!r}")
    try:
        p, d = int(num), int(den)
    except ValueError:
        raise ValidationError(f"not an exact rational literal: {text!r}") from None
    return AlphaPQ.from_literal(p, d)


def parse_spinor(text: str) -> np.ndarray:
    """Two comma-separated complex literals, e.g. ``"0.6,0.8j"``.

    Deviations of the norm up to 1e-6 are renormalized with a warning;
    larger ones are rejected.
    """
    parts = text.split(",")
    if len(parts) != 2:
        raise ValidationError(f"spinor needs two comma-separated complex numbers, got {text!r}")
    try:
        v = np.array([complex(p.strip().replace(" ", "")) for p in parts])
    except ValueError:
        raise ValidationError(f"malformed complex number in spinor {text!r}") from None
    norm = float(np.sqrt(np.vdot(v, v).real))
    dev = abs(norm ** 2 - 1.0)
    if dev > SPINOR_RENORMALIZE_TOL or norm == 0:
        raise ValidationError(f"spinor norm^2 {norm ** 2:.12g} is not 1 (deviation {dev:.3g})")
    if dev > SPINOR_TOL:
        print(f"warning: spinor renormalized (norm^2 deviation {dev:.3g})", file=sys.stderr)
        v = v / norm
    return v


@dataclass
class RunConfig:
    command: str
    alpha: Optional[str] = None
    theta: str = "0"
    steps: int = 0
    spinor: np.ndarray = field(default_factory=lambda: np.array(wk.DEFAULT_SPINOR))
    ordering: str = "WC"
    qmax: int = 1
    tol: Tolerances = field(default_factory=Tolerances)
    support_eps: float = 1e-12
    output: Optional[str] = None
    amplitudes: Optional[str] = None
    plot_script: Optional[str] = None
    json_path: Optional[str] = None
    jobs: int = 1
    inject_fault: Optional[str] = None

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        tol = Tolerances(residual=ns.residual_tol, match=ns.match_tol, gap=ns.match_tol,
                         unitarity=ns.unitarity_tol, similarity=ns.unitarity_tol)
        cfg = cls(ns.command, tol=tol, support_eps=ns.support_eps,
                  output=getattr(ns, "output", None))
        for name in ("alpha", "theta", "steps", "ordering", "qmax", "amplitudes",
                     "plot_script", "json_path", "jobs", "inject_fault"):
            if hasattr(ns, name):
                setattr(cfg, name, getattr(ns, name))
        if getattr(ns, "spinor", None) is not None:
            cfg.spinor = parse_spinor(ns.spinor)
        if cfg.steps < 0:
            raise ValidationError(f"steps must be nonnegative, got {cfg.steps}")
        if cfg.qmax < 1:
            raise ValidationError(f"qmax must be at least 1, got {cfg.qmax}")
        if cfg.jobs < 1:
            raise ValidationError(f"jobs must be at least 1, got {cfg.jobs}")
        return cfg


class _Output:
    """stdout or a file, opened lazily; OSError surfaces as exit code 5."""

    def __init__(self, path: Optional[str]):
        self.path = path
        self.fh: Optional[TextIO] = None

    def __enter__(self) -> TextIO:
        if self.path is None or self.path == "-":
            return sys.stdout
        self.fh = open(self.path, "w", encoding="utf-8", newline="\n")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()


def _interval(iv) -> str:
    return "none" if iv is None else f"[{iv[0]},{iv[1]}]"


def cmd_walk(cfg: RunConfig, out: TextIO) -> int:
    alpha = parse_number(cfg.alpha if cfg.alpha is not None else "1/4")
    theta = parse_number(cfg.theta)
    params = wk.WalkParams(alpha, theta, cfg.ordering)
    state = wk.evolve(cfg.spinor, params, cfg.steps)
    dist = wk.distribution(state, approximate=not params.exact)
    norm_dev = abs(dist.total() - 1.0)
    supp = wk.support(dist, cfg.support_eps)
    m2 = wk.moment(dist, 2)
    if params.exact:
        pred = wk.confinement_predict(alpha, theta)
        predicted = "unbounded" if pred is None else _interval(pred)
    else:
        predicted = "n/a"

    out.write(f"# alpha={alpha}\n# theta={theta}\n# ordering={cfg.ordering}\n")
    spinor = ",".join(repr(complex(z)) for z in cfg.spinor)
    out.write(f"# steps={cfg.steps}\n# spinor={spinor}\n")
    out.write(f"# mode={'exact' if params.exact else 'approximate'}\n")
    out.write(f"# support_eps={cfg.support_eps!r}\n# reflector_interval={predicted}\n")
    summary = (f"norm_deviation={norm_dev:.3e} support={_interval(supp)} "
               f"second_moment={_fmt(m2)}")
    out.write(f"# summary: {summary}\n")
    out.write("n,prob\n")
    for n, p in zip(dist.sites.tolist(), dist.probs.tolist()):
        out.write(f"{n},{_fmt(p)}\n")
    if out is not sys.stdout:
        print(summary, file=sys.stderr)

    if cfg.amplitudes:
        with open(cfg.amplitudes, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("n,reL,imL,reR,imR\n")
            for n, (a_l, a_r) in zip(state.sites.tolist(), state.amps.tolist()):
                fh.write(f"{n},{_fmt(a_l.real)},{_fmt(a_l.imag)},"
                         f"{_fmt(a_r.real)},{_fmt(a_r.imag)}\n")
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, out: TextIO) -> int:
    if cfg.alpha is None:
        raise ValidationError("spectrum needs --alpha P/(4Q)")
    a = parse_alpha_pq(cfg.alpha)
    rec = eigenpairs(build_cw_matrix(a), cfg.tol)
    args = canonical_arg(rec.eigenvalues)
    order = np.argsort(args, kind="stable")
    out.write(f"# alpha={a}\n# P={a.P}\n# Q={a.Q}\n")
    out.write(f"# residual_tolerance={cfg.tol.residual!r}\n# min_gap={_fmt(rec.gap)}\n")
    out.write("index,re,im,arg,residual\n")
    for i, k in enumerate(order.tolist()):
        z = rec.eigenvalues[k]
        out.write(f"{i},{_fmt(z.real)},{_fmt(z.imag)},{_fmt(args[k])},{_fmt(rec.residuals[k])}\n")
    return EXIT_OK


class FaultyBuilder:
    """Test hook: perturbs one CW matrix entry for a single (P, Q)."""

    def __init__(self, target: AlphaPQ, size: float = 1e-3):
        self.target = target
        self.size = size

    def __call__(self, a: AlphaPQ) -> CWMatrix:
        m = build_cw_matrix(a)
        if a != self.target:
            return m
        bad = m.matrix.copy()
        bad[0, 0] += self.size
        return CWMatrix(a, bad, m.basis)


def _verify_one(args):
    a, builder, tol = args
    return verify_all(a, builder, tol)


def cmd_verify(cfg: RunConfig, out: TextIO) -> int:
    builder = build_cw_matrix
    if cfg.inject_fault:
        builder = FaultyBuilder(parse_alpha_pq(cfg.inject_fault))
    alphas = bf.enumerate_alphas(cfg.qmax)
    work = [(a, builder, cfg.tol) for a in alphas]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_verify_one, work, chunksize=4))
    else:
        results = [_verify_one(w) for w in work]

    passed = defaultdict(int)
    total = defaultdict(int)
    worst = defaultdict(float)
    failures = []
    for reports in results:
        for r in reports:
            total[r.prop] += 1
            passed[r.prop] += r.passed
            # for P4 the informative extreme is the smallest gap
            if r.prop == "P4":
                worst[r.prop] = min(worst.get(r.prop, math.inf), r.value)
            else:
                worst[r.prop] = max(worst[r.prop], r.value)
            if not r.passed:
                failures.append(r)

    out.write(f"# qmax={cfg.qmax} fractions={len(alphas)}\n")
    out.write(f"# tolerances residual={cfg.tol.residual!r} match={cfg.tol.match!r} "
              f"unitarity={cfg.tol.unitarity!r}\n")
    if cfg.qmax <= 2:
        for reports in results:
            for r in reports:
                out.write(f"{r}\n")
    for prop in total:
        label = "min_gap" if prop == "P4" else "worst"
        status = "PASS" if passed[prop] == total[prop] else "FAIL"
        out.write(f"{status} {prop}: {passed[prop]}/{total[prop]} {label}={worst[prop]:.3e}\n")
    for r in failures:
        out.write(f"{r}\n")
    ok = not failures
    out.write(f"{'ALL PASS' if ok else 'FAILED'}\n")

    if cfg.json_path:
        summary = {
            "qmax": cfg.qmax,
            "fractions": len(alphas),
            "ok": ok,
            "properties": {p: {"passed": passed[p], "total": total[p], "worst": worst[p]}
                           for p in total},
            "failures": [{"property": r.prop, "alpha": str(r.alpha), "value": r.value}
                         for r in failures],
        }
        with open(cfg.json_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_butterfly(cfg: RunConfig, out: TextIO) -> int:
    ds = bf.sweep(cfg.qmax, cfg.tol, jobs=cfg.jobs)
    bf.write_csv(ds, out)
    if cfg.plot_script:
        csv_name = cfg.output if cfg.output and cfg.output != "-" else "butterfly.csv"
        with open(cfg.plot_script, "w", encoding="utf-8") as fh:
            fh.write(bf.plot_script(csv_name))
    reports = bf.symmetry_audit(ds, cfg.tol.match)
    for r in reports:
        print(f"audit {r}", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY_FAILED


COMMANDS = {
    "walk": cmd_walk,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "butterfly": cmd_butterfly,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--residual-tol", type=float, default=1e-8)
    common.add_argument("--match-tol", type=float, default=1e-8)
    common.add_argument("--unitarity-tol", type=float, default=1e-12)
    common.add_argument("--support-eps", type=float, default=1e-12)

    parser = argparse.ArgumentParser(
        prog="inhomqw", description="Inhomogeneous quantum walks: simulation and spectra.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("walk", parents=[common], help="simulate the walk")
    p.add_argument("--alpha", default="1/4", help="exact 'p/q' or a real (approximate mode)")
    p.add_argument("--theta", default="0")
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--spinor", help="initial coin state 'a,b' (default (1, i)/sqrt 2)")
    p.add_argument("--ordering", choices=wk.ORDERINGS, default="WC")
    p.add_argument("--amplitudes", metavar="PATH", help="also write per-site amplitudes")
    p.add_argument("-o", "--output", help="CSV destination (default stdout)")

    p = sub.add_parser("spectrum", parents=[common], help="eigenvalues of the CW block")
    p.add_argument("--alpha", required=True, help="literal P/(4Q), P odd, gcd(P,Q)=1")
    p.add_argument("-o", "--output")

    p = sub.add_parser("verify", parents=[common], help="check P1-P6 for all Q <= qmax")
    p.add_argument("--qmax", type=int, default=12)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", dest="json_path", metavar="PATH")
    p.add_argument("--inject-fault", help=argparse.SUPPRESS)
    p.add_argument("-o", "--output")

    p = sub.add_parser("butterfly", parents=[common], help="write the butterfly dataset")
    p.add_argument("--qmax", type=int, default=60)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--plot-script", metavar="PATH", help="also write a gnuplot script")
    p.add_argument("-o", "--output", default="butterfly.csv")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_VALIDATION
    try:
        cfg = RunConfig.from_args(ns)
        with _Output(cfg.output) as out:
            return COMMANDS[cfg.command](cfg, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ComputationError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
