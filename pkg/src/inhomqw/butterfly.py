"""
Butterfly dataset: eigenvalue arguments of the CW block against alpha.

Rows are ``(P, Q, alpha, arg_lambda)`` with ``arg_lambda`` in (-pi, pi],
grouped by fraction in enumeration order ``(Q, P)`` and sorted by argument
within a fraction. Output is a pure function of ``qmax`` and the tolerances.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import gcd
from pathlib import Path
from typing import Optional, TextIO, Union

import numpy as np

from inhomqw.core import AlphaPQ
from inhomqw.errors import ComputationError, InvariantError, ValidationError
from inhomqw.spectral import (
    DEFAULT_TOL,
    SPECIAL_EIGENVALUES,
    CheckReport,
    Tolerances,
    build_cw_matrix,
    canonical_arg,
    eigenpairs,
    multisets_match,
)

__all__ = [
    "ButterflyDataset",
    "enumerate_alphas",
    "expected_row_count",
    "sweep",
    "symmetry_audit",
    "write_csv",
    "read_csv",
    "plot_script",
]

HEADER = "P,Q,alpha,arg_lambda"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def enumerate_alphas(qmax: int) -> list[AlphaPQ]:
    """All admissible P/(4Q) with Q <= qmax, ordered by (Q, P)."""
    if not isinstance(qmax, int) or qmax < 1:
        raise ValidationError(f"qmax must be a positive integer, got {qmax!r}")
    return [AlphaPQ(P, Q) for Q in range(1, qmax + 1)
            for P in range(1, 4 * Q, 2) if gcd(P, Q) == 1]


def expected_row_count(qmax: int) -> int:
    return sum(4 * a.Q for a in enumerate_alphas(qmax))


@dataclass
class ButterflyDataset:
    P: np.ndarray
    Q: np.ndarray
    alpha: np.ndarray
    arg: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.arg)

    def fractions(self) -> list[AlphaPQ]:
        seen = dict.fromkeys(zip(self.P.tolist(), self.Q.tolist()))
        return [AlphaPQ(p, q) for p, q in seen]

    def columns(self) -> dict[AlphaPQ, np.ndarray]:
        """Argument array for every fraction present."""
        out: dict[AlphaPQ, list] = {}
        for p, q, x in zip(self.P.tolist(), self.Q.tolist(), self.arg.tolist()):
            out.setdefault(AlphaPQ(p, q), []).append(x)
        return {k: np.array(v) for k, v in out.items()}


def _column(a: AlphaPQ, tol: Tolerances):
    try:
        rec = eigenpairs(build_cw_matrix(a), tol)
    except ComputationError:
        raise
    except Exception as exc:  # solver faults carry the fraction
        raise ComputationError(f"spectrum failed for alpha={a}: {exc}", alpha=a) from exc
    args = np.sort(canonical_arg(rec.eigenvalues))
    return args, rec.max_residual, rec.max_modulus_deviation


def sweep(qmax: int, tol: Tolerances = DEFAULT_TOL, jobs: int = 1) -> ButterflyDataset:
    """Compute every column for Q <= qmax.

    With ``jobs > 1`` fractions are spread over worker processes; results
    are merged in enumeration order, so output does not depend on ``jobs``.
    """
    alphas = enumerate_alphas(qmax)
    if len({a.alpha for a in alphas}) != len(alphas):
        raise InvariantError("two admissible (P, Q) share the same alpha")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_column, alphas, [tol] * len(alphas), chunksize=8))
    else:
        results = [_column(a, tol) for a in alphas]

    P, Q, alpha, arg = [], [], [], []
    worst_res = worst_mod = 0.0
    for a, (args, res, mod) in zip(alphas, results):
        P.append(np.full(len(args), a.P))
        Q.append(np.full(len(args), a.Q))
        alpha.append(np.full(len(args), a.P / (4 * a.Q)))
        arg.append(args)
        worst_res, worst_mod = max(worst_res, res), max(worst_mod, mod)
    rows = sum(len(x) for x in arg)
    if rows != expected_row_count(qmax):
        raise InvariantError(f"row count {rows} != expected {expected_row_count(qmax)}")
    meta = {
        "Qmax": qmax,
        "tolerance": tol.match,
        "residual_tolerance": tol.residual,
        "fractions": len(alphas),
        "rows": rows,
        "max_residual": worst_res,
        "max_modulus_deviation": worst_mod,
        "arg_convention": "(-pi,pi]",
    }
    return ButterflyDataset(np.concatenate(P), np.concatenate(Q),
                            np.concatenate(alpha), np.concatenate(arg), meta)


def _circular(args: np.ndarray) -> np.ndarray:
    return np.exp(1j * np.asarray(args, dtype=float))


def symmetry_audit(ds: ButterflyDataset, tol: Optional[float] = None) -> list[CheckReport]:
    """Dataset-level P1, P2, P3, P5 and P6 checks, one report per property.

    A failing report lists every offending (P, Q) in ``detail``.
    """
    tol = ds.metadata.get("tolerance", 1e-8) if tol is None else tol
    cols = {a: _circular(v) for a, v in ds.columns().items()}
    # each map gives (column to compare, image of this column)
    maps = {
        "P1": lambda a, z: (cols.get(a.complement()), z),
        "P2": lambda a, z: (z, np.conj(z)),
        "P3": lambda a, z: (z, -z),
        "P6": lambda a, z: (cols.get(a.half_shift()), 1j * z),
    }
    first = next(iter(cols), AlphaPQ(1, 1))
    reports = []
    for name, pair in maps.items():
        worst, bad = 0.0, []
        for a, z in cols.items():
            other, image = pair(a, z)
            ok, d = (False, math.inf) if other is None else multisets_match(other, image, tol)
            worst = max(worst, d)
            if not ok:
                bad.append(str(a))
        detail = "failing: " + ", ".join(bad) if bad else f"{len(cols)} columns"
        reports.append(CheckReport(name, first, not bad, worst, tol, detail))

    worst, bad = 0.0, []
    for a, z in cols.items():
        d = max(float(np.abs(z - s).min()) for s in SPECIAL_EIGENVALUES)
        worst = max(worst, d)
        if not d <= tol:
            bad.append(str(a))
    detail = "failing: " + ", ".join(bad) if bad else f"{len(cols)} columns"
    reports.append(CheckReport("P5", first, not bad, worst, tol, detail))
    return reports


def write_csv(ds: ButterflyDataset, dest: Union[str, Path, TextIO]) -> None:
    """Write ``#`` metadata lines, the header, then one row per eigenvalue."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            write_csv(ds, fh)
        return
    for key, value in ds.metadata.items():
        v = _fmt(value) if isinstance(value, float) else value
        dest.write(f"# {key}={v}\n")
    dest.write(HEADER + "\n")
    buf = io.StringIO()
    for p, q, x, y in zip(ds.P.tolist(), ds.Q.tolist(), ds.alpha.tolist(), ds.arg.tolist()):
        buf.write(f"{p},{q},{_fmt(x)},{_fmt(y)}\n")
    dest.write(buf.getvalue())


def _parse_meta(value: str):
    for conv in (int, float):
        try:
            return conv(value)
        except ValueError:
            pass
    return value


def read_csv(src: Union[str, Path, TextIO]) -> ButterflyDataset:
    if isinstance(src, (str, Path)):
        with open(src, encoding="utf-8") as fh:
            return read_csv(fh)
    meta, rows = {}, []
    header_seen = False
    for line in src:
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = _parse_meta(value)
        elif not header_seen:
            if line != HEADER:
                raise ValidationError(f"unexpected header {line!r}")
            header_seen = True
        else:
            p, q, x, y = line.split(",")
            rows.append((int(p), int(q), float(x), float(y)))
    if not rows:
        empty = np.array([])
        return ButterflyDataset(empty.astype(int), empty.astype(int), empty, empty, meta)
    P, Q, x, y = zip(*rows)
    return ButterflyDataset(np.array(P), np.array(Q), np.array(x), np.array(y), meta)


def plot_script(csv_path: Union[str, Path], image_path: str = "butterfly.png") -> str:
    """A gnuplot script drawing arg(lambda) against alpha as points."""
    return "\n".join([
        "# gnuplot script: arguments of the CW eigenvalues against alpha",
        "set terminal pngcairo size 1600,1200",
        f"set output '{image_path}'",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key off",
        "set xlabel 'alpha = P/(4Q)'",
        "set ylabel 'arg(lambda)'",
        "set xrange [0:1]",
        "set yrange [-pi:pi]",
        "set ytics ('-pi' -pi, '-pi/2' -pi/2, '0' 0, 'pi/2' pi/2, 'pi' pi)",
        f"plot '{csv_path}' every ::1 using 3:4 with dots lc rgb 'black'",
        "",
    ])
