"""
Finite CW eigenproblem for alpha = P/(4Q) and checks of its symmetries.

The sites n = -Q and n = Q reflect exactly (coin diagonal zero), so the
shift-then-coin operator leaves invariant the 4Q-dimensional span of

    (-Q;R), (-Q+1;L), (-Q+1;R), ..., (Q-1;L), (Q-1;R), (Q;L)

in that order. :func:`build_cw_matrix` writes that block down directly with
boundary factor ``(-1)**((P+1)//2)``; :func:`lattice_block` recovers it
independently by restricting dense lattice operators, which also supplies
the coin-then-shift (WC) block used by :func:`wc_cw_similarity`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from inhomqw.core import AlphaPQ, coin_angle, coin_matrix
from inhomqw.errors import ComputationError, ValidationError

__all__ = [
    "Tolerances",
    "CWMatrix",
    "SpectrumRecord",
    "CheckReport",
    "boundary_sign",
    "cw_basis",
    "build_cw_matrix",
    "lattice_block",
    "parity_diagonal",
    "eigenpairs",
    "canonical_arg",
    "match_multisets",
    "verify_p1",
    "verify_p2_p3",
    "verify_p4",
    "verify_p5",
    "verify_p6",
    "p6_similarity_deviation",
    "wc_cw_similarity",
    "verify_all",
    "unitarity_deviation",
]

L, R = 0, 1
SPECIAL_EIGENVALUES = (1 + 0j, -1 + 0j, 1j, -1j)


@dataclass(frozen=True)
class Tolerances:
    residual: float = 1e-8
    match: float = 1e-8
    gap: float = 1e-8
    unitarity: float = 1e-12
    similarity: float = 1e-12


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class CWMatrix:
    alpha: AlphaPQ
    matrix: np.ndarray
    basis: tuple[tuple[int, int], ...]

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    def sites(self) -> np.ndarray:
        return np.array([n for n, _ in self.basis])


@dataclass
class SpectrumRecord:
    """Eigenvalues sorted by argument in [0, 2*pi), with residual data."""

    alpha: AlphaPQ
    eigenvalues: np.ndarray
    residuals: np.ndarray
    gap: float
    eigenvectors: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())

    @property
    def max_modulus_deviation(self) -> float:
        return float(np.max(np.abs(np.abs(self.eigenvalues) - 1.0)))


@dataclass
class CheckReport:
    """One property check for one (P, Q).

    ``value`` is the worst deviation (or the min gap for P4); ``passed``
    compares it against ``tol``.
    """

    prop: str
    alpha: AlphaPQ
    passed: bool
    value: float
    tol: float
    detail: str = ""

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        s = f"{status} {self.prop} alpha={self.alpha} value={self.value:.3e} tol={self.tol:.1e}"
        return f"{s} {self.detail}" if self.detail else s


Builder = Callable[[AlphaPQ], CWMatrix]


def boundary_sign(P: int) -> int:
    """``(-1)**((P+1)/2)`` for odd P, in integer arithmetic."""
    if P % 2 == 0:
        raise ValidationError(f"P must be odd (P={P})")
    return -1 if ((P + 1) // 2) % 2 else 1


def cw_basis(Q: int) -> tuple[tuple[int, int], ...]:
    basis = [(-Q, R)]
    for n in range(-Q + 1, Q):
        basis += [(n, L), (n, R)]
    basis.append((Q, L))
    return tuple(basis)


def build_cw_matrix(a: AlphaPQ) -> CWMatrix:
    """The 4Q x 4Q CW block at alpha = P/(4Q), theta = 0."""
    if not isinstance(a, AlphaPQ):
        raise ValidationError(f"expected AlphaPQ, got {a!r}")
    Q = a.Q
    basis = cw_basis(Q)
    index = {b: k for k, b in enumerate(basis)}
    m = np.zeros((4 * Q, 4 * Q), dtype=complex)
    sign = boundary_sign(a.P)
    m[index[(-Q, R)], index[(-Q + 1, L)]] = sign
    m[index[(Q, L)], index[(Q - 1, R)]] = sign
    for n in range(-Q + 1, Q):
        coin = coin_matrix(coin_angle(a.alpha, 0, n))
        src = (index[(n + 1, L)], index[(n - 1, R)])
        for xi in (L, R):
            row = index[(n, xi)]
            m[row, src[0]] = coin[xi, 0]
            m[row, src[1]] = coin[xi, 1]
    return CWMatrix(a, m, basis)


def _lattice_operators(a: AlphaPQ, lo: int, hi: int):
    """Dense coin and shift on sites [lo, hi]; index 2*(n-lo) + xi.

    Amplitude shifted off the window is dropped.
    """
    size = 2 * (hi - lo + 1)
    coin = np.zeros((size, size), dtype=complex)
    shift = np.zeros((size, size), dtype=complex)
    for n in range(lo, hi + 1):
        k = 2 * (n - lo)
        coin[k:k + 2, k:k + 2] = coin_matrix(coin_angle(a.alpha, 0, n))
        if n - 1 >= lo:
            shift[k - 2 + L, k + L] = 1.0
        if n + 1 <= hi:
            shift[k + 2 + R, k + R] = 1.0
    return coin, shift


def lattice_block(a: AlphaPQ, ordering: str = "CW") -> tuple[np.ndarray, float]:
    """Restrict the lattice operator to its invariant 4Q-dimensional block.

    For ``"CW"`` the block basis is :func:`cw_basis`; for ``"WC"`` it is the
    image of that basis under the shift, i.e. (n;L) for -Q <= n < Q and
    (n;R) for -Q < n <= Q. Returns the block and the leakage: the largest
    weight the block's columns put outside the block (zero up to rounding
    when the subspace is invariant).
    """
    Q = a.Q
    lo, hi = -Q - 2, Q + 2
    coin, shift = _lattice_operators(a, lo, hi)
    if ordering == "CW":
        op = coin @ shift
        basis = cw_basis(Q)
    elif ordering == "WC":
        op = shift @ coin
        basis = tuple(sorted([(n, L) for n in range(-Q, Q)] + [(n, R) for n in range(-Q + 1, Q + 1)]))
    else:
        raise ValidationError(f"ordering must be 'CW' or 'WC', got {ordering!r}")
    idx = np.array([2 * (n - lo) + xi for n, xi in basis])
    outside = np.setdiff1d(np.arange(op.shape[0]), idx)
    leakage = float(np.abs(op[np.ix_(outside, idx)]).max(initial=0.0))
    return op[np.ix_(idx, idx)], leakage


def parity_diagonal(Q: int) -> np.ndarray:
    """Diagonal of D: ``1j`` on components at odd sites, ``1`` at even."""
    return np.array([1j if n % 2 else 1.0 + 0j for n, _ in cw_basis(Q)])


def unitarity_deviation(m: np.ndarray) -> float:
    """``max |M^H M - I|`` entrywise."""
    return float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())


def canonical_arg(z) -> np.ndarray:
    """Principal argument mapped into (-pi, pi]."""
    a = np.angle(z)
    return np.where(a <= -np.pi, np.pi, a)


def _sort_by_turn(z: np.ndarray) -> np.ndarray:
    return z[np.argsort(np.mod(np.angle(z), 2 * np.pi), kind="stable")]


def eigenpairs(m: CWMatrix, tol: Tolerances = DEFAULT_TOL) -> SpectrumRecord:
    """Dense eigen-decomposition with mandatory residual verification."""
    a = m.alpha
    try:
        w, v = np.linalg.eig(m.matrix)
    except np.linalg.LinAlgError as exc:
        raise ComputationError(f"eigensolver failed for alpha={a}: {exc}", alpha=a) from exc
    if len(w) != m.order:
        raise ComputationError(f"expected {m.order} eigenvalues, got {len(w)}", alpha=a)
    order = np.argsort(np.mod(np.angle(w), 2 * np.pi), kind="stable")
    w, v = w[order], v[:, order]
    norms = np.linalg.norm(v, axis=0)
    residuals = np.linalg.norm(m.matrix @ v - v * w, axis=0) / norms
    if not np.all(residuals <= tol.residual):
        worst = float(residuals.max())
        raise ComputationError(
            f"eigenpair residual {worst:.3e} exceeds {tol.residual:.1e} for alpha={a}", alpha=a
        )
    diff = np.abs(w[:, None] - w[None, :])
    np.fill_diagonal(diff, np.inf)
    gap = float(diff.min()) if len(w) > 1 else math.inf
    return SpectrumRecord(a, w, residuals, gap, v)


def spectrum(a: AlphaPQ, builder: Builder = build_cw_matrix, tol: Tolerances = DEFAULT_TOL):
    return eigenpairs(builder(a), tol)


def match_multisets(x, y) -> float:
    """Max paired distance between two equal-size point multisets.

    Pairs after sorting both by argument in [0, 2*pi); the caller's
    tolerance decides whether to fall back on greedy nearest-neighbour
    matching, see :func:`multisets_match`.
    """
    x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        return math.inf
    if x.size == 0:
        return 0.0
    return float(np.abs(_sort_by_turn(x) - _sort_by_turn(y)).max())


def _greedy_match(x: np.ndarray, y: np.ndarray) -> float:
    remaining = list(range(len(y)))
    worst = 0.0
    for z in x:
        d = np.abs(y[remaining] - z)
        k = int(np.argmin(d))
        worst = max(worst, float(d[k]))
        remaining.pop(k)
    return worst


def multisets_match(x, y, tol: float) -> tuple[bool, float]:
    """Compare multisets; sorted pairing first, greedy matching on failure.

    The greedy pass guards against argument wrap-around at 0 / 2*pi.
    """
    x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
    dist = match_multisets(x, y)
    if dist > tol and x.shape == y.shape:
        dist = min(dist, _greedy_match(x, y))
    return dist <= tol, dist


def verify_p1(a: AlphaPQ, builder: Builder = build_cw_matrix,
              tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Spectrum at alpha equals spectrum at 1 - alpha."""
    b = a.complement()
    ok, dist = multisets_match(spectrum(a, builder, tol).eigenvalues,
                               spectrum(b, builder, tol).eigenvalues, tol.match)
    return CheckReport("P1", a, ok, dist, tol.match, f"vs alpha={b}")


def verify_p2_p3(rec: SpectrumRecord, tol: Tolerances = DEFAULT_TOL) -> list[CheckReport]:
    """Closure under complex conjugation (P2) and negation (P3)."""
    w = rec.eigenvalues
    ok2, d2 = multisets_match(w, np.conj(w), tol.match)
    ok3, d3 = multisets_match(w, -w, tol.match)
    return [CheckReport("P2", rec.alpha, ok2, d2, tol.match),
            CheckReport("P3", rec.alpha, ok3, d3, tol.match)]


def verify_p4(rec: SpectrumRecord, tol: float = 1e-8) -> CheckReport:
    """All eigenvalues simple: minimum pairwise distance above ``tol``."""
    return CheckReport("P4", rec.alpha, rec.gap > tol, rec.gap, tol, "min gap")


def verify_p5(rec: SpectrumRecord, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Each of 1, -1, i, -i lies within ``tol`` of some eigenvalue."""
    worst = max(float(np.abs(rec.eigenvalues - z).min()) for z in SPECIAL_EIGENVALUES)
    return CheckReport("P5", rec.alpha, worst <= tol.match, worst, tol.match)


def p6_similarity_deviation(a: AlphaPQ, builder: Builder = build_cw_matrix) -> float:
    """``max |CW(alpha + 1/2) - i D CW(alpha) D^-1|`` entrywise."""
    d = parity_diagonal(a.Q)
    m = builder(a).matrix
    shifted = builder(a.half_shift()).matrix
    conj = 1j * (d[:, None] * m / d[None, :])
    return float(np.abs(shifted - conj).max())


def verify_p6(a: AlphaPQ, builder: Builder = build_cw_matrix,
              tol: Tolerances = DEFAULT_TOL) -> list[CheckReport]:
    """Spectrum at alpha + 1/2 is i times the spectrum at alpha.

    Two independent checks: the eigenvalue multisets, and the entrywise
    similarity through the parity diagonal.
    """
    b = a.half_shift()
    ok, dist = multisets_match(spectrum(b, builder, tol).eigenvalues,
                               1j * spectrum(a, builder, tol).eigenvalues, tol.match)
    sim = p6_similarity_deviation(a, builder)
    return [
        CheckReport("P6-spectrum", a, ok, dist, tol.match, f"vs alpha={b}"),
        CheckReport("P6-similarity", a, sim <= tol.similarity, sim, tol.similarity),
    ]


def wc_cw_similarity(a: AlphaPQ, builder: Builder = build_cw_matrix,
                     tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Spectra of the finite WC and CW operators agree."""
    wc, leak = lattice_block(a, "WC")
    if leak > tol.unitarity:
        raise ComputationError(f"WC block not invariant (leakage {leak:.3e})", alpha=a)
    w_wc = np.linalg.eigvals(wc)
    ok, dist = multisets_match(w_wc, spectrum(a, builder, tol).eigenvalues, tol.match)
    return CheckReport("WC~CW", a, ok, dist, tol.match)


def verify_all(a: AlphaPQ, builder: Builder = build_cw_matrix,
               tol: Tolerances = DEFAULT_TOL) -> list[CheckReport]:
    """P1-P6, unitarity and WC/CW agreement for one (P, Q)."""
    m = builder(a)
    u = unitarity_deviation(m.matrix)
    reports = [CheckReport("unitary", a, u <= tol.unitarity, u, tol.unitarity)]
    rec = eigenpairs(m, tol)
    reports.append(verify_p1(a, builder, tol))
    reports.extend(verify_p2_p3(rec, tol))
    reports.append(verify_p4(rec, tol.gap))
    reports.append(verify_p5(rec, tol))
    reports.extend(verify_p6(a, builder, tol))
    reports.append(wc_cw_similarity(a, builder, tol))
    return reports
