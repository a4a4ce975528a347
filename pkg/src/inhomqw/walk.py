"""
Walk engine: dense-window evolution of the inhomogeneous walk on Z.

A state stores (psi(n;L), psi(n;R)) for every site of a contiguous window
``[nmin, nmax]``; amplitudes outside the window are zero. Each shift widens
the window by one site on each side.

Exact parameters (``Fraction`` alpha and theta) use a coin table indexed by
``n mod den(alpha)`` built from exact rational angles, so reflecting sites
have exactly zero diagonal. Float parameters run in approximate mode, meant
for exploratory runs such as irrational alpha; no confinement guarantee
applies there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Union

import numpy as np

from inhomqw.core import coin_angle, cos_sin_turns
from inhomqw.errors import ValidationError

__all__ = [
    "DEFAULT_SPINOR",
    "WalkParams",
    "WalkerState",
    "Distribution",
    "apply_coin",
    "apply_shift",
    "step",
    "evolve",
    "run",
    "distribution",
    "moment",
    "support",
    "confinement_predict",
    "is_reflector",
]

Real = Union[Fraction, int, float]

DEFAULT_SPINOR = (1 / math.sqrt(2), 1j / math.sqrt(2))

ORDERINGS = ("WC", "CW")


@dataclass(frozen=True)
class WalkParams:
    """Coin parameters and step ordering.

    ``ordering="WC"`` applies the coin then the shift; ``"CW"`` the shift
    then the coin.
    """

    alpha: Real
    theta: Real = Fraction(0)
    ordering: str = "WC"

    def __post_init__(self):
        if self.ordering not in ORDERINGS:
            raise ValidationError(f"ordering must be one of {ORDERINGS}, got {self.ordering!r}")
        for name in ("alpha", "theta"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (Fraction, int, float)):
                raise ValidationError(f"{name} must be a Fraction, int or float, got {v!r}")
            if isinstance(v, float) and not math.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v!r}")

    @property
    def exact(self) -> bool:
        return not isinstance(self.alpha, float) and not isinstance(self.theta, float)

    @cached_property
    def _table(self):
        alpha = Fraction(self.alpha)
        period = alpha.denominator
        c = np.empty(period)
        s = np.empty(period)
        for k in range(period):
            c[k], s[k] = cos_sin_turns(coin_angle(alpha, self.theta, k))
        return period, c, s

    def coin_entries(self, sites: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """cos and sin of the coin angle at each integer site."""
        if self.exact:
            period, c, s = self._table
            idx = np.mod(sites, period)
            return c[idx], s[idx]
        x = 2.0 * np.pi * (float(self.alpha) * sites + float(self.theta))
        return np.cos(x), np.sin(x)


@dataclass(frozen=True)
class WalkerState:
    """Amplitudes over the window starting at ``nmin``.

    ``amps[i] = (psi(nmin+i; L), psi(nmin+i; R))``.
    """

    nmin: int
    amps: np.ndarray
    step_count: int = 0

    def __post_init__(self):
        if self.amps.ndim != 2 or self.amps.shape[1] != 2:
            raise ValidationError(f"amplitudes must have shape (N, 2), got {self.amps.shape}")

    @classmethod
    def localized(cls, spinor=DEFAULT_SPINOR, origin: int = 0) -> "WalkerState":
        """``|origin> (x) spinor``; the spinor must be normalized."""
        v = np.asarray(spinor, dtype=complex).reshape(2)
        if abs(np.vdot(v, v).real - 1.0) > 1e-12:
            raise ValidationError(f"initial spinor not normalized: |phi|^2 = {np.vdot(v, v).real!r}")
        return cls(origin, v.reshape(1, 2).copy())

    @property
    def nmax(self) -> int:
        return self.nmin + len(self.amps) - 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.nmin, self.nmax + 1)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def amplitude(self, n: int) -> np.ndarray:
        if self.nmin <= n <= self.nmax:
            return self.amps[n - self.nmin]
        return np.zeros(2, dtype=complex)

    def on_window(self, nmin: int, nmax: int) -> np.ndarray:
        """Amplitudes zero-padded (or cropped) to ``[nmin, nmax]``."""
        out = np.zeros((nmax - nmin + 1, 2), dtype=complex)
        lo, hi = max(nmin, self.nmin), min(nmax, self.nmax)
        if lo <= hi:
            out[lo - nmin:hi - nmin + 1] = self.amps[lo - self.nmin:hi - self.nmin + 1]
        return out


@dataclass
class Distribution:
    """Position distribution ``Pr(n; t)`` on a contiguous window."""

    nmin: int
    probs: np.ndarray
    step: int = 0
    approximate: bool = False

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.nmin, self.nmin + len(self.probs))

    def as_dict(self) -> dict[int, float]:
        return {int(n): float(p) for n, p in zip(self.sites, self.probs)}

    def total(self) -> float:
        return float(self.probs.sum())


def apply_coin(s: WalkerState, p: WalkParams) -> WalkerState:
    c, sn = p.coin_entries(s.sites)
    left, right = s.amps[:, 0], s.amps[:, 1]
    out = np.empty_like(s.amps, dtype=complex)
    out[:, 0] = c * left - sn * right
    out[:, 1] = sn * left + c * right
    return WalkerState(s.nmin, out, s.step_count)


def apply_shift(s: WalkerState) -> WalkerState:
    """L amplitude moves n -> n-1, R amplitude n -> n+1."""
    size = len(s.amps)
    out = np.zeros((size + 2, 2), dtype=complex)
    out[:size, 0] = s.amps[:, 0]
    out[2:, 1] = s.amps[:, 1]
    return WalkerState(s.nmin - 1, out, s.step_count)


def step(s: WalkerState, p: WalkParams) -> WalkerState:
    if p.ordering == "WC":
        nxt = apply_shift(apply_coin(s, p))
    else:
        nxt = apply_coin(apply_shift(s), p)
    return WalkerState(nxt.nmin, nxt.amps, s.step_count + 1)


def run(s: WalkerState, p: WalkParams, t: int) -> WalkerState:
    """Apply ``t`` steps to an arbitrary state."""
    if not isinstance(t, (int, np.integer)) or t < 0:
        raise ValidationError(f"step count must be a nonnegative integer, got {t!r}")
    for _ in range(int(t)):
        s = step(s, p)
    return s


def evolve(initial, p: WalkParams, t: int, origin: int = 0) -> WalkerState:
    """``U^t |origin, initial>`` for the ordering in ``p``."""
    if not isinstance(t, (int, np.integer)) or t < 0:
        raise ValidationError(f"step count must be a nonnegative integer, got {t!r}")
    return run(WalkerState.localized(initial, origin), p, t)


def distribution(s: WalkerState, approximate: bool = False) -> Distribution:
    probs = np.sum(np.abs(s.amps) ** 2, axis=1)
    return Distribution(s.nmin, probs, s.step_count, approximate)


def moment(d: Distribution, k: int) -> float:
    """``sum_n n**k Pr(n)``."""
    if not isinstance(k, int) or k < 1:
        raise ValidationError(f"moment order must be a positive integer, got {k!r}")
    n = d.sites.astype(float)
    return float(np.sum(n ** k * d.probs))


def support(d: Distribution, eps: float = 1e-12) -> Optional[tuple[int, int]]:
    """Smallest interval holding every site with ``Pr(n) > eps``.

    ``None`` when no site exceeds ``eps``.
    """
    if not eps > 0:
        raise ValidationError(f"support threshold must be positive, got {eps!r}")
    idx = np.flatnonzero(d.probs > eps)
    if idx.size == 0:
        return None
    return d.nmin + int(idx[0]), d.nmin + int(idx[-1])


def is_reflector(alpha, theta, n: int) -> bool:
    """True where the coin diagonal vanishes (angle 1/4 or 3/4 turn)."""
    return coin_angle(alpha, theta, n) in (Fraction(1, 4), Fraction(3, 4))


def confinement_predict(alpha, theta, origin: int = 0) -> Optional[tuple[int, int]]:
    """Interval between the nearest reflecting sites around ``origin``.

    Returns ``None`` when no site reflects (the pattern repeats with period
    ``den(alpha)``, so a reflector on one side implies one on the other). A
    reflector at ``origin`` itself splits the walker both ways, so the
    search is strict on each side.
    """
    alpha, theta = Fraction(alpha), Fraction(theta)
    period = alpha.denominator
    upper = next((origin + k for k in range(1, period + 1)
                  if is_reflector(alpha, theta, origin + k)), None)
    if upper is None:
        return None
    lower = next(origin - k for k in range(1, period + 1)
                 if is_reflector(alpha, theta, origin - k))
    return lower, upper
