"""
Exact rational angles and the per-site rotation coin.

Angles are measured in turns and kept as :class:`fractions.Fraction`, so
the sites where the coin diagonal vanishes (angle 1/4 or 3/4) are hit
exactly. Floating-point trigonometry only enters for the reduced remainder
inside one quadrant; the quadrant itself is applied by exact sign/swap, which
makes ``coin_matrix(r + 1/2) == -coin_matrix(r)`` hold bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Union

import numpy as np

from inhomqw.errors import InvariantError, ValidationError

__all__ = [
    "Fraction",
    "reduce_fraction",
    "mod1",
    "parse_fraction",
    "AlphaPQ",
    "coin_angle",
    "cos_sin_turns",
    "coin_matrix",
    "GeneralCoin",
    "CoinCheck",
    "validate_general_coin",
    "QUARTER_TURNS",
]

Rational = Union[Fraction, int]

QUARTER_TURNS = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))

_EIGHTH = Fraction(1, 8)
_QUARTER = Fraction(1, 4)


def reduce_fraction(num: int, den: int = 1) -> Fraction:
    """Return the canonical reduced fraction ``num/den``.

    Raises
    ------
    ValidationError
        If ``den`` is zero or the parts are not integers.
    """
    if isinstance(num, Fraction) and den == 1:
        return num
    if not isinstance(num, int) or not isinstance(den, int):
        raise ValidationError(f"fraction parts must be integers, got {num!r}/{den!r}")
    if den == 0:
        raise ValidationError("zero denominator")
    return Fraction(num, den)


def mod1(f: Rational) -> Fraction:
    """Canonical representative of ``f`` in [0, 1)."""
    f = Fraction(f)
    return f - math.floor(f)


def parse_fraction(text: str) -> Fraction:
    """Parse an exact literal such as ``"3/4"``, ``"-1/12"`` or ``"2"``."""
    s = text.strip()
    num, sep, den = s.partition("/")
    try:
        if sep:
            return reduce_fraction(int(num), int(den))
        return Fraction(int(s))
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"not an exact rational literal: {text!r}") from None


@dataclass(frozen=True, order=True)
class AlphaPQ:
    """Admissible coin parameter ``alpha = P/(4Q)``.

    ``P`` odd, ``gcd(P, Q) = 1`` and ``0 < P < 4Q``.
    """

    P: int
    Q: int

    def __post_init__(self):
        P, Q = self.P, self.Q
        if not isinstance(P, int) or not isinstance(Q, int):
            raise ValidationError(f"P and Q must be integers, got {P!r}, {Q!r}")
        if Q < 1:
            raise ValidationError(f"Q must be positive (Q={Q})")
        if P % 2 == 0:
            raise ValidationError(f"P must be odd (P={P})")
        if not 0 < P < 4 * Q:
            raise ValidationError(f"need 0 < P < 4Q (P={P}, Q={Q})")
        if gcd(P, Q) != 1:
            raise ValidationError(f"P and Q must be coprime (gcd({P}, {Q}) = {gcd(P, Q)})")

    @classmethod
    def from_literal(cls, num: int, den: int) -> "AlphaPQ":
        """Read ``num/den`` literally as ``P/(4Q)``; no reduction is applied."""
        if den <= 0 or den % 4:
            raise ValidationError(
                f"denominator {den} is not of the form 4Q with Q a positive integer"
            )
        return cls(num, den // 4)

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.P, 4 * self.Q)

    @property
    def order(self) -> int:
        return 4 * self.Q

    def complement(self) -> "AlphaPQ":
        """``1 - alpha``, again admissible with the same Q."""
        return AlphaPQ(4 * self.Q - self.P, self.Q)

    def half_shift(self) -> "AlphaPQ":
        """``alpha + 1/2`` folded back into (0, 1).

        ``(P + 2Q)`` keeps Q fixed; ``gcd(P + 2Q, Q) = gcd(P, Q)`` so no
        reduction is needed, and the fold by 4Q is exact because the coin
        angles only matter mod 1 and the boundary sign only mod 4.
        """
        shifted = self.P + 2 * self.Q
        if gcd(shifted, self.Q) != 1 or shifted % 2 == 0:
            raise InvariantError(f"P + 2Q = {shifted} inadmissible for Q = {self.Q}")
        return AlphaPQ(shifted % (4 * self.Q), self.Q)

    def __str__(self):
        return f"{self.P}/{4 * self.Q}"


def coin_angle(alpha: Rational, theta: Rational, n: int) -> Fraction:
    """Coin angle at site ``n`` in turns: ``(alpha*n + theta) mod 1``."""
    return mod1(Fraction(alpha) * n + Fraction(theta))


def cos_sin_turns(r: Rational) -> tuple[float, float]:
    """``(cos 2*pi*r, sin 2*pi*r)`` with exact values at quarter turns.

    The quadrant is removed exactly; the remainder in [0, 1/4) is evaluated
    on whichever half of the octant keeps the float argument small.
    """
    r = mod1(r)
    quadrant = math.floor(4 * r)
    u = r - Fraction(quadrant, 4)
    if u == 0:
        c0, s0 = 1.0, 0.0
    elif u <= _EIGHTH:
        x = 2.0 * math.pi * float(u)
        c0, s0 = math.cos(x), math.sin(x)
    else:
        x = 2.0 * math.pi * float(_QUARTER - u)
        c0, s0 = math.sin(x), math.cos(x)
    if quadrant == 0:
        return c0, s0
    if quadrant == 1:
        return -s0, c0
    if quadrant == 2:
        return -c0, -s0
    return s0, -c0


def coin_matrix(r: Rational) -> np.ndarray:
    """Rotation coin ``[[cos, -sin], [sin, cos]]`` at angle ``2*pi*r``.

    Rows and columns are ordered (L, R). Entries are real; at quarter turns
    they are exactly 0 or +-1.
    """
    c, s = cos_sin_turns(r)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class GeneralCoin:
    """Coefficients of a general per-site coin ``[[a, b], [c, d]]``."""

    a: complex
    b: complex
    c: complex
    d: complex

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)


@dataclass
class CoinCheck:
    """Outcome of :func:`validate_general_coin`.

    ``residuals`` holds every relation's residual; ``violations`` only the
    names of those above tolerance.
    """

    residuals: dict[str, float]
    tol: float
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "ok"
        return "; ".join(f"{k}: residual {self.residuals[k]:.3g}" for k in self.violations)


def validate_general_coin(g: GeneralCoin, tol: float = 1e-12) -> CoinCheck:
    """Check all five coefficient relations independently.

    The relations overlap as a generating set; none is dropped.
    """
    a, b, c, d = (complex(x) for x in (g.a, g.b, g.c, g.d))
    delta = a * d - b * c
    residuals = {
        "|a|^2+|c|^2=1": abs(abs(a) ** 2 + abs(c) ** 2 - 1.0),
        "a*conj(b)+c*conj(d)=0": abs(a * b.conjugate() + c * d.conjugate()),
        "c=-Delta*conj(b)": abs(c + delta * b.conjugate()),
        "d=Delta*conj(a)": abs(d - delta * a.conjugate()),
        "|Delta|=1": abs(abs(delta) - 1.0),
    }
    return CoinCheck(residuals, tol, [k for k, v in residuals.items() if not v <= tol])
