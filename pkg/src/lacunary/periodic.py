"""Mean-zero trigonometric polynomials evaluated exactly at rational points.

Angles are always reduced with exact integer arithmetic before anything is
converted to floating point: ``f(n x)`` at ``x = u/v`` uses ``(j n u) mod v``.
That keeps full accuracy for frequencies with thousands of bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidParameter


@dataclass(frozen=True)
class RationalPoint:
    u: int
    v: int
    reduced: bool = False

    def __post_init__(self):
        u, v = int(self.u), int(self.v)
        if v <= 0:
            raise InvalidParameter(f"denominator must be positive, got {v}")
        if not 0 <= u < v:
            raise InvalidParameter(f"need 0 <= u < v, got {u}/{v}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "reduced", math.gcd(u, v) == 1 or u == 0 and v == 1)

    @classmethod
    def from_fraction(cls, x) -> "RationalPoint":
        """Fractional part of ``x`` in lowest terms."""
        x = Fraction(x)
        x -= math.floor(x)
        return cls(x.numerator, x.denominator)

    def scaled(self, n: int) -> "RationalPoint":
        """The point ``{n x}`` (same denominator, numerator reduced mod v)."""
        return RationalPoint((int(n) * self.u) % self.v, self.v)

    def as_fraction(self) -> Fraction:
        return Fraction(self.u, self.v)

    def __float__(self):
        return self.u / self.v


@dataclass(frozen=True)
class TrigPolynomial:
    """``f(x) = sum_j a_j cos(2 pi j x) + b_j sin(2 pi j x)``, ``j = 1..D``.

    ``cos_coeffs[j-1]`` holds ``a_j`` and ``sin_coeffs[j-1]`` holds ``b_j``.
    ``variation_budget`` bounds the coefficients by ``|a_j|, |b_j| <= V/j``;
    when omitted the smallest such ``V`` is used.
    """

    cos_coeffs: tuple
    sin_coeffs: tuple = ()
    variation_budget: float | None = None

    def __post_init__(self):
        a = [float(c) for c in self.cos_coeffs]
        b = [float(c) for c in self.sin_coeffs]
        D = max(len(a), len(b))
        a += [0.0] * (D - len(a))
        b += [0.0] * (D - len(b))
        # trailing zero harmonics carry no information
        while D > 0 and a[D - 1] == 0.0 and b[D - 1] == 0.0:
            D -= 1
        a, b = a[:D], b[:D]
        if D < 1:
            raise InvalidParameter("trigonometric polynomial must have a nonzero coefficient")
        for c in a + b:
            if not math.isfinite(c):
                raise InvalidParameter("coefficients must be finite")
        need = max(j * max(abs(a[j - 1]), abs(b[j - 1])) for j in range(1, D + 1))
        V = need if self.variation_budget is None else float(self.variation_budget)
        if not V > 0:
            raise InvalidParameter("variation budget must be positive")
        if need > V * (1 + 1e-12):
            j = next(j for j in range(1, D + 1)
                     if j * max(abs(a[j - 1]), abs(b[j - 1])) > V * (1 + 1e-12))
            raise InvalidParameter(f"coefficient bound |c_{j}| <= V/{j} violated (V={V})")
        object.__setattr__(self, "cos_coeffs", tuple(a))
        object.__setattr__(self, "sin_coeffs", tuple(b))
        object.__setattr__(self, "variation_budget", V)

    @property
    def degree(self) -> int:
        return len(self.cos_coeffs)

    @classmethod
    def cosine(cls, *coeffs) -> "TrigPolynomial":
        return cls(tuple(coeffs))

    def terms(self):
        """Nonzero harmonics as ``(j, a_j, b_j)``."""
        return [(j, a, b) for j, (a, b) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1)
                if a != 0.0 or b != 0.0]

    def kernel_arrays(self):
        """``(js, a, b)`` numpy arrays for the numeric kernels."""
        t = self.terms()
        return (np.array([j for j, _, _ in t], dtype=np.int64),
                np.array([a for _, a, _ in t], dtype=np.float64),
                np.array([b for _, _, b in t], dtype=np.float64))

    def is_even(self) -> bool:
        return not any(self.sin_coeffs)

    def __call__(self, x) -> float:
        if not isinstance(x, RationalPoint):
            x = RationalPoint.from_fraction(x)
        return eval_at(self, x)


def eval_at(f: TrigPolynomial, x: RationalPoint) -> float:
    u, v = x.u, x.v
    s = 0.0
    for j, a, b in f.terms():
        ang = 2.0 * math.pi * ((j * u) % v) / v
        if a:
            s += a * math.cos(ang)
        if b:
            s += b * math.sin(ang)
    return s


# ``eval`` is the documented name; keep the builtin reachable inside this module.
eval = eval_at  # noqa: A001


def scaled_eval(f: TrigPolynomial, n: int, x: RationalPoint) -> float:
    """``f(n x)``; identical to ``eval(f, {n x})`` bit for bit."""
    return eval_at(f, x.scaled(n))


def partial_sum(f: TrigPolynomial, seq, N: int, x: RationalPoint) -> float:
    terms = tuple(seq)
    if not 0 <= N <= len(terms):
        raise InvalidParameter(f"N={N} outside [0, {len(terms)}]")
    s = 0.0
    for n in terms[:N]:
        s += scaled_eval(f, n, x)
    return s


def l2_norm(f: TrigPolynomial) -> float:
    return math.sqrt(norm_sq(f))


def norm_sq(f: TrigPolynomial) -> float:
    return 0.5 * math.fsum(a * a + b * b for a, b in zip(f.cos_coeffs, f.sin_coeffs))


def kac_variance(f: TrigPolynomial, base: int = 2) -> float:
    """Limiting variance of ``N**-0.5 * sum f(base**k x)``.

    Cross terms pair harmonic ``j`` with ``j * base**k``; the sum stops once
    ``base**k`` exceeds the degree.
    """
    if base < 2:
        raise InvalidParameter("base must be >= 2")
    a, b, D = f.cos_coeffs, f.sin_coeffs, f.degree
    parts = [norm_sq(f)]
    step = base
    while step <= D:
        cross = 0.0
        for j in range(1, D // step + 1):
            cross += a[j - 1] * a[j * step - 1] + b[j - 1] * b[j * step - 1]
        parts.append(cross)  # 2 * (1/2) * cross
        step *= base
    return math.fsum(parts)


# -- parsing ---------------------------------------------------------------------

def _accumulate(items):
    cos, sin = {}, {}
    for kind, j, c in items:
        if j < 1:
            raise InvalidParameter(f"harmonic index must be >= 1, got {j}")
        target = cos if kind == "cos" else sin
        target[j] = target.get(j, 0.0) + c
    D = max(list(cos) + list(sin) + [0])
    return TrigPolynomial(tuple(cos.get(j, 0.0) for j in range(1, D + 1)),
                          tuple(sin.get(j, 0.0) for j in range(1, D + 1)))


def _parse_item(kind, j, c):
    kind = kind.strip().lower()
    if kind not in ("cos", "sin"):
        raise InvalidParameter(f"unknown harmonic kind {kind!r}")
    try:
        return kind, int(j), float(c)
    except ValueError:
        raise InvalidParameter(f"bad harmonic {kind} {j} {c}") from None


def parse_function(spec: str) -> TrigPolynomial:
    """Parse ``cos:1:1.0,sin:3:0.2`` shorthand."""
    items = []
    for part in spec.split(","):
        bits = part.strip().split(":")
        if len(bits) != 3:
            raise InvalidParameter(f"bad harmonic spec {part!r}; expected kind:j:coeff")
        items.append(_parse_item(*bits))
    return _accumulate(items)


def parse_function_text(text: str) -> TrigPolynomial:
    """Parse one ``cos j coeff`` / ``sin j coeff`` entry per line (``#`` comments)."""
    items = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        bits = line.split()
        if len(bits) != 3:
            raise InvalidParameter(f"bad function line {line!r}")
        items.append(_parse_item(*bits))
    return _accumulate(items)


def format_function(f: TrigPolynomial) -> str:
    lines = []
    for j, a, b in f.terms():
        if a:
            lines.append(f"cos {j} {a!r}")
        if b:
            lines.append(f"sin {j} {b!r}")
    return "\n".join(lines) + "\n"


def function_shorthand(f: TrigPolynomial) -> str:
    parts = []
    for j, a, b in f.terms():
        if a:
            parts.append(f"cos:{j}:{a!r}")
        if b:
            parts.append(f"sin:{j}:{b!r}")
    return ",".join(parts)
