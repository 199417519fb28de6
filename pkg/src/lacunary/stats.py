"""Empirical checks of limit theorems for ``sum f(n_k x)``.

Every phase ``n x mod 1`` is reduced exactly in integer arithmetic. Grid
samples use ``x_i = (i + offset)/M``; random samples use dyadic points
``x = u / 2**b`` with ``b`` large enough that the reduced phase keeps 64
correct bits for every frequency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from . import kernels
from .diophantine import DEFAULT_WORK_BUDGET, moment_exact
from .errors import InvalidParameter
from .periodic import RationalPoint, TrigPolynomial, norm_sq
from .sequences import _philox_stream

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SampleSpec:
    mode: str = "grid"
    M: int = 100003
    grid_offset: Fraction = Fraction(0)
    precision_bits: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("grid", "random"):
            raise InvalidParameter(f"unknown sampling mode {self.mode!r}")
        if int(self.M) < 1:
            raise InvalidParameter("sample count M must be positive")
        object.__setattr__(self, "M", int(self.M))
        off = Fraction(self.grid_offset)
        if not 0 <= off < 1:
            raise InvalidParameter("grid_offset must lie in [0, 1)")
        object.__setattr__(self, "grid_offset", off)

    def to_json(self) -> dict:
        return {"mode": self.mode, "M": self.M, "grid_offset": str(self.grid_offset),
                "precision_bits": self.precision_bits, "seed": self.seed}


@dataclass
class EmpiricalSample:
    values: np.ndarray
    N: int
    seq_fingerprint: str
    perm_fingerprint: str | None
    spec: SampleSpec
    # centering constant subtracted from every value; kept at 0 by default
    center: float = 0.0
    points: list = field(default=None, repr=False)

    def __len__(self):
        return len(self.values)


def _perm_fingerprint(perm):
    if perm is None:
        return None
    import hashlib

    return hashlib.sha256(",".join(map(str, perm)).encode()).hexdigest()[:16]


def _active_terms(seq, perm, N):
    terms = tuple(seq)
    if perm is None:
        if not 0 <= N <= len(terms):
            raise InvalidParameter(f"N={N} outside [0, {len(terms)}]")
        return terms[:N]
    perm = list(perm)
    if not 0 <= N <= len(perm):
        raise InvalidParameter(f"N={N} exceeds the permutation length {len(perm)}")
    out = []
    for k in perm[:N]:
        if not 1 <= k <= len(terms):
            raise InvalidParameter(f"permutation index {k} outside [1, {len(terms)}]")
        out.append(terms[k - 1])
    return tuple(out)


def _check_grid(f: TrigPolynomial, terms, M: int):
    js = [j for j, _, _ in f.terms()]
    for n in terms:
        for j in js:
            if (j * n) % M == 0:
                raise InvalidParameter(
                    f"grid M={M} is not coprime-safe: it divides {j}*n_k with n_k={n}")


def _fixed_phase(n: int, x: RationalPoint) -> int:
    """``floor(2**64 * {n x})`` computed exactly."""
    u, v = x.u, x.v
    if v & (v - 1) == 0:
        b = v.bit_length() - 1
        s = (n & -n).bit_length() - 1
        if s >= b:
            return 0
        odd = n >> s
        w = (odd * u) & ((1 << (b - s)) - 1)
        shift = b - s - 64
        return (w >> shift) & _MASK64 if shift >= 0 else (w << -shift) & _MASK64
    return (((n * u) % v) << 64) // v


def _split_terms(terms):
    """``(s, odd)`` arrays with ``n = odd * 2**s``, or ``None`` if some odd part is large."""
    shifts = np.fromiter(((n & -n).bit_length() - 1 for n in terms), dtype=np.int64,
                         count=len(terms))
    odd = [n >> int(sh) for n, sh in zip(terms, shifts)]
    if odd and max(odd) >= 1 << 32:
        return None
    return shifts, np.array(odd, dtype=np.uint64)


def _dyadic_phases(split, x: RationalPoint) -> np.ndarray:
    # n = odd * 2**s: read the 64 bits of u after its first s bits, then
    # multiply by odd modulo 2**64 (error at most odd units of 2**-64)
    shifts, odd = split
    b = x.v.bit_length() - 1
    nbytes = -(-b // 8)
    buf = np.frombuffer((x.u << (8 * nbytes - b)).to_bytes(nbytes, "big") + bytes(9),
                        dtype=np.uint8)
    win = np.lib.stride_tricks.sliding_window_view(buf, 9)[np.minimum(shifts, b) // 8]
    win = win.astype(np.uint64)
    hi = np.zeros(len(shifts), dtype=np.uint64)
    for i in range(8):
        hi |= win[:, i] << np.uint64(56 - 8 * i)
    bit = (shifts % 8).astype(np.uint64)
    w = (hi << bit) | (win[:, 8] >> (np.uint64(8) - bit))
    w[shifts >= b] = 0
    with np.errstate(over="ignore"):
        return w * odd


class _PhaseMap:
    """Computes ``floor(2**64 * {n x})`` for a fixed list of terms at many points."""

    def __init__(self, terms):
        self.terms = tuple(terms)
        self.split = _split_terms(self.terms) if self.terms else None

    def __call__(self, x: RationalPoint) -> np.ndarray:
        if self.split is not None and x.v > 1 and x.v & (x.v - 1) == 0:
            return _dyadic_phases(self.split, x)
        return np.fromiter((_fixed_phase(n, x) for n in self.terms), dtype=np.uint64,
                           count=len(self.terms))


def fixed_phases(terms, x: RationalPoint) -> np.ndarray:
    """``floor(2**64 * {n x})`` for each term, as uint64."""
    return _PhaseMap(terms)(x)


def _grid_values(f, terms, spec):
    M = spec.M
    d = spec.grid_offset.denominator
    c = spec.grid_offset.numerator
    Q = d * M
    js, ac, bc = f.kernel_arrays()
    if Q * int(js.max()) < kernels.GRID_Q_LIMIT:
        res = np.array([n % Q for n in terms], dtype=np.int64)
        return kernels.grid_sums(res, c, d, M, Q, js, ac, bc)
    # large denominators: exact big-int reduction down to 64-bit phases
    out = np.zeros(M, dtype=np.float64)
    for n in terms:
        r = n % Q
        ph = np.fromiter(((((r * (d * i + c)) % Q) << 64) // Q for i in range(M)),
                         dtype=np.uint64, count=M)
        out += kernels.fixed_point_eval(ph, js, ac, bc)
    return out


def random_points(M: int, bits: int, seed: int) -> list:
    """Dyadic points ``u / 2**bits``; point ``i`` uses the Philox stream ``(seed, i)``.

    The leading bits of ``u`` do not depend on ``bits``, so raising the
    precision refines each point instead of redrawing it.
    """
    words = -(-bits // 64)
    pts = []
    for i in range(M):
        chunk = _philox_stream(seed, i).integers(0, 2 ** 64, size=words, dtype=np.uint64)
        u = 0
        for w in chunk:
            u = (u << 64) | int(w)
        pts.append(RationalPoint(u >> (words * 64 - bits), 1 << bits))
    return pts


def _min_bits(terms) -> int:
    return max((n.bit_length() for n in terms), default=0) + 64


def sample_sums(f: TrigPolynomial, seq, perm=None, N: int = None,
                spec: SampleSpec = SampleSpec()) -> EmpiricalSample:
    """Values ``N**-0.5 * sum_{k<=N} f(n_{perm(k)} x_i)`` over the sample points.

    ``perm`` is a list of 1-based indices into ``seq``; ``None`` means the
    natural order.
    """
    if N is None:
        N = len(perm) if perm is not None else len(tuple(seq))
    terms = _active_terms(seq, perm, N)
    fp = seq.fingerprint() if hasattr(seq, "fingerprint") else None
    if N == 0:
        return EmpiricalSample(np.zeros(spec.M), 0, fp, _perm_fingerprint(perm), spec)
    if spec.mode == "grid":
        _check_grid(f, terms, spec.M)
        total = _grid_values(f, terms, spec)
        points = None
    else:
        bits = spec.precision_bits or _min_bits(terms)
        if bits < _min_bits(terms):
            raise InvalidParameter(
                f"precision_bits={bits} below bitlength(max n_k) + 64 = {_min_bits(terms)}")
        points = random_points(spec.M, bits, spec.seed)
        js, ac, bc = f.kernel_arrays()
        phase_map = _PhaseMap(terms)
        total = np.empty(spec.M)
        for i, x in enumerate(points):
            total[i] = math.fsum(kernels.fixed_point_eval(phase_map(x), js, ac, bc))
    return EmpiricalSample(total / math.sqrt(N), N, fp, _perm_fingerprint(perm), spec,
                           points=points)


# -- distances and estimators --------------------------------------------------

def _values(sample) -> np.ndarray:
    v = np.asarray(sample.values if isinstance(sample, EmpiricalSample) else sample,
                   dtype=np.float64)
    if v.size == 0:
        raise InvalidParameter("empty sample")
    return v


def _apply_cdf(cdf, v):
    try:
        out = np.asarray(cdf(v), dtype=np.float64)
        if out.shape == v.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(cdf(x)) for x in v])


def ks_distance(sample, cdf) -> float:
    """Kolmogorov-Smirnov distance between the empirical law and ``cdf``."""
    v = np.sort(_values(sample))
    M = v.size
    F = _apply_cdf(cdf, v)
    i = np.arange(1, M + 1)
    return float(max(np.max(np.abs(i / M - F)), np.max(np.abs((i - 1) / M - F))))


def normal_cdf(mean: float = 0.0, var: float = 1.0):
    sd = math.sqrt(var)
    return lambda x: ndtr((np.asarray(x, dtype=np.float64) - mean) / sd)


def ks_best_normal(sample) -> float:
    """KS distance to the normal law with the sample mean and variance."""
    v = _values(sample)
    return ks_distance(v, normal_cdf(float(v.mean()), float(v.var())))


def empirical_moment(sample, p: int) -> float:
    v = _values(sample)
    return math.fsum(v ** p) / v.size


def empirical_cf(sample, t: float) -> complex:
    v = _values(sample)
    return complex(math.fsum(np.cos(t * v)) / v.size, math.fsum(np.sin(t * v)) / v.size)


def excess_kurtosis(sample) -> float:
    v = _values(sample)
    c = v - v.mean()
    m2 = float(np.mean(c ** 2))
    if m2 == 0:
        raise InvalidParameter("sample has zero variance")
    return float(np.mean(c ** 4)) / (m2 * m2) - 3.0


def variance_ratio(f: TrigPolynomial, seq, N: int, budget: int = DEFAULT_WORK_BUDGET) -> float:
    if N < 1:
        raise InvalidParameter("N must be >= 1")
    return moment_exact(f, seq, N, 2, budget) / (N * norm_sq(f))


# -- law of the iterated logarithm ---------------------------------------------

@dataclass
class LilTable:
    checkpoints: tuple
    ratios: np.ndarray        # shape (points, checkpoints)
    running_max: np.ndarray   # same shape

    def final_max(self) -> np.ndarray:
        return self.running_max[:, -1]


def lil_denominator(N) -> np.ndarray:
    N = np.asarray(N, dtype=np.float64)
    return np.sqrt(2.0 * N * np.log(np.log(N)))


def lil_scan(f: TrigPolynomial, seq, perm, x_points: Sequence[RationalPoint],
             N_checkpoints: Sequence[int], two_sided: bool = False) -> LilTable:
    """Ratios ``S_N(x) / sqrt(2 N log log N)`` at each checkpoint, plus running maxima.

    One pass over the terms per point; the running maximum is taken over the
    checkpoints only. ``two_sided`` uses ``|S_N|`` instead of ``S_N``.
    """
    cks = [int(n) for n in N_checkpoints]
    if not cks:
        raise InvalidParameter("need at least one checkpoint")
    if cks[0] < 3:
        raise InvalidParameter("checkpoints must be >= 3 so that log log N is defined")
    if any(b <= a for a, b in zip(cks, cks[1:])):
        raise InvalidParameter("checkpoints must be strictly increasing")
    terms = _active_terms(seq, perm, cks[-1])
    js, ac, bc = f.kernel_arrays()
    ck_idx = np.array(cks, dtype=np.int64) - 1
    denom = lil_denominator(cks)
    ratios = np.empty((len(x_points), len(cks)))
    runmax = np.empty_like(ratios)
    phase_map = _PhaseMap(terms)
    for i, x in enumerate(x_points):
        if not isinstance(x, RationalPoint):
            x = RationalPoint.from_fraction(x)
        vals = kernels.fixed_point_eval(phase_map(x), js, ac, bc)
        ratios[i], runmax[i] = kernels.running_lil(vals, ck_idx, denom, two_sided)
    return LilTable(tuple(cks), ratios, runmax)
