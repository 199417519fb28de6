"""The non-Gaussian infinitely divisible limit law of interleaved block sums.

Level-set measures of ``sin x / x``::

    F(t) = |{x > 0 : sin x / x >= t}|,   G(t) = |{x > 0 : sin x / x <= -t}|

define a Levy measure on ``[-1, 1]`` with density ``F(x)/(pi x)`` on
``(0, 1]`` and ``G(-x)/(pi |x|)`` on ``[-1, 0)``. The characteristic function
is ``exp(int (e^{itx} - 1 - itx/(1+x^2)) l(x) dx)``.

Numerics
--------
``sin x / x`` is monotone between consecutive extrema (roots of
``tan x = x``), so every level crossing is bracketed by an extremum pair and
found by bisection. The density integral is split at the lobe peak values,
where ``F`` and ``G`` have square-root onsets; a quadratic substitution on each
panel removes them. Below ``DELTA`` the integrand is expanded in powers of
``x`` and the needed moments of ``F`` and ``G`` are obtained by exchanging the
order of integration (``int_0^d x^{m-1} F(x) dx = (1/m) int min(d, s_+(y))^m dy``).
"""
from __future__ import annotations

import functools
import math

import numpy as np

from .errors import InvalidParameter

DELTA = 1e-3          # inner cutoff of the density quadrature
T_TABLE = 100.0       # oscillation resolution of the cached quadrature table
GL_ORDER = 20
BISECT_ITERS = 64


def sinc(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.ones_like(x)
    nz = x != 0
    out[nz] = np.sin(x[nz]) / x[nz]
    return out


@functools.lru_cache(maxsize=8)
def extrema(count: int) -> np.ndarray:
    """First ``count`` positive critical points of ``sin x/x`` (``tan x = x``).

    The ``k``-th lies in ``(k pi, k pi + pi/2)``.
    """
    k = np.arange(1, count + 1, dtype=np.float64)
    lo = k * np.pi + 1e-12
    hi = k * np.pi + np.pi / 2 - 1e-12
    sign_lo = np.sign(np.sin(lo) - lo * np.cos(lo))
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        s = np.sign(np.sin(mid) - mid * np.cos(mid))
        same = s == sign_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def sinc_minimum() -> tuple:
    """``(x, value)`` of the global minimum of ``sin x/x`` on ``x > 0``."""
    x = float(extrema(1)[0])
    return x, math.sin(x) / x


def g_support_max() -> float:
    """``G(t) = 0`` for ``t >= g_max``."""
    return -sinc_minimum()[1]


class _Lobes:
    """Lobes of ``sign * sin(x)/x`` where it is positive.

    Lobe ``i`` spans ``[a_i, b_i]`` with peak at ``c_i``; on ``[a_i, c_i]`` the
    function increases, on ``[c_i, b_i]`` it decreases.
    """

    def __init__(self, sign: int, count: int):
        self.sign = sign
        ext = extrema(2 * count + 2)
        if sign > 0:
            i = np.arange(count)
            self.a = np.where(i == 0, 0.0, 2 * i * np.pi)
            self.b = (2 * i + 1) * np.pi
            self.c = np.where(i == 0, 0.0, ext[np.maximum(2 * i - 1, 0)])
        else:
            i = np.arange(1, count + 1)
            self.a = (2 * i - 1) * np.pi
            self.b = 2 * i * np.pi
            self.c = ext[2 * i - 2]
        self.peak = sign * sinc(self.c)
        self.peak[self.c == 0] = 1.0

    def value(self, x):
        return self.sign * sinc(x)

    def _raw(self, x):
        # x > 0 inside the bisection loops
        return self.sign * np.sin(x) / x

    def crossings(self, lobe_idx, t):
        """Left/right points where the lobe equals level ``t`` (``t < peak``)."""
        lobe_idx = np.asarray(lobe_idx)
        t = np.asarray(t, dtype=np.float64)
        a, b, c = self.a[lobe_idx], self.b[lobe_idx], self.c[lobe_idx]
        main = c == 0
        # increasing side [a, c]; the main lobe starts at its peak
        lo = np.where(main, 1.0, a)
        hi = np.where(main, 2.0, c)
        for _ in range(BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            below = self._raw(mid) < t
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        left = np.where(main, 0.0, 0.5 * (lo + hi))
        # decreasing side [c, b]
        lo, hi = c.copy(), b.copy()
        for _ in range(BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            above = self._raw(mid) >= t
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        right = 0.5 * (lo + hi)
        return left, right

    def level_measure(self, t):
        """``|{x > 0: sign * sin x/x >= t}|`` for an array of levels ``t > 0``."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        # every (level, lobe) pair with the lobe reaching the level, solved at once
        counts = np.searchsorted(-self.peak, -t, side="left")
        if counts.max(initial=0) >= len(self.peak):
            raise AssertionError("lobe table too short for the requested level")
        owner = np.repeat(np.arange(len(t)), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        lobe = np.arange(owner.size) - starts
        out = np.zeros_like(t)
        for i0 in range(0, owner.size, 1 << 20):
            sl = slice(i0, i0 + (1 << 20))
            left, right = self.crossings(lobe[sl], t[owner[sl]])
            np.add.at(out, owner[sl], right - left)
        return out


def _lobe_count_for(t_min: float) -> int:
    # lobe peaks are below 1/x, so lobes starting past 1/t_min never reach t_min
    return int(1.0 / (math.pi * t_min)) // 2 + 3


def _lobes(sign: int, t_min: float) -> _Lobes:
    # quantize so nearby levels share one cached lobe table
    return _lobes_cached(sign, 2.0 ** math.floor(math.log2(t_min)))


@functools.lru_cache(maxsize=16)
def _lobes_cached(sign: int, t_key: float) -> _Lobes:
    return _Lobes(sign, _lobe_count_for(t_key))


def _check_level(t):
    t = np.asarray(t, dtype=np.float64)
    if np.any(~(t > 0)):
        raise InvalidParameter("level t must be positive")
    return t


def f_func(t):
    """``F(t)``: length of ``{x > 0 : sin x/x >= t}``."""
    tt = _check_level(t)
    flat = np.atleast_1d(tt).astype(np.float64)
    out = np.zeros_like(flat)
    live = flat < 1.0
    if live.any():
        lobes = _lobes(1, float(flat[live].min()))
        out[live] = lobes.level_measure(flat[live])
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def g_func(t):
    """``G(t)``: length of ``{x > 0 : sin x/x <= -t}``."""
    tt = _check_level(t)
    flat = np.atleast_1d(tt).astype(np.float64)
    out = np.zeros_like(flat)
    live = flat < g_support_max()
    if live.any():
        lobes = _lobes(-1, float(flat[live].min()))
        out[live] = lobes.level_measure(flat[live])
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def levy_density(x):
    """``l(x) = F(x)/(pi x)`` on ``(0, 1]``, ``G(-x)/(pi |x|)`` on ``[-1, 0)``, 0 outside."""
    xx = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xx == 0):
        raise InvalidParameter("the Levy density is singular at 0")
    out = np.zeros_like(xx)
    pos = (xx > 0) & (xx <= 1)
    neg = (xx < 0) & (xx >= -1)
    if pos.any():
        out[pos] = f_func(xx[pos]) / (np.pi * xx[pos])
    if neg.any():
        out[neg] = g_func(-xx[neg]) / (np.pi * -xx[neg])
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


def levy_L(x, tol: float = 1e-9) -> float:
    """Levy function: ``-(1/pi) int_x^1 F(t)/t dt`` for ``0 < x <= 1``,
    ``(1/pi) int_{-x}^1 G(t)/t dt`` for ``-1 <= x < 0``, and 0 for ``|x| > 1``.

    Integrates over the same peak-split panels as the characteristic
    function, with Gauss-Legendre nodes refined until two orders agree to
    ``tol``.
    """
    x = float(x)
    if x == 0:
        raise InvalidParameter("L is not defined at 0")
    if abs(x) >= 1:
        return 0.0
    if x > 0:
        val = _panel_integral(1, x, 1.0, lambda s: 1.0 / s, tol)
        return -val / math.pi
    gmax = g_support_max()
    lo = -x
    if lo >= gmax:
        return 0.0
    val = _panel_integral(-1, lo, gmax, lambda s: 1.0 / s, tol)
    return val / math.pi


def _peak_breaks(sign: int, lo: float, hi: float) -> list:
    lobes = _lobes(sign, lo)
    peaks = [p for p in lobes.peak if lo < p < hi]
    return sorted(set([lo, hi] + peaks))


def _panel_nodes(lo: float, hi: float, order: int, pieces: int = 1):
    """Nodes/weights on ``[lo, hi]`` with ``x = hi - (hi-lo) s^2`` (sqrt onset at ``hi``)."""
    g, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, pieces + 1)
    xs, ws = [], []
    for s0, s1 in zip(edges[:-1], edges[1:]):
        s = 0.5 * (s1 - s0) * g + 0.5 * (s1 + s0)
        ws_s = 0.5 * (s1 - s0) * w
        xs.append(hi - (hi - lo) * s * s)
        ws.append(ws_s * 2.0 * (hi - lo) * s)
    return np.concatenate(xs), np.concatenate(ws)


def _panel_integral(sign: int, lo: float, hi: float, weight, tol: float) -> float:
    """``int_lo^hi level_measure(t) * weight(t) dt`` over peak-split panels."""
    breaks = _peak_breaks(sign, lo, hi)
    measure = f_func if sign > 0 else g_func
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        prev = None
        for order in (12, 24, 48, 96):
            xs, ws = _panel_nodes(a, b, order)
            val = float(np.sum(ws * measure(xs) * weight(xs)))
            if prev is not None and abs(val - prev) <= tol * 0.1:
                break
            prev = val
        total += val
    return total


# -- quadrature tables for the characteristic function -----------------------------

class _CFTable:
    """Nodes, weights and density values for ``int_{DELTA <= |x| <= 1} h(x) l(x) dx``
    plus moments of ``F``, ``G`` on ``(0, DELTA)`` for the series part."""

    def __init__(self, delta: float = DELTA, t_resolution: float = T_TABLE,
                 order: int = GL_ORDER, n_moments: int = 48):
        self.delta = delta
        self.t_resolution = t_resolution
        xs, ws = [], []
        max_width = 2 * math.pi / t_resolution * 0.8
        for sign in (1, -1):
            hi_all = 1.0 if sign > 0 else g_support_max()
            breaks = _peak_breaks(sign, delta, hi_all)
            px, pw = [], []
            for a, b in zip(breaks[:-1], breaks[1:]):
                pieces = max(1, math.ceil(2 * (b - a) / max_width))
                x, w = _panel_nodes(a, b, order, pieces)
                px.append(x)
                pw.append(w)
            x = np.concatenate(px)
            w = np.concatenate(pw)
            meas = f_func(x) if sign > 0 else g_func(x)
            xs.append(sign * x)
            ws.append(w * meas / (math.pi * x))
        self.x = np.concatenate(xs)
        self.w = np.concatenate(ws)  # already multiplied by the density
        self.mom_f = _small_level_moments(1, delta, n_moments)
        self.mom_g = _small_level_moments(-1, delta, n_moments)
        self.n_moments = n_moments

    def log_cf(self, t):
        """Exponent of the characteristic function for an array of ``t >= 0``."""
        ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
        x, w = self.x, self.w
        drift = x / (1.0 + x * x)
        out = np.empty(ts.shape, dtype=np.complex128)
        for i0 in range(0, len(ts), 512):
            tt = ts[i0:i0 + 512, None]
            tx = tt * x[None, :]
            re = (np.cos(tx) - 1.0) @ w
            im = (np.sin(tx) - tt * drift[None, :]) @ w
            out[i0:i0 + 512] = re + 1j * im
        out += self._inner(ts)
        return out if np.ndim(t) else complex(out[0])

    def _inner(self, ts):
        # h(x) = sum_{m>=2} (itx)^m/m! + it x^3/(1+x^2), integrated against l on (0, delta)
        acc = np.zeros(ts.shape, dtype=np.complex128)
        for m in range(2, self.n_moments + 1):
            c = (1j * ts) ** m / math.factorial(m)
            if m % 2 == 1:
                c = c + 1j * ts * (-1) ** ((m - 3) // 2)
            acc += c * (self.mom_f[m] + (-1) ** m * self.mom_g[m])
        return acc / math.pi


def _lobe_power_integrals(lobes: _Lobes, start: int, stop: int, m_max: int, order: int = 16):
    """``sum_i int_{lobe i} s^m`` over lobes ``start <= i < stop`` for m = 0..m_max."""
    g, w = np.polynomial.legendre.leggauss(order)
    out = np.zeros(m_max + 1)
    chunk = 20000
    for c0 in range(start, stop, chunk):
        c1 = min(stop, c0 + chunk)
        a = lobes.a[c0:c1][:, None]
        b = lobes.b[c0:c1][:, None]
        y = 0.5 * (b - a) * g[None, :] + 0.5 * (b + a)
        wy = 0.5 * (b - a) * w[None, :]
        s = lobes.value(y)
        p = wy.copy()
        for m in range(m_max + 1):
            out[m] += p.sum()
            p = p * s
    return out


def _partial_power_integral(lobes, i, lo, hi, m_max, order=24):
    g, w = np.polynomial.legendre.leggauss(order)
    y = 0.5 * (hi - lo) * g + 0.5 * (hi + lo)
    wy = 0.5 * (hi - lo) * w
    s = lobes.value(y)
    return np.array([np.sum(wy * s ** m) for m in range(m_max + 1)])


@functools.lru_cache(maxsize=8)
def _small_level_moments(sign: int, delta: float, m_max: int) -> np.ndarray:
    """``M[m] = int_0^delta x^{m-1} K(x) dx`` with ``K = F`` (sign +1) or ``G`` (sign -1).

    Uses ``M[m] = (1/m) (delta^m K(delta) + int_{0 < s(y) < delta} s(y)^m dy)``
    where ``s = sign * sin(y)/y``; lobes with peak above ``delta`` contribute
    their two flanks, lower lobes contribute whole, and the far tail uses the
    mean of ``sin^m`` over a lobe.
    """
    far_low = 10 ** 4       # lobes integrated for every m
    far_high = 10 ** 6      # lobes integrated for m <= 3
    lobes_near = _lobes(sign, delta)
    K = f_func(delta) if sign > 0 else g_func(delta)
    acc = np.zeros(m_max + 1)
    n_near = len(lobes_near.peak)
    # flanks of lobes that rise above delta
    for i in range(n_near):
        if lobes_near.peak[i] > delta:
            left, right = lobes_near.crossings(np.array([i]), np.array([delta]))
            left, right = float(left[0]), float(right[0])
            if lobes_near.c[i] != 0:
                acc += _partial_power_integral(lobes_near, i, lobes_near.a[i], left, m_max)
            acc += _partial_power_integral(lobes_near, i, right, lobes_near.b[i], m_max)
        else:
            acc += _partial_power_integral(lobes_near, i, lobes_near.a[i], lobes_near.b[i], m_max)
    lobes_far = _Lobes.__new__(_Lobes)
    lobes_far.sign = sign
    idx = np.arange(far_high, dtype=np.float64)
    if sign > 0:
        lobes_far.a = 2 * idx * np.pi
        lobes_far.b = (2 * idx + 1) * np.pi
    else:
        lobes_far.a = (2 * idx + 1) * np.pi
        lobes_far.b = (2 * idx + 2) * np.pi
    acc += _lobe_power_integrals(lobes_far, n_near, max(n_near, far_low), m_max)
    acc[:4] += _lobe_power_integrals(lobes_far, max(n_near, far_low), far_high, 3)
    # tail beyond the last integrated lobe: lobes repeat every 2 pi, sin^m averages c_m / (2 pi)
    for m in range(2, m_max + 1):
        last = far_high if m <= 3 else max(n_near, far_low)
        y0 = float(lobes_far.a[last - 1] + 2 * np.pi) if last < far_high else float(lobes_far.b[-1] + np.pi)
        cm = math.sqrt(math.pi) * math.gamma((m + 1) / 2) / math.gamma(m / 2 + 1)
        # midpoint rule: lobe starting at a contributes ~ c_m / (a + pi/2)^m per 2 pi of length
        acc[m] += cm / (2 * math.pi) / ((m - 1) * (y0 - math.pi / 2) ** (m - 1))
    mom = np.zeros(m_max + 1)
    for m in range(1, m_max + 1):
        mom[m] = (delta ** m * K + acc[m]) / m
    return mom


@functools.lru_cache(maxsize=4)
def _cf_table(level: int = 0) -> _CFTable:
    return _CFTable(t_resolution=T_TABLE * 2 ** level)


def _table_for(t: float) -> _CFTable:
    level = 0
    while abs(t) > T_TABLE * 2 ** level:
        level += 1
    return _cf_table(level)


def log_char_function(t):
    """Exponent ``int (e^{itx} - 1 - itx/(1+x^2)) l(x) dx`` (scalar or array ``t``)."""
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.zeros(tt.shape, dtype=np.complex128)
    a = np.abs(tt)
    if a.size and a.max() > 0:
        tab = _table_for(float(a.max()))
        nz = a > 0
        out[nz] = tab.log_cf(a[nz])
    out = np.where(tt < 0, out.conj(), out)
    return out.reshape(np.shape(t)) if np.ndim(t) else complex(out[0])


def char_function(t):
    """Characteristic function of the limit law at ``t`` (scalar or array).

    ``psi(-t)`` is returned as the exact conjugate of ``psi(t)``.
    """
    v = np.exp(log_char_function(t))
    return v if np.ndim(t) else complex(v)


def levy_moment(p: int) -> float:
    """``int x**p l(x) dx`` for ``2 <= p <= 48``."""
    if not 2 <= p <= 48:
        raise InvalidParameter("moment order must lie in [2, 48]")
    tab = _table_for(0.0)
    inner = tab.mom_f[p] + (-1) ** p * tab.mom_g[p]
    return float(np.sum(tab.w * tab.x ** p) + inner / math.pi)


def levy_variance() -> float:
    """Second moment of the Levy measure (the variance of the limit law)."""
    return levy_moment(2)


def limit_excess_kurtosis() -> float:
    return levy_moment(4) / levy_moment(2) ** 2


# -- distribution function by inversion -----------------------------------------------

@functools.lru_cache(maxsize=8)
def _inversion_grid(T: float, width: float = 0.05, order: int = 16):
    g, w = np.polynomial.legendre.leggauss(order)
    n = max(1, math.ceil(T / width))
    edges = np.linspace(0.0, T, n + 1)
    a, b = edges[:-1, None], edges[1:, None]
    ts = (0.5 * (b - a) * g + 0.5 * (b + a)).ravel()
    ws = np.broadcast_to(0.5 * (b - a) * w, (n, order)).ravel()
    psi = char_function(ts)
    return ts, ws, psi


def inversion_cutoff(tol: float = 1e-4, t0: float = 8.0) -> float:
    """Smallest ``T = t0 * 2^j`` whose tail estimate ``|psi(T)|/T`` is below ``tol/10``."""
    T = t0
    while abs(char_function(T)) / T >= tol / 10 and T < T_TABLE * 4:
        T *= 2
    return T


def limit_cdf(y, tol: float = 1e-4):
    """Distribution function of the limit law via the Gil-Pelaez formula.

    ``P(X <= y) = 1/2 - (1/pi) int_0^inf Im(exp(-ity) psi(t)) / t dt``, truncated
    at :func:`inversion_cutoff`. Array input is monotone-corrected (running
    maximum in ``y`` order) and clipped to ``[0, 1]``.
    """
    scalar = np.ndim(y) == 0
    ys = np.atleast_1d(np.asarray(y, dtype=np.float64))
    T = inversion_cutoff(tol)
    ts, ws, psi = _inversion_grid(T)
    out = np.empty_like(ys)
    for i0 in range(0, len(ys), 256):
        yy = ys[i0:i0 + 256]
        phase = np.exp(-1j * np.outer(yy, ts))
        integrand = (phase * psi[None, :]).imag / ts[None, :]
        out[i0:i0 + 256] = 0.5 - (integrand @ ws) / math.pi
    out = np.clip(out, 0.0, 1.0)
    if not scalar:
        order = np.argsort(ys, kind="stable")
        out[order] = np.maximum.accumulate(out[order])
        return out.reshape(np.shape(y))
    return float(out[0])


# -- tabulation for CSV output ------------------------------------------------------

def tabulate(t_grid=None, x_grid=None, cf_grid=None, y_grid=None,
             which=("FG", "L", "cf", "cdf")) -> dict:
    """Rows for the CSV tables: (t, F, G), (x, L, l), (t, Re psi, Im psi), (y, CDF)."""
    out = {}
    if "FG" in which:
        t_grid = np.linspace(0.01, 1.2, 120) if t_grid is None else np.asarray(t_grid, float)
        out["FG"] = [(float(t), float(f_func(t)), float(g_func(t))) for t in t_grid]
    if "L" in which:
        x_grid = np.r_[np.linspace(-1.2, -0.01, 60), np.linspace(0.01, 1.2, 60)] \
            if x_grid is None else np.asarray(x_grid, float)
        out["L"] = [(float(x), levy_L(x), float(levy_density(x)) if abs(x) <= 1 else 0.0)
                    for x in x_grid]
    if "cf" in which:
        cf_grid = np.linspace(-10, 10, 81) if cf_grid is None else np.asarray(cf_grid, float)
        out["cf"] = [(float(t), float(v.real), float(v.imag))
                     for t, v in zip(cf_grid, np.atleast_1d(char_function(cf_grid)))]
    if "cdf" in which:
        y_grid = np.linspace(-5, 5, 101) if y_grid is None else np.asarray(y_grid, float)
        out["cdf"] = [(float(yv), float(c))
                      for yv, c in zip(y_grid, np.atleast_1d(limit_cdf(y_grid)))]
    return out
