"""Integer sequence families, gap checks and the interleaving permutation.

Every generator returns an :class:`IntegerSequence` holding a finite prefix
of exact Python integers. Indices in the public API are 1-based where they
refer to the mathematical position ``n_k``; ``terms`` itself is a plain
0-based tuple.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import mpmath
import numpy as np

from .errors import InvalidParameter

FAMILIES = ("geometric", "erdos_fortet", "block", "random_omega", "hlp", "custom")
_INCREASING = frozenset(FAMILIES[:-1])


@dataclass(frozen=True)
class IntegerSequence:
    terms: tuple
    family_tag: str = "custom"
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        terms = tuple(int(t) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        if self.family_tag not in FAMILIES:
            raise InvalidParameter(f"unknown family_tag {self.family_tag!r}")
        for k, t in enumerate(terms, start=1):
            if t <= 0:
                raise InvalidParameter(f"term n_{k} = {t} is not positive")
        if len(set(terms)) != len(terms):
            raise InvalidParameter("terms are not pairwise distinct")
        if self.family_tag in _INCREASING:
            for k in range(len(terms) - 1):
                if terms[k + 1] <= terms[k]:
                    raise InvalidParameter(
                        f"{self.family_tag} sequence not increasing at k={k + 1}")

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, item):
        return self.terms[item]

    def __iter__(self):
        return iter(self.terms)

    def prefix(self, n):
        """First ``n`` terms as a new sequence with the same metadata."""
        if not 0 <= n <= len(self.terms):
            raise InvalidParameter(f"prefix length {n} outside [0, {len(self.terms)}]")
        return IntegerSequence(self.terms[:n], self.family_tag, dict(self.params), self.seed)

    def permuted(self, order):
        """Sequence ``n_{order[0]}, n_{order[1]}, ...`` (1-based ``order``)."""
        terms = []
        for k in order:
            if not 1 <= k <= len(self.terms):
                raise InvalidParameter(f"permutation index {k} outside [1, {len(self.terms)}]")
            terms.append(self.terms[k - 1])
        params = dict(self.params, source_family=self.family_tag)
        return IntegerSequence(tuple(terms), "custom", params, self.seed)

    def fingerprint(self):
        """Short stable digest of the terms, used to tag samples."""
        import hashlib

        h = hashlib.sha256()
        for t in self.terms:
            h.update(t.to_bytes((t.bit_length() + 7) // 8, "big"))
            h.update(b",")
        return h.hexdigest()[:16]


# -- omega schedules ----------------------------------------------------------

class OmegaSchedule:
    """Nondecreasing positive schedule ``k -> omega_k``.

    Monotonicity is checked on ``[1, horizon]`` when the schedule is built;
    ``omega_k -> infinity`` cannot be checked, so strict growth between
    ``k = 1`` and ``k = horizon`` is required instead.
    """

    def __init__(self, evaluator: Callable[[int], float], monotone_check_horizon: int = 1000,
                 name: str = "custom"):
        self.evaluator = evaluator
        self.monotone_check_horizon = int(monotone_check_horizon)
        self.name = name
        if self.monotone_check_horizon < 2:
            raise InvalidParameter("monotone_check_horizon must be at least 2")
        prev = None
        for k in range(1, self.monotone_check_horizon + 1):
            w = float(evaluator(k))
            if not w > 0 or not math.isfinite(w):
                raise InvalidParameter(f"omega_{k} = {w} is not a positive real")
            if prev is not None and w < prev:
                raise InvalidParameter(f"omega is decreasing at k={k}")
            prev = w
        if not float(evaluator(self.monotone_check_horizon)) > float(evaluator(1)):
            raise InvalidParameter("omega must grow strictly between k=1 and the horizon")

    def __call__(self, k):
        return float(self.evaluator(k))

    def eta(self):
        """The schedule ``eta_k = omega_k**0.5 / 2`` of the random construction."""
        base = self.evaluator
        return _EtaSchedule(lambda k: 0.5 * math.sqrt(base(k)), self.monotone_check_horizon,
                            f"eta({self.name})")

    def __repr__(self):
        return f"OmegaSchedule({self.name})"


class _EtaSchedule(OmegaSchedule):
    pass


def omega_preset(spec: str, horizon: int = 1000) -> OmegaSchedule:
    """Named schedules: ``sqrt``, ``logpow:ALPHA``, ``const-plus-log:C``.

    ``sqrt`` is ``omega_k = k**0.5``; ``logpow:a`` is ``log(k+2)**a``;
    ``const-plus-log:c`` is ``c + log(k+1)``.
    """
    name, _, arg = spec.partition(":")
    if name == "sqrt" and not arg:
        return OmegaSchedule(lambda k: math.sqrt(k), horizon, "sqrt")
    if name == "logpow":
        alpha = float(arg) if arg else 1.0
        if alpha <= 0:
            raise InvalidParameter("logpow exponent must be positive")
        return OmegaSchedule(lambda k: math.log(k + 2) ** alpha, horizon, f"logpow:{alpha:g}")
    if name == "const-plus-log":
        c = float(arg) if arg else 1.0
        if c <= 0:
            raise InvalidParameter("const-plus-log constant must be positive")
        return OmegaSchedule(lambda k: c + math.log(k + 1), horizon, f"const-plus-log:{c:g}")
    raise InvalidParameter(f"unknown omega preset {spec!r}")


# -- deterministic generators ------------------------------------------------

def gen_geometric(base: int, count: int) -> IntegerSequence:
    if base < 2:
        raise InvalidParameter(f"base must be >= 2, got {base}")
    _check_count(count)
    terms = []
    t = 1
    for _ in range(count):
        t *= base
        terms.append(t)
    return IntegerSequence(tuple(terms), "geometric", {"base": base, "count": count})


def gen_erdos_fortet(count: int) -> IntegerSequence:
    _check_count(count)
    return IntegerSequence(tuple(2 ** k - 1 for k in range(1, count + 1)), "erdos_fortet",
                           {"count": count})


def gen_super_lacunary(count: int) -> IntegerSequence:
    """``n_k = 2**(k*k)``; a convenient very fast growing custom sequence."""
    _check_count(count)
    return IntegerSequence(tuple(2 ** (k * k) for k in range(1, count + 1)), "custom",
                           {"rule": "2^(k^2)", "count": count})


def _check_count(count):
    if count < 1:
        raise InvalidParameter(f"count must be >= 1, got {count}")


# -- block construction --------------------------------------------------------

@dataclass(frozen=True)
class BlockParams:
    """Blocks ``I_k = {m_k, 2 m_k, ..., r_k m_k}``.

    ``variant`` selects the growth rule that is validated: ``clt`` needs
    ``m_{k+1}/m_k >= 2**(k*k)`` and ``1 <= r_k <= k*k``; ``lil`` needs
    ``m_{k+1} >= r_k 4**k m_k`` and ``r_k`` within a factor 2 of ``k log k``
    (``r_1 = 1``).
    """

    variant: str
    m: tuple
    r: tuple

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        object.__setattr__(self, "r", tuple(int(v) for v in self.r))

    @property
    def count(self):
        return len(self.m)

    def validate(self):
        if self.variant not in ("clt", "lil"):
            raise InvalidParameter(f"unknown block variant {self.variant!r}")
        if len(self.m) != len(self.r) or not self.m:
            raise InvalidParameter("m and r must be nonempty and of equal length")
        for k, (mk, rk) in enumerate(zip(self.m, self.r), start=1):
            if mk < 1 or mk & (mk - 1):
                raise InvalidParameter(f"m_{k} = {mk} is not a power of two")
            if self.variant == "clt":
                if not 1 <= rk <= k * k:
                    raise InvalidParameter(f"r_{k} = {rk} outside [1, {k * k}]")
            else:
                klogk = k * math.log(k)
                if not (0.5 * klogk <= rk <= max(1.0, 2.0 * klogk)):
                    raise InvalidParameter(f"r_{k} = {rk} not within factor 2 of k log k")
        for k in range(1, len(self.m)):
            mk, mnext, rk = self.m[k - 1], self.m[k], self.r[k - 1]
            if self.variant == "clt":
                if mnext < mk << (k * k):
                    raise InvalidParameter(f"growth m_{k + 1}/m_{k} >= 2^{k * k} violated at k={k}")
            else:
                if mnext < (rk * mk) << (2 * k):
                    raise InvalidParameter(f"growth m_{k + 1} >= r_{k} 2^{2 * k} m_{k} violated at k={k}")


def lil_block_length(k: int) -> int:
    """Default ``r_k`` for the LIL variant: nearest integer to ``k log k``, at least 1."""
    return max(1, round(k * math.log(k)))


def default_block_params(variant: str, count: int, r=None, m1: int = 2) -> BlockParams:
    """Smallest admissible power-of-two bases for the given block lengths.

    ``r`` defaults to ``r_k = k`` for ``clt`` and :func:`lil_block_length`
    for ``lil``.
    """
    _check_count(count)
    if r is None:
        r = [k if variant == "clt" else lil_block_length(k) for k in range(1, count + 1)]
    r = list(r)
    if len(r) != count:
        raise InvalidParameter("r must have exactly `count` entries")
    m = [m1]
    for k in range(1, count):
        if variant == "clt":
            nxt = m[-1] << (k * k)
        else:
            need = (r[k - 1] * m[-1]) << (2 * k)
            nxt = 1 << (need - 1).bit_length()
        m.append(nxt)
    params = BlockParams(variant, tuple(m), tuple(r))
    params.validate()
    return params


def gen_block_sequence(params: BlockParams) -> IntegerSequence:
    """Concatenate the blocks in increasing order.

    ``params["block_starts"]`` of the result lists the 1-based index where
    each block begins.
    """
    params.validate()
    terms = []
    starts = []
    for mk, rk in zip(params.m, params.r):
        starts.append(len(terms) + 1)
        terms.extend(j * mk for j in range(1, rk + 1))
    meta = {"variant": params.variant, "m": list(params.m), "r": list(params.r),
            "block_starts": starts}
    return IntegerSequence(tuple(terms), "block", meta)


def block_subsequence_indices(seq: IntegerSequence, take: Callable[[int], int] = None) -> list:
    """1-based indices of a sub-block structure inside a block sequence.

    From block ``k`` the first ``take(k)`` elements are kept (default
    ``take(k) = k``, capped by the block length).
    """
    if seq.family_tag != "block":
        raise InvalidParameter("block_subsequence_indices needs a block sequence")
    take = take or (lambda k: k)
    starts = seq.params["block_starts"]
    rs = seq.params["r"]
    out = []
    for k, (s, rk) in enumerate(zip(starts, rs), start=1):
        out.extend(range(s, s + min(rk, max(0, int(math.ceil(take(k)))))))
    return out


# -- random construction -------------------------------------------------------

def _philox_stream(seed: int, stream: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_below(gen: np.random.Generator, width: int) -> int:
    """Exactly uniform integer in ``[0, width)`` for arbitrary ``width``.

    Draws ``ceil(bits/64)`` words per attempt and rejects values outside the
    range; the expected number of attempts is below 2.
    """
    if width < 1:
        raise InvalidParameter("empty range")
    if width == 1:
        return 0
    bits = (width - 1).bit_length()
    words = -(-bits // 64)
    excess = words * 64 - bits
    while True:
        chunk = gen.integers(0, 2 ** 64, size=words, dtype=np.uint64, endpoint=False)
        v = 0
        for w in chunk:
            v = (v << 64) | int(w)
        v >>= excess
        if v < width:
            return v


def _ceil_scaled_power(a: int, k: int, w: float) -> int:
    """``ceil(a * k**w)`` exactly enough for interval bookkeeping (``0**w = 0``)."""
    if k == 0:
        return 0
    if float(w).is_integer():
        return a * k ** int(w)
    bits = int(w * math.log2(k) + math.log2(a)) + 80
    with mpmath.workprec(max(bits, 64)):
        v = mpmath.mpf(a) * mpmath.power(mpmath.mpf(k), mpmath.mpf(w))
        return int(mpmath.ceil(v))


def random_omega_interval(omega: OmegaSchedule, a: int, k: int) -> tuple:
    """Integer range ``[lo, hi)`` of admissible ``n_k`` (positive integers only)."""
    lo = _ceil_scaled_power(a, k - 1, omega(k - 1) if k > 1 else 0.0)
    hi = _ceil_scaled_power(a, k, omega(k))
    return max(1, lo), hi


def gen_random_omega(omega: OmegaSchedule, a: int, count: int, seed: int) -> IntegerSequence:
    """Pick ``n_k`` uniformly among the positive integers of ``[a(k-1)^w_{k-1}, a k^w_k)``.

    Term ``k`` uses its own Philox stream keyed by ``(seed, k)``, so the
    result depends only on the arguments.
    """
    if a < 1:
        raise InvalidParameter(f"a must be >= 1, got {a}")
    _check_count(count)
    terms = []
    for k in range(1, count + 1):
        lo, hi = random_omega_interval(omega, a, k)
        if hi <= lo:
            raise InvalidParameter(f"interval I_{k} contains no positive integer")
        terms.append(lo + uniform_below(_philox_stream(seed, k), hi - lo))
    return IntegerSequence(tuple(terms), "random_omega",
                           {"omega": omega.name, "a": a, "count": count}, seed)


# -- Hardy-Littlewood-Polya sequence ----------------------------------------------

def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def gen_hlp(primes: Iterable[int], count: int, include_one: bool = True) -> IntegerSequence:
    """First ``count`` products of powers of ``primes`` in increasing order."""
    primes = sorted(int(p) for p in primes)
    if not primes:
        raise InvalidParameter("need at least one prime")
    if len(set(primes)) != len(primes):
        raise InvalidParameter("primes must be distinct")
    for p in primes:
        if not _is_prime(p):
            raise InvalidParameter(f"{p} is not prime")
    _check_count(count)
    heap = [1]
    seen = {1}
    out = []
    while len(out) < count + 1:
        v = heapq.heappop(heap)
        out.append(v)
        for p in primes:
            w = v * p
            if w not in seen:
                seen.add(w)
                heapq.heappush(heap, w)
    terms = out[:count] if include_one else out[1:count + 1]
    return IntegerSequence(tuple(terms), "hlp",
                           {"primes": primes, "count": count, "include_one": include_one})


# -- interleaving permutation ------------------------------------------------

def _is_special(k: int) -> bool:
    return k & (k - 1) == 0


def permute_interleave(sub_indices: Iterable[int], K: int, lookahead: int = 1 << 16) -> list:
    """``sigma(1..K)``: powers of two draw from the complement, others from ``sub_indices``.

    ``sub_indices`` may be a list or any iterator of strictly increasing
    positive integers. Complement elements are only known below the largest
    subsequence index read so far; needing one beyond that (or running out of
    subsequence indices) raises :class:`InvalidParameter`. An infinite
    iterator with no gaps is detected by reading at most ``lookahead``
    consecutive indices while searching for the next complement element.
    """
    if K < 0:
        raise InvalidParameter("K must be nonnegative")
    it = iter(sub_indices)
    pulled = []  # subsequence indices read so far
    member = set()
    state = {"next_sub": 0, "next_comp": 1, "done": False}

    def pull():
        if state["done"]:
            return False
        try:
            v = int(next(it))
        except StopIteration:
            state["done"] = True
            return False
        if v < 1 or (pulled and v <= pulled[-1]):
            raise InvalidParameter("sub_indices must be strictly increasing positive integers")
        pulled.append(v)
        member.add(v)
        return True

    def next_sub():
        while state["next_sub"] >= len(pulled):
            if not pull():
                raise InvalidParameter("sub_indices exhausted before K")
        v = pulled[state["next_sub"]]
        state["next_sub"] += 1
        return v

    def next_comp():
        c = state["next_comp"]
        reads = 0
        while True:
            while not pulled or c > pulled[-1]:
                if reads >= lookahead:
                    raise InvalidParameter(
                        f"no complement element found within {lookahead} sub_indices")
                reads += 1
                if not pull():
                    raise InvalidParameter(
                        "complement of sub_indices cannot be determined (sub_indices exhausted)")
            if c not in member:
                state["next_comp"] = c + 1
                return c
            c += 1

    return [next_comp() if _is_special(k) else next_sub() for k in range(1, K + 1)]


def interleave_counts(K: int) -> tuple:
    """Number of special (power of two) and ordinary positions in ``[1, K]``."""
    special = K.bit_length() if K > 0 else 0
    return special, K - special


# -- gap condition -------------------------------------------------------------

@dataclass(frozen=True)
class GapReport:
    ok: bool
    first_violation: int | None = None
    ratio: Fraction | None = None
    required: Fraction | None = None

    def __bool__(self):
        return self.ok


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return Fraction(float(v))


def check_gap(seq: Sequence[int], eps, k0: int = 1) -> GapReport:
    """Check ``n_{k+1}/n_k >= 1 + eps_k`` for every ``k >= k0`` exactly.

    ``eps`` is a number (constant) or a callable of the 1-based index ``k``.
    Floats are converted to their exact binary value.
    """
    terms = tuple(seq)
    epsf = eps if callable(eps) else (lambda k, _e=eps: _e)
    for k in range(max(1, k0), len(terms)):
        e = _as_fraction(epsf(k))
        if e < 0:
            raise InvalidParameter(f"eps_{k} is negative")
        need = 1 + e
        ratio = Fraction(terms[k], terms[k - 1])
        if ratio < need:
            return GapReport(False, k, ratio, need)
    return GapReport(True)


def block_gap_eps(seq: IntegerSequence) -> Callable[[int], Fraction]:
    """``eps_k = 1/r_j`` where ``n_k`` lies in block ``j``."""
    starts = seq.params["block_starts"]
    rs = seq.params["r"]

    def eps(k):
        j = max(i for i, s in enumerate(starts) if s <= k)
        return Fraction(1, rs[j])

    return eps


# -- sequence file format ---------------------------------------------------------

def _encode_value(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


# header keys describing the run rather than the sequence; dropped when parsing
RUN_KEYS = ("schema", "config")


def write_sequence(seq: IntegerSequence, path_or_file, run_info: dict = None) -> None:
    """One decimal integer per line with ``# key=value`` header lines.

    ``run_info`` may hold ``schema`` and ``config`` strings, written first.
    """
    lines = [f"# {k}={run_info[k]}" for k in RUN_KEYS if run_info and k in run_info]
    lines.append(f"# family_tag={seq.family_tag}")
    for key in sorted(seq.params):
        lines.append(f"# {key}={_encode_value(seq.params[key])}")
    if seq.seed is not None:
        lines.append(f"# seed={seq.seed}")
    lines.extend(str(t) for t in seq.terms)
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", encoding="utf-8") as fh:
            fh.write(text)


def _decode_value(v: str):
    parts = v.split(",")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        return v
    return vals if len(parts) > 1 else vals[0]


def parse_sequence(text: str) -> IntegerSequence:
    header = {}
    terms = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                header[key.strip()] = value.strip()
            continue
        if not line.strip():
            raise InvalidParameter(f"blank line {lineno} in sequence file")
        try:
            terms.append(int(line.strip()))
        except ValueError:
            raise InvalidParameter(f"line {lineno}: not a decimal integer") from None
    for key in RUN_KEYS:
        header.pop(key, None)
    tag = header.pop("family_tag", "custom")
    seed = header.pop("seed", None)
    params = {k: _decode_value(v) for k, v in header.items()}
    if tag == "block":
        for key in ("m", "r", "block_starts"):
            if key in params and isinstance(params[key], int):
                params[key] = [params[key]]
    return IntegerSequence(tuple(terms), tag, params, int(seed) if seed is not None else None)


def read_sequence(path_or_file) -> IntegerSequence:
    if hasattr(path_or_file, "read"):
        return parse_sequence(path_or_file.read())
    with open(path_or_file, encoding="utf-8") as fh:
        return parse_sequence(fh.read())


def iter_naturals(start: int = 1) -> Iterator[int]:
    return itertools.count(start)
