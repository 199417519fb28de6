"""Linear relations among sequence elements and exact moments of lacunary sums.

Two engines live here:

* a meet-in-the-middle enumerator for ``a_1 n_{k_1} + ... + a_r n_{k_r} = 0``
  with distinct indices and ``0 < |a_i| <= A``, used to decide the
  A-omega condition inside explicit search caps;
* sparse Laurent polynomials in ``z`` with exact (big integer) exponents,
  whose constant terms are the moments ``int_0^1 S_N(x)^p dx``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidParameter, WorkBudgetExceeded
from .periodic import TrigPolynomial

DEFAULT_WORK_BUDGET = 5 * 10 ** 7
INT64_SAFE = 2 ** 62


@dataclass(frozen=True)
class DiophantineQuery:
    r: int
    coeff_bound: int
    index_range: tuple = None  # (lo, hi) 1-based inclusive; None = whole prefix
    distinct_indices: bool = True

    def __post_init__(self):
        if self.r < 2:
            raise InvalidParameter(f"r must be >= 2, got {self.r}")
        if self.coeff_bound < 1:
            raise InvalidParameter(f"coefficient bound must be >= 1, got {self.coeff_bound}")
        if not self.distinct_indices:
            raise InvalidParameter("only distinct-index relations are supported")


@dataclass(frozen=True, order=True)
class DiophantineSolution:
    indices: tuple
    coeffs: tuple

    def elements(self, seq):
        terms = tuple(seq)
        return tuple(terms[k - 1] for k in self.indices)

    def value(self, seq) -> int:
        return sum(a * n for a, n in zip(self.coeffs, self.elements(seq)))

    def verify(self, seq) -> bool:
        return (len(set(self.indices)) == len(self.indices)
                and all(a != 0 for a in self.coeffs)
                and self.coeffs[0] > 0
                and self.value(seq) == 0)

    def to_json(self, seq) -> dict:
        return {"indices": list(self.indices), "coeffs": list(self.coeffs),
                "elements": [str(e) for e in self.elements(seq)]}


def _signed_range(A):
    return [c for c in range(-A, A + 1) if c != 0]


def _half_table(terms, idx_pool, size, coeffs_first, coeffs_rest):
    """All ``size``-subsets of ``idx_pool`` with coefficient vectors and their sums."""
    table = []
    for combo in itertools.combinations(idx_pool, size):
        vals = [terms[k - 1] for k in combo]
        for cs in itertools.product(coeffs_first, *([coeffs_rest] * (size - 1))):
            table.append((sum(c * v for c, v in zip(cs, vals)), combo, cs))
    return table


def _work_estimate(K, r, A):
    left = r - r // 2
    right = r // 2
    w = math.comb(K, left) * (A * (2 * A) ** (left - 1))
    w += math.comb(K, right) * (2 * A) ** right
    return w


def count_solutions(seq_prefix, query: DiophantineQuery, budget: int = DEFAULT_WORK_BUDGET):
    """All canonical solutions (increasing indices, first coefficient positive).

    The left ``ceil(r/2)`` indices are enumerated with their coefficients and
    matched against a hash of right-half sums whose indices all exceed the
    left ones, so each solution is produced exactly once.
    """
    terms = tuple(seq_prefix)
    K = len(terms)
    lo, hi = query.index_range or (1, K)
    if not (1 <= lo <= hi <= K) and K:
        raise InvalidParameter(f"index range {lo}..{hi} outside the prefix of length {K}")
    idx = list(range(lo, hi + 1)) if K else []
    r, A = query.r, query.coeff_bound
    if len(idx) < r:
        return []
    need = _work_estimate(len(idx), r, A)
    if need > budget:
        raise WorkBudgetExceeded(
            f"r={r}, A={A} over {len(idx)} indices needs ~{need} steps (budget {budget})",
            budget=budget, needed=need)
    left_size, right_size = r - r // 2, r // 2
    signed = _signed_range(A)
    positive = list(range(1, A + 1))

    right = {}
    for s, combo, cs in _half_table(terms, idx, right_size, signed, signed):
        right.setdefault(s, []).append((combo, cs))

    out = []
    for s, combo, cs in _half_table(terms, idx, left_size, positive, signed):
        hits = right.get(-s)
        if not hits:
            continue
        last = combo[-1]
        for rcombo, rcs in hits:
            if rcombo[0] > last:
                out.append(DiophantineSolution(combo + rcombo, cs + rcs))
    out.sort()
    return out


# -- condition A_omega -------------------------------------------------------------

@dataclass
class AomegaVerdict:
    level: int
    caps: tuple                      # (r_max, A_max) actually searched
    outcome: str                     # "pass" | "fail" | "pass-within-caps"
    witness: DiophantineSolution | None = None
    smallest_N_set: tuple = ()
    theoretical: tuple = ()          # (floor(omega_N), floor(N**omega_N))
    witness_elements: tuple = field(default=())

    def to_json(self) -> dict:
        d = {"level": self.level, "caps": list(self.caps), "outcome": self.outcome,
             "theoretical": [self.theoretical[0], str(self.theoretical[1])]}
        if self.witness is not None:
            d["witness"] = {"indices": list(self.witness.indices),
                            "coeffs": list(self.witness.coeffs),
                            "elements": [str(e) for e in self.witness_elements]}
        return d


def theoretical_coeff_bound(N: int, w: float) -> int:
    """``floor(N ** w)``; exact for integral ``w``, float-accurate otherwise."""
    if float(w).is_integer():
        return N ** int(w)
    if w * math.log2(max(N, 2)) < 52:
        return int(math.floor(N ** w))
    import mpmath

    with mpmath.workprec(int(w * math.log2(N)) + 64):
        return int(mpmath.floor(mpmath.power(N, mpmath.mpf(w))))


def check_a_omega(seq_prefix, omega, N: int, caps: tuple,
                  budget: int = DEFAULT_WORK_BUDGET) -> AomegaVerdict:
    """Search relations of up to ``min(omega_N, r_max)`` terms with ``|a| <= min(N**omega_N, A_max)``.

    ``fail`` carries a witness using an element outside the ``N`` smallest;
    among violating relations the reported witness prefers ones with the
    fewest admissible elements, then lowest indices, then smallest
    coefficients. ``pass`` means the whole theoretical box was searched.
    """
    terms = tuple(seq_prefix)
    K = len(terms)
    if not 1 <= N <= K:
        raise InvalidParameter(f"level N={N} outside [1, {K}]")
    r_max, A_max = caps
    w = omega(N)
    r_theory = math.floor(w)
    A_theory = theoretical_coeff_bound(N, w)
    order = sorted(range(1, K + 1), key=lambda k: terms[k - 1])
    admissible = frozenset(order[:N])
    small = tuple(terms[k - 1] for k in order[:N])
    r_hi = min(r_theory, int(r_max))
    A = min(A_theory, int(A_max))
    searched = (r_hi, A)
    full_box = r_max >= r_theory and A_max >= A_theory
    if N == K:
        return AomegaVerdict(N, searched, "pass", None, small, (r_theory, A_theory))

    violations = []
    for r in range(2, r_hi + 1):
        if A < 1:
            break
        for sol in count_solutions(terms, DiophantineQuery(r, A), budget=budget):
            if any(k not in admissible for k in sol.indices):
                violations.append(sol)
    if violations:
        def rank(sol):
            inside = sum(1 for k in sol.indices if k in admissible)
            return (inside, sol.indices, tuple(abs(c) for c in sol.coeffs), sol.coeffs)

        wit = min(violations, key=rank)
        if not wit.verify(terms):  # pragma: no cover - enumeration invariant
            raise AssertionError("witness failed exact re-verification")
        return AomegaVerdict(N, searched, "fail", wit, small, (r_theory, A_theory),
                             wit.elements(terms))
    outcome = "pass" if full_box else "pass-within-caps"
    return AomegaVerdict(N, searched, outcome, None, small, (r_theory, A_theory))


# -- sparse Laurent polynomials ------------------------------------------------------

class FrequencyPolynomial:
    """Sparse Laurent polynomial ``sum_e c_e z**e`` with exact integer exponents.

    ``z`` stands for ``exp(2 pi i x)``, so the constant coefficient of a
    product is the integral of the corresponding product of functions over
    one period. Products switch to a vectorized int64 kernel whenever the
    exponents of the result are guaranteed to fit.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = dict(coeffs or {})

    @classmethod
    def one(cls):
        return cls({0: 1.0 + 0j})

    @classmethod
    def from_sum(cls, f: TrigPolynomial, frequencies):
        """``sum_{n in frequencies} f(n x)`` written in powers of ``z``.

        ``a cos(2 pi m x) = (a/2)(z^m + z^-m)`` and
        ``b sin(2 pi m x) = (b/2i)(z^m - z^-m)``.
        """
        c = {}
        for n in frequencies:
            n = int(n)
            for j, a, b in f.terms():
                e = j * n
                plus = 0.5 * a - 0.5j * b
                minus = 0.5 * a + 0.5j * b
                c[e] = c.get(e, 0j) + plus
                c[-e] = c.get(-e, 0j) + minus
        return cls({e: v for e, v in c.items() if v != 0})

    def __len__(self):
        return len(self.coeffs)

    def max_abs_exponent(self):
        return max((abs(e) for e in self.coeffs), default=0)

    def constant(self) -> complex:
        return self.coeffs.get(0, 0j)

    def _arrays(self):
        items = sorted(self.coeffs.items())
        e = np.array([k for k, _ in items], dtype=np.int64)
        c = np.array([v for _, v in items], dtype=np.complex128)
        return e, c

    def __mul__(self, other: "FrequencyPolynomial") -> "FrequencyPolynomial":
        if not self.coeffs or not other.coeffs:
            return FrequencyPolynomial()
        if self.max_abs_exponent() + other.max_abs_exponent() < INT64_SAFE:
            e1, c1 = self._arrays()
            e2, c2 = other._arrays()
            if len(e1) * len(e2) <= 4 * 10 ** 7:
                e, c = kernels.sparse_mul(e1, c1, e2, c2)
                return FrequencyPolynomial({int(k): complex(v) for k, v in zip(e, c) if v != 0})
        out = {}
        other_items = list(other.coeffs.items())
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other_items:
                e = e1 + e2
                out[e] = out.get(e, 0j) + c1 * c2
        return FrequencyPolynomial({e: v for e, v in out.items() if v != 0})

    def power(self, p: int) -> "FrequencyPolynomial":
        if p < 0:
            raise InvalidParameter("negative power")
        result = FrequencyPolynomial.one()
        for _ in range(p):
            result = result * self
        return result

    def pair_constant(self, other: "FrequencyPolynomial") -> complex:
        """Constant coefficient of ``self * other`` without forming the product."""
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        re, im = [], []
        for e, c in small.coeffs.items():
            d = big.coeffs.get(-e)
            if d is not None:
                v = c * d
                re.append(v.real)
                im.append(v.imag)
        return complex(math.fsum(re), math.fsum(im))


def _constant_of_product(polys_with_powers, budget):
    """Constant term of ``prod P_i ** p_i``, splitting the factors into two halves."""
    factors = []
    for P, p in polys_with_powers:
        factors.extend([P] * p)
    if not factors:
        return 1.0 + 0j
    est = 1
    for P in factors[: (len(factors) + 1) // 2]:
        est *= max(1, len(P))
    if est > budget:
        raise WorkBudgetExceeded(f"moment expansion needs ~{est} terms (budget {budget})",
                                 budget=budget, needed=est)
    h = (len(factors) + 1) // 2
    left = FrequencyPolynomial.one()
    for P in factors[:h]:
        left = left * P
    right = FrequencyPolynomial.one()
    for P in factors[h:]:
        right = right * P
    return left.pair_constant(right)


def moment_exact(f: TrigPolynomial, seq, N: int, p: int,
                 budget: int = DEFAULT_WORK_BUDGET) -> float:
    """``int_0^1 (sum_{k<=N} f(n_k x))**p dx`` from the constant term of a power.

    The sum is written as a Laurent polynomial ``P`` in ``z``; the result is
    the constant coefficient of ``P**ceil(p/2) * P**floor(p/2)``. Exponents are
    exact integers, so only coefficient rounding enters.
    """
    terms = tuple(seq)
    if not 0 <= N <= len(terms):
        raise InvalidParameter(f"N={N} outside [0, {len(terms)}]")
    if p < 0:
        raise InvalidParameter("p must be nonnegative")
    if p == 0:
        return 1.0
    P = FrequencyPolynomial.from_sum(f, terms[:N])
    return _constant_of_product([(P, p)], budget).real


def moment_mixed(f: TrigPolynomial, seq, blockM, blockN, p: int, q: int,
                 budget: int = DEFAULT_WORK_BUDGET) -> float:
    """``int_0^1 S_M(x)**p S_N(x)**q dx`` for two disjoint index blocks (1-based).

    The caller normalizes, e.g. by ``moment_exact`` over each block with
    ``p = 2``.
    """
    terms = tuple(seq)
    bm, bn = set(blockM), set(blockN)
    if bm & bn:
        raise InvalidParameter(f"blocks overlap in indices {sorted(bm & bn)}")
    for k in bm | bn:
        if not 1 <= k <= len(terms):
            raise InvalidParameter(f"block index {k} outside [1, {len(terms)}]")
    if p < 0 or q < 0:
        raise InvalidParameter("p, q must be nonnegative")
    PM = FrequencyPolynomial.from_sum(f, [terms[k - 1] for k in sorted(bm)])
    PN = FrequencyPolynomial.from_sum(f, [terms[k - 1] for k in sorted(bn)])
    return _constant_of_product([(PM, p), (PN, q)], budget).real


def block_moment(f: TrigPolynomial, seq, block, p: int, budget: int = DEFAULT_WORK_BUDGET) -> float:
    terms = tuple(seq)
    P = FrequencyPolynomial.from_sum(f, [terms[k - 1] for k in sorted(set(block))])
    return _constant_of_product([(P, p)], budget).real


def gaussian_moment_constant(p: int) -> float:
    """``p!/((p/2)! 2**(p/2))`` for even ``p`` (the normal moments), 0 for odd ``p``."""
    if p < 0:
        raise InvalidParameter("p must be nonnegative")
    if p % 2:
        return 0.0
    return math.factorial(p) / (math.factorial(p // 2) * 2 ** (p // 2))


def lemma1_prediction(p: int, sigma_N: float, N: int) -> tuple:
    """``(main_term, error_scale)`` for the ``p``-th moment of ``S_N``.

    ``main_term = c_p sigma_N**p`` with ``c_p`` the normal moment constant;
    ``error_scale = exp(p**2) N**((p-1)/2) (log N)**p``.
    """
    if p < 2:
        raise InvalidParameter("p must be >= 2")
    if N < 1:
        raise InvalidParameter("N must be >= 1")
    main = gaussian_moment_constant(p) * sigma_N ** p
    err = math.exp(p * p) * N ** ((p - 1) / 2) * math.log(N) ** p
    return main, err
