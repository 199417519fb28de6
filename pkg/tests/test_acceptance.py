"""End-to-end acceptance checks, one printed PASS/FAIL line each.

Thresholds marked "pilot" were fixed from pilot runs before these tests
were written; see the notes in each test for the statistic being measured.
"""
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from lacunary import diophantine as D
from lacunary import limitlaw as L
from lacunary import periodic as P
from lacunary import sequences as S
from lacunary import stats

COS1 = P.TrigPolynomial.cosine(1.0)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} | {detail}")
        return ok
    return emit


def _next_prime(n):
    n += 1
    while any(n % d == 0 for d in range(2, math.isqrt(n) + 1)):
        n += 1
    return n


def test_1_moment_oracle(report):
    rng = random.Random(20240601)
    t0 = time.perf_counter()
    worst = worst_nonzero = 0.0
    for _ in range(20):
        N, p, Dg = rng.randint(1, 16), rng.randint(1, 6), rng.randint(1, 4)
        terms = tuple(rng.sample(range(1, 1001), N))
        a = tuple(rng.uniform(-1, 1) / j for j in range(1, Dg + 1))
        b = tuple(rng.uniform(-1, 1) / j for j in range(1, Dg + 1))
        f = P.TrigPolynomial(a, b)
        M = _next_prime(p * Dg * max(terms))
        sample = stats.sample_sums(f, S.IntegerSequence(terms), N=N, spec=stats.SampleSpec("grid", M))
        quad = stats.empirical_moment(sample, p) * N ** (p / 2)
        exact = D.moment_exact(f, terms, N, p)
        scale = (N * P.norm_sq(f)) ** (p / 2)
        # relative error, floored at the natural scale for moments that vanish
        err = abs(quad - exact) / max(abs(exact), 1e-6 * scale)
        worst = max(worst, err)
        if exact != 0:
            worst_nonzero = max(worst_nonzero, err)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 30
    assert report(1, ok, f"max rel err {worst:.2e} (<= 1e-9; {worst_nonzero:.1e} on nonzero "
                         f"moments), {elapsed:.1f} s (< 30 s)")


def test_2_kac_clt(report):
    t0 = time.perf_counter()
    seq = S.gen_geometric(2, 256)
    sample = stats.sample_sums(COS1, seq, N=256, spec=stats.SampleSpec("grid", 100003))
    var = P.kac_variance(COS1)
    ks = stats.ks_distance(sample, stats.normal_cdf(0.0, var))
    elapsed = time.perf_counter() - t0
    ok = var == 0.5 and ks <= 0.05 and elapsed < 120
    assert report(2, ok, f"KS vs N(0, {var}) = {ks:.4f} (<= 0.05), {elapsed:.1f} s (< 120 s)")


@pytest.fixture(scope="module")
def omega_seq():
    return S.gen_random_omega(S.omega_preset("sqrt"), 16, 512, 2024)


F_TWO = P.TrigPolynomial.cosine(1.0, 0.5)


def test_3_fourth_moment_ratio(report, omega_seq):
    m4 = D.moment_exact(F_TWO, omega_seq, 64, 4)
    m2 = D.moment_exact(F_TWO, omega_seq, 64, 2)
    ratio = m4 / (3 * m2 * m2)
    assert report(3, 0.9 <= ratio <= 1.1, f"m4/(3 m2^2) = {ratio:.5f} in [0.9, 1.1]")


def test_4_variance_ratio(report, omega_seq):
    vr = stats.variance_ratio(F_TWO, omega_seq, 512)
    assert report(4, 0.95 <= vr <= 1.05, f"variance ratio at N=512 = {vr:.6f} in [0.95, 1.05]")


# pilot: kurtosis 1.1-1.23 and best-normal KS 0.072-0.074 over several M and offsets
THETA_KURT = 0.5
THETA_KS = 0.03


def test_5_non_gaussian_limit(report):
    seq = S.gen_block_sequence(S.default_block_params("clt", 45))
    idx = S.block_subsequence_indices(seq)
    N = 1000
    # offset 1/3 keeps the grid off x = 0 and x = 1/2, where every (even) term
    # resonates and the sum equals N
    spec = stats.SampleSpec("grid", 100003, Fraction(1, 3))
    sample = stats.sample_sums(COS1, seq, idx, N, spec)
    kurt = stats.excess_kurtosis(sample)
    ks = stats.ks_best_normal(sample)
    ok_a = abs(kurt) >= THETA_KURT and ks >= THETA_KS
    # the limit law belongs to the normalization sqrt(2N) (the jump scale of
    # L), so N**-0.5 S_N is compared with psi(sqrt(2) t); centering drops out
    # of the modulus
    diffs, literal = [], []
    for t in (0.5, 1.0, 2.0):
        emp = abs(stats.empirical_cf(sample, t))
        diffs.append(abs(emp - abs(L.char_function(math.sqrt(2) * t))))
        literal.append(abs(emp - abs(L.char_function(t))))
    ok_b = max(diffs) <= 0.1
    detail = (f"(a) kurtosis {kurt:.3f} (>= {THETA_KURT}), best-normal KS {ks:.4f} "
              f"(>= {THETA_KS}); (b) max ||cf|-|psi(sqrt2 t)|| = {max(diffs):.4f} (<= 0.1) "
              f"[vs |psi(t)|: {', '.join(f'{d:.3f}' for d in literal)}]")
    assert report(5, ok_a and ok_b, detail)


def test_6_limit_law_numerics(report):
    checks = {
        "F(2/pi)": abs(L.f_func(2 / math.pi) - math.pi / 2) <= 1e-8,
        "F(1)": L.f_func(1.0) == 0,
        "G(0.3)": L.g_func(0.3) == 0,
        "L outside [-1,1]": all(L.levy_L(x) == 0 for x in (1.0001, 1.5, 3.0, -1.0001, -2.0)),
        "psi(0)": L.char_function(0.0) == 1,
    }
    t = np.linspace(-10, 10, 41)
    psi = L.char_function(t)
    checks["|psi|<=1"] = bool(np.all(np.abs(psi) <= 1 + 1e-15))
    checks["psi(-t)=conj"] = bool(np.allclose(psi[::-1], np.conj(psi), rtol=0, atol=1e-15))
    bad = [k for k, v in checks.items() if not v]
    assert report(6, not bad, "all checks hold" if not bad else f"failed: {bad}")


def test_7_a_omega(report):
    caps = (3, 25)
    geo = S.gen_geometric(2, 20)
    v = D.check_a_omega(geo, S.omega_preset("sqrt"), 5, caps)
    ok_fail = (v.outcome == "fail" and v.witness.indices == (6, 7)
               and v.witness.coeffs == (2, -1) and v.witness.verify(geo.terms))
    # with omega_k = sqrt k the eta schedule leaves r = 1 at any desk-scale
    # level, so the random prefix uses the slowest preset that gives a
    # nontrivial box
    omega = S.omega_preset("logpow:3")
    rnd = S.gen_random_omega(omega, 16, 64, 2024)
    base = D.check_a_omega(rnd, omega.eta(), 32, caps)
    rng = random.Random(7)
    same = True
    for _ in range(5):
        terms = list(rnd.terms)
        rng.shuffle(terms)
        same &= D.check_a_omega(terms, omega.eta(), 32, caps).outcome == base.outcome
        g = list(geo.terms)
        rng.shuffle(g)
        same &= D.check_a_omega(g, S.omega_preset("sqrt"), 5, caps).outcome == "fail"
    ok = ok_fail and base.outcome == "pass-within-caps" and same
    detail = (f"2^k: {v.outcome} witness {v.witness.coeffs[0]}*n_{v.witness.indices[0]} = "
              f"n_{v.witness.indices[1]}; random prefix: {base.outcome}; "
              f"invariant under 5 permutations: {same}")
    assert report(7, ok, detail)


def test_8_lil(report):
    norm = P.l2_norm(COS1)
    geo = S.gen_geometric(2, 1 << 16)
    blocks = S.gen_block_sequence(S.default_block_params("lil", 167))
    n_geo, n_blk = len(geo.terms), len(blocks.terms)
    bits = max(geo.terms[-1].bit_length(), blocks.terms[-1].bit_length()) + 64
    pts = stats.random_points(100, bits, 1)
    # log log N >= 1 from N = 16 on, which keeps the ratio away from the
    # near-singular denominators at tiny N
    one = stats.lil_scan(COS1, geo, None, pts, range(16, n_geo + 1)).final_max()
    two = stats.lil_scan(COS1, geo, None, pts, range(16, n_geo + 1), two_sided=True).final_max()
    blk = stats.lil_scan(COS1, blocks, None, pts, range(16, n_blk + 1)).final_max()
    frac_a = float(np.mean((one >= 0.3) & (one <= 1.2)))
    frac_a2 = float(np.mean((two >= 0.3) & (two <= 1.2)))
    frac_b = float(np.mean(blk >= 1.5 * norm))
    ok = frac_a >= 0.9 and frac_b >= 0.5
    detail = (f"(a) {frac_a:.2f} of x with running max in [0.3, 1.2] (>= 0.9) "
              f"[two-sided |S_N|: {frac_a2:.2f}]; (b) block sequence, {n_blk} terms: "
              f"{frac_b:.2f} of x reach 1.5*||f|| (>= 0.5), median max {np.median(blk):.3f}")
    assert report(8, ok, detail)


def test_9_mixed_moments(report):
    seq = S.gen_super_lacunary(14)
    A, B = range(1, 7), range(7, 15)
    va = D.block_moment(COS1, seq, A, 2)
    vb = D.block_moment(COS1, seq, B, 2)
    worst = 0.0
    parts = []
    for p, q in ((2, 2), (1, 1), (2, 1)):
        m = D.moment_mixed(COS1, seq, A, B, p, q) / (va ** (p / 2) * vb ** (q / 2))
        want = D.gaussian_moment_constant(p) * D.gaussian_moment_constant(q)
        worst = max(worst, abs(m - want))
        parts.append(f"({p},{q}) {m:.4f} vs {want:g}")
    assert report(9, worst <= 0.05, "; ".join(parts) + " (within 0.05)")
