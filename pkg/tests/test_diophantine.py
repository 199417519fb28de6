import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from lacunary import diophantine as D
from lacunary import periodic as P
from lacunary import sequences as S
from lacunary.errors import InvalidParameter, WorkBudgetExceeded

COS1 = P.TrigPolynomial.cosine(1.0)


def brute_relations(terms, r, A):
    """Canonical relations by direct nesting (the oracle for the split search)."""
    out = []
    signed = [c for c in range(-A, A + 1) if c]
    for idx in itertools.combinations(range(1, len(terms) + 1), r):
        for cs in itertools.product(range(1, A + 1), *([signed] * (r - 1))):
            if sum(c * terms[k - 1] for c, k in zip(cs, idx)) == 0:
                out.append(D.DiophantineSolution(idx, cs))
    return sorted(out)


def grid_moment(f, terms, p):
    """``int S^p`` by exact grid quadrature with M beyond every frequency."""
    M = p * f.degree * max(terms) + 1
    acc = [P.partial_sum(f, terms, len(terms), P.RationalPoint(j, M)) ** p for j in range(M)]
    return math.fsum(acc) / M


def test_count_examples():
    sols = D.count_solutions([2, 4, 8, 16, 32], D.DiophantineQuery(2, 2))
    assert [(s.indices, s.coeffs) for s in sols] == [((k, k + 1), (2, -1)) for k in range(1, 5)]
    assert D.count_solutions([2, 4, 8, 16, 32], D.DiophantineQuery(2, 1)) == []
    assert D.count_solutions([2, 4, 8], D.DiophantineQuery(3, 1)) == []


@given(st.lists(st.integers(1, 40), min_size=2, max_size=7, unique=True),
       st.integers(2, 4), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_split_search_matches_nesting(terms, r, A):
    got = D.count_solutions(terms, D.DiophantineQuery(r, A))
    assert got == brute_relations(terms, r, A)
    assert all(s.verify(terms) for s in got)


def test_permutation_invariance_of_solutions():
    terms = [3, 5, 6, 10, 12, 15, 20]
    base = {(tuple(sorted(zip(s.elements(terms), s.coeffs))))
            for s in D.count_solutions(terms, D.DiophantineQuery(3, 2))}
    rng = random.Random(4)
    for _ in range(3):
        perm = terms[:]
        rng.shuffle(perm)
        got = set()
        for s in D.count_solutions(perm, D.DiophantineQuery(3, 2)):
            pairs = sorted(zip(s.elements(perm), s.coeffs))
            # compare up to overall sign
            neg = sorted((e, -c) for e, c in pairs)
            got.add(min(tuple(pairs), tuple(neg)))
        canon = {min(b, tuple(sorted((e, -c) for e, c in b))) for b in base}
        assert got == canon


def test_index_range_and_budget():
    terms = list(S.gen_geometric(2, 10))
    sols = D.count_solutions(terms, D.DiophantineQuery(2, 2, index_range=(4, 6)))
    assert [s.indices for s in sols] == [(4, 5), (5, 6)]
    with pytest.raises(WorkBudgetExceeded) as exc:
        D.count_solutions(terms, D.DiophantineQuery(4, 50), budget=1000)
    assert exc.value.budget == 1000 and exc.value.needed > 1000
    with pytest.raises(InvalidParameter):
        D.DiophantineQuery(1, 3)
    with pytest.raises(InvalidParameter):
        D.DiophantineQuery(2, 0)


def test_a_omega_examples():
    om = S.omega_preset("sqrt")
    v = D.check_a_omega(S.gen_geometric(2, 20), om, 5, (3, 25))
    assert v.outcome == "fail"
    assert v.witness.indices == (6, 7) and v.witness.coeffs == (2, -1)
    assert v.witness_elements == (64, 128)
    assert v.smallest_N_set == (2, 4, 8, 16, 32)
    fast = S.IntegerSequence((1,) + tuple(2 ** (k * k) for k in range(2, 12)))
    v = D.check_a_omega(fast, om, 5, (3, 25))
    assert v.outcome == "pass-within-caps" and v.witness is None
    seq = S.gen_geometric(3, 6)
    assert D.check_a_omega(seq, om, 6, (3, 25)).outcome == "pass"


def test_a_omega_full_box_pass_and_monotone_caps():
    om = S.omega_preset("sqrt")
    fast = S.gen_super_lacunary(8)
    # sqrt(3) -> r = 1: the theoretical box is empty and fully searched
    assert D.check_a_omega(fast, om, 3, (5, 10 ** 6)).outcome == "pass"
    geo = S.gen_geometric(2, 12)
    outcomes = [D.check_a_omega(geo, om, 5, (3, A)).outcome for A in (1, 2, 10, 25)]
    assert outcomes == ["pass-within-caps", "fail", "fail", "fail"]


def test_a_omega_permutation_invariant():
    om = S.omega_preset("sqrt")
    geo = list(S.gen_geometric(2, 9))
    ref = D.check_a_omega(geo, om, 5, (3, 25))
    rng = random.Random(1)
    for _ in range(4):
        perm = geo[:]
        rng.shuffle(perm)
        v = D.check_a_omega(perm, om, 5, (3, 25))
        assert v.outcome == ref.outcome
        # the witness depends on index order; any witness must be a genuine relation
        assert v.witness.verify(perm)


def test_moment_examples():
    assert D.moment_exact(COS1, [1], 1, 2) == pytest.approx(0.5, abs=1e-15)
    # six orderings of (1,2,3) plus three of (1,1,2), each worth 1/4
    assert D.moment_exact(COS1, [1, 2, 3], 3, 3) == pytest.approx(2.25, abs=1e-14)
    assert grid_moment(COS1, [1, 2, 3], 3) == pytest.approx(2.25, abs=1e-14)
    assert D.moment_exact(COS1, [1, 2], 2, 2) == pytest.approx(1.0, abs=1e-15)
    assert D.moment_exact(COS1, [1, 2], 0, 3) == 0.0
    assert D.moment_exact(COS1, [1, 2], 2, 0) == 1.0


@given(st.lists(st.integers(1, 30), min_size=1, max_size=5, unique=True), st.integers(1, 5),
       st.lists(st.floats(-1, 1), min_size=1, max_size=3),
       st.lists(st.floats(-1, 1), min_size=0, max_size=3))
@settings(max_examples=40, deadline=None)
def test_moment_matches_grid(terms, p, a, b):
    a = [c / j for j, c in enumerate(a, start=1)]
    b = [c / j for j, c in enumerate(b, start=1)]
    if not any(a) and not any(b):
        return
    f = P.TrigPolynomial(tuple(a), tuple(b))
    got = D.moment_exact(f, terms, len(terms), p)
    want = grid_moment(f, terms, p)
    scale = (len(terms) * P.norm_sq(f)) ** (p / 2)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-11 * max(scale, 1e-300))


def test_moment_sine_terms():
    f = P.TrigPolynomial((0.0, 0.5), (1.0,))
    terms = [1, 3, 4]
    for p in (2, 3, 4):
        assert D.moment_exact(f, terms, 3, p) == pytest.approx(grid_moment(f, terms, p), abs=1e-12)


def test_second_moment_without_relations():
    f = P.TrigPolynomial.cosine(1.0, 0.5)
    seq = S.gen_super_lacunary(6)
    rel = [s for s in D.count_solutions(seq, D.DiophantineQuery(2, 2))]
    assert rel == []
    assert D.moment_exact(f, seq, 6, 2) == pytest.approx(6 * P.norm_sq(f), rel=1e-15)


def test_mixed_examples():
    assert D.moment_mixed(COS1, [1, 2], {1}, {2}, 1, 1) == pytest.approx(0.0, abs=1e-15)
    assert D.moment_mixed(COS1, [1, 2], {1}, {2}, 2, 2) == pytest.approx(0.25, abs=1e-15)
    assert D.moment_mixed(COS1, [1, 2], {1}, {2}, 0, 0) == 1.0
    with pytest.raises(InvalidParameter):
        D.moment_mixed(COS1, [1, 2, 3], {1, 2}, {2, 3}, 1, 1)


def test_mixed_matches_grid():
    terms = [1, 2, 5, 7]
    A, B = [1, 3], [2, 4]
    f = COS1
    M = 4 * 7 + 1
    acc = []
    for j in range(M):
        x = P.RationalPoint(j, M)
        sa = sum(P.scaled_eval(f, terms[k - 1], x) for k in A)
        sb = sum(P.scaled_eval(f, terms[k - 1], x) for k in B)
        acc.append(sa ** 2 * sb ** 2)
    assert D.moment_mixed(f, terms, A, B, 2, 2) == pytest.approx(math.fsum(acc) / M, abs=1e-13)


def test_moment_prediction_main_and_error():
    assert D.lemma1_prediction(2, 1.0, 10)[0] == 1.0
    assert D.lemma1_prediction(4, 1.0, 10)[0] == 3.0
    assert D.lemma1_prediction(3, 2.0, 10)[0] == 0.0
    main, err = D.lemma1_prediction(4, 2.0, 100)
    assert main == 48.0
    assert err == pytest.approx(math.exp(16) * 100 ** 1.5 * math.log(100) ** 4)
    with pytest.raises(InvalidParameter):
        D.lemma1_prediction(1, 1.0, 10)


def test_frequency_polynomial_symmetry():
    P1 = D.FrequencyPolynomial.from_sum(P.TrigPolynomial.cosine(1.0, 0.5), [3, 10])
    for e, c in P1.coeffs.items():
        assert P1.coeffs[-e] == c
    big = D.FrequencyPolynomial.from_sum(COS1, [2 ** 100, 2 ** 101])
    sq = big * big
    assert sq.constant() == pytest.approx(1.0)
