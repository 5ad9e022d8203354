from itertools import combinations, product
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, strategies as st

from motifcode.combinatorics import (binom, coupon_cdf, coupon_fraction, largest_prime_leq, partition_size,
                                     rank_subset, stirling2, stirling2_explicit, unrank_subset)


def pascal(n, k):
    row = [1]
    for _ in range(n):
        row = [a + b for a, b in zip([0] + row, row + [0])]
    return row[k]


def set_partitions(elems):
    if not elems:
        yield []
        return
    first, rest = elems[0], elems[1:]
    for p in set_partitions(rest):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]
        yield [[first]] + p


def count_partitions(R, l):
    return sum(1 for p in set_partitions(list(range(R))) if len(p) == l)


def test_binom_examples():
    assert binom(8, 4) == 70
    assert binom(9, 0) == 1
    assert binom(12, 5) == pascal(12, 5) == 792


@pytest.mark.parametrize("n,k", [(3, 4), (-1, 0), (4, -1)])
def test_binom_domain(n, k):
    with pytest.raises(ValueError):
        binom(n, k)


def test_stirling_examples():
    for R in range(1, 10):
        assert stirling2(R, 1) == 1
    assert stirling2(4, 2) == count_partitions(4, 2) == 7
    assert stirling2(6, 4) == count_partitions(6, 4) == 65
    assert stirling2(0, 0) == 1
    assert stirling2(3, 5) == 0


def test_stirling_matches_alternating_sum():
    for R in range(21):
        for l in range(R + 1):
            assert stirling2(R, l) == stirling2_explicit(R, l)


def test_stirling_exact_large():
    # exactness well beyond 64-bit range
    assert stirling2(256, 128) == stirling2_explicit(256, 128)


def brute_coupon(k, R):
    hits = sum(1 for seq in product(range(k), repeat=R) if len(set(seq)) == k)
    return hits, k**R


def test_coupon_cdf_examples():
    hits, total = brute_coupon(4, 6)
    assert (hits, total) == (1560, 4096)
    assert coupon_fraction(4, 6) == Fraction(hits, total)
    assert coupon_cdf(4, 6) == pytest.approx(0.380859375, abs=1e-15)
    for k in range(2, 6):
        for R in range(k):
            assert coupon_cdf(k, R) == 0.0
    assert coupon_cdf(1, 1) == 1.0


def test_coupon_cdf_monotone_and_limit():
    vals = [coupon_cdf(4, R) for R in range(0, 65)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 1 - 1e-6


def test_partition_size_example():
    x = range(4)
    hits = sum(1 for seq in product(x, repeat=6) if len(set(seq)) == 3)
    assert hits == 2160
    assert partition_size(8, 4, 6, 3) == 2160


def test_partition_size_sums():
    for n in range(1, 9):
        for k in range(1, n + 1):
            for R in range(1, 9):
                tot = sum(partition_size(n, k, R, l) for l in range(1, min(k, R) + 1))
                assert tot == k**R
                assert partition_size(n, k, R, 1) == k


def test_partition_size_domain():
    with pytest.raises(ValueError):
        partition_size(8, 4, 2, 3)
    with pytest.raises(ValueError):
        partition_size(8, 4, 6, 0)


def test_rank_examples():
    assert rank_subset((0, 1, 2, 3), 8) == 0
    order = list(combinations(range(8), 4))
    assert order.index((4, 5, 6, 7)) == 69
    assert rank_subset((4, 5, 6, 7), 8) == 69


def test_rank_unrank_exhaustive():
    for n in range(0, 11):
        for k in range(0, n + 1):
            for r, s in enumerate(combinations(range(n), k)):
                assert rank_subset(s, n) == r
                assert unrank_subset(r, n, k) == s


@pytest.mark.parametrize("bad", [(1, 1, 2), (3, 2), (0, 8), (-1, 2)])
def test_rank_rejects_invalid(bad):
    with pytest.raises(ValueError):
        rank_subset(bad, 8)


def test_unrank_rejects_out_of_range():
    with pytest.raises(ValueError):
        unrank_subset(70, 8, 4)


@given(st.integers(2, 5000))
def test_largest_prime_leq(m):
    p = largest_prime_leq(m)
    trial = lambda v: v >= 2 and all(v % d for d in range(2, int(v**0.5) + 1))
    assert trial(p) and p <= m
    assert not any(trial(v) for v in range(p + 1, m + 1))


def test_largest_prime_examples():
    assert largest_prime_leq(70) == 67
    assert largest_prime_leq(2) == 2
    assert largest_prime_leq(8) == 7
    with pytest.raises(ValueError):
        largest_prime_leq(1)


def test_binom_against_math():
    for n in range(30):
        for k in range(n + 1):
            assert binom(n, k) == comb(n, k)
