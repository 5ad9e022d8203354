"""Exact integer combinatorics used by the channel and capacity formulas.

All counts are Python ints (arbitrary precision); conversion to float happens
only at the final probability step.
"""

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, isqrt


def binom(n: int, k: int) -> int:
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"binom({n}, {k}) outside 0 <= k <= n")
    return comb(n, k)


@lru_cache(maxsize=4096)
def stirling2_row(R: int, L: int) -> tuple:
    """(S(R, 0), ..., S(R, L)) from the recurrence S(r, l) = l S(r-1, l) + S(r-1, l-1)."""
    if R < 0 or L < 0:
        raise ValueError("stirling2 arguments must be non-negative")
    row = [1] + [0] * L
    for _ in range(R):
        for l in range(L, 0, -1):
            row[l] = l * row[l] + row[l - 1]
        row[0] = 0
    return tuple(row)


def stirling2(R: int, l: int) -> int:
    """Stirling number of the second kind S(R, l)."""
    if R < 0 or l < 0:
        raise ValueError("stirling2 arguments must be non-negative")
    if l > R:
        return 0
    return stirling2_row(R, l)[l]


def stirling2_explicit(R: int, l: int) -> int:
    """Alternating-sum form (1/l!) sum_i (-1)^(l-i) C(l,i) i^R; used as a cross-check."""
    if R < 0 or l < 0:
        raise ValueError("stirling2 arguments must be non-negative")
    total = sum((-1) ** (l - i) * comb(l, i) * i**R for i in range(l + 1))
    q, r = divmod(total, factorial(l))
    assert r == 0
    return q


def coupon_fraction(k: int, R: int) -> Fraction:
    """Exact probability that R uniform draws cover all k coupons."""
    if k < 1 or R < 0:
        raise ValueError("coupon_cdf needs k >= 1 and R >= 0")
    return Fraction(stirling2(R, k) * factorial(k), k**R)


def coupon_cdf(k: int, R: int) -> float:
    return float(coupon_fraction(k, R))


def partition_size(n: int, k: int, R: int, l: int) -> int:
    """Number of length-R read sequences over a fixed k-subset with exactly l distinct motifs."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    if not 1 <= l <= min(k, R):
        raise ValueError(f"l={l} outside 1..min(k, R)={min(k, R)}")
    return comb(k, l) * stirling2(R, l) * factorial(l)


def rank_subset(subset, n: int) -> int:
    """Lexicographic rank of a sorted k-subset of range(n)."""
    s = [int(v) for v in subset]
    k = len(s)
    if k > n or any(v < 0 or v >= n for v in s) or any(a >= b for a, b in zip(s, s[1:])):
        raise ValueError(f"{subset!r} is not a sorted subset of range({n})")
    rank = 0
    prev = -1
    for i, v in enumerate(s):
        # subsets whose i-th element is smaller than v come first
        for u in range(prev + 1, v):
            rank += comb(n - 1 - u, k - 1 - i)
        prev = v
    return rank


def unrank_subset(rank: int, n: int, k: int) -> tuple:
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if not 0 <= rank < comb(n, k):
        raise ValueError(f"rank {rank} outside [0, {comb(n, k)})")
    out = []
    u = 0
    for i in range(k):
        while True:
            c = comb(n - 1 - u, k - 1 - i)
            if rank < c:
                break
            rank -= c
            u += 1
        out.append(u)
        u += 1
    return tuple(out)


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    for d in range(3, isqrt(m) + 1, 2):
        if m % d == 0:
            return False
    return True


def is_prime(m: int) -> bool:
    return _is_prime(m)


def largest_prime_leq(m: int) -> int:
    if m < 2:
        raise ValueError("no prime below 2")
    while not _is_prime(m):
        m -= 1
    return m
