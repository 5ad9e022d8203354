"""Slow, independent reference computations used by the tests.

Nothing here imports the formulas it is meant to check.
"""

from fractions import Fraction
from itertools import combinations, product
from math import factorial, log2

import numpy as np


def brute_mutual_information(n, k, R):
    """I(X;Y) in bits for CC(n,k,R) under uniform X, by enumerating every (x, y) pair.

    y ranges over all n^R ordered read sequences.
    """
    xs = list(combinations(range(n), k))
    seqs = np.array(list(product(range(n), repeat=R)), dtype=np.int64).reshape(-1, R)
    like = np.empty((len(xs), len(seqs)))
    for i, x in enumerate(xs):
        ok = np.isin(seqs, x).all(axis=1)
        like[i] = np.where(ok, float(k) ** -R, 0.0)
    py = like.mean(axis=0)
    mi = 0.0
    for i in range(len(xs)):
        nz = like[i] > 0
        mi += np.sum(like[i, nz] * np.log2(like[i, nz] / py[nz])) / len(xs)
    return mi


def cond_entropy_by_sequences(n, k, R):
    """H(X|Y) for CC(n,k,R), summing over the k^R sequences read from a fixed x."""
    x = tuple(range(k))
    tot = 0
    h = 0.0
    for seq in product(x, repeat=R):
        support = set(seq)
        compatible = sum(1 for c in combinations(range(n), k) if support <= set(c))
        h += log2(compatible)
        tot += 1
    return h / tot


def prob_all_at_least(k, R, t):
    """P(every one of k motifs is read at least t times in R uniform reads), exactly."""
    # multinomial R! / prod c_i!, accumulated with exact integers
    def walk(remaining, slots, acc):
        if slots == 1:
            return [acc + [remaining]] if remaining >= t else []
        out = []
        for c in range(t, remaining - t * (slots - 1) + 1):
            out += walk(remaining - c, slots - 1, acc + [c])
        return out

    hits = 0
    for comp in walk(R, k, []):
        m = factorial(R)
        for c in comp:
            m //= factorial(c)
        hits += m
    return Fraction(hits, k**R)


def naive_check_update(Q_in, h_in, h_out, q):
    """Probability that h_out * v = -sum h_t v_t, with v_t ~ Q_in[t] independent.

    Literal sum over all assignments of the other variables; q**deg terms.
    """
    out = np.zeros(q)
    deg = len(Q_in)
    inv_out = pow(int(h_out), q - 2, q)
    for assign in product(range(q), repeat=deg):
        w = 1.0
        for t, a in enumerate(assign):
            w *= Q_in[t][a]
            if w == 0.0:
                break
        if w == 0.0:
            continue
        s = sum(int(h) * a for h, a in zip(h_in, assign)) % q
        out[(-s * inv_out) % q] += w
    return out


def naive_check_update_pair(a, b, q):
    """Two incoming messages, binary coefficients: O(q^2) double sum."""
    out = np.zeros(q)
    for u in range(q):
        for v in range(q):
            out[(-(u + v)) % q] += a[u] * b[v]
    return out
