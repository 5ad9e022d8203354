"""Capacity computations for the coupon collector channels and the read-write cost optimiser."""

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, log2
import io

import numpy as np

from . import rng as rngmod
from .channel import ChannelParams, entropy_bits, posterior, sample_reads_batch, symbol_table
from .combinatorics import binom, coupon_fraction, stirling2_row
from .pool import ordered_map

Z95 = 1.959963984540054


def _check_nk(n, k):
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got n={n}, k={k}")


def _check_R(R) -> int:
    # numpy integers would overflow in k**R
    R = int(R)
    if R < 1:
        raise ValueError(f"need R >= 1, got {R}")
    return R


def max_density(n: int, k: int) -> float:
    return log2(binom(n, k))


def split_density(n_sub: int, k_sub: int, n: int) -> float:
    if n % n_sub:
        raise ValueError("n must be a multiple of n_sub")
    return n * log2(binom(n_sub, k_sub)) / n_sub


def unique_motif_distribution(k: int, R: int) -> list:
    """Exact P(l distinct motifs among R uniform reads of k), l = 1..min(k, R)."""
    R, k = int(R), int(k)
    S = stirling2_row(R, k)
    denom = k**R
    return [Fraction(comb(k, l) * S[l] * factorial(l), denom) for l in range(1, min(k, R) + 1)]


def capacity_cc(n: int, k: int, R: int) -> float:
    """Closed-form capacity of CC(n, k, R) in bits per cycle."""
    _check_nk(n, k)
    R = _check_R(R)
    cond = 0.0
    for l, w in enumerate(unique_motif_distribution(k, R), start=1):
        c = comb(n - l, k - l)
        if c > 1:
            cond += float(w) * log2(c)
    return log2(comb(n, k)) - cond


def capacity_nbec(n: int, k: int, R: int) -> float:
    _check_nk(n, k)
    R = _check_R(R)
    return log2(comb(n, k)) * float(coupon_fraction(k, R))


def _nbec_t_chunk(args):
    k, R, t, seed, idx, count = args
    g = rngmod.stream(seed, idx, 1)
    counts = g.multinomial(R, np.full(k, 1.0 / k), size=count)
    return int(np.count_nonzero(counts.min(axis=1) < t))


def capacity_nbec_t(n: int, k: int, R: int, t: int, trials: int = 10**6, seed: int = 0,
                    threads: int = 1) -> tuple:
    """Erasure-channel capacity of the wait-for-t-copies rule (no interference).

    Returns (bits_per_cycle, 95% CI half-width).
    """
    _check_nk(n, k)
    R = _check_R(R)
    if t < 1 or trials < 1:
        raise ValueError("need t >= 1 and trials >= 1")
    top = log2(comb(n, k))
    if R < k * t:
        return 0.0, 0.0
    tasks = [(k, R, t, seed, idx, cnt) for idx, _, cnt in rngmod.chunks(trials)]
    erased = sum(ordered_map(_nbec_t_chunk, tasks, threads))
    eps = erased / trials
    ci = top * Z95 * np.sqrt(eps * (1 - eps) / trials)
    return top * (1 - eps), float(ci)


def _interference_chunk(args):
    n, k, R, p, seed, idx, count = args
    g = rngmod.stream(seed, idx, 2)
    params = ChannelParams(n, k, R, p)
    tab = symbol_table(n, k)
    x = g.integers(0, len(tab), size=count)
    counts = sample_reads_batch(tab[x], params, g)
    H = entropy_bits(posterior(counts, params))
    return float(H.sum()), float((H * H).sum())


def capacity_cc_interference(n: int, k: int, R: int, p_inter: float, samples: int = 10**5,
                             seed: int = 0, threads: int = 1) -> tuple:
    """Monte-Carlo estimate of I(X;Y) for CC(n, k, R, p_inter) under uniform input.

    Returns (bits_per_cycle, 95% CI half-width).
    """
    R = _check_R(R)
    ChannelParams(n, k, R, p_inter)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    tasks = [(n, k, R, p_inter, seed, idx, cnt) for idx, _, cnt in rngmod.chunks(samples)]
    parts = ordered_map(_interference_chunk, tasks, threads)
    s1 = sum(a for a, _ in parts)
    s2 = sum(b for _, b in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    ci = Z95 * np.sqrt(var / samples)
    return log2(comb(n, k)) - mean, float(ci)


def capacity_split(n_sub: int, k_sub: int, a: int, R: int) -> float:
    """Capacity of a library split into ``a`` independent CC(n_sub, k_sub, .) groups.

    Reads land in each group with probability 1/a; the r = 0 term carries nothing.
    """
    _check_nk(n_sub, k_sub)
    R = _check_R(R)
    if a < 1:
        raise ValueError("a must be >= 1")
    denom = a**R
    total = 0.0
    for r in range(1, R + 1):
        w = Fraction(comb(R, r) * (a - 1) ** (R - r), denom)
        if w:
            total += capacity_cc(n_sub, k_sub, r) * float(w)
    return a * total


@dataclass
class CapacityCurve:
    R: np.ndarray
    capacity: np.ndarray
    ci: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=np.int64)
        self.capacity = np.asarray(self.capacity, dtype=float)
        self.ci = np.zeros_like(self.capacity) if self.ci is None else np.asarray(self.ci, dtype=float)
        if len(self.R) != len(self.capacity) or len(self.R) != len(self.ci):
            raise ValueError("curve arrays must have equal length")
        if len(self.R) > 1 and np.any(np.diff(self.R) <= 0):
            raise ValueError("R grid must be strictly increasing")

    def __len__(self):
        return len(self.R)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("R,capacity,ci\n")
        for r, c, e in zip(self.R, self.capacity, self.ci):
            buf.write(f"{int(r)},{c:.12g},{e:.12g}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class CostModel:
    lam: float
    p_read: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.p_read <= 0:
            raise ValueError("p_read must be positive")


@dataclass(frozen=True)
class RWOptimum:
    R_star: int
    total_cost: float
    residual: float


def total_cost(curve: CapacityCurve, cost: CostModel) -> np.ndarray:
    """Cost per information bit p_read (lambda + R) / C(R); inf where C(R) = 0."""
    C = curve.capacity
    with np.errstate(divide="ignore"):
        return np.where(C > 0, cost.p_read * (cost.lam + curve.R) / np.where(C > 0, C, 1.0), np.inf)


def rw_optimize(curve: CapacityCurve, cost: CostModel) -> RWOptimum:
    """Grid minimiser of the total storage cost per bit.

    Also reports |C(R*) - (lambda + R*) C'(R*)|, the tangency residual, with the
    slope taken by finite differences on the grid.
    """
    if len(curve) == 0:
        raise ValueError("empty capacity curve")
    P = total_cost(curve, cost)
    if not np.any(np.isfinite(P)):
        raise ValueError("no optimum: all capacities are zero")
    i = int(np.argmin(P))  # first minimum -> smallest R on ties
    R, C = curve.R.astype(float), curve.capacity
    if len(curve) == 1:
        slope = 0.0
    elif i == 0:
        slope = (C[1] - C[0]) / (R[1] - R[0])
    elif i == len(curve) - 1:
        slope = (C[i] - C[i - 1]) / (R[i] - R[i - 1])
    else:
        slope = (C[i + 1] - C[i - 1]) / (R[i + 1] - R[i - 1])
    residual = abs(C[i] - (cost.lam + R[i]) * slope)
    return RWOptimum(int(curve.R[i]), float(P[i]), float(residual))
