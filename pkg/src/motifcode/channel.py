"""Coupon collector channel CC(n, k, R, p_inter): sampling and inference.

Observations are stored as per-motif read counts (length-n integer arrays, or
(B, n) for batches). Symbols are sorted k-tuples of motif ids in ``range(n)``
and are indexed by their lexicographic rank.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
import math

import numpy as np

from .combinatorics import binom, rank_subset
from .errors import InconsistencyError

ERASURE = None


@dataclass(frozen=True)
class ChannelParams:
    n: int
    k: int
    R: int
    p_inter: float = 0.0

    def __post_init__(self):
        if not 1 <= self.k < self.n:
            raise ValueError(f"need 1 <= k < n, got n={self.n}, k={self.k}")
        if self.R < 1:
            raise ValueError(f"need R >= 1, got {self.R}")
        if not 0.0 <= self.p_inter <= 1.0:
            raise ValueError(f"p_inter={self.p_inter} outside [0, 1]")

    @property
    def pi_in(self) -> float:
        return self.p_inter / self.n + (1.0 - self.p_inter) / self.k

    @property
    def pi_out(self) -> float:
        return self.p_inter / self.n

    @property
    def num_symbols(self) -> int:
        return binom(self.n, self.k)


@lru_cache(maxsize=32)
def symbol_table(n: int, k: int) -> np.ndarray:
    """All k-subsets of range(n) in lexicographic order, shape (binom(n, k), k)."""
    tab = np.array(list(combinations(range(n), k)), dtype=np.int64).reshape(-1, k)
    tab.setflags(write=False)
    return tab


@lru_cache(maxsize=32)
def membership(n: int, k: int) -> np.ndarray:
    """Indicator matrix M[x, m] = 1 iff motif m belongs to symbol x."""
    tab = symbol_table(n, k)
    M = np.zeros((len(tab), n), dtype=np.int64)
    np.put_along_axis(M, tab, 1, axis=1)
    M.setflags(write=False)
    return M


def as_symbol(motifs, n: int, k: int) -> tuple:
    s = tuple(sorted(int(m) for m in motifs))
    if len(s) != k or len(set(s)) != k or s[0] < 0 or s[-1] >= n:
        raise ValueError(f"{motifs!r} is not a {k}-subset of range({n})")
    return s


def symbol_rank(motifs, n: int) -> int:
    return rank_subset(sorted(motifs), n)


def read_probabilities(motifs: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Per-read motif distribution for each symbol row: pi_in on x, pi_out elsewhere."""
    motifs = np.atleast_2d(motifs)
    P = np.full((motifs.shape[0], params.n), params.pi_out)
    np.put_along_axis(P, motifs, params.pi_in, axis=1)
    return P


def sample_reads(x, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Counts of R reads of symbol ``x``.

    Each read comes from x uniformly with probability 1 - p_inter, otherwise
    uniformly from the whole library (x included).
    """
    x = np.asarray(as_symbol(x, params.n, params.k))
    return sample_reads_batch(x[None, :], params, rng)[0]


def sample_reads_batch(motifs: np.ndarray, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    # the count vector of R iid reads is multinomial with the per-read law
    P = read_probabilities(motifs, params)
    return rng.multinomial(params.R, P)


def compatible_mask(counts: np.ndarray, n: int, k: int) -> np.ndarray:
    """Boolean mask over symbol ranks: True where every observed motif is in the symbol."""
    counts = np.asarray(counts)
    seen = (counts > 0).astype(np.int64)
    outside = 1 - membership(n, k)
    return (seen @ outside.T) == 0


def compatible_set(counts, n: int, k: int) -> np.ndarray:
    """Ranks of all k-subsets containing the support of ``counts`` (empty if none)."""
    counts = np.asarray(counts)
    if counts.shape != (n,):
        raise ValueError(f"expected counts of shape ({n},)")
    return np.flatnonzero(compatible_mask(counts, n, k))


def log_likelihoods(counts: np.ndarray, params: ChannelParams) -> np.ndarray:
    """log P(y | x) for every symbol x; counts may be (n,) or (B, n)."""
    counts = np.asarray(counts, dtype=np.int64)
    M = membership(params.n, params.k)
    s = counts @ M.T
    total = counts.sum(axis=-1, keepdims=True)
    miss = total - s
    log_in = math.log(params.pi_in)
    with np.errstate(divide="ignore"):
        log_out = np.log(params.pi_out)
    if np.isneginf(log_out):
        out_term = np.where(miss > 0, -np.inf, 0.0)
    else:
        out_term = miss * log_out
    return s * log_in + out_term


def normalize_log(logw: np.ndarray) -> np.ndarray:
    top = np.max(logw, axis=-1, keepdims=True)
    if np.any(np.isneginf(top)):
        raise InconsistencyError("observation is incompatible with every symbol")
    w = np.exp(logw - top)
    return w / w.sum(axis=-1, keepdims=True)


def posterior(counts, params: ChannelParams) -> np.ndarray:
    """P(x | y) over all symbols under a uniform prior."""
    counts = np.asarray(counts)
    if counts.shape[-1] != params.n:
        raise ValueError(f"counts must have trailing dimension {params.n}")
    return normalize_log(log_likelihoods(counts, params))


def entropy_bits(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(p), 0.0)
    return terms.sum(axis=-1)


def hard_decision_batch(counts: np.ndarray, k: int, t: int) -> np.ndarray:
    """Top-k demapper over (B, n) counts; returns symbol ranks, -1 for erasure."""
    if t < 1:
        raise ValueError("t must be >= 1")
    counts = np.atleast_2d(np.asarray(counts))
    B, n = counts.shape
    order = np.argsort(-counts, axis=1, kind="stable")
    srt = np.take_along_axis(counts, order, axis=1)
    kth = srt[:, k - 1]
    ok = kth >= t
    if k < n:
        # a tie across the k-th boundary leaves the choice ambiguous
        ok &= srt[:, k] < kth
    out = np.full(B, -1, dtype=np.int64)
    if ok.any():
        top = np.sort(order[ok, :k], axis=1)
        out[ok] = _rank_rows(top, n)
    return out


def _rank_rows(rows: np.ndarray, n: int) -> np.ndarray:
    k = rows.shape[1]
    if n > 24:
        return np.array([rank_subset(r, n) for r in rows], dtype=np.int64)
    # rank via a lookup over the packed motif bitmask
    table = _rank_lookup(n, k)
    keys = np.bitwise_or.reduce(np.left_shift(1, rows.astype(np.int64)), axis=1)
    return table[keys]


@lru_cache(maxsize=32)
def _rank_lookup(n: int, k: int) -> np.ndarray:
    tab = symbol_table(n, k)
    keys = np.bitwise_or.reduce(np.left_shift(1, tab), axis=1)
    lut = np.full(1 << n, -1, dtype=np.int64)
    lut[keys] = np.arange(len(tab))
    return lut


def hard_decision_demap(counts, k: int, t: int):
    """Symbol (sorted motif tuple) chosen by the top-k rule, or ERASURE."""
    counts = np.asarray(counts)
    n = counts.shape[-1]
    r = hard_decision_batch(counts[None, :], k, t)[0]
    if r < 0:
        return ERASURE
    return tuple(int(v) for v in symbol_table(n, k)[r])


def pipeline_sample(block, reads: int, profile, p_inter: float, n: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Simulate ``reads`` strands of one block; returns (L, n) counts per cycle.

    Every strand carries one uniformly chosen motif per cycle. A cycle's motif is
    visible with that cycle's profile probability; a visible motif is replaced
    by a uniform library draw with probability ``p_inter``. Invisible cycles
    never interfere.
    """
    block = np.atleast_2d(np.asarray(block, dtype=np.int64))
    L, k = block.shape
    profile = np.asarray(profile, dtype=float)
    if profile.shape != (L,):
        raise ValueError(f"profile must have one entry per cycle ({L})")
    if np.any((profile < 0) | (profile > 1)):
        raise ValueError("visibility probabilities must lie in [0, 1]")
    if not 0.0 <= p_inter <= 1.0:
        raise ValueError("p_inter outside [0, 1]")
    pick = rng.integers(0, k, size=(reads, L))
    motif = block[np.arange(L)[None, :], pick]
    visible = rng.random((reads, L)) < profile[None, :]
    inter = rng.random((reads, L)) < p_inter
    foreign = rng.integers(0, n, size=(reads, L))
    motif = np.where(inter, foreign, motif)
    cyc = np.broadcast_to(np.arange(L)[None, :], (reads, L))
    flat = (cyc * n + motif)[visible]
    return np.bincount(flat, minlength=L * n).reshape(L, n)
