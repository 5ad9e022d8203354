"""Belief-propagation decoders over GF(q).

Two flooding decoders share the same edge layout (edges sorted by check):

* ``set_bp_decode`` propagates possibility sets (exact on the
  interference-free channel);
* ``qspa_decode`` propagates length-q probability vectors; the check update
  is a leave-one-out circular convolution.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numba
import numpy as np

from .codes import ParityCheckMatrix
from .errors import InconsistencyError, NumericalCollapseError

FLOOR = 1e-300


class Status(str, Enum):
    DECODED = "Decoded"
    STALLED = "Stalled"
    MAX_ITERS = "MaxIters"


@dataclass
class DecodeResult:
    status: Status
    codeword: np.ndarray
    iterations: int

    @property
    def ok(self) -> bool:
        return self.status is Status.DECODED


def _inverse_table(q: int) -> np.ndarray:
    t = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        t[a] = pow(a, q - 2, q)
    return t


# --- set primitives ----------------------------------------------------------

def as_set(members, q: int) -> np.ndarray:
    """Bitset (bool mask of width q) holding ``members``."""
    m = np.zeros(q, dtype=bool)
    m[np.asarray(list(members), dtype=np.int64) % q] = True
    return m


def sumset(A: np.ndarray, B: np.ndarray, q: int) -> np.ndarray:
    """{a + b mod q : a in A, b in B} on bitsets."""
    A, B = np.asarray(A, dtype=bool), np.asarray(B, dtype=bool)
    out = np.zeros(q, dtype=bool)
    for a in np.flatnonzero(A):
        out |= np.roll(B, a)
    return out


def scale_set(c: int, A: np.ndarray, q: int) -> np.ndarray:
    """{c a mod q : a in A}."""
    c %= q
    if c == 0:
        raise ValueError("scaling by zero is not a permutation of GF(q)")
    A = np.asarray(A, dtype=bool)
    out = np.zeros(q, dtype=bool)
    out[(np.flatnonzero(A) * c) % q] = True
    return out


# --- set-based BP --------------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _set_cn_pass(S, new, row_ptr, cols, vals, inv, dirty, q):
    """One flooding check pass: new[j] &= output of every dirty check towards j."""
    M = len(row_ptr) - 1
    acc = np.zeros(q, np.uint8)
    tmp = np.zeros(q, np.uint8)
    elems = np.zeros(q, np.int64)
    sizes = np.zeros(S.shape[0], np.int64)
    for j in range(S.shape[0]):
        c = 0
        for a in range(q):
            c += S[j, a]
        sizes[j] = c
    for i in range(M):
        if not dirty[i]:
            continue
        lo, hi = row_ptr[i], row_ptr[i + 1]
        spread = 0
        offset = 0
        for e in range(lo, hi):
            sz = sizes[cols[e]]
            spread += sz - 1
            if sz == 1:
                for a in range(q):
                    if S[cols[e], a]:
                        offset = (offset + vals[e] * a) % q
                        break
        for e in range(lo, hi):
            j = cols[e]
            sz = sizes[j]
            # Cauchy-Davenport: |A + B| >= min(q, |A| + |B| - 1) for prime q
            if spread - (sz - 1) >= q - 1:
                continue
            off = offset
            if sz == 1:
                for a in range(q):
                    if S[j, a]:
                        off = (off - vals[e] * a) % q
                        break
            for a in range(q):
                acc[a] = 0
            acc[off] = 1
            for f in range(lo, hi):
                if f == e:
                    continue
                t = cols[f]
                if sizes[t] == 1:
                    continue
                h = vals[f]
                ne = 0
                for a in range(q):
                    if S[t, a]:
                        elems[ne] = (h * a) % q
                        ne += 1
                for a in range(q):
                    tmp[a] = 0
                for a in range(q):
                    if acc[a]:
                        for b in range(ne):
                            tmp[(a + elems[b]) % q] = 1
                for a in range(q):
                    acc[a] = tmp[a]
            # output S_ij[a] holds iff -h_ij a lies in the sumset
            hneg = (q - vals[e]) % q
            for a in range(q):
                if new[j, a] and not acc[(hneg * a) % q]:
                    new[j, a] = 0


class _Graph:
    """Edge-layout helpers derived from a parity-check matrix."""

    def __init__(self, H: ParityCheckMatrix):
        self.H = H
        self.q = H.q

    @cached_property
    def binary(self) -> bool:
        return bool(np.all(self.H.vals == 1))

    @cached_property
    def in_index(self):
        """Q'[e, u] = Q[e, h_e^{-1} u]: distribution of h_e x_e."""
        if self.binary:
            return None
        inv = _inverse_table(self.q)
        return (inv[self.H.vals][:, None] * np.arange(self.q)[None, :]) % self.q

    @cached_property
    def out_index(self):
        """S[e, a] = T[e, -h_e a]."""
        return ((-self.H.vals)[:, None] * np.arange(self.q)[None, :]) % self.q

    def dirty_checks(self, changed_vn: np.ndarray) -> np.ndarray:
        dirty = np.zeros(self.H.M, dtype=np.bool_)
        dirty[self.H.rows[changed_vn[self.H.cols]]] = True
        return dirty


def set_bp_decode(H: ParityCheckMatrix, initial_sets, max_iters: int = 100, callback=None) -> DecodeResult:
    """Decode from per-symbol possibility sets (N x q boolean).

    Stops when every set is a singleton (Decoded), when an iteration leaves
    every set size unchanged (Stalled), or after ``max_iters`` iterations.
    """
    q = H.q
    S = np.ascontiguousarray(initial_sets, dtype=np.uint8)
    if S.shape != (H.N, q):
        raise ValueError(f"initial sets must have shape ({H.N}, {q})")
    sizes = S.sum(axis=1)
    if np.any(sizes == 0):
        raise InconsistencyError(f"symbol {int(np.flatnonzero(sizes == 0)[0])} starts with an empty set")
    g = _Graph(H)
    inv = _inverse_table(q)
    dirty = np.ones(H.M, dtype=np.bool_)
    it = 0
    while True:
        if np.all(sizes == 1):
            z = S.argmax(axis=1)
            if not H.is_codeword(z):
                raise InconsistencyError("resolved symbols violate a parity check")
            return DecodeResult(Status.DECODED, z, it)
        if it >= max_iters:
            return DecodeResult(Status.MAX_ITERS, _pick(S), it)
        new = S.copy()
        _set_cn_pass(S, new, H.row_ptr, H.cols, H.vals, inv, dirty, q)
        it += 1
        new_sizes = new.sum(axis=1)
        if np.any(new_sizes == 0):
            raise InconsistencyError(f"iteration {it}: symbol {int(np.flatnonzero(new_sizes == 0)[0])} has no possibilities left")
        changed = new_sizes != sizes
        S, sizes = new, new_sizes
        if callback is not None:
            callback(it, S.astype(bool))
        if not changed.any():
            return DecodeResult(Status.STALLED, _pick(S), it)
        dirty = g.dirty_checks(changed)


def _pick(S):
    return S.argmax(axis=1).astype(np.int64)


# --- circular convolution ----------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _conv_direct(a, b, out):
    q = a.shape[0]
    for c in range(q):
        out[c] = 0.0
    for i in range(q):
        ai = a[i]
        if ai == 0.0:
            continue
        # split at the wrap-around so both loops vectorise
        for j in range(q - i):
            out[i + j] += ai * b[j]
        for j in range(q - i, q):
            out[i + j - q] += ai * b[j]


@numba.njit(cache=True, nogil=True)
def _loo_conv_direct(Qp, row_ptr, T):
    """Leave-one-out circular convolutions per check via prefix/suffix products."""
    q = Qp.shape[1]
    M = len(row_ptr) - 1
    dmax = 0
    for i in range(M):
        dmax = max(dmax, row_ptr[i + 1] - row_ptr[i])
    pre = np.zeros((dmax + 1, q))
    suf = np.zeros((dmax + 1, q))
    for i in range(M):
        lo, hi = row_ptr[i], row_ptr[i + 1]
        d = hi - lo
        if d == 0:
            continue
        for a in range(q):
            pre[0, a] = 0.0
            suf[d, a] = 0.0
        pre[0, 0] = 1.0
        suf[d, 0] = 1.0
        for t in range(d):
            _conv_direct(pre[t], Qp[lo + t], pre[t + 1])
        for t in range(d - 1, -1, -1):
            _conv_direct(suf[t + 1], Qp[lo + t], suf[t])
        for t in range(d):
            _conv_direct(pre[t], suf[t + 1], T[lo + t])


def circular_convolve(a, b, method: str = "direct") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if method == "fft":
        q = len(a)
        return np.fft.irfft(np.fft.rfft(a) * np.fft.rfft(b), n=q)
    out = np.zeros(len(a))
    _conv_direct(a, b, out)
    return out


def cn_update_conv(messages, q: int, h_in=None, h_out: int = 1, method: str = "auto") -> np.ndarray:
    """Check-to-variable message from the incoming messages of the other neighbours.

    ``messages[t]`` is the pmf of x_t; the output is the pmf of a with
    sum_t h_in[t] x_t + h_out a = 0 over GF(q).
    """
    Q = np.atleast_2d(np.asarray(messages, dtype=float))
    d = Q.shape[0]
    if Q.shape[1] != q:
        raise ValueError(f"messages must have length {q}")
    h_in = np.ones(d, dtype=np.int64) if h_in is None else np.asarray(h_in, dtype=np.int64) % q
    inv = _inverse_table(q)
    Qp = np.take_along_axis(Q, (inv[h_in][:, None] * np.arange(q)[None, :]) % q, axis=1)
    method = _pick_method(q, method)
    if method == "fft":
        T = np.fft.irfft(np.prod(np.fft.rfft(Qp, axis=1), axis=0), n=q)
        T = np.where(T < FLOOR, 0.0, T)
    else:
        T = np.zeros(q)
        T[0] = 1.0
        for t in range(d):
            T = circular_convolve(T, Qp[t])
    return T[((-int(h_out)) * np.arange(q)) % q]


DIRECT_MAX_Q = 128


def _pick_method(q: int, method: str) -> str:
    # direct sums keep structurally zero entries at exactly 0.0; the transform leaves round-off there
    if method == "auto":
        return "direct" if q < DIRECT_MAX_Q else "fft"
    if method not in ("direct", "fft"):
        raise ValueError(f"unknown convolution method {method!r}")
    return method


# --- QSPA ------------------------------------------------------------------------------

class _RealDFT:
    """Length-q real DFT and its inverse as dense matrix products.

    For the small prime lengths used here a BLAS product beats a
    prime-length FFT. ``out_perm`` folds an output re-indexing into the
    inverse transform.
    """

    def __init__(self, q: int, out_perm=None):
        self.q = q
        nb = q // 2 + 1
        n = np.arange(q)
        k = np.arange(nb)
        ang = 2 * np.pi * np.outer(n, k) / q
        self.fc = np.cos(ang)
        self.fs = -np.sin(ang)
        w = np.full(nb, 2.0)
        w[0] = 1.0
        if q % 2 == 0:
            w[-1] = 1.0
        ic = (w[:, None] * np.cos(ang.T)) / q
        is_ = -(w[:, None] * np.sin(ang.T)) / q
        if out_perm is not None:
            ic, is_ = ic[:, out_perm], is_[:, out_perm]
        self.ic = np.ascontiguousarray(ic)
        self.is_ = np.ascontiguousarray(is_)

    def forward(self, X):
        return X @ self.fc, X @ self.fs

    def inverse(self, re, im):
        return re @ self.ic + im @ self.is_


@numba.njit(cache=True, nogil=True)
def _loo_freq(re, im, row_ptr, ore, oim):
    """Per check, product of the other edges' spectra (prefix/suffix, no division)."""
    nb = re.shape[1]
    M = len(row_ptr) - 1
    dmax = 0
    for i in range(M):
        dmax = max(dmax, row_ptr[i + 1] - row_ptr[i])
    pr = np.ones((dmax + 1, nb))
    pi = np.zeros((dmax + 1, nb))
    for i in range(M):
        lo, hi = row_ptr[i], row_ptr[i + 1]
        d = hi - lo
        for k in range(nb):
            pr[0, k] = 1.0
            pi[0, k] = 0.0
        for t in range(d):
            e = lo + t
            for k in range(nb):
                a, b = pr[t, k], pi[t, k]
                c, s = re[e, k], im[e, k]
                pr[t + 1, k] = a * c - b * s
                pi[t + 1, k] = a * s + b * c
        # sweep back with a running suffix product
        for k in range(nb):
            sr = 1.0
            si = 0.0
            for t in range(d - 1, -1, -1):
                e = lo + t
                a, b = pr[t, k], pi[t, k]
                ore[e, k] = a * sr - b * si
                oim[e, k] = a * si + b * sr
                c, s = re[e, k], im[e, k]
                sr, si = sr * c - si * s, sr * s + si * c


@numba.njit(cache=True, nogil=True)
def _vn_pass(P, S, col_ptr, vn_order, Q, z, floor):
    """Extrinsic VN messages (normalised) and tentative decisions.

    Returns the index of a variable whose outgoing message vanished, else -1.
    """
    N, q = P.shape
    dmax = 0
    for j in range(N):
        dmax = max(dmax, col_ptr[j + 1] - col_ptr[j])
    pre = np.ones(dmax + 1)
    for j in range(N):
        lo, hi = col_ptr[j], col_ptr[j + 1]
        d = hi - lo
        best = -1.0
        arg = 0
        for a in range(q):
            pre[0] = P[j, a]
            for t in range(d):
                pre[t + 1] = pre[t] * S[vn_order[lo + t], a]
            if pre[d] > best:
                best = pre[d]
                arg = a
            suf = 1.0
            for t in range(d - 1, -1, -1):
                e = vn_order[lo + t]
                v = pre[t] * suf
                if v < floor:
                    v = 0.0
                Q[e, a] = v
                suf *= S[e, a]
        z[j] = arg
        for t in range(d):
            e = vn_order[lo + t]
            tot = 0.0
            for a in range(q):
                tot += Q[e, a]
            if not tot > 0.0:
                return j
            for a in range(q):
                Q[e, a] /= tot
    return -1


class QSPA:
    """Flooding q-ary sum-product decoder bound to one parity-check matrix."""

    def __init__(self, H: ParityCheckMatrix, max_iters: int = 100, method: str = "auto"):
        self.H = H
        self.q = H.q
        self.max_iters = max_iters
        self.method = _pick_method(H.q, method)
        self.g = _Graph(H)
        if self.method == "fft":
            # binary H: S^a = T^{-a}, folded into the inverse transform
            neg = (-np.arange(self.q)) % self.q
            self.dft = _RealDFT(self.q, neg if self.g.binary else None)

    def check_update(self, Q: np.ndarray) -> np.ndarray:
        g = self.g
        Qp = Q if g.in_index is None else np.take_along_axis(Q, g.in_index, axis=1)
        if self.method == "fft":
            re, im = self.dft.forward(Qp)
            ore, oim = np.empty_like(re), np.empty_like(im)
            _loo_freq(re, im, self.H.row_ptr, ore, oim)
            T = self.dft.inverse(ore, oim)
            T[T < FLOOR] = 0.0
            if g.binary:
                return T
        else:
            T = np.empty_like(Q)
            _loo_conv_direct(np.ascontiguousarray(Qp), self.H.row_ptr, T)
            T[T < FLOOR] = 0.0
        return np.take_along_axis(T, g.out_index, axis=1)

    def variable_update(self, P: np.ndarray, S: np.ndarray, it: int):
        """Normalised extrinsic Q messages and tentative decisions z."""
        H = self.H
        Q = np.empty_like(S)
        z = np.empty(H.N, dtype=np.int64)
        bad = _vn_pass(P, S, H.col_ptr, H.vn_order, Q, z, FLOOR)
        if bad >= 0:
            raise NumericalCollapseError(f"iteration {it}: message from symbol {bad} vanished", it)
        return Q, z

    def beliefs(self, P: np.ndarray, S: np.ndarray) -> np.ndarray:
        """Unnormalised P_j prod_i S_ij for every variable."""
        B = P.copy()
        np.multiply.at(B, self.H.cols, S)
        return B

    def decode(self, priors, callback=None) -> DecodeResult:
        H, q = self.H, self.q
        P = np.ascontiguousarray(priors, dtype=float)
        if P.shape != (H.N, q):
            raise ValueError(f"priors must have shape ({H.N}, {q})")
        # Q_ij = P_j on every edge
        Q = P[H.cols]
        z = P.argmax(axis=1)
        for it in range(1, self.max_iters + 1):
            S = self.check_update(Q)
            Q, z = self.variable_update(P, S, it)
            if callback is not None:
                callback(it, Q, S, self.beliefs(P, S))
            if H.is_codeword(z):
                return DecodeResult(Status.DECODED, z, it)
        return DecodeResult(Status.MAX_ITERS, z, self.max_iters)


def qspa_decode(H: ParityCheckMatrix, priors, max_iters: int = 100, method: str = "auto",
                callback=None) -> DecodeResult:
    return QSPA(H, max_iters, method).decode(priors, callback)
