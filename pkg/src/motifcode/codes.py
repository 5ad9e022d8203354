"""Prime-field arithmetic, protograph SC-LDPC construction, masking and encoding."""

from dataclasses import dataclass
from functools import cached_property
import io

import numpy as np
import scipy.sparse as sp

from .combinatorics import is_prime
from .errors import InconsistencyError


class PrimeField:
    def __init__(self, q: int):
        if not is_prime(q):
            raise ValueError(f"{q} is not prime")
        self.q = q

    def add(self, a, b):
        return (a + b) % self.q

    def neg(self, a):
        return (-a) % self.q

    def mul(self, a, b):
        return (a * b) % self.q

    def inv(self, a):
        a = int(a) % self.q
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in GF(q)")
        return pow(a, self.q - 2, self.q)

    @cached_property
    def inv_table(self) -> np.ndarray:
        t = np.zeros(self.q, dtype=np.int64)
        t[1:] = [pow(a, self.q - 2, self.q) for a in range(1, self.q)]
        return t

    def __repr__(self):
        return f"GF({self.q})"


@dataclass(frozen=True)
class Protograph:
    """Terminated (d_v, d_c) SC protograph of L_p spatial positions.

    Each position holds d_c/d_v VN types; a VN at position i has one edge to
    each CN position i, ..., i + d_v - 1.
    """
    d_v: int
    d_c: int
    L_p: int

    def __post_init__(self):
        if self.d_v < 2 or self.d_c % self.d_v or self.L_p < 1:
            raise ValueError("need d_v >= 2, d_v | d_c and L_p >= 1")

    @property
    def vn_types(self) -> int:
        return self.d_c // self.d_v

    @property
    def cn_positions(self) -> int:
        return self.L_p + self.d_v - 1

    def edges(self):
        """(vn_position, vn_type, cn_position) for every protograph edge."""
        for i in range(self.L_p):
            for v in range(self.vn_types):
                for off in range(self.d_v):
                    yield i, v, i + off

    def cn_degree(self, c: int) -> int:
        lo, hi = max(0, c - self.d_v + 1), min(self.L_p - 1, c)
        return max(0, hi - lo + 1) * self.vn_types


class ParityCheckMatrix:
    """Sparse M x N parity-check matrix over GF(q).

    Entries are kept as (row, col, value) sorted by (row, col); this order is
    also the check-node edge order used by the decoders.
    """

    def __init__(self, q: int, M: int, N: int, rows, cols, vals):
        self.q, self.M, self.N = int(q), int(M), int(N)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.int64) % self.q
        if not (len(rows) == len(cols) == len(vals)):
            raise ValueError("entry arrays differ in length")
        if len(rows) and (rows.min() < 0 or rows.max() >= M or cols.min() < 0 or cols.max() >= N):
            raise ValueError("entry index out of range")
        if np.any(vals == 0):
            raise ValueError("explicit zero entries are not allowed")
        order = np.lexsort((cols, rows))
        self.rows, self.cols, self.vals = rows[order], cols[order], vals[order]
        key = self.rows * N + self.cols
        if len(key) > 1 and np.any(key[1:] == key[:-1]):
            raise ValueError("duplicate entries")
        for a in (self.rows, self.cols, self.vals):
            a.setflags(write=False)

    @property
    def nnz(self) -> int:
        return len(self.rows)

    @cached_property
    def row_ptr(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(np.bincount(self.rows, minlength=self.M))])

    @cached_property
    def vn_order(self) -> np.ndarray:
        """Edge ids sorted by (col, row)."""
        return np.lexsort((self.rows, self.cols))

    @cached_property
    def col_ptr(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(np.bincount(self.cols, minlength=self.N))])

    def row_degrees(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def col_degrees(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    def check_neighbors(self, i: int) -> np.ndarray:
        return self.cols[self.row_ptr[i]:self.row_ptr[i + 1]]

    def var_neighbors(self, j: int) -> np.ndarray:
        e = self.vn_order[self.col_ptr[j]:self.col_ptr[j + 1]]
        return self.rows[e]

    def syndrome(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.int64)
        prod = (self.vals * z[self.cols]) % self.q
        return np.bincount(self.rows, weights=prod, minlength=self.M).astype(np.int64) % self.q

    def is_codeword(self, z) -> bool:
        return not np.any(self.syndrome(z))

    def to_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.vals, (self.rows, self.cols)), shape=(self.M, self.N))

    def dense(self) -> np.ndarray:
        H = np.zeros((self.M, self.N), dtype=np.int64)
        H[self.rows, self.cols] = self.vals
        return H

    @classmethod
    def from_dense(cls, H, q: int) -> "ParityCheckMatrix":
        H = np.asarray(H, dtype=np.int64) % q
        r, c = np.nonzero(H)
        return cls(q, H.shape[0], H.shape[1], r, c, H[r, c])

    def write(self, fh, header: str = "") -> None:
        for line in header.splitlines():
            fh.write(f"# {line}\n")
        fh.write(f"{self.q} {self.M} {self.N}\n")
        body = np.column_stack([self.rows, self.cols, self.vals])
        np.savetxt(fh, body, fmt="%d")

    def to_text(self, header: str = "") -> str:
        buf = io.StringIO()
        self.write(buf, header)
        return buf.getvalue()

    @classmethod
    def read(cls, fh) -> "ParityCheckMatrix":
        lines = (ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#"))
        try:
            q, M, N = (int(v) for v in next(lines).split())
        except StopIteration:
            raise ValueError("empty H-matrix file") from None
        data = np.loadtxt(lines, dtype=np.int64, ndmin=2)
        if data.size == 0:
            data = np.zeros((0, 3), dtype=np.int64)
        return cls(q, M, N, data[:, 0], data[:, 1], data[:, 2])

    @classmethod
    def from_text(cls, text: str) -> "ParityCheckMatrix":
        return cls.read(io.StringIO(text))

    def __eq__(self, other):
        return (isinstance(other, ParityCheckMatrix) and (self.q, self.M, self.N) == (other.q, other.M, other.N)
                and np.array_equal(self.rows, other.rows) and np.array_equal(self.cols, other.cols)
                and np.array_equal(self.vals, other.vals))

    def __repr__(self):
        return f"ParityCheckMatrix(q={self.q}, M={self.M}, N={self.N}, nnz={self.nnz})"


def design_rate(d_v: int, d_c: int, L_p: int) -> float:
    return 1.0 - (d_v / d_c) * (1.0 + (d_v - 1) / L_p)


def _four_cycles(rows, cols, M, N):
    """Columns lying on a 4-cycle and the number of offending column pairs."""
    B = sp.csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols)), shape=(M, N))
    G = sp.triu(B.T @ B, k=1).tocoo()
    bad = G.data > 1
    return np.unique(np.concatenate([G.row[bad], G.col[bad]])), int(np.count_nonzero(bad))


def build_sc_ldpc(d_v: int, d_c: int, L_p: int, N_p: int, rng: np.random.Generator, q: int = 2,
                  values: str = "binary", girth_conditioning: bool = False,
                  max_rounds: int = 2000) -> ParityCheckMatrix:
    """Lift the terminated SC protograph by copy-and-permute.

    The lifting factor is N_p d_v / d_c; every protograph edge gets an
    independent uniform permutation. ``values="random"`` draws nonzero GF(q)
    labels instead of all-ones. With ``girth_conditioning`` the permutations
    are locally re-drawn until no 4-cycles remain (or ``max_rounds`` runs out).
    """
    proto = Protograph(d_v, d_c, L_p)
    b = proto.vn_types
    if N_p % b:
        raise ValueError(f"N_p={N_p} is not divisible by d_c/d_v={b}")
    Z = N_p // b
    edges = list(proto.edges())
    E = len(edges)
    vn_base = np.array([(i * b + v) * Z for i, v, _ in edges], dtype=np.int64)
    cn_base = np.array([c * Z for _, _, c in edges], dtype=np.int64)
    perms = np.stack([rng.permutation(Z) for _ in range(E)])

    N = L_p * N_p
    M = proto.cn_positions * Z
    cols = (vn_base[:, None] + np.arange(Z)[None, :]).ravel()

    def rows_of(p):
        return (cn_base[:, None] + p).ravel()

    rows = rows_of(perms)
    if girth_conditioning and Z > 1:
        bad_cols, score = _four_cycles(rows, cols, M, N)
        for _ in range(max_rounds):
            if score == 0:
                break
            # swap the target of one edge at a bad column with another copy of its edge type
            e = rng.choice(np.flatnonzero(np.isin(cols, bad_cols)))
            t, z = divmod(int(e), Z)
            w = int(rng.integers(Z))
            trial = perms.copy()
            trial[t, z], trial[t, w] = trial[t, w], trial[t, z]
            r2 = rows_of(trial)
            b2, s2 = _four_cycles(r2, cols, M, N)
            if s2 <= score:
                perms, rows, bad_cols, score = trial, r2, b2, s2

    if values == "binary":
        vals = np.ones(len(rows), dtype=np.int64)
    elif values == "random":
        vals = rng.integers(1, q, size=len(rows))
    else:
        raise ValueError(f"unknown values mode {values!r}")
    return ParityCheckMatrix(q, M, N, rows, cols, vals)


# --- masking ---------------------------------------------------------------

@dataclass
class MaskedCodeword:
    symbols: np.ndarray
    mask: np.ndarray


def make_mask(N: int, num_symbols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, num_symbols, size=N)


def apply_mask(codeword, mask, num_symbols: int) -> MaskedCodeword:
    c = np.asarray(codeword, dtype=np.int64)
    mask = np.asarray(mask, dtype=np.int64)
    return MaskedCodeword((c + mask) % num_symbols, mask)


def _unmask_index(mask: np.ndarray, q: int, num_symbols: int) -> np.ndarray:
    # field element a was transmitted as label (a + mask) mod |X|
    return (np.arange(q)[None, :] + np.asarray(mask, dtype=np.int64)[:, None]) % num_symbols


def remove_mask_posteriors(post: np.ndarray, mask, q: int) -> np.ndarray:
    """Relabel (N, |X|) symbol posteriors to (N, q) field-element posteriors.

    Mass on labels that correspond to no field element is dropped and the rest
    renormalised.
    """
    post = np.atleast_2d(post)
    idx = _unmask_index(mask, q, post.shape[1])
    out = np.take_along_axis(post, idx, axis=1)
    tot = out.sum(axis=1, keepdims=True)
    if np.any(tot <= 0):
        bad = int(np.flatnonzero(tot[:, 0] <= 0)[0])
        raise InconsistencyError(f"symbol {bad}: all posterior mass on unassigned labels")
    return out / tot


def remove_mask_sets(sets: np.ndarray, mask, q: int) -> np.ndarray:
    """Relabel (N, |X|) boolean possibility sets to (N, q); unassigned labels are dropped."""
    sets = np.atleast_2d(sets)
    idx = _unmask_index(mask, q, sets.shape[1])
    return np.take_along_axis(sets, idx, axis=1)


# --- encoding --------------------------------------------------------------

def rref_mod(A: np.ndarray, q: int):
    """Reduced row echelon form over GF(q); returns (R, pivot_columns)."""
    A = np.array(A, dtype=np.int64) % q
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(A[r:, c])
        if len(nz) == 0:
            continue
        p = r + nz[0]
        if p != r:
            A[[r, p]] = A[[p, r]]
        A[r] = (A[r] * pow(int(A[r, c]), q - 2, q)) % q
        f = A[:, c].copy()
        f[r] = 0
        rows = np.flatnonzero(f)
        if len(rows):
            A[rows] = (A[rows] - f[rows, None] * A[r][None, :]) % q
        pivots.append(c)
        r += 1
    return A[:r], np.array(pivots, dtype=np.int64)


class Encoder:
    """Systematic encoder from H by Gaussian elimination over GF(q).

    Message symbols occupy the non-pivot columns (leading ones where
    possible); the pivot columns are solved from the reduced checks. Dense, so meant for moderate code sizes.
    """

    def __init__(self, H: ParityCheckMatrix):
        self.H = H
        self.q = H.q
        # eliminate from the right so parity lands on trailing columns
        R, piv = rref_mod(H.dense()[:, ::-1], H.q)
        R = R[:, ::-1]
        piv = H.N - 1 - piv
        self.rank = len(piv)
        self.pivots = piv
        self.free = np.setdiff1d(np.arange(H.N), piv)
        self._reduced_free = R[:, self.free]

    @property
    def message_length(self) -> int:
        return len(self.free)

    def encode(self, message) -> np.ndarray:
        m = np.asarray(message, dtype=np.int64)
        if m.shape != (self.message_length,):
            raise ValueError(f"message must have length {self.message_length}")
        if np.any((m < 0) | (m >= self.q)):
            raise ValueError("message symbols outside GF(q)")
        x = np.zeros(self.H.N, dtype=np.int64)
        x[self.free] = m
        x[self.pivots] = (-(self._reduced_free @ m)) % self.q
        return x

    def extract(self, codeword) -> np.ndarray:
        return np.asarray(codeword, dtype=np.int64)[self.free]


def encode(H: ParityCheckMatrix, message) -> np.ndarray:
    return Encoder(H).encode(message)
