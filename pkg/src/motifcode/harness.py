"""Monte-Carlo experiment engine: FER sweeps, capacity sweeps, hard-decision sweeps."""

from dataclasses import asdict, dataclass, field
import io
import time

import numpy as np

from . import rng as rngmod
from .capacity import (CapacityCurve, Z95, capacity_cc, capacity_cc_interference, capacity_nbec,
                       capacity_nbec_t, capacity_split)
from .channel import (ChannelParams, compatible_mask, hard_decision_batch, posterior, sample_reads_batch,
                      symbol_table)
from .codes import build_sc_ldpc, make_mask, remove_mask_posteriors, remove_mask_sets
from .combinatorics import binom, largest_prime_leq
from .decode import QSPA, Status, set_bp_decode
from .pool import ordered_map

SETBP = "setbp"
QSPA_NAME = "qspa"

# stream tags keep the substreams of different purposes apart
_TAG_FRAME = 11
_TAG_CODE = 12
_TAG_HARD = 13


@dataclass(frozen=True)
class CodeSpec:
    d_v: int = 4
    d_c: int = 12
    L_p: int = 50
    N_p: int = 1002
    q: int = None
    girth_conditioning: bool = False


@dataclass
class ExperimentSpec:
    n: int = 8
    k: int = 4
    p_inter: float = 0.0
    R_values: list = field(default_factory=lambda: [6])
    code: CodeSpec = field(default_factory=CodeSpec)
    frames: int = 100
    master_seed: int = rngmod.DEFAULT_SEED
    decoder: str = SETBP
    max_iters: int = 100
    fixed_code: int = None
    method: str = "auto"

    def __post_init__(self):
        if isinstance(self.code, dict):
            self.code = CodeSpec(**self.code)

    @property
    def q(self) -> int:
        if self.code is not None and self.code.q is not None:
            return self.code.q
        return largest_prime_leq(binom(self.n, self.k))

    def validate(self):
        for R in self.R_values:
            ChannelParams(self.n, self.k, R, self.p_inter)
        if self.decoder not in (SETBP, QSPA_NAME):
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.decoder == SETBP and self.p_inter > 0:
            raise ValueError("the set decoder is only valid for p_inter = 0")
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.q > binom(self.n, self.k):
            raise ValueError("q exceeds the number of combinatorial symbols")
        return self

    def as_dict(self) -> dict:
        d = asdict(self)
        d["q"] = self.q
        return d


@dataclass
class FerRecord:
    R: int
    frames: int
    frame_errors: int
    fer: float
    ci95: float
    wrong_codewords: int
    mean_iters: float
    wall_seconds: float

    @classmethod
    def from_counts(cls, R, frames, errors, wrong, iters, seconds):
        fer = errors / frames
        ci = Z95 * np.sqrt(fer * (1 - fer) / frames)
        return cls(R, frames, errors, fer, float(ci), wrong, iters, seconds)


FER_HEADER = "R,frames,frame_errors,fer,ci95,wrong_codewords,mean_iters,wall_seconds"


def fer_csv(records, timing: bool = True) -> str:
    buf = io.StringIO()
    buf.write(FER_HEADER + "\n")
    for r in records:
        secs = f"{r.wall_seconds:.3f}" if timing else "0"
        buf.write(f"{r.R},{r.frames},{r.frame_errors},{r.fer:.12g},{r.ci95:.12g},"
                  f"{r.wrong_codewords},{r.mean_iters:.12g},{secs}\n")
    return buf.getvalue()


_code_cache = {}


def _code_for_frame(spec: ExperimentSpec, g: np.random.Generator):
    c = spec.code
    if spec.fixed_code is not None:
        key = (c, spec.q, spec.fixed_code)
        if key not in _code_cache:
            _code_cache.clear()
            cg = rngmod.stream(spec.fixed_code, 0, _TAG_CODE)
            _code_cache[key] = build_sc_ldpc(c.d_v, c.d_c, c.L_p, c.N_p, cg, q=spec.q,
                                             girth_conditioning=c.girth_conditioning)
        return _code_cache[key]
    return build_sc_ldpc(c.d_v, c.d_c, c.L_p, c.N_p, g, q=spec.q, girth_conditioning=c.girth_conditioning)


def simulate_frame(spec: ExperimentSpec, R: int, frame: int) -> tuple:
    """One transmission of the masked all-zero codeword.

    Returns (frame_error, wrong_codeword, iterations).
    """
    g = rngmod.stream(spec.master_seed, frame, _TAG_FRAME, R)
    params = ChannelParams(spec.n, spec.k, R, spec.p_inter)
    X = params.num_symbols
    q = spec.q
    tab = symbol_table(spec.n, spec.k)
    if spec.code is None:
        # uncoded: a frame is one symbol, decided by a unique MAP choice
        x = int(g.integers(q))
        counts = sample_reads_batch(tab[[x]], params, g)
        post = posterior(counts, params)[0]
        best = np.flatnonzero(post == post.max())
        err = len(best) != 1 or best[0] != x
        return bool(err), bool(err and len(best) == 1), 0

    H = _code_for_frame(spec, g)
    mask = make_mask(H.N, X, g)
    counts = sample_reads_batch(tab[mask], params, g)  # codeword is all-zero
    if spec.decoder == SETBP:
        sets = remove_mask_sets(compatible_mask(counts, spec.n, spec.k), mask, q)
        res = set_bp_decode(H, sets, spec.max_iters)
    else:
        priors = remove_mask_posteriors(posterior(counts, params), mask, q)
        res = QSPA(H, spec.max_iters, spec.method).decode(priors)
    nonzero = bool(np.any(res.codeword))
    decoded = res.status is Status.DECODED
    return (not decoded) or nonzero, decoded and nonzero, res.iterations


def _frame_task(args):
    spec, R, frame = args
    return simulate_frame(spec, R, frame)


def run_fer(spec: ExperimentSpec, threads: int = 1, progress=None) -> list:
    spec.validate()
    records = []
    for R in spec.R_values:
        t0 = time.perf_counter()
        tasks = [(spec, R, f) for f in range(spec.frames)]
        results = ordered_map(_frame_task, tasks, threads)
        errors = sum(r[0] for r in results)
        wrong = sum(r[1] for r in results)
        iters = float(np.mean([r[2] for r in results]))
        rec = FerRecord.from_counts(R, spec.frames, int(errors), int(wrong), iters, time.perf_counter() - t0)
        records.append(rec)
        if progress is not None:
            progress(rec)
    return records


CAPACITY_KINDS = ("cc", "nbec", "nbec_t", "interference", "split")


def sweep_capacity(kind: str, R_values, n: int = 8, k: int = 4, p_inter: float = 0.078, t: int = 2,
                   a: int = 10, n_sub: int = 8, k_sub: int = 4, samples: int = 10**5,
                   trials: int = 10**6, seed: int = 0, threads: int = 1) -> CapacityCurve:
    R_values = [int(r) for r in R_values]
    caps, cis = [], []
    meta = {"kind": kind}
    for i, R in enumerate(R_values):
        if kind == "cc":
            c, e = capacity_cc(n, k, R), 0.0
            meta.update(n=n, k=k)
        elif kind == "nbec":
            c, e = capacity_nbec(n, k, R), 0.0
            meta.update(n=n, k=k)
        elif kind == "nbec_t":
            # distinct seeds per grid point keep the estimates independent
            c, e = capacity_nbec_t(n, k, R, t, trials, seed=rngmod.stream(seed, i).integers(2**63), threads=threads)
            meta.update(n=n, k=k, t=t, trials=trials)
        elif kind == "interference":
            c, e = capacity_cc_interference(n, k, R, p_inter, samples,
                                            seed=rngmod.stream(seed, i).integers(2**63), threads=threads)
            meta.update(n=n, k=k, p_inter=p_inter, samples=samples)
        elif kind == "split":
            c, e = capacity_split(n_sub, k_sub, a, R), 0.0
            meta.update(n_sub=n_sub, k_sub=k_sub, a=a)
        else:
            raise ValueError(f"unknown capacity kind {kind!r}")
        caps.append(c)
        cis.append(e)
    return CapacityCurve(R_values, caps, cis, meta)


def _hard_chunk(args):
    n, k, R, p, t, seed, idx, count = args
    g = rngmod.stream(seed, idx, _TAG_HARD, R)
    params = ChannelParams(n, k, R, p)
    tab = symbol_table(n, k)
    x = g.integers(0, len(tab), size=count)
    counts = sample_reads_batch(tab[x], params, g)
    dec = hard_decision_batch(counts, k, t)
    erased = int(np.count_nonzero(dec < 0))
    wrong = int(np.count_nonzero((dec >= 0) & (dec != x)))
    return erased, wrong


@dataclass
class HardDecisionPoint:
    R: int
    trials: int
    erasure_rate: float
    substitution_rate: float


def sweep_hard_decision(n: int, k: int, p_inter: float, t: int, R_values, trials: int = 10**6,
                        seed: int = 0, threads: int = 1) -> list:
    """Erasure and substitution rates of the top-k / t-copies demapper."""
    out = []
    for R in R_values:
        tasks = [(n, k, int(R), p_inter, t, seed, idx, cnt) for idx, _, cnt in rngmod.chunks(trials)]
        parts = ordered_map(_hard_chunk, tasks, threads)
        er = sum(a for a, _ in parts)
        wr = sum(b for _, b in parts)
        out.append(HardDecisionPoint(int(R), trials, er / trials, wr / trials))
    return out
