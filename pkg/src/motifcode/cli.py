"""Command-line front end.

Every output file starts with ``#`` lines echoing the resolved configuration;
the body after them depends only on the seed, never on ``--threads``.
"""

import argparse
import io
import sys

import numpy as np

from . import __version__
from . import rng as rngmod
from .capacity import CapacityCurve, CostModel, rw_optimize, total_cost
from .channel import ChannelParams, compatible_mask, posterior, sample_reads_batch, symbol_table
from .codes import Encoder, ParityCheckMatrix, apply_mask, build_sc_ldpc, design_rate, make_mask, \
    remove_mask_posteriors, remove_mask_sets
from .combinatorics import binom, largest_prime_leq
from .decode import QSPA, Status, set_bp_decode
from .errors import InconsistencyError, NumericalCollapseError
from .harness import CAPACITY_KINDS, QSPA_NAME, SETBP, CodeSpec, ExperimentSpec, fer_csv, run_fer, \
    sweep_capacity

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

_TAG_CONSTRUCT = 21
_TAG_MESSAGE = 22
_TAG_READS = 23
_TAG_MASK = 24


class UsageError(Exception):
    pass


def parse_range(text: str) -> list:
    """``a:b[:s]`` (inclusive), ``a,b,c`` or a single integer."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, end = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1
            if step < 1 or end < start:
                raise ValueError
            return list(range(start, end + 1, step))
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use start:end[:step] or a,b,c") from None


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _prob(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return v


# --- file formats -------------------------------------------------------------

def _show(v) -> str:
    # echo long arithmetic progressions in range syntax
    if isinstance(v, list) and len(v) > 2 and all(isinstance(x, int) for x in v):
        steps = {b - a for a, b in zip(v, v[1:])}
        if len(steps) == 1 and min(steps) > 0:
            return f"{v[0]}:{v[-1]}:{steps.pop()}"
    return str(v)


def config_lines(command: str, config: dict) -> list:
    return [f"motifcode {__version__} {command}"] + [f"{k} = {_show(config[k])}" for k in sorted(config)]


def header_lines(command: str, config: dict) -> str:
    return "".join(f"# {line}\n" for line in config_lines(command, config))


def data_lines(fh):
    for line in fh:
        s = line.strip()
        if s and not s.startswith("#"):
            yield s


def write_vector(values) -> str:
    return " ".join(str(int(v)) for v in values) + "\n"


def read_vector(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        toks = " ".join(data_lines(fh)).split()
    return np.array([int(t) for t in toks], dtype=np.int64)


def write_reads(counts, n, k, R, p, mask_seed) -> str:
    buf = io.StringIO()
    buf.write(f"{counts.shape[0]} {n} {k} {R} {p!r} {mask_seed}\n")
    for row in counts:
        buf.write(write_vector(row))
    return buf.getvalue()


def read_reads(path):
    """Returns (counts, n, k, R, p_inter, mask_seed)."""
    with open(path, encoding="utf-8") as fh:
        lines = list(data_lines(fh))
    if not lines:
        raise UsageError(f"{path}: empty read dataset")
    N, n, k, R = (int(v) for v in lines[0].split()[:4])
    p, mask_seed = float(lines[0].split()[4]), int(lines[0].split()[5])
    counts = np.array([[int(v) for v in l.split()] for l in lines[1:]], dtype=np.int64)
    if counts.shape != (N, n):
        raise UsageError(f"{path}: expected {N} rows of {n} counts")
    return counts, n, k, R, p, mask_seed


def emit(args, text: str):
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def resolved(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func",)}


# --- subcommands ------------------------------------------------------------------

def cmd_capacity(args):
    curve = sweep_capacity(args.kind, args.r, n=args.n, k=args.k, p_inter=args.p, t=args.t, a=args.a,
                           n_sub=args.n_sub, k_sub=args.k_sub, samples=args.samples, trials=args.trials,
                           seed=args.seed, threads=args.threads)
    emit(args, header_lines("capacity", resolved(args)) + curve.to_csv())
    return EXIT_OK


def _fer_spec(args) -> ExperimentSpec:
    decoder = args.decoder or (SETBP if args.p == 0 else QSPA_NAME)
    code = None if args.uncoded else CodeSpec(args.dv, args.dc, args.lp, args.np_, args.q, args.girth_conditioning)
    spec = ExperimentSpec(n=args.n, k=args.k, p_inter=args.p, R_values=args.r, code=code, frames=args.frames,
                          master_seed=args.seed, decoder=decoder, max_iters=args.max_iters,
                          fixed_code=args.fixed_code, method=args.method)
    return spec.validate()


def cmd_fer(args):
    spec = _fer_spec(args)
    args.decoder = spec.decoder
    args.q = spec.q

    def progress(rec):
        print(f"R={rec.R} errors={rec.frame_errors}/{rec.frames} fer={rec.fer:.4g} "
              f"iters={rec.mean_iters:.1f} {rec.wall_seconds:.1f}s", file=sys.stderr, flush=True)

    records = run_fer(spec, threads=args.threads, progress=progress)
    emit(args, header_lines("fer", resolved(args)) + fer_csv(records, timing=not args.no_timing))
    return EXIT_OK


def _load_curve(path) -> CapacityCurve:
    with open(path, encoding="utf-8") as fh:
        rows = list(data_lines(fh))
    if not rows or not rows[0].startswith("R,"):
        raise UsageError(f"{path}: not a capacity CSV")
    vals = np.array([[float(x) for x in r.split(",")[:2]] for r in rows[1:]])
    return CapacityCurve(vals[:, 0].astype(np.int64), vals[:, 1])


def cmd_rwcost(args):
    if args.curve_file:
        curve = _load_curve(args.curve_file)
    else:
        curve = sweep_capacity(args.curve, args.r, n=args.n, k=args.k, p_inter=args.p, t=args.t, a=args.a,
                               n_sub=args.n_sub, k_sub=args.k_sub, samples=args.samples, trials=args.trials,
                               seed=args.seed, threads=args.threads)
    buf = io.StringIO()
    buf.write("lambda,R_star,total_cost,residual\n")
    for lam in args.lam:
        opt = rw_optimize(curve, CostModel(lam, args.p_read))
        buf.write(f"{lam!r},{opt.R_star},{opt.total_cost:.12g},{opt.residual:.12g}\n")
    if args.table:
        buf.write("\nR,capacity," + ",".join(f"cost_{lam!r}" for lam in args.lam) + "\n")
        costs = [total_cost(curve, CostModel(lam, args.p_read)) for lam in args.lam]
        for i, (R, C) in enumerate(zip(curve.R, curve.capacity)):
            buf.write(f"{int(R)},{C:.12g}," + ",".join(f"{c[i]:.12g}" for c in costs) + "\n")
    emit(args, header_lines("rwcost", resolved(args)) + buf.getvalue())
    return EXIT_OK


def cmd_construct(args):
    q = args.q or largest_prime_leq(binom(args.n, args.k))
    args.q = q
    rate = design_rate(args.dv, args.dc, args.lp)
    if rate <= 0:
        print(f"warning: design rate {rate:.6g} is not positive", file=sys.stderr)
    g = rngmod.stream(args.seed, 0, _TAG_CONSTRUCT)
    H = build_sc_ldpc(args.dv, args.dc, args.lp, args.np_, g, q=q, values=args.values,
                      girth_conditioning=args.girth_conditioning)
    cfg = resolved(args)
    cfg["design_rate"] = repr(rate)
    emit(args, H.to_text("\n".join(config_lines("construct", cfg))))
    return EXIT_OK


def _read_matrix(path) -> ParityCheckMatrix:
    with open(path, encoding="utf-8") as fh:
        return ParityCheckMatrix.read(fh)


def cmd_encode(args):
    H = _read_matrix(args.H)
    enc = Encoder(H)
    if args.message:
        m = read_vector(args.message)
    else:
        m = rngmod.stream(args.seed, 0, _TAG_MESSAGE).integers(0, H.q, enc.message_length)
    if len(m) != enc.message_length:
        raise UsageError(f"message has {len(m)} symbols, the code expects {enc.message_length}")
    x = enc.encode(m)
    cfg = resolved(args)
    cfg.update(q=H.q, N=H.N, message_length=enc.message_length)
    text = header_lines("encode", cfg)
    if args.with_message:
        text += "# message: " + write_vector(m)
    emit(args, text + write_vector(x))
    return EXIT_OK


def cmd_simreads(args):
    x = read_vector(args.codeword)
    params = ChannelParams(args.n, args.k, args.R, args.p)
    X = params.num_symbols
    if np.any((x < 0) | (x >= X)):
        raise UsageError("codeword symbols must lie in [0, binom(n, k))")
    mask_seed = int(rngmod.stream(args.seed, 0, _TAG_MASK).integers(2**63))
    mask = make_mask(len(x), X, rngmod.stream(mask_seed, 0, _TAG_MASK))
    sent = apply_mask(x, mask, X)
    counts = sample_reads_batch(symbol_table(args.n, args.k)[sent.symbols], params,
                                rngmod.stream(args.seed, 0, _TAG_READS))
    cfg = resolved(args)
    cfg["mask_seed"] = mask_seed
    emit(args, header_lines("simreads", cfg) + write_reads(counts, args.n, args.k, args.R, args.p, mask_seed))
    return EXIT_OK


def cmd_decode(args):
    H = _read_matrix(args.H)
    counts, n, k, R, p, mask_seed = read_reads(args.reads)
    if counts.shape[0] != H.N:
        raise UsageError(f"read dataset has {counts.shape[0]} symbols, the code has {H.N}")
    params = ChannelParams(n, k, R, p)
    mask = make_mask(H.N, params.num_symbols, rngmod.stream(mask_seed, 0, _TAG_MASK))
    decoder = args.decoder or (SETBP if p == 0 else QSPA_NAME)
    if decoder == SETBP and p > 0:
        raise UsageError("the set decoder requires p_inter = 0")
    if decoder == SETBP:
        res = set_bp_decode(H, remove_mask_sets(compatible_mask(counts, n, k), mask, H.q), args.max_iters)
    else:
        priors = remove_mask_posteriors(posterior(counts, params), mask, H.q)
        res = QSPA(H, args.max_iters, args.method).decode(priors)
    cfg = resolved(args)
    cfg.update(decoder=decoder, status=res.status.value, iterations=res.iterations)
    out = res.codeword if args.output == "codeword" else Encoder(H).extract(res.codeword)
    emit(args, header_lines("decode", cfg) + write_vector(out))
    if res.status is not Status.DECODED:
        print(f"decoding failed: {res.status.value} after {res.iterations} iterations", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# --- parser -------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None,
                   help=f"master seed (default: ${rngmod.SEED_ENV} or {rngmod.DEFAULT_SEED})")
    g.add_argument("--threads", type=_positive, default=1, help="worker processes; never changes results")
    g.add_argument("--out", default="-", help="output path (default: stdout)")
    g.add_argument("--format", choices=["csv"], default="csv")
    return p


def _channel_args(p, R_default):
    p.add_argument("--n", type=_positive, default=8, help="library size")
    p.add_argument("--k", type=_positive, default=4, help="motifs per symbol")
    p.add_argument("--r", type=parse_range, default=parse_range(R_default), help="reads: start:end[:step] or a,b,c")


def _curve_args(p):
    p.add_argument("--p", type=_prob, default=0.078, help="interference probability")
    p.add_argument("--t", type=_positive, default=2, help="copies required by the hard-decision rule")
    p.add_argument("--a", type=_positive, default=10, help="number of sub-libraries")
    p.add_argument("--n-sub", type=_positive, default=8)
    p.add_argument("--k-sub", type=_positive, default=4)
    p.add_argument("--samples", type=_positive, default=10**5, help="Monte-Carlo samples (interference)")
    p.add_argument("--trials", type=_positive, default=10**6, help="Monte-Carlo trials (nbec_t)")


def _code_args(p):
    p.add_argument("--dv", type=_positive, default=4)
    p.add_argument("--dc", type=_positive, default=12)
    p.add_argument("--lp", type=_positive, default=50)
    p.add_argument("--np", dest="np_", type=_positive, default=1002)
    p.add_argument("--q", type=_positive, default=None, help="field size (default: largest prime <= binom(n,k))")
    p.add_argument("--girth-conditioning", action="store_true", help="re-draw lifts until no 4-cycles remain")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="motifcode", description="Coupon collector channel capacity and coding tools.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", parents=[common], help="capacity curves as CSV")
    p.add_argument("--kind", choices=CAPACITY_KINDS, default="cc")
    _channel_args(p, "1:40")
    _curve_args(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("fer", parents=[common], help="frame error rate of the SC-LDPC scheme")
    _channel_args(p, "6")
    p.add_argument("--p", type=_prob, default=0.0, help="interference probability")
    _code_args(p)
    p.add_argument("--uncoded", action="store_true", help="no code: one symbol per frame")
    p.add_argument("--frames", type=_positive, default=100)
    p.add_argument("--decoder", choices=[SETBP, QSPA_NAME], default=None,
                   help="default: setbp when p = 0, otherwise qspa")
    p.add_argument("--max-iters", type=_positive, default=100)
    p.add_argument("--method", choices=["auto", "direct", "fft"], default="auto", help="QSPA convolution path")
    p.add_argument("--fixed-code", type=int, default=None, metavar="SEED", help="use one code built from SEED")
    p.add_argument("--no-timing", action="store_true", help="write 0 in the wall_seconds column")
    p.set_defaults(func=cmd_fer)

    p = sub.add_parser("rwcost", parents=[common], help="read-write cost optimum")
    p.add_argument("--lambda", dest="lam", type=float, nargs="+", default=[100.0], help="write/read cost ratio(s)")
    p.add_argument("--p-read", type=float, default=1.0)
    p.add_argument("--curve", choices=CAPACITY_KINDS, default="cc")
    p.add_argument("--curve-file", default=None, help="capacity CSV written by `capacity`")
    _channel_args(p, "1:64")
    _curve_args(p)
    p.add_argument("--table", action="store_true", help="also print the cost at every grid point")
    p.set_defaults(func=cmd_rwcost)

    p = sub.add_parser("construct", parents=[common], help="sample a parity-check matrix")
    p.add_argument("--n", type=_positive, default=8)
    p.add_argument("--k", type=_positive, default=4)
    _code_args(p)
    p.add_argument("--values", choices=["binary", "random"], default="binary")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("encode", parents=[common], help="encode a message (dense elimination; small codes)")
    p.add_argument("--H", required=True, help="parity-check matrix file")
    p.add_argument("--message", default=None, help="message file (default: random message from --seed)")
    p.add_argument("--with-message", action="store_true", help="echo the message in the header")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("simreads", parents=[common], help="mask a codeword and sample reads")
    p.add_argument("--codeword", required=True)
    p.add_argument("--n", type=_positive, default=8)
    p.add_argument("--k", type=_positive, default=4)
    p.add_argument("--R", type=_positive, default=6, help="reads per symbol")
    p.add_argument("--p", type=_prob, default=0.0)
    p.set_defaults(func=cmd_simreads)

    p = sub.add_parser("decode", parents=[common], help="decode a read dataset")
    p.add_argument("--H", required=True)
    p.add_argument("--reads", required=True)
    p.add_argument("--decoder", choices=[SETBP, QSPA_NAME], default=None)
    p.add_argument("--max-iters", type=_positive, default=100)
    p.add_argument("--method", choices=["auto", "direct", "fft"], default="auto")
    p.add_argument("--output", choices=["message", "codeword"], default="message")
    p.set_defaults(func=cmd_decode)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.seed = rngmod.resolve_seed(args.seed)
    except ValueError as e:
        ap.error(str(e))
    try:
        return args.func(args)
    except (InconsistencyError, NumericalCollapseError) as e:
        print(f"motifcode: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError, OSError) as e:
        print(f"motifcode: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
