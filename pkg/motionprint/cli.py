"""
motionprint command line

One entry point with subcommands for each pipeline step:

    gen-synth → train-codebook → tokenize → build-index → query / eval / inspect

Results go to stdout or --output files; logs and errors go to stderr. Exit codes are
0 on success, 1 for validation errors and 2 for I/O errors.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional

import pandas as pd

from motionprint import __version__
from motionprint import io as mio
from motionprint.codebook import (
    CodebookConfig,
    assignment_entropy,
    tokenize_sequence,
    train_codebook_from_poses,
    usage_ratio,
)
from motionprint.config import EngineConfig, RuntimeConfig, load_engine_config
from motionprint.engine import Backend, run_query
from motionprint.errors import ArtifactIOError, InvalidInputError, MotionPrintError, UsageError
from motionprint.evaluation import EvalProtocol, evaluate
from motionprint.featurize import FeaturizerConfig
from motionprint.index import MotionIndex, PeriodicityConfig, build_index
from motionprint.parallel import parallel_map
from motionprint.synth import SynthCorpusConfig, SynthPoseConfig, gen_synth_corpus, gen_synth_poses

logger = logging.getLogger("motionprint")

WEIGHT_FLAGS = ("hist", "twed", "lcss", "edr", "erp", "ngram")
ALIGN_FLAGS = {
    "twed_nu": float,
    "twed_lambda": float,
    "lcss_epsilon": float,
    "lcss_delta": int,
    "edr_epsilon": float,
    "erp_gap": float,
    "erp_beta": float,
    "ngram_n": int,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -------------------------------------------------------------------------------------------------
# Parser
# -------------------------------------------------------------------------------------------------

def _common_flags() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    # SUPPRESS keeps a subcommand's unset flags from clobbering ones given before it
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for all randomness (default 0)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads (default: $DRE_THREADS, then CPU count)")
    common.add_argument("--config", default=argparse.SUPPRESS, help="engine config file (JSON or TOML)")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)
    common.add_argument("-q", "--quiet", action="count", default=argparse.SUPPRESS)
    return common


def _engine_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("scoring")
    for name in WEIGHT_FLAGS:
        g.add_argument(f"--w-{name}", type=float, dest=f"w_{name}", help=f"weight of the {name} term")
    g.add_argument("--renormalise", action="store_true", help="rescale weights to sum to 1")
    for name, kind in ALIGN_FLAGS.items():
        g.add_argument(f"--{name.replace('_', '-')}", type=kind, dest=name)
    g.add_argument("--max-shortlist", type=int, dest="shortlist_cap", help="hard cap on the shortlist size")


def _periodicity_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("periodicity")
    g.add_argument("--theta", type=float)
    g.add_argument("--min-peaks", type=int)
    g.add_argument("--max-lag", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog="motionprint", description="Motion-word fingerprints and two-stage retrieval",
                     parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.set_defaults(seed=0, threads=None, config=None, verbose=0, quiet=0)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("train-codebook", parents=[common], help="learn a codebook from pose sequences")
    p.add_argument("--poses", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--K", type=int, default=512)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--warmup-epochs", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.add_argument("--reservoir", choices=("last_batch", "epoch"), default="last_batch")
    p.add_argument("--patch-len", type=int, default=8)
    p.add_argument("--stride", type=int, default=8)
    p.add_argument("--no-scale-norm", action="store_true")
    p.add_argument("--history", help="CSV file for per-epoch health")

    p = sub.add_parser("tokenize", parents=[common], help="turn pose sequences into motion words")
    p.add_argument("--poses", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--output", default="-")

    p = sub.add_parser("build-index", parents=[common], help="build or extend a histogram index")
    p.add_argument("--tokens", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--K", type=int, help="vocabulary size (or give --codebook)")
    p.add_argument("--codebook", help="take the vocabulary size from this codebook")
    p.add_argument("--base", help="existing index to append to")
    _periodicity_flags(p)

    p = sub.add_parser("query", parents=[common], help="retrieve similar sequences")
    p.add_argument("--index", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--queries", help="token file of query sequences")
    src.add_argument("--query-id", action="append", help="query with an indexed sequence (repeatable)")
    p.add_argument("-k", type=int, default=10)
    p.add_argument("--backend", choices=[b.value for b in Backend], default=Backend.TWO_STAGE.value)
    p.add_argument("--exclude-self", action="store_true", default=None)
    p.add_argument("--codebook", help="check the queries' vocabulary against this codebook")
    p.add_argument("--diagnostics", action="store_true", help="add raw distances, DTW included")
    p.add_argument("--timing", action="store_true", help="add per-stage wall-clock times")
    p.add_argument("--output", default="-")
    _engine_flags(p)

    p = sub.add_parser("eval", parents=[common], help="run the retrieval evaluation protocol")
    p.add_argument("--tokens", required=True)
    p.add_argument("--backend", choices=["two_stage", "brute_force", "both"], default="two_stage")
    p.add_argument("--leave-k-out", type=int, default=1)
    p.add_argument("--top-n", type=int, default=3)
    p.add_argument("--K", type=int, help="vocabulary size (default: largest word + 1)")
    p.add_argument("--json", help="write the report(s) as JSON")
    p.add_argument("--csv", help="write per-query rows as CSV")
    _engine_flags(p)

    p = sub.add_parser("gen-synth", parents=[common], help="generate a seeded synthetic corpus")
    p.add_argument("--kind", choices=("tokens", "poses"), default="tokens")
    p.add_argument("--output", default="-")
    p.add_argument("--n-classes", type=int)
    p.add_argument("--per-class", type=int)
    p.add_argument("--template-len", type=int)
    p.add_argument("--K", type=int, help="vocabulary size (tokens)")
    p.add_argument("--sub", type=float, dest="substitution_rate")
    p.add_argument("--ins", type=float, dest="insertion_rate")
    p.add_argument("--del", type=float, dest="deletion_rate")
    p.add_argument("--tempo-jitter", type=float)
    p.add_argument("--overlap", type=float)
    p.add_argument("--n-joints", type=int, help="joints per skeleton (poses)")
    p.add_argument("--n-primitives", type=int, help="motion primitives (poses)")
    p.add_argument("--noise-std", type=float, help="joint noise in metres (poses)")

    p = sub.add_parser("inspect", parents=[common], help="print artefact summaries")
    what = p.add_mutually_exclusive_group(required=True)
    what.add_argument("--codebook")
    what.add_argument("--index")
    what.add_argument("--tokens")
    return parser


# -------------------------------------------------------------------------------------------------
# Helpers
# -------------------------------------------------------------------------------------------------

def configure_logging(level: str):
    """Root logger to stderr, once per process run"""
    logging.basicConfig(
        level=getattr(logging, level),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _engine_config(args) -> EngineConfig:
    base = load_engine_config(args.config) if args.config else EngineConfig()
    weights = {n: getattr(args, f"w_{n}") for n in WEIGHT_FLAGS if getattr(args, f"w_{n}", None) is not None}
    align = {n: getattr(args, n) for n in ALIGN_FLAGS if getattr(args, n, None) is not None}
    return base.with_overrides(
        weights=weights,
        align=align,
        renormalise=getattr(args, "renormalise", False),
        shortlist_cap=getattr(args, "shortlist_cap", None),
        exclude_self=getattr(args, "exclude_self", None),
    )


def _periodicity(args) -> PeriodicityConfig:
    base = load_engine_config(args.config).periodicity if args.config else PeriodicityConfig()
    values = base.to_dict()
    for name in ("theta", "min_peaks", "max_lag"):
        if getattr(args, name, None) is not None:
            values[name] = getattr(args, name)
    return PeriodicityConfig(**values)


def _print(text: str):
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _frame_text(frame: pd.DataFrame, **kwargs) -> str:
    return frame.to_string(**kwargs) + "\n"


# -------------------------------------------------------------------------------------------------
# Commands
# -------------------------------------------------------------------------------------------------

def cmd_train_codebook(args, runtime: RuntimeConfig) -> int:
    feat_cfg = FeaturizerConfig(patch_len=args.patch_len, stride=args.stride, scale_norm=not args.no_scale_norm)
    cb_cfg = CodebookConfig(
        K=args.K,
        alpha=args.alpha,
        epsilon=args.epsilon,
        epochs=args.epochs,
        warmup_epochs=args.warmup_epochs,
        batch_size=args.batch_size,
        reservoir=args.reservoir,
        seed=runtime.seed,
    )
    seqs = mio.read_poses(args.poses)
    cb, history = train_codebook_from_poses(seqs, feat_cfg, cb_cfg)
    mio.save_codebook(cb, args.output)
    table = mio.health_frame(history)
    if args.history:
        try:
            table.to_csv(args.history, lineterminator="\n")
        except OSError as e:
            raise ArtifactIOError(f"cannot write {args.history}: {e.strerror or e}") from e
    _print(_frame_text(table, float_format=lambda v: f"{v:.6f}"))
    return 0


def cmd_tokenize(args, runtime: RuntimeConfig) -> int:
    cb = mio.load_codebook(args.codebook)
    feat_cfg = mio.featurizer_config_of(cb)
    seqs = mio.read_poses(args.poses)
    tokens = parallel_map(lambda s: tokenize_sequence(s, feat_cfg, cb), seqs, runtime.threads)
    mio.write_tokens(tokens, args.output)
    return 0


def cmd_build_index(args, runtime: RuntimeConfig) -> int:
    pcfg = _periodicity(args)
    tokens = mio.read_tokens(args.tokens)
    if args.base:
        idx = mio.load_index(args.base)
        K = args.K or (mio.load_codebook(args.codebook).K if args.codebook else idx.K)
        if K != idx.K:
            raise InvalidInputError(f"base index uses K={idx.K}, requested K={K}")
        for seq in tokens:
            idx.append(seq, pcfg)
        logger.info(f"✅ Appended {len(tokens)} sequences; index now holds {len(idx)}")
    else:
        if args.K is None and args.codebook is None:
            raise UsageError("build-index needs --K or --codebook")
        K = args.K if args.K is not None else mio.load_codebook(args.codebook).K
        idx = build_index(tokens, K, pcfg)
    mio.save_index(idx, args.output)
    return 0


def cmd_query(args, runtime: RuntimeConfig) -> int:
    cfg = _engine_config(args)
    idx = mio.load_index(args.index)
    vocab_size = mio.load_codebook(args.codebook).K if args.codebook else None
    if args.queries:
        queries = mio.read_tokens(args.queries)
    else:
        queries = [idx.get(qid).tokens for qid in args.query_id]
    results = [
        run_query(
            q,
            idx,
            cfg,
            k=args.k,
            backend=Backend(args.backend),
            vocab_size=vocab_size,
            n_jobs=runtime.threads,
            diagnostics=args.diagnostics,
        )
        for q in queries
    ]
    mio.write_results(results, args.output, timing=args.timing)
    logger.info(f"✅ Answered {len(results)} queries ({args.backend})")
    return 0


def cmd_eval(args, runtime: RuntimeConfig) -> int:
    cfg = _engine_config(args)
    protocol = EvalProtocol(leave_k_out=args.leave_k_out, top_n=args.top_n, seed=runtime.seed)
    db = mio.read_tokens(args.tokens)
    backends = list(Backend) if args.backend == "both" else [Backend(args.backend)]
    reports = [evaluate(db, cfg, protocol, backend=b, K=args.K, n_jobs=runtime.threads) for b in backends]
    for report in reports:
        _print(mio.report_table(report))
    if args.json:
        mio.write_report_json(reports, args.json)
    if args.csv:
        mio.write_rows_csv(reports, args.csv)
    return 0


def _synth_overrides(args, fields) -> Dict[str, object]:
    values = {name: getattr(args, name) for name in fields if getattr(args, name, None) is not None}
    values["rng_seed"] = args.seed
    return values


def cmd_gen_synth(args, runtime: RuntimeConfig) -> int:
    shared = ("n_classes", "per_class", "template_len", "substitution_rate", "insertion_rate",
              "deletion_rate", "tempo_jitter", "overlap")
    if args.kind == "tokens":
        cfg = SynthCorpusConfig(**_synth_overrides(args, shared + ("K",)))
        mio.write_tokens(gen_synth_corpus(cfg), args.output)
    else:
        if args.K is not None:
            raise UsageError("--K applies to token corpora; poses use --n-primitives")
        cfg = SynthPoseConfig(**_synth_overrides(args, shared + ("n_joints", "n_primitives", "noise_std")))
        mio.write_poses(gen_synth_poses(cfg), args.output)
    return 0


def _inspect_codebook(path: str):
    cb = mio.load_codebook(path)
    meta = cb.feature_meta
    rows = [
        ("K", cb.K),
        ("D", cb.D),
        ("alpha", cb.alpha),
        ("epsilon", cb.epsilon),
        ("usage %", f"{usage_ratio(cb):.2f}"),
        ("assignment entropy", f"{assignment_entropy(cb.epoch_use):.4f}"),
        ("dead codes", int((cb.epoch_use == 0).sum())),
    ]
    rows += [(f"feature {k}", meta[k]) for k in ("patch_len", "stride", "scale_norm", "n_joints") if k in meta]
    _print(_frame_text(pd.DataFrame(rows, columns=["field", "value"]), index=False))


def _inspect_index(path: str):
    idx: MotionIndex = mio.load_index(path)
    stats = idx.stats()
    rows = [(k, v) for k, v in stats.items() if k != "revision"]
    _print(_frame_text(pd.DataFrame(rows, columns=["field", "value"]), index=False))
    if len(idx):
        frame = pd.DataFrame(
            [{"label": e.label, "periodic": e.periodic, "length": e.hist.source_len} for e in idx.entries]
        )
        frame["label"] = frame["label"].fillna("-")
        per_label = frame.groupby("label").agg(
            entries=("length", "size"), periodic=("periodic", "sum"), mean_length=("length", "mean")
        )
        _print("")
        _print(_frame_text(per_label, float_format=lambda v: f"{v:.2f}"))


def cmd_inspect(args, runtime: RuntimeConfig) -> int:
    if args.codebook:
        _inspect_codebook(args.codebook)
    elif args.index:
        _inspect_index(args.index)
    else:
        mio.write_tokens(mio.read_tokens(args.tokens), None)
    return 0


COMMANDS = {
    "train-codebook": cmd_train_codebook,
    "tokenize": cmd_tokenize,
    "build-index": cmd_build_index,
    "query": cmd_query,
    "eval": cmd_eval,
    "gen-synth": cmd_gen_synth,
    "inspect": cmd_inspect,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Parse, dispatch and map failures to exit codes"""
    try:
        args = build_parser().parse_args(argv)
        level = "DEBUG" if args.verbose else "WARNING" if args.quiet else None
        runtime = RuntimeConfig.from_env(threads=args.threads, log_level=level, seed=args.seed)
        configure_logging(runtime.log_level)
        return COMMANDS[args.command](args, runtime)
    except MotionPrintError as e:
        sys.stderr.write(e.one_line() + "\n")
        return e.exit_code
    except OSError as e:
        err = ArtifactIOError(str(e))
        sys.stderr.write(err.one_line() + "\n")
        return err.exit_code


def main():
    sys.exit(run())
