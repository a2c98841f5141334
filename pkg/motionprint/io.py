"""
Artefact I/O

Readers and writers for pose, token, codebook, index, result and report files.
Floats are written with Python's shortest round-trip repr, so loading a saved artefact
gives back exactly the same numbers. Key order is fixed, which keeps repeated runs
byte-identical.
"""

import contextlib
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, TextIO, Union

import numpy as np
import pandas as pd

from motionprint.codebook import Codebook, CodebookHealth, TokenSequence
from motionprint.engine import RetrievalResult
from motionprint.errors import (
    ArtifactIOError,
    DuplicateIdError,
    FormatError,
    MotionPrintError,
    ValidationError,
)
from motionprint.evaluation import EvalReport
from motionprint.featurize import FeaturizerConfig, PoseSequence
from motionprint.index import INDEX_VERSION, Histogram, IndexEntry, MotionIndex

logger = logging.getLogger(__name__)

CODEBOOK_VERSION = 1

PathLike = Union[str, Path]


# -------------------------------------------------------------------------------------------------
# Plumbing
# -------------------------------------------------------------------------------------------------

def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ArtifactIOError(f"cannot read {path}: {e.strerror or e}") from e


@contextlib.contextmanager
def open_output(path: Optional[PathLike]) -> Iterator[TextIO]:
    """Text handle for a file, or stdout for None and '-'"""
    if path is None or str(path) == "-":
        yield sys.stdout
        return
    try:
        handle = open(path, "w", encoding="utf-8", newline="\n")
    except OSError as e:
        raise ArtifactIOError(f"cannot write {path}: {e.strerror or e}") from e
    with handle:
        try:
            yield handle
        except OSError as e:
            raise ArtifactIOError(f"cannot write {path}: {e.strerror or e}") from e


def _dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, allow_nan=False)


def _write_json(obj: Any, path: Optional[PathLike]):
    with open_output(path) as fh:
        fh.write(_dumps(obj))
        fh.write("\n")


def _write_jsonl(records: Iterable[Dict[str, Any]], path: Optional[PathLike]) -> int:
    n = 0
    with open_output(path) as fh:
        for record in records:
            fh.write(_dumps(record))
            fh.write("\n")
            n += 1
    return n


def _load_json(path: PathLike) -> Any:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e.msg}", line=e.lineno, path=str(path)) from None


def _iter_jsonl(path: PathLike) -> Iterator[tuple]:
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f"invalid JSON: {e.msg}", line=lineno, path=str(path)) from None
        if not isinstance(record, dict):
            raise FormatError("record must be an object", line=lineno, path=str(path))
        yield lineno, record


def _require(record: Dict[str, Any], keys, lineno: Optional[int], path: PathLike):
    missing = [k for k in keys if k not in record]
    if missing:
        raise FormatError(f"missing fields {missing}", line=lineno, path=str(path))


def _check_version(data: Dict[str, Any], expected: int, path: PathLike):
    if data.get("version") != expected:
        raise FormatError(f"unsupported version {data.get('version')!r}, expected {expected}", path=str(path))


# -------------------------------------------------------------------------------------------------
# Poses and tokens
# -------------------------------------------------------------------------------------------------

def read_poses(path: PathLike) -> List[PoseSequence]:
    seqs, seen = [], set()
    for lineno, record in _iter_jsonl(path):
        _require(record, ("id", "frames"), lineno, path)
        if record["id"] in seen:
            raise DuplicateIdError(f"{path}:{lineno}: id {record['id']!r} already used")
        try:
            seq = PoseSequence(
                id=str(record["id"]),
                frames=np.asarray(record["frames"], dtype=np.float64),
                fps=float(record.get("fps", 30.0)),
                label=record.get("label"),
            )
        except (ValidationError, ValueError, TypeError) as e:
            raise FormatError(str(getattr(e, "message", e)), line=lineno, path=str(path)) from None
        seen.add(seq.id)
        seqs.append(seq)
    logger.info(f"📥 Read {len(seqs)} pose sequences from {path}")
    return seqs


def write_poses(seqs: Iterable[PoseSequence], path: Optional[PathLike]) -> int:
    records = (
        {"id": s.id, "label": s.label, "fps": float(s.fps), "frames": s.frames.tolist()}
        for s in seqs
    )
    n = _write_jsonl(records, path)
    logger.info(f"📤 Wrote {n} pose sequences to {path or 'stdout'}")
    return n


def token_record(seq: TokenSequence) -> Dict[str, Any]:
    return {"id": seq.id, "label": seq.label, "words": list(seq.words)}


def read_tokens(path: PathLike) -> List[TokenSequence]:
    seqs, seen = [], set()
    for lineno, record in _iter_jsonl(path):
        _require(record, ("id", "words"), lineno, path)
        if record["id"] in seen:
            raise DuplicateIdError(f"{path}:{lineno}: id {record['id']!r} already used")
        words = record["words"]
        if not isinstance(words, list) or not all(isinstance(w, int) and not isinstance(w, bool) for w in words):
            raise FormatError("words must be a list of integers", line=lineno, path=str(path))
        try:
            seq = TokenSequence(id=str(record["id"]), words=words, label=record.get("label"))
        except ValidationError as e:
            raise FormatError(e.message, line=lineno, path=str(path)) from None
        seen.add(seq.id)
        seqs.append(seq)
    logger.info(f"📥 Read {len(seqs)} token sequences from {path}")
    return seqs


def write_tokens(seqs: Iterable[TokenSequence], path: Optional[PathLike]) -> int:
    n = _write_jsonl((token_record(s) for s in seqs), path)
    logger.info(f"📤 Wrote {n} token sequences to {path or 'stdout'}")
    return n


# -------------------------------------------------------------------------------------------------
# Codebook
# -------------------------------------------------------------------------------------------------

def codebook_to_dict(cb: Codebook) -> Dict[str, Any]:
    return {
        "version": CODEBOOK_VERSION,
        "K": cb.K,
        "D": cb.D,
        "alpha": float(cb.alpha),
        "epsilon": float(cb.epsilon),
        "feature_meta": cb.feature_meta,
        "codes": cb.codes.tolist(),
        "ema_counts": cb.ema_counts.tolist(),
        "ema_sums": cb.ema_sums.tolist(),
        "epoch_use": cb.epoch_use.tolist(),
    }


def save_codebook(cb: Codebook, path: PathLike):
    _write_json(codebook_to_dict(cb), path)
    logger.info(f"📤 Saved codebook (K={cb.K}, D={cb.D}) to {path}")


def load_codebook(path: PathLike) -> Codebook:
    data = _load_json(path)
    if not isinstance(data, dict):
        raise FormatError("codebook file must hold an object", path=str(path))
    _check_version(data, CODEBOOK_VERSION, path)
    _require(data, ("K", "D", "alpha", "epsilon", "codes", "ema_counts", "ema_sums"), None, path)
    try:
        cb = Codebook(
            codes=np.asarray(data["codes"], dtype=np.float64),
            ema_counts=np.asarray(data["ema_counts"], dtype=np.float64),
            ema_sums=np.asarray(data["ema_sums"], dtype=np.float64),
            epoch_use=data.get("epoch_use"),
            alpha=float(data["alpha"]),
            epsilon=float(data["epsilon"]),
            feature_meta=data.get("feature_meta") or {},
        )
    except (ValidationError, ValueError, TypeError) as e:
        raise FormatError(f"bad codebook arrays: {getattr(e, 'message', e)}", path=str(path)) from None
    if (cb.K, cb.D) != (data["K"], data["D"]):
        raise FormatError(f"codes have shape {cb.codes.shape}, header says ({data['K']}, {data['D']})", path=str(path))
    logger.info(f"📥 Loaded codebook (K={cb.K}, D={cb.D}) from {path}")
    return cb


def featurizer_config_of(cb: Codebook) -> FeaturizerConfig:
    """Featuriser settings recorded with a codebook, defaults where absent"""
    meta = cb.feature_meta
    keys = ("patch_len", "stride", "scale_norm")
    return FeaturizerConfig(**{k: meta[k] for k in keys if k in meta})


# -------------------------------------------------------------------------------------------------
# Index
# -------------------------------------------------------------------------------------------------

def index_to_dict(idx: MotionIndex) -> Dict[str, Any]:
    return {
        "version": idx.version,
        "K": idx.K,
        "entries": [
            {
                "id": e.id,
                "label": e.label,
                "words": list(e.tokens.words),
                "hist": e.hist.bins.tolist(),
                "periodic": bool(e.periodic),
            }
            for e in idx.entries
        ],
    }


def save_index(idx: MotionIndex, path: PathLike):
    _write_json(index_to_dict(idx), path)
    logger.info(f"📤 Saved index ({len(idx)} entries, K={idx.K}) to {path}")


def load_index(path: PathLike) -> MotionIndex:
    data = _load_json(path)
    if not isinstance(data, dict):
        raise FormatError("index file must hold an object", path=str(path))
    _check_version(data, INDEX_VERSION, path)
    _require(data, ("K", "entries"), None, path)
    K = data["K"]
    if not isinstance(K, int) or K < 1:
        raise FormatError(f"K must be a positive integer, got {K!r}", path=str(path))
    idx = MotionIndex(K, version=data["version"])
    if not isinstance(data["entries"], list):
        raise FormatError("entries must be a list", path=str(path))
    for n, record in enumerate(data["entries"], start=1):
        if not isinstance(record, dict):
            raise FormatError(f"entry {n}: record must be an object", path=str(path))
        _require(record, ("id", "words", "hist", "periodic"), None, path)
        words = record["words"]
        if not isinstance(words, list) or not all(isinstance(w, int) and not isinstance(w, bool) for w in words):
            raise FormatError(f"entry {n}: words must be a list of integers", path=str(path))
        try:
            bins = np.asarray(record["hist"], dtype=np.float64)
        except (TypeError, ValueError):
            raise FormatError(f"entry {n}: histogram must be numeric", path=str(path)) from None
        if bins.shape != (K,) or not np.all(np.isfinite(bins)) or np.any(bins < 0):
            raise FormatError(f"entry {n}: histogram must hold {K} non-negative values", path=str(path))
        if not words or max(words) >= K:
            raise FormatError(f"entry {n}: words must be non-empty and below K={K}", path=str(path))
        try:
            tokens = TokenSequence(id=str(record["id"]), words=words, label=record.get("label"))
            idx.add_entry(IndexEntry(
                id=tokens.id,
                label=tokens.label,
                hist=Histogram(bins=bins, source_len=len(words)),
                tokens=tokens,
                periodic=bool(record["periodic"]),
            ))
        except MotionPrintError as e:
            raise FormatError(f"entry {n}: {e.message}", path=str(path)) from None
    logger.info(f"📥 Loaded index ({len(idx)} entries, K={K}) from {path}")
    return idx


# -------------------------------------------------------------------------------------------------
# Results and reports
# -------------------------------------------------------------------------------------------------

def result_to_dict(result: RetrievalResult, timing: bool = False) -> Dict[str, Any]:
    ranked = []
    for position, c in enumerate(result.ranked, start=1):
        row = {
            "rank": position,
            "candidate_id": c.candidate_id,
            "label": c.label,
            "score": c.score,
            "shortlist_rank": c.shortlist_rank,
            "breakdown": c.breakdown,
        }
        if c.raw is not None:
            row["raw"] = c.raw
        ranked.append(row)
    out = {
        "query_id": result.query_id,
        "backend": result.backend.value,
        "n_candidates": result.n_candidates,
        "ranked": ranked,
    }
    if timing:
        out["timing"] = result.timing
    return out


def write_results(results: Iterable[RetrievalResult], path: Optional[PathLike], timing: bool = False) -> int:
    return _write_jsonl((result_to_dict(r, timing) for r in results), path)


def report_table(report: EvalReport) -> str:
    summary = pd.DataFrame(
        [
            ("backend", report.backend.value),
            ("queries", report.n_queries),
            ("mean score", f"{report.mean_score:.4f}"),
            ("match rate %", f"{report.match_rate_pct:.2f}"),
            ("rank-1 %", f"{report.rank1_pct:.2f}"),
        ]
        + [(f"best rank {b}", n) for b, n in report.rank_histogram.items()],
        columns=["metric", "value"],
    )
    lines = [summary.to_string(index=False)]
    if report.per_class:
        lines.append("")
        lines.append(report.per_class_frame().to_string(float_format=lambda v: f"{v:.4f}"))
    return "\n".join(lines) + "\n"


def write_report_json(reports: List[EvalReport], path: Optional[PathLike]):
    _write_json([r.to_dict() for r in reports], path)


def write_rows_csv(reports: List[EvalReport], path: PathLike):
    frames = [r.rows.assign(backend=r.backend.value) for r in reports]
    try:
        pd.concat(frames, ignore_index=True).to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise ArtifactIOError(f"cannot write {path}: {e.strerror or e}") from e
    logger.info(f"📤 Wrote per-query rows to {path}")


def health_frame(history: List[CodebookHealth]) -> pd.DataFrame:
    frame = pd.DataFrame([h.to_dict() for h in history])
    frame.index = pd.RangeIndex(1, len(history) + 1, name="epoch")
    return frame
