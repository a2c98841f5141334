"""
Retrieval Engine

Two-stage retrieval over a MotionIndex. Stage 1 shortlists candidates by histogram
cosine; Stage 2 re-ranks them with a convex combination of the histogram score and the
alignment metrics. The brute-force back-end runs Stage 2 over the whole index.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple

from motionprint.align import AlignParams, Metric, alignment_scores, dtw
from motionprint.codebook import TokenSequence
from motionprint.errors import (
    ConfigMismatchError,
    EmptySequenceError,
    InvalidInputError,
    InvalidWeightsError,
    VocabularyOverflowError,
)
from motionprint.index import (
    Histogram,
    IndexEntry,
    MotionIndex,
    build_histogram,
    cosine_sim,
    shortlist,
    stage1_scores,
)
from motionprint.parallel import parallel_map

if TYPE_CHECKING:
    from motionprint.config import EngineConfig

logger = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-9

SCORED_METRICS = (Metric.HIST, Metric.TWED, Metric.LCSS, Metric.EDR, Metric.ERP, Metric.NGRAM)


class Backend(str, Enum):
    TWO_STAGE = "two_stage"
    BRUTE_FORCE = "brute_force"


@dataclass(frozen=True)
class ScoreWeights:
    """Convex weights of the combined score"""

    hist: float = 0.30
    twed: float = 0.15
    lcss: float = 0.15
    edr: float = 0.15
    erp: float = 0.10
    ngram: float = 0.15

    def __post_init__(self):
        values = self.as_dict()
        for name, w in values.items():
            if not (math.isfinite(w) and w >= 0.0):
                raise InvalidWeightsError(f"weight {name} must be a non-negative number, got {w}")
        total = math.fsum(values.values())
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise InvalidWeightsError(f"weights must sum to 1, got {total!r}")

    def as_dict(self) -> Dict[str, float]:
        return {m.value: float(getattr(self, m.value)) for m in SCORED_METRICS}

    def weight(self, metric: Metric) -> float:
        return getattr(self, metric.value)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], renormalise: bool = False) -> "ScoreWeights":
        unknown = set(data) - {m.value for m in SCORED_METRICS}
        if unknown:
            raise InvalidWeightsError(f"unknown weight names: {sorted(unknown)}")
        defaults = cls().as_dict()
        values = {}
        for name, default in defaults.items():
            raw = data.get(name, default)
            try:
                values[name] = float(raw)
            except (TypeError, ValueError):
                raise InvalidWeightsError(f"weight {name} is not a number: {raw!r}") from None
        if renormalise:
            values = _renormalised(values)
        return cls(**values)

    def renormalised(self) -> "ScoreWeights":
        return ScoreWeights(**_renormalised(self.as_dict()))


def _renormalised(values: Dict[str, float]) -> Dict[str, float]:
    if any(not (math.isfinite(w) and w >= 0.0) for w in values.values()):
        raise InvalidWeightsError(f"weights must be non-negative numbers: {values}")
    total = math.fsum(values.values())
    if not total > 0.0:
        raise InvalidWeightsError("at least one weight must be positive")
    scaled = {k: v / total for k, v in values.items()}
    # push the rounding residue into the largest weight so the sum lands on 1
    top = max(scaled, key=lambda k: (scaled[k], k))
    scaled[top] = max(0.0, 1.0 - math.fsum(v for k, v in scaled.items() if k != top))
    return scaled


@dataclass
class PairScore:
    """Combined score with each metric's similarity (phi) and weighted contribution"""

    score: float
    breakdown: Dict[str, Dict[str, float]]
    raw: Dict[str, float] = field(default_factory=dict)
    degenerate: bool = False


@dataclass
class RankedCandidate:
    candidate_id: str
    score: float
    breakdown: Dict[str, Dict[str, float]]
    shortlist_rank: Optional[int] = None
    label: Optional[str] = None
    raw: Optional[Dict[str, float]] = None


@dataclass
class RetrievalResult:
    query_id: str
    ranked: List[RankedCandidate]
    backend: Backend
    timing: Dict[str, float] = field(default_factory=dict)
    n_candidates: int = 0

    @property
    def ids(self) -> List[str]:
        return [c.candidate_id for c in self.ranked]


# -------------------------------------------------------------------------------------------------
# Scoring
# -------------------------------------------------------------------------------------------------

def score_pair(
    q: TokenSequence,
    s: TokenSequence,
    q_hist: Histogram,
    s_hist: Histogram,
    weights: ScoreWeights,
    params: AlignParams = AlignParams(),
    hist_score: Optional[float] = None,
    diagnostics: bool = False,
) -> PairScore:
    """
    Convex combination of the histogram cosine and the alignment similarities

    ``hist_score`` lets a caller pass a cosine it already holds. With ``diagnostics``
    the raw recursion values are reported, DTW included; they never enter the score.
    """
    phis = {Metric.HIST: cosine_sim(q_hist, s_hist) if hist_score is None else hist_score}
    metric_scores = alignment_scores(q.words, s.words, params)
    phis.update({m: ms.similarity for m, ms in metric_scores.items()})

    breakdown = {}
    for metric in SCORED_METRICS:
        phi = phis[metric]
        breakdown[metric.value] = {"phi": phi, "weighted": weights.weight(metric) * phi}
    score = min(max(math.fsum(b["weighted"] for b in breakdown.values()), 0.0), 1.0)

    raw = {}
    if diagnostics:
        raw = {m.value: ms.raw_distance for m, ms in metric_scores.items()}
        raw[Metric.DTW.value] = dtw(q.words, s.words)
    return PairScore(
        score=score,
        breakdown=breakdown,
        raw=raw,
        degenerate=metric_scores[Metric.NGRAM].degenerate,
    )


def _query_histogram(q: TokenSequence, idx: MotionIndex, vocab_size: Optional[int]) -> Histogram:
    if vocab_size is not None and vocab_size != idx.K:
        raise ConfigMismatchError(f"query codebook has K={vocab_size}, index uses K={idx.K}")
    if len(q) == 0:
        raise EmptySequenceError(f"query {q.id!r} has no motion words")
    try:
        return build_histogram(q, idx.K)
    except VocabularyOverflowError as e:
        raise ConfigMismatchError(f"query {q.id!r} does not fit the index vocabulary: {e.message}") from e


def _rank(
    q: TokenSequence,
    q_hist: Histogram,
    pool: List[Tuple[IndexEntry, Optional[int], Optional[float]]],
    weights: ScoreWeights,
    params: AlignParams,
    k: int,
    n_jobs: int,
    diagnostics: bool,
) -> List[RankedCandidate]:
    def _score(item):
        entry, sl_rank, cos = item
        ps = score_pair(q, entry.tokens, q_hist, entry.hist, weights, params, hist_score=cos, diagnostics=diagnostics)
        return RankedCandidate(
            candidate_id=entry.id,
            score=ps.score,
            breakdown=ps.breakdown,
            shortlist_rank=sl_rank,
            label=entry.label,
            raw=ps.raw if diagnostics else None,
        )

    scored = parallel_map(_score, pool, n_jobs)
    scored.sort(key=lambda c: (-c.score, c.candidate_id))
    return scored[:k]


def _check_query_args(weights: ScoreWeights, k: int):
    if k < 1:
        raise InvalidInputError(f"k must be at least 1, got {k}")
    if not isinstance(weights, ScoreWeights):
        raise InvalidWeightsError("weights must be a ScoreWeights instance")


def query(
    q: TokenSequence,
    idx: MotionIndex,
    weights: ScoreWeights = ScoreWeights(),
    params: AlignParams = AlignParams(),
    k: int = 10,
    exclude_self: bool = False,
    shortlist_cap: Optional[int] = None,
    vocab_size: Optional[int] = None,
    n_jobs: int = 1,
    diagnostics: bool = False,
) -> RetrievalResult:
    """Stage-1 shortlist, then Stage-2 re-ranking of the shortlist"""
    _check_query_args(weights, k)
    t0 = time.perf_counter()
    q_hist = _query_histogram(q, idx, vocab_size)
    candidates = shortlist(q_hist, idx, cap=shortlist_cap, exclude_id=q.id if exclude_self else None)
    pool = [(idx.get(cid), rank, cos) for rank, (cid, cos) in enumerate(candidates, start=1)]
    t1 = time.perf_counter()
    ranked = _rank(q, q_hist, pool, weights, params, k, n_jobs, diagnostics)
    t2 = time.perf_counter()
    top = ranked[0].score if ranked else 0.0
    logger.debug(f"🔄 Query {q.id!r}: {len(pool)}/{len(idx)} shortlisted, top score {top:.4f}")
    return RetrievalResult(
        query_id=q.id,
        ranked=ranked,
        backend=Backend.TWO_STAGE,
        timing={"stage1_s": t1 - t0, "stage2_s": t2 - t1, "total_s": t2 - t0},
        n_candidates=len(pool),
    )


def query_brute_force(
    q: TokenSequence,
    idx: MotionIndex,
    weights: ScoreWeights = ScoreWeights(),
    params: AlignParams = AlignParams(),
    k: int = 10,
    exclude_self: bool = False,
    shortlist_cap: Optional[int] = None,
    vocab_size: Optional[int] = None,
    n_jobs: int = 1,
    diagnostics: bool = False,
) -> RetrievalResult:
    """Stage-2 scoring over every entry; ``shortlist_cap`` is accepted and ignored"""
    _check_query_args(weights, k)
    t0 = time.perf_counter()
    q_hist = _query_histogram(q, idx, vocab_size)
    cosines = stage1_scores(q_hist, idx)
    pool = [
        (e, None, float(cosines[i]))
        for i, e in enumerate(idx.entries)
        if not (exclude_self and e.id == q.id)
    ]
    ranked = _rank(q, q_hist, pool, weights, params, k, n_jobs, diagnostics)
    t1 = time.perf_counter()
    return RetrievalResult(
        query_id=q.id,
        ranked=ranked,
        backend=Backend.BRUTE_FORCE,
        timing={"stage1_s": 0.0, "stage2_s": t1 - t0, "total_s": t1 - t0},
        n_candidates=len(pool),
    )


def run_query(
    q: TokenSequence,
    idx: MotionIndex,
    cfg: "EngineConfig",
    k: int = 10,
    backend: Backend = Backend.TWO_STAGE,
    vocab_size: Optional[int] = None,
    n_jobs: int = 1,
    diagnostics: bool = False,
) -> RetrievalResult:
    """Dispatch on back-end with weights and parameters taken from an engine config"""
    fn = query if Backend(backend) is Backend.TWO_STAGE else query_brute_force
    return fn(
        q,
        idx,
        weights=cfg.weights,
        params=cfg.align,
        k=k,
        exclude_self=cfg.exclude_self,
        shortlist_cap=cfg.shortlist_cap,
        vocab_size=vocab_size,
        n_jobs=n_jobs,
        diagnostics=diagnostics,
    )
