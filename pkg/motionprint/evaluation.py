"""
Evaluation Harness

Leave-one-out and leave-K-out retrieval protocols with rank-weighted scoring.
A query's score depends on the best rank of any same-label candidate within the
top-n list: 1.0, 0.5 and 0.25 for ranks 1 to 3, and 0 beyond or when absent.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from motionprint.codebook import TokenSequence
from motionprint.config import EngineConfig
from motionprint.engine import Backend, run_query
from motionprint.errors import DuplicateIdError, EmptyProtocolError, InvalidInputError
from motionprint.index import build_index
from motionprint.parallel import parallel_map

logger = logging.getLogger(__name__)

RANK_WEIGHTS = {1: 1.0, 2: 0.5, 3: 0.25}
RANK_BUCKETS = ("1", "2", "3", ">3")


def rank_score(best_rank: Optional[int]) -> float:
    if best_rank is None:
        return 0.0
    if best_rank < 1:
        raise InvalidInputError(f"ranks start at 1, got {best_rank}")
    return RANK_WEIGHTS.get(best_rank, 0.0)


def _bucket(best_rank: Optional[int]) -> str:
    return str(best_rank) if best_rank is not None and best_rank <= 3 else ">3"


def score_from_histogram(hist: Dict[str, int]) -> float:
    n = sum(hist.values())
    if n == 0:
        return 0.0
    return (1.0 * hist["1"] + 0.5 * hist["2"] + 0.25 * hist["3"]) / n


@dataclass(frozen=True)
class EvalProtocol:
    """
    leave_k_out = 1 queries every member against all others (self excluded).
    leave_k_out = K >= 2 keeps K seeded members per class as the reference database
    and queries with the remaining members.
    """

    leave_k_out: int = 1
    top_n: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.leave_k_out < 1:
            raise InvalidInputError("leave_k_out must be at least 1")
        if not 1 <= self.top_n <= 3:
            raise InvalidInputError(f"top_n must be 1, 2 or 3, got {self.top_n}")


@dataclass
class EvalReport:
    mean_score: float
    match_rate_pct: float
    rank1_pct: float
    rank_histogram: Dict[str, int]
    per_class: Dict[str, Dict[str, float]]
    n_queries: int
    backend: Backend
    protocol: EvalProtocol = field(default_factory=EvalProtocol)
    rows: pd.DataFrame = field(default_factory=pd.DataFrame, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "backend": Backend(self.backend).value,
            "n_queries": self.n_queries,
            "mean_score": self.mean_score,
            "match_rate_pct": self.match_rate_pct,
            "rank1_pct": self.rank1_pct,
            "rank_histogram": dict(self.rank_histogram),
            "protocol": {
                "leave_k_out": self.protocol.leave_k_out,
                "top_n": self.protocol.top_n,
                "seed": self.protocol.seed,
            },
            "per_class": {label: dict(stats) for label, stats in sorted(self.per_class.items())},
        }

    def per_class_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame.from_dict(self.per_class, orient="index")
        frame.index.name = "label"
        return frame.sort_index()


# -------------------------------------------------------------------------------------------------
# Protocol split
# -------------------------------------------------------------------------------------------------

def _usable_classes(db: List[TokenSequence], min_members: int) -> Dict[str, List[TokenSequence]]:
    seen = set()
    groups: Dict[str, List[TokenSequence]] = defaultdict(list)
    n_unlabeled = 0
    for seq in db:
        if seq.id in seen:
            raise DuplicateIdError(f"id {seq.id!r} appears twice in the evaluation corpus")
        seen.add(seq.id)
        if seq.label is None:
            n_unlabeled += 1
            continue
        groups[seq.label].append(seq)
    if n_unlabeled:
        logger.warning(f"⚠️ Skipping {n_unlabeled} unlabeled sequences")

    usable = {}
    for label in sorted(groups):
        members = sorted(groups[label], key=lambda s: s.id)
        if len(members) < min_members:
            logger.warning(f"⚠️ Filtering class {label!r}: {len(members)} members, protocol needs {min_members}")
            continue
        usable[label] = members
    return usable


def split_protocol(
    db: List[TokenSequence], protocol: EvalProtocol
) -> Tuple[List[TokenSequence], List[TokenSequence]]:
    """(reference database, queries) for a protocol; deterministic and order-independent"""
    k = protocol.leave_k_out
    classes = _usable_classes(db, min_members=2 if k == 1 else k + 1)
    if k == 1:
        members = [s for label in classes for s in classes[label]]
        return members, list(members)

    rng = np.random.default_rng(protocol.seed)
    refs, queries = [], []
    for label, members in classes.items():
        chosen = set(rng.choice(len(members), size=k, replace=False).tolist())
        for i, seq in enumerate(members):
            (refs if i in chosen else queries).append(seq)
    return refs, queries


def best_rank(ranked_labels: List[Optional[str]], label: str) -> Optional[int]:
    for position, candidate_label in enumerate(ranked_labels, start=1):
        if candidate_label == label:
            return position
    return None


# -------------------------------------------------------------------------------------------------
# Evaluation
# -------------------------------------------------------------------------------------------------

def evaluate(
    db: List[TokenSequence],
    cfg: EngineConfig = EngineConfig(),
    protocol: EvalProtocol = EvalProtocol(),
    backend: Backend = Backend.TWO_STAGE,
    K: Optional[int] = None,
    n_jobs: int = 1,
) -> EvalReport:
    """
    Run one protocol with one back-end

    K defaults to one more than the largest word in the corpus.
    """
    backend = Backend(backend)
    refs, queries = split_protocol(db, protocol)
    if not queries:
        raise EmptyProtocolError("no class has enough labeled members for this protocol")
    if K is None:
        K = 1 + max(max(s.words) for s in db if s.words)
    index = build_index(refs, K, cfg.periodicity)
    # leave-one-out always drops the query from its own candidate list
    run_cfg = replace(cfg, exclude_self=True) if protocol.leave_k_out == 1 else cfg

    def _one(q: TokenSequence):
        result = run_query(q, index, run_cfg, k=protocol.top_n, backend=backend)
        return q, result

    logger.info(f"🔄 Evaluating {len(queries)} queries against {len(index)} references ({backend.value})")
    outcomes = parallel_map(_one, queries, n_jobs)

    hist = {bucket: 0 for bucket in RANK_BUCKETS}
    per_class_hist: Dict[str, Dict[str, int]] = defaultdict(lambda: {b: 0 for b in RANK_BUCKETS})
    rows = []
    for q, result in outcomes:
        rank = best_rank([c.label for c in result.ranked], q.label)
        bucket = _bucket(rank)
        hist[bucket] += 1
        per_class_hist[q.label][bucket] += 1
        rows.append({
            "query_id": q.id,
            "label": q.label,
            "best_rank": rank,
            "score": rank_score(rank),
            "top_ids": " ".join(result.ids),
            "top_score": result.ranked[0].score if result.ranked else 0.0,
        })

    n = len(queries)
    per_class = {}
    for label, counts in sorted(per_class_hist.items()):
        n_c = sum(counts.values())
        per_class[label] = {
            "n_queries": n_c,
            "mean_score": score_from_histogram(counts),
            "match_rate_pct": 100.0 * (counts["1"] + counts["2"] + counts["3"]) / n_c,
        }

    frame = pd.DataFrame(rows, columns=["query_id", "label", "best_rank", "score", "top_ids", "top_score"])
    frame["best_rank"] = frame["best_rank"].astype("Int64")
    report = EvalReport(
        mean_score=score_from_histogram(hist),
        match_rate_pct=100.0 * (hist["1"] + hist["2"] + hist["3"]) / n,
        rank1_pct=100.0 * hist["1"] / n,
        rank_histogram=hist,
        per_class=per_class,
        n_queries=n,
        backend=backend,
        protocol=protocol,
        rows=frame.sort_values("query_id", kind="mergesort").reset_index(drop=True),
    )
    logger.info(
        f"✅ {backend.value}: mean score {report.mean_score:.4f}, match rate {report.match_rate_pct:.1f}%, "
        f"rank-1 {report.rank1_pct:.1f}%"
    )
    return report
