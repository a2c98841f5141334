"""
Histogram Index

Stage 1 of retrieval: bag-of-words histograms over motion words, cosine shortlists with
an adaptive size, and an autocorrelation periodicity flag stored as entry metadata.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from motionprint.codebook import TokenSequence
from motionprint.errors import (
    ConfigMismatchError,
    DuplicateIdError,
    EmptySequenceError,
    InvalidInputError,
    UndefinedVarianceError,
    VocabularyOverflowError,
)

logger = logging.getLogger(__name__)

INDEX_VERSION = 1


@dataclass
class Histogram:
    bins: np.ndarray
    source_len: int

    @property
    def K(self) -> int:
        return self.bins.shape[0]


@dataclass(frozen=True)
class PeriodicityConfig:
    """Peak threshold, required peak count and largest lag (None means half the length)"""

    theta: float = 0.6
    min_peaks: int = 2
    max_lag: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise InvalidInputError(f"theta must lie in (0, 1), got {self.theta}")
        if self.min_peaks < 1:
            raise InvalidInputError("min_peaks must be at least 1")
        if self.max_lag is not None and self.max_lag < 1:
            raise InvalidInputError("max_lag must be at least 1")

    def to_dict(self) -> Dict[str, Any]:
        return {"theta": self.theta, "min_peaks": self.min_peaks, "max_lag": self.max_lag}


@dataclass
class IndexEntry:
    id: str
    label: Optional[str]
    hist: Histogram
    tokens: TokenSequence
    periodic: bool


# -------------------------------------------------------------------------------------------------
# Histograms and shortlists
# -------------------------------------------------------------------------------------------------

def build_histogram(seq: TokenSequence, K: int) -> Histogram:
    """ℓ2-normalised word counts"""
    words = np.asarray(getattr(seq, "words", seq), dtype=np.int64)
    if words.size == 0:
        raise EmptySequenceError(f"sequence {getattr(seq, 'id', '?')!r} has no motion words")
    if words.max() >= K:
        raise VocabularyOverflowError(
            f"sequence {getattr(seq, 'id', '?')!r} uses word {int(words.max())}, vocabulary size is {K}"
        )
    counts = np.bincount(words, minlength=K).astype(np.float64)
    return Histogram(bins=counts / np.linalg.norm(counts), source_len=int(words.size))


def cosine_sim(a: Histogram, b: Histogram) -> float:
    if a.K != b.K:
        raise ConfigMismatchError(f"histogram sizes differ: {a.K} vs {b.K}")
    return min(max(float(np.dot(a.bins, b.bins)), 0.0), 1.0)


def shortlist_size(N: int, cap: Optional[int] = None) -> int:
    """Half the corpus, but at least min(200, N); never more than N or the optional cap"""
    if N < 0:
        raise InvalidInputError("N must be non-negative")
    L = min(max(N // 2, min(200, N)), N)
    if cap is not None:
        if cap < 1:
            raise InvalidInputError("shortlist cap must be at least 1")
        L = min(L, cap)
    return L


# -------------------------------------------------------------------------------------------------
# Periodicity
# -------------------------------------------------------------------------------------------------

def _autocorrelation_curve(words) -> np.ndarray:
    """AC(τ) for τ = 0..T-1, or raises for constant input"""
    x = np.asarray(words, dtype=np.float64)
    dev = x - x.mean()
    denom = float(np.dot(dev, dev))
    if not denom > 0.0:
        raise UndefinedVarianceError("autocorrelation of a constant sequence is undefined")
    T = x.shape[0]
    return np.correlate(dev, dev, mode="full")[T - 1:] / denom


def autocorrelation(words, tau: int) -> float:
    T = len(words)
    if not 1 <= tau < T:
        raise InvalidInputError(f"lag must satisfy 1 <= tau < {T}, got {tau}")
    return float(_autocorrelation_curve(words)[tau])


def is_periodic(words, cfg: PeriodicityConfig = PeriodicityConfig()) -> bool:
    T = len(words)
    if T < 3:
        return False
    try:
        ac = _autocorrelation_curve(words)
    except UndefinedVarianceError:
        return False
    max_lag = min(cfg.max_lag if cfg.max_lag is not None else T // 2, T - 1)
    if max_lag < 3:
        return False
    # interior lags only: 1 and max_lag never count as peaks
    lags = np.arange(2, max_lag)
    peaks = (ac[lags] > ac[lags - 1]) & (ac[lags] > ac[lags + 1]) & (ac[lags] > cfg.theta)
    return int(peaks.sum()) >= cfg.min_peaks


# -------------------------------------------------------------------------------------------------
# Index
# -------------------------------------------------------------------------------------------------

class MotionIndex:
    """
    Searchable corpus of token sequences

    Holds the stacked histogram matrix for Stage-1 scans; it is rebuilt lazily when the
    revision counter moves past the cached one.
    """

    def __init__(self, K: int, entries: Optional[List[IndexEntry]] = None, version: int = INDEX_VERSION):
        if K < 1:
            raise InvalidInputError("K must be positive")
        self.K = int(K)
        self.version = version
        self.entries: List[IndexEntry] = []
        self.revision = 0
        self._by_id: Dict[str, int] = {}
        self._cache_rev = -1
        self._matrix = np.zeros((0, self.K))
        self._id_rank = np.zeros(0, dtype=np.int64)
        for entry in entries or []:
            self.add_entry(entry)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, seq_id: str) -> bool:
        return seq_id in self._by_id

    @property
    def ids(self) -> List[str]:
        return [e.id for e in self.entries]

    def position(self, seq_id: str) -> int:
        try:
            return self._by_id[seq_id]
        except KeyError:
            raise InvalidInputError(f"id {seq_id!r} is not in the index") from None

    def get(self, seq_id: str) -> IndexEntry:
        return self.entries[self.position(seq_id)]

    def add_entry(self, entry: IndexEntry):
        if entry.id in self._by_id:
            raise DuplicateIdError(f"id {entry.id!r} already in the index")
        if entry.hist.K != self.K:
            raise ConfigMismatchError(f"entry {entry.id!r} has K={entry.hist.K}, index uses {self.K}")
        self._by_id[entry.id] = len(self.entries)
        self.entries.append(entry)
        self.revision += 1

    def append(self, seq: TokenSequence, pcfg: PeriodicityConfig = PeriodicityConfig()) -> IndexEntry:
        entry = IndexEntry(
            id=seq.id,
            label=seq.label,
            hist=build_histogram(seq, self.K),
            tokens=seq,
            periodic=is_periodic(seq.words, pcfg),
        )
        self.add_entry(entry)
        return entry

    def _refresh(self):
        if self._cache_rev == self.revision:
            return
        if self.entries:
            self._matrix = np.vstack([e.hist.bins for e in self.entries])
        else:
            self._matrix = np.zeros((0, self.K))
        order = sorted(range(len(self.entries)), key=lambda i: self.entries[i].id)
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        self._id_rank = rank
        self._cache_rev = self.revision

    @property
    def matrix(self) -> np.ndarray:
        self._refresh()
        return self._matrix

    @property
    def id_rank(self) -> np.ndarray:
        self._refresh()
        return self._id_rank

    def stats(self) -> Dict[str, Any]:
        lengths = [e.hist.source_len for e in self.entries]
        return {
            "K": self.K,
            "n_entries": len(self.entries),
            "n_periodic": sum(e.periodic for e in self.entries),
            "n_labels": len({e.label for e in self.entries if e.label is not None}),
            "mean_length": float(np.mean(lengths)) if lengths else 0.0,
            "revision": self.revision,
        }


def build_index(
    tokens: Iterable[TokenSequence], K: int, pcfg: PeriodicityConfig = PeriodicityConfig()
) -> MotionIndex:
    tokens = list(tokens)
    if not tokens:
        raise InvalidInputError("no token sequences to index")
    idx = MotionIndex(K)
    for seq in tokens:
        idx.append(seq, pcfg)
    logger.info(
        f"✅ Indexed {len(idx)} sequences (K={K}, {sum(e.periodic for e in idx.entries)} periodic)"
    )
    return idx


def stage1_scores(query_hist: Histogram, idx: MotionIndex) -> np.ndarray:
    """Cosine of the query against every entry, in entry order"""
    if query_hist.K != idx.K:
        raise ConfigMismatchError(f"query histogram has K={query_hist.K}, index uses {idx.K}")
    return np.clip(idx.matrix @ query_hist.bins, 0.0, 1.0)


def shortlist(
    query_hist: Histogram,
    idx: MotionIndex,
    cap: Optional[int] = None,
    exclude_id: Optional[str] = None,
) -> List[Tuple[str, float]]:
    """Top-L entries by cosine score, ties broken by id"""
    if query_hist.K != idx.K:
        raise ConfigMismatchError(f"query histogram has K={query_hist.K}, index uses {idx.K}")
    if len(idx) == 0:
        return []
    scores = stage1_scores(query_hist, idx)
    rank = idx.id_rank
    keep = np.ones(len(idx), dtype=bool)
    if exclude_id is not None and exclude_id in idx:
        keep[idx.position(exclude_id)] = False
    pool = np.flatnonzero(keep)
    L = shortlist_size(pool.size, cap)
    order = pool[np.lexsort((rank[pool], -scores[pool]))][:L]
    return [(idx.entries[i].id, float(scores[i])) for i in order]
