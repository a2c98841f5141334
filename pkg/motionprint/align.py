"""
Alignment Metrics

Edit-distance family metrics over motion-word sequences: TWED, LCSS, EDR, ERP, DTW
and an n-gram profile similarity. Each metric returns its raw recursion value and a
similarity normalised to [0, 1].

Timestamps are patch indices (t_i = i). Token IDs are compared as numbers wherever a
recursion calls for |a - b|; with the default epsilon and gap values only ERP is
sensitive to ID magnitude.
"""

import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
from numba import njit

from motionprint.errors import EmptySequenceError, InvalidInputError, as_number

logger = logging.getLogger(__name__)

_TINY = np.finfo(np.float64).tiny


class Metric(str, Enum):
    HIST = "hist"
    TWED = "twed"
    LCSS = "lcss"
    EDR = "edr"
    ERP = "erp"
    NGRAM = "ngram"
    DTW = "dtw"


@dataclass(frozen=True)
class AlignParams:
    """
    Metric parameters

    ``lcss_delta`` of None means no lag bound.
    """

    twed_nu: float = 0.1
    twed_lambda: float = 1.0
    lcss_epsilon: float = 0.0
    lcss_delta: Optional[int] = None
    edr_epsilon: float = 0.0
    erp_gap: float = 0.0
    erp_beta: float = 0.5
    ngram_n: int = 2

    def __post_init__(self):
        if self.twed_nu < 0 or self.twed_lambda < 0:
            raise InvalidInputError("twed_nu and twed_lambda must be non-negative")
        if self.lcss_epsilon < 0 or self.edr_epsilon < 0:
            raise InvalidInputError("matching thresholds must be non-negative")
        if self.lcss_delta is not None and self.lcss_delta < 0:
            raise InvalidInputError("lcss_delta must be non-negative")
        if not self.erp_beta > 0:
            raise InvalidInputError("erp_beta must be positive")
        if self.ngram_n < 2:
            raise InvalidInputError("ngram_n must be at least 2")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AlignParams":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            raise InvalidInputError(f"unknown align parameters: {sorted(unknown)}")
        integers = {"lcss_delta", "ngram_n"}
        return cls(**{
            k: as_number(k, v, integer=k in integers, optional=k == "lcss_delta") for k, v in known.items()
        })


@dataclass
class MetricScore:
    """
    One metric's outcome for a pair

    ``raw_distance`` holds the recursion's final value, which for LCSS is the
    subsequence length. ``degenerate`` marks n-gram scores of sequences shorter than n.
    """

    metric_name: Metric
    raw_distance: float
    similarity: float
    degenerate: bool = False


Words = Union[Sequence[int], np.ndarray]


# -------------------------------------------------------------------------------------------------
# DP kernels (two rows, inner loop over the shorter sequence)
# -------------------------------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _twed_kernel(x, y, nu, lam):
    n = x.shape[0]
    m = y.shape[0]
    prev = np.full(m + 1, np.inf)
    cur = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur[0] = np.inf
        xi = x[i - 1]
        xp = x[i - 2] if i > 1 else 0.0
        for j in range(1, m + 1):
            yj = y[j - 1]
            yp = y[j - 2] if j > 1 else 0.0
            d_now = 0.0 if xi == yj else 1.0
            d_before = 0.0 if xp == yp else 1.0
            stiff = nu * abs(i - j)
            best = prev[j - 1] + d_now + d_before + stiff
            cand = prev[j] + d_now + stiff + lam
            if cand < best:
                best = cand
            cand = cur[j - 1] + d_now + stiff + lam
            if cand < best:
                best = cand
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True, nogil=True)
def _lcss_kernel(x, y, eps, delta):
    n = x.shape[0]
    m = y.shape[0]
    prev = np.zeros(m + 1)
    cur = np.zeros(m + 1)
    for i in range(1, n + 1):
        cur[0] = 0.0
        for j in range(1, m + 1):
            if abs(x[i - 1] - y[j - 1]) <= eps and abs(i - j) <= delta:
                cur[j] = prev[j - 1] + 1.0
            elif prev[j] >= cur[j - 1]:
                cur[j] = prev[j]
            else:
                cur[j] = cur[j - 1]
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True, nogil=True)
def _edr_kernel(x, y, eps):
    n = x.shape[0]
    m = y.shape[0]
    prev = np.arange(m + 1).astype(np.float64)
    cur = np.zeros(m + 1)
    for i in range(1, n + 1):
        cur[0] = float(i)
        for j in range(1, m + 1):
            cost = 0.0 if abs(x[i - 1] - y[j - 1]) <= eps else 1.0
            best = prev[j - 1] + cost
            if prev[j] + 1.0 < best:
                best = prev[j] + 1.0
            if cur[j - 1] + 1.0 < best:
                best = cur[j - 1] + 1.0
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True, nogil=True)
def _erp_kernel(x, y, g, beta):
    n = x.shape[0]
    m = y.shape[0]
    prev = np.zeros(m + 1)
    cur = np.zeros(m + 1)
    for j in range(1, m + 1):
        prev[j] = prev[j - 1] + beta * abs(y[j - 1] - g)
    for i in range(1, n + 1):
        gap_x = beta * abs(x[i - 1] - g)
        cur[0] = prev[0] + gap_x
        for j in range(1, m + 1):
            best = prev[j - 1] + abs(x[i - 1] - y[j - 1])
            cand = prev[j] + gap_x
            if cand < best:
                best = cand
            cand = cur[j - 1] + beta * abs(y[j - 1] - g)
            if cand < best:
                best = cand
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True, nogil=True)
def _dtw_kernel(x, y):
    n = x.shape[0]
    m = y.shape[0]
    prev = np.full(m + 1, np.inf)
    cur = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur[0] = np.inf
        for j in range(1, m + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = (0.0 if x[i - 1] == y[j - 1] else 1.0) + best
        prev, cur = cur, prev
    return prev[m]


# -------------------------------------------------------------------------------------------------
# Public metrics
# -------------------------------------------------------------------------------------------------

def as_words(seq: Words) -> np.ndarray:
    """Float64 view of a word sequence, rejecting empty input"""
    words = getattr(seq, "words", seq)
    arr = np.asarray(words, dtype=np.float64).reshape(-1)
    if arr.shape[0] == 0:
        raise EmptySequenceError("alignment metrics need non-empty sequences")
    return arr


def _ordered(x: np.ndarray, y: np.ndarray):
    # every metric here is symmetric, so the shorter sequence can go in the inner loop
    return (x, y) if x.shape[0] >= y.shape[0] else (y, x)


def _mean_len(x: np.ndarray, y: np.ndarray) -> float:
    return 0.5 * (x.shape[0] + y.shape[0])


def twed(q: Words, s: Words, params: AlignParams = AlignParams()) -> MetricScore:
    x, y = _ordered(as_words(q), as_words(s))
    dist = float(_twed_kernel(x, y, float(params.twed_nu), float(params.twed_lambda)))
    sim = max(math.exp(-dist / (2.0 * _mean_len(x, y))), _TINY)
    return MetricScore(Metric.TWED, dist, sim)


def lcss(q: Words, s: Words, params: AlignParams = AlignParams()) -> MetricScore:
    x, y = _ordered(as_words(q), as_words(s))
    delta = np.inf if params.lcss_delta is None else float(params.lcss_delta)
    length = float(_lcss_kernel(x, y, float(params.lcss_epsilon), delta))
    sim = min(max(length / _mean_len(x, y), 0.0), 1.0)
    return MetricScore(Metric.LCSS, length, sim)


def edr(q: Words, s: Words, params: AlignParams = AlignParams()) -> MetricScore:
    x, y = _ordered(as_words(q), as_words(s))
    dist = float(_edr_kernel(x, y, float(params.edr_epsilon)))
    sim = min(max(1.0 - dist / max(x.shape[0], y.shape[0]), 0.0), 1.0)
    return MetricScore(Metric.EDR, dist, sim)


def erp(q: Words, s: Words, params: AlignParams = AlignParams()) -> MetricScore:
    x, y = _ordered(as_words(q), as_words(s))
    dist = float(_erp_kernel(x, y, float(params.erp_gap), float(params.erp_beta)))
    sim = max(math.exp(-dist / _mean_len(x, y)), _TINY)
    return MetricScore(Metric.ERP, dist, sim)


def dtw(q: Words, s: Words) -> float:
    """Raw DTW distance; reported as a diagnostic, never scored"""
    x, y = _ordered(as_words(q), as_words(s))
    return float(_dtw_kernel(x, y))


def ngram_profile(words: Words, n: int) -> Counter:
    seq = [int(w) for w in getattr(words, "words", words)]
    return Counter(zip(*(seq[i:] for i in range(n))))


def profile_similarity(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(count * b.get(gram, 0) for gram, count in a.items())
    norm = math.sqrt(sum(c * c for c in a.values())) * math.sqrt(sum(c * c for c in b.values()))
    return min(max(dot / norm, 0.0), 1.0)


def ngram_sim(q: Words, s: Words, n: int = 2) -> MetricScore:
    """Cosine similarity of n-gram count vectors; sequences shorter than n score 0"""
    if n < 2:
        raise InvalidInputError("n must be at least 2")
    qa = getattr(q, "words", q)
    sa = getattr(s, "words", s)
    if len(qa) < n or len(sa) < n:
        logger.debug(f"⚠️ n-gram similarity undefined for lengths {len(qa)}, {len(sa)} with n={n}")
        return MetricScore(Metric.NGRAM, 1.0, 0.0, degenerate=True)
    sim = profile_similarity(ngram_profile(qa, n), ngram_profile(sa, n))
    return MetricScore(Metric.NGRAM, 1.0 - sim, sim)


def alignment_scores(q: Words, s: Words, params: AlignParams = AlignParams()) -> Dict[Metric, MetricScore]:
    """Every scored alignment metric for one pair"""
    return {
        Metric.TWED: twed(q, s, params),
        Metric.LCSS: lcss(q, s, params),
        Metric.EDR: edr(q, s, params),
        Metric.ERP: erp(q, s, params),
        Metric.NGRAM: ngram_sim(q, s, params.ngram_n),
    }
