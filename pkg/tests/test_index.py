'''
Unit tests for the histogram index.

Tests cover:
- Histogram construction and cosine similarity
- The adaptive shortlist size and shortlist ordering
- Autocorrelation and the periodicity flag
- MotionIndex bookkeeping (ids, revisions, cached matrix)
- Stage-1 scan scaling
'''

import math
import time

import numpy as np
import pytest

from motionprint.codebook import TokenSequence
from motionprint.errors import (
    ConfigMismatchError,
    DuplicateIdError,
    EmptySequenceError,
    InvalidInputError,
    UndefinedVarianceError,
    VocabularyOverflowError,
)
from motionprint.index import (
    Histogram,
    IndexEntry,
    MotionIndex,
    PeriodicityConfig,
    autocorrelation,
    build_histogram,
    build_index,
    cosine_sim,
    is_periodic,
    shortlist,
    shortlist_size,
    stage1_scores,
)
from tests.oracles import sorted_scan

# -------------------------------------------------------------------------------------------------
# Fixtures
# -------------------------------------------------------------------------------------------------

ALTERNATING = [0, 1] * 8


def _random_corpus(rng, n, K, max_len=12):
    return [
        TokenSequence(id=f's{i:04d}', words=rng.integers(0, K, size=int(rng.integers(1, max_len + 1))).tolist())
        for i in range(n)
    ]


def _random_histograms(rng, n, K):
    counts = rng.random((n, K))
    return counts / np.linalg.norm(counts, axis=1, keepdims=True)


# -------------------------------------------------------------------------------------------------
# Histograms
# -------------------------------------------------------------------------------------------------


@pytest.mark.unit
class TestHistogram:
    '''Test suite for build_histogram and cosine_sim.'''

    def test_counts_are_normalised(self):
        '''[0, 0, 1] over K=4 is (2, 1, 0, 0) / sqrt(5).'''
        hist = build_histogram(TokenSequence(id='a', words=[0, 0, 1]), 4)
        np.testing.assert_allclose(hist.bins, [2 / math.sqrt(5), 1 / math.sqrt(5), 0.0, 0.0])
        assert hist.source_len == 3
        assert hist.K == 4

    def test_single_word(self):
        '''A constant sequence is a unit basis vector.'''
        hist = build_histogram(TokenSequence(id='a', words=[7] * 5), 10)
        expected = np.zeros(10)
        expected[7] = 1.0
        np.testing.assert_array_equal(hist.bins, expected)

    def test_order_invariance(self, rng):
        '''Permuting words leaves the histogram bitwise unchanged.'''
        words = rng.integers(0, 32, size=40)
        a = build_histogram(TokenSequence(id='a', words=words.tolist()), 32)
        b = build_histogram(TokenSequence(id='b', words=rng.permutation(words).tolist()), 32)
        np.testing.assert_array_equal(a.bins, b.bins)

    def test_errors(self):
        '''Empty input and out-of-vocabulary words are refused.'''
        with pytest.raises(EmptySequenceError):
            build_histogram(TokenSequence(id='a', words=[]), 4)
        with pytest.raises(VocabularyOverflowError):
            build_histogram(TokenSequence(id='a', words=[0, 4]), 4)

    def test_cosine(self):
        '''Counts (2,1,0,0) and (1,2,0,0) give 4/5.'''
        a = build_histogram(TokenSequence(id='a', words=[0, 0, 1]), 4)
        b = build_histogram(TokenSequence(id='b', words=[0, 1, 1]), 4)
        assert cosine_sim(a, b) == pytest.approx(0.8)
        assert cosine_sim(a, b) == cosine_sim(b, a)
        assert cosine_sim(a, a) == pytest.approx(1.0, abs=1e-9)

    def test_cosine_disjoint_and_mismatch(self):
        '''Disjoint supports score 0; different K is a config mismatch.'''
        a = build_histogram(TokenSequence(id='a', words=[0, 1]), 4)
        b = build_histogram(TokenSequence(id='b', words=[2, 3]), 4)
        assert cosine_sim(a, b) == 0.0
        with pytest.raises(ConfigMismatchError):
            cosine_sim(a, build_histogram(TokenSequence(id='c', words=[0]), 5))


# -------------------------------------------------------------------------------------------------
# Shortlists
# -------------------------------------------------------------------------------------------------


@pytest.mark.unit
class TestShortlist:
    '''Test suite for shortlist_size and shortlist.'''

    @pytest.mark.parametrize('N, L', [(10, 10), (200, 200), (1000, 500), (0, 0), (1, 1), (300, 200), (401, 200)])
    def test_shortlist_size(self, N, L):
        '''Half the corpus, at least min(200, N), at most N.'''
        assert shortlist_size(N) == L

    def test_cap(self):
        '''An explicit cap bounds the size; caps below 1 are refused.'''
        assert shortlist_size(1000, cap=200) == 200
        assert shortlist_size(10, cap=50) == 10
        with pytest.raises(InvalidInputError):
            shortlist_size(10, cap=0)

    def test_empty_index(self):
        '''An empty index gives an empty shortlist.'''
        idx = MotionIndex(4)
        assert shortlist(Histogram(bins=np.array([1.0, 0, 0, 0]), source_len=1), idx) == []

    def test_ties_broken_by_id(self):
        '''Equal cosines are ordered by id regardless of insertion order.'''
        idx = build_index(
            [TokenSequence(id=i, words=[1, 2]) for i in ('delta', 'alpha', 'charlie', 'bravo')], 4
        )
        q = build_histogram(TokenSequence(id='q', words=[1, 2]), 4)
        assert [cid for cid, _ in shortlist(q, idx)] == ['alpha', 'bravo', 'charlie', 'delta']

    def test_exclude_self(self, toy_corpus, toy_K):
        '''The query's own entry can be left out.'''
        idx = build_index(toy_corpus, toy_K)
        q = toy_corpus[0]
        ids = [cid for cid, _ in shortlist(build_histogram(q, toy_K), idx, exclude_id=q.id)]
        assert q.id not in ids
        assert len(ids) == len(toy_corpus) - 1

    def test_matches_sorted_scan(self, rng):
        '''The shortlist equals the top-L of a sorted brute-force scan.'''
        for trial in range(200):
            K = int(rng.integers(4, 40))
            n = int(rng.integers(1, 501)) if trial % 20 == 0 else int(rng.integers(1, 120))
            corpus = _random_corpus(rng, n, K, max_len=6)
            idx = build_index(corpus, K)
            q = build_histogram(TokenSequence(id='q', words=rng.integers(0, K, size=5).tolist()), K)
            scores = stage1_scores(q, idx).tolist()
            assert shortlist(q, idx) == sorted_scan(scores, idx.ids, shortlist_size(n))

    def test_scores_are_cosines(self, rng):
        '''Stage-1 scores agree with pairwise cosine_sim.'''
        corpus = _random_corpus(rng, 50, 16)
        idx = build_index(corpus, 16)
        q = build_histogram(corpus[7], 16)
        for entry, score in zip(idx.entries, stage1_scores(q, idx)):
            assert score == pytest.approx(cosine_sim(q, entry.hist), abs=1e-12)

    def test_stage1_scores_in_entry_order(self, toy_corpus, toy_K):
        '''Stage-1 scores line up with the entries and lie in [0, 1].'''
        idx = build_index(toy_corpus, toy_K)
        q = build_histogram(toy_corpus[3], toy_K)
        scores = stage1_scores(q, idx)
        assert scores.shape == (len(toy_corpus),)
        assert scores[3] == pytest.approx(1.0)
        assert np.all((scores >= 0.0) & (scores <= 1.0))


# -------------------------------------------------------------------------------------------------
# Periodicity
# -------------------------------------------------------------------------------------------------


@pytest.mark.unit
class TestPeriodicity:
    '''Test suite for autocorrelation and is_periodic.'''

    def test_alternating_autocorrelation(self):
        '''AC(2) = 14/16 and AC(1) = -15/16 for [0, 1] x 8.'''
        assert autocorrelation(ALTERNATING, 2) == pytest.approx(0.875)
        assert autocorrelation(ALTERNATING, 1) == pytest.approx(-0.9375)

    def test_constant_sequence(self):
        '''Zero variance is undefined for AC and non-periodic for the flag.'''
        with pytest.raises(UndefinedVarianceError):
            autocorrelation([3] * 10, 2)
        assert is_periodic([3] * 10) is False

    def test_lag_range(self):
        '''Lags outside 1..T-1 are refused.'''
        with pytest.raises(InvalidInputError):
            autocorrelation(ALTERNATING, 0)
        with pytest.raises(InvalidInputError):
            autocorrelation(ALTERNATING, 16)

    def test_alternating_is_periodic(self):
        '''Peaks at lags 2, 4 and 6 clear the threshold.'''
        assert is_periodic(ALTERNATING) is True

    def test_peak_count_threshold(self):
        '''Requiring more peaks than exist flips the flag.'''
        assert is_periodic(ALTERNATING, PeriodicityConfig(min_peaks=4)) is False

    def test_short_sequences(self):
        '''Too few lags to hold an interior peak.'''
        assert is_periodic([0, 1]) is False
        assert is_periodic([0, 1, 0, 1, 0]) is False

    def test_random_sequences_are_not_periodic(self):
        '''At least 99 of 100 uniform random sequences are flagged non-periodic.'''
        flags = [is_periodic(np.random.default_rng(seed).integers(0, 512, size=64).tolist()) for seed in range(100)]
        assert sum(flags) <= 1

    def test_autocorrelation_bounded(self, rng):
        '''|AC| never exceeds 1.'''
        for _ in range(200):
            T = int(rng.integers(3, 40))
            words = rng.integers(0, 6, size=T).tolist()
            if len(set(words)) == 1:
                continue
            for tau in range(1, T):
                assert abs(autocorrelation(words, tau)) <= 1.0 + 1e-9

    def test_config_validation(self):
        '''Theta outside (0, 1) and min_peaks below 1 are refused.'''
        with pytest.raises(InvalidInputError):
            PeriodicityConfig(theta=1.0)
        with pytest.raises(InvalidInputError):
            PeriodicityConfig(min_peaks=0)


# -------------------------------------------------------------------------------------------------
# Index bookkeeping
# -------------------------------------------------------------------------------------------------


@pytest.mark.unit
class TestMotionIndex:
    '''Test suite for MotionIndex and build_index.'''

    def test_build(self, toy_corpus, toy_K):
        '''One entry per sequence with labels and flags.'''
        idx = build_index(toy_corpus, toy_K)
        assert len(idx) == 15
        assert idx.ids == [s.id for s in toy_corpus]
        assert idx.get('c1_m2').label == 'class_1'
        assert 'c2_m4' in idx and 'nope' not in idx
        stats = idx.stats()
        assert stats['n_entries'] == 15 and stats['n_labels'] == 3 and stats['K'] == toy_K

    def test_duplicate_id(self, toy_corpus, toy_K):
        '''Ids are unique.'''
        with pytest.raises(DuplicateIdError):
            build_index(toy_corpus + [toy_corpus[0]], toy_K)

    def test_empty_record(self, toy_K):
        '''An empty token list cannot be indexed.'''
        with pytest.raises(EmptySequenceError):
            build_index([TokenSequence(id='a', words=[1]), TokenSequence(id='b', words=[])], toy_K)

    def test_unknown_id(self, toy_corpus, toy_K):
        '''Looking up a missing id is an input error.'''
        with pytest.raises(InvalidInputError):
            build_index(toy_corpus, toy_K).get('missing')

    def test_append_bumps_revision_and_matrix(self, toy_corpus, toy_K):
        '''Appending refreshes the cached matrix on next use.'''
        idx = build_index(toy_corpus[:3], toy_K)
        assert idx.matrix.shape == (3, toy_K)
        rev = idx.revision
        idx.append(toy_corpus[3])
        assert idx.revision == rev + 1
        assert idx.matrix.shape == (4, toy_K)
        np.testing.assert_array_equal(idx.matrix[3], idx.entries[3].hist.bins)

    def test_id_rank(self):
        '''id_rank orders entries by id.'''
        idx = build_index([TokenSequence(id=i, words=[0]) for i in ('b', 'c', 'a')], 2)
        assert idx.id_rank.tolist() == [1, 2, 0]

    def test_periodic_flag_stored(self):
        '''The flag is computed at insertion.'''
        idx = build_index([TokenSequence(id='p', words=ALTERNATING), TokenSequence(id='c', words=[1] * 16)], 2)
        assert idx.get('p').periodic is True
        assert idx.get('c').periodic is False


@pytest.mark.slow
class TestStage1Scaling:
    '''Coarse linearity check of the dense Stage-1 scan.'''

    def test_linear_in_corpus_size(self, rng):
        '''Scanning 10,000 entries costs 7 to 13 times as much as 1,000.'''
        K = 128
        q = Histogram(bins=_random_histograms(rng, 1, K)[0], source_len=1)

        def best_time(n):
            idx = MotionIndex(K)
            for i, bins in enumerate(_random_histograms(rng, n, K)):
                idx.add_entry(IndexEntry(
                    id=f'e{i:05d}',
                    label=None,
                    hist=Histogram(bins=bins, source_len=1),
                    tokens=TokenSequence(id=f'e{i:05d}', words=[0]),
                    periodic=False,
                ))
            stage1_scores(q, idx)
            timings = []
            for _ in range(30):
                start = time.perf_counter()
                for _ in range(10):
                    stage1_scores(q, idx)
                timings.append(time.perf_counter() - start)
            return min(timings)

        ratio = best_time(10_000) / best_time(1_000)
        assert 7.0 <= ratio <= 13.0
