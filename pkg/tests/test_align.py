'''
Unit tests for the alignment metrics.

Tests cover:
- Worked examples for TWED, LCSS, EDR, ERP, DTW and the n-gram similarity
- Exact agreement with brute-force path enumeration on short sequences
- Symmetry, identity, similarity bounds and the ERP triangle inequality
- Parameter validation
'''

import itertools
import math

import numpy as np
import pytest

from motionprint.align import (
    AlignParams,
    Metric,
    alignment_scores,
    dtw,
    edr,
    erp,
    lcss,
    ngram_sim,
    twed,
)
from motionprint.errors import EmptySequenceError, InvalidInputError
from tests.oracles import dtw_oracle, edr_oracle, erp_oracle, lcss_oracle, twed_oracle

# -------------------------------------------------------------------------------------------------
# Fixtures
# -------------------------------------------------------------------------------------------------


def _all_sequences(max_len, alphabet=(0, 1, 2)):
    for n in range(1, max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


SHORT = list(_all_sequences(3))
UP_TO_FOUR = list(_all_sequences(4))


@pytest.fixture
def random_pairs(rng):
    '''Seeded pairs of lengths 5 and 6 over {0, 1, 2}.'''
    pairs = []
    for _ in range(1000):
        n, m = rng.integers(5, 7, size=2)
        pairs.append((tuple(rng.integers(0, 3, size=n).tolist()), tuple(rng.integers(0, 3, size=m).tolist())))
    return pairs


@pytest.fixture
def random_sequences(rng):
    '''Seeded sequences of length 1 to 10 over a 512-word vocabulary.'''
    return [rng.integers(0, 512, size=int(rng.integers(1, 11))).tolist() for _ in range(3000)]


@pytest.fixture
def equal_length_pairs(rng):
    '''Seeded same-length pairs, so argument order reaches the kernels unchanged.'''
    pairs = []
    for _ in range(1000):
        n = int(rng.integers(1, 11))
        pairs.append((rng.integers(0, 512, size=n).tolist(), rng.integers(0, 512, size=n).tolist()))
    return pairs


# -------------------------------------------------------------------------------------------------
# Worked examples
# -------------------------------------------------------------------------------------------------

@pytest.mark.unit
class TestTwed:
    '''Test suite for TWED.'''

    def test_single_mismatch(self):
        '''One substitution costs d(1, 2) plus the sentinel match.'''
        score = twed([1], [2], AlignParams(twed_nu=0.1, twed_lambda=1.0))
        assert score.raw_distance == 1.0
        assert score.similarity == pytest.approx(math.exp(-0.5))
        assert score.metric_name is Metric.TWED

    def test_identity(self):
        '''Equal sequences cost nothing.'''
        score = twed([4, 1, 1, 9], [4, 1, 1, 9])
        assert score.raw_distance == 0.0
        assert score.similarity == 1.0

    def test_unequal_lengths_match_oracle(self):
        '''A 2x1 table agrees with path enumeration.'''
        score = twed([1, 2], [1], AlignParams(twed_nu=0.0, twed_lambda=1.0))
        assert score.raw_distance == pytest.approx(twed_oracle((1, 2), (1,), 0.0, 1.0), abs=1e-12)

    def test_similarity_strictly_positive(self):
        '''Very distant sequences still get a positive similarity.'''
        score = twed([0] * 50, [1] * 3, AlignParams(twed_nu=1e6, twed_lambda=1e6))
        assert 0.0 < score.similarity < 1e-3


@pytest.mark.unit
class TestLcss:
    '''Test suite for LCSS.'''

    def test_shifted_sequences(self):
        '''[1,2,3] and [2,3,4] share two words.'''
        score = lcss([1, 2, 3], [2, 3, 4])
        assert score.raw_distance == 2.0
        assert score.similarity == pytest.approx(2.0 / 3.0)

    def test_identity(self):
        '''A sequence matches itself completely.'''
        score = lcss([5, 6, 5, 6], [5, 6, 5, 6])
        assert score.raw_distance == 4.0
        assert score.similarity == 1.0

    def test_disjoint(self):
        '''Disjoint alphabets share nothing.'''
        score = lcss([1, 2, 3], [7, 8])
        assert score.raw_distance == 0.0
        assert score.similarity == 0.0

    def test_append_same_symbol(self):
        '''Appending one symbol to both sides adds exactly one to the length.'''
        rng = np.random.default_rng(5)
        for _ in range(200):
            a = rng.integers(0, 4, size=int(rng.integers(1, 9))).tolist()
            b = rng.integers(0, 4, size=int(rng.integers(1, 9))).tolist()
            w = int(rng.integers(0, 4))
            assert lcss(a + [w], b + [w]).raw_distance == lcss(a, b).raw_distance + 1.0

    def test_lag_bound(self):
        '''A zero lag bound only matches aligned positions.'''
        score = lcss([1, 2, 3], [2, 3, 1], AlignParams(lcss_delta=0))
        assert score.raw_distance == 0.0


@pytest.mark.unit
class TestEdr:
    '''Test suite for EDR.'''

    def test_single_deletion(self):
        '''Deleting 2 turns [1,2,3] into [1,3].'''
        score = edr([1, 2, 3], [1, 3])
        assert score.raw_distance == 1.0
        assert score.similarity == pytest.approx(2.0 / 3.0)

    def test_identity(self):
        '''Equal sequences need no edits.'''
        score = edr([3, 3, 2], [3, 3, 2])
        assert score.raw_distance == 0.0
        assert score.similarity == 1.0

    def test_single_substitution(self):
        '''A 1x1 substitution costs one edit.'''
        score = edr([1], [2])
        assert score.raw_distance == 1.0
        assert score.similarity == 0.0

    def test_threshold_tolerates_neighbours(self):
        '''With epsilon 1 adjacent IDs count as matches.'''
        assert edr([1, 2, 3], [2, 3, 4], AlignParams(edr_epsilon=1.0)).raw_distance == 0.0


@pytest.mark.unit
class TestErp:
    '''Test suite for ERP.'''

    def test_identity(self):
        '''Equal sequences cost nothing.'''
        score = erp([8, 2, 2], [8, 2, 2])
        assert score.raw_distance == 0.0
        assert score.similarity == 1.0

    def test_single_pair(self):
        '''Matching 1 with 2 beats two gaps of 0.5 and 1.'''
        score = erp([1], [2])
        assert score.raw_distance == 1.0
        assert score.similarity == pytest.approx(math.exp(-1.0))

    def test_gap_against_oracle(self):
        '''[1,2] against [1,2,3] equals the enumerated minimum.'''
        score = erp([1, 2], [1, 2, 3])
        assert score.raw_distance == pytest.approx(erp_oracle((1, 2), (1, 2, 3)), abs=1e-9)
        assert score.raw_distance == 1.5

    def test_similarity_strictly_positive(self):
        '''Large ID gaps still give a positive similarity.'''
        score = erp([0], [10 ** 6])
        assert score.similarity > 0.0


@pytest.mark.unit
class TestDtw:
    '''Test suite for DTW.'''

    def test_identity(self):
        '''A diagonal of matches costs nothing.'''
        assert dtw([2, 0, 1], [2, 0, 1]) == 0.0

    def test_warping(self):
        '''Both 1s map onto the single 1.'''
        assert dtw([1, 1], [1]) == 0.0

    def test_single_mismatch(self):
        '''One mismatched cell costs one.'''
        assert dtw([0], [1]) == 1.0


@pytest.mark.unit
class TestNgram:
    '''Test suite for the n-gram similarity.'''

    def test_identity(self):
        '''Identical bigram profiles score 1.'''
        assert ngram_sim([1, 2, 1, 2], [1, 2, 1, 2]).similarity == pytest.approx(1.0)

    def test_shared_bigram(self):
        '''One shared bigram out of two on each side gives 0.5.'''
        score = ngram_sim([1, 2, 3], [2, 3, 4], n=2)
        assert score.similarity == pytest.approx(0.5)
        assert not score.degenerate

    def test_no_shared_ngram(self):
        '''Orthogonal profiles score 0.'''
        assert ngram_sim([1, 2, 3], [3, 2, 1]).similarity == 0.0

    def test_short_sequence_is_degenerate(self):
        '''A sequence shorter than n scores 0 with a flag rather than raising.'''
        score = ngram_sim([1], [1, 2, 3])
        assert score.similarity == 0.0
        assert score.degenerate

    def test_rejects_small_n(self):
        '''n below 2 is refused.'''
        with pytest.raises(InvalidInputError):
            ngram_sim([1, 2], [1, 2], n=1)


@pytest.mark.unit
class TestInputs:
    '''Test suite for shared input handling.'''

    @pytest.mark.parametrize('metric', [twed, lcss, edr, erp, dtw])
    def test_empty_sequence(self, metric):
        '''Every DP metric refuses empty input.'''
        with pytest.raises(EmptySequenceError):
            metric([], [1, 2])
        with pytest.raises(EmptySequenceError):
            metric([1], [])

    def test_param_validation(self):
        '''Negative stiffness, non-positive beta and n < 2 are refused.'''
        with pytest.raises(InvalidInputError):
            AlignParams(twed_nu=-0.1)
        with pytest.raises(InvalidInputError):
            AlignParams(erp_beta=0.0)
        with pytest.raises(InvalidInputError):
            AlignParams(ngram_n=1)

    def test_params_from_dict(self):
        '''Known keys load and unknown keys are refused.'''
        assert AlignParams.from_dict({'twed_nu': 0.5}).twed_nu == 0.5
        with pytest.raises(InvalidInputError):
            AlignParams.from_dict({'twed_mu': 0.5})

    def test_alignment_scores_cover_scored_metrics(self):
        '''DTW is never part of the scored set.'''
        scores = alignment_scores([1, 2, 3], [1, 2])
        assert set(scores) == {Metric.TWED, Metric.LCSS, Metric.EDR, Metric.ERP, Metric.NGRAM}


# -------------------------------------------------------------------------------------------------
# Oracle equivalence
# -------------------------------------------------------------------------------------------------

@pytest.mark.unit
class TestOracleEquivalence:
    '''Exhaustive agreement with path enumeration over {0, 1, 2}.'''

    def test_short_pairs_exhaustive(self):
        '''Every pair of length at most 3 matches the enumerators.'''
        params = AlignParams()
        for x in SHORT:
            for y in SHORT:
                assert dtw(x, y) == dtw_oracle(x, y)
                assert edr(x, y).raw_distance == edr_oracle(x, y)
                assert lcss(x, y).raw_distance == lcss_oracle(x, y)
                assert erp(x, y).raw_distance == pytest.approx(erp_oracle(x, y), abs=1e-9)
                assert twed(x, y, params).raw_distance == pytest.approx(
                    twed_oracle(x, y, params.twed_nu, params.twed_lambda), abs=1e-9
                )

    @pytest.mark.slow
    def test_pairs_up_to_four_exhaustive(self):
        '''Every pair of length at most 4 matches the enumerators.'''
        params = AlignParams(twed_nu=0.25, twed_lambda=0.5)
        for x in UP_TO_FOUR:
            for y in UP_TO_FOUR:
                assert dtw(x, y) == dtw_oracle(x, y)
                assert edr(x, y).raw_distance == edr_oracle(x, y)
                assert lcss(x, y).raw_distance == lcss_oracle(x, y)
                assert erp(x, y).raw_distance == pytest.approx(erp_oracle(x, y), abs=1e-9)
                assert twed(x, y, params).raw_distance == pytest.approx(twed_oracle(x, y, 0.25, 0.5), abs=1e-9)

    @pytest.mark.slow
    def test_longer_pairs(self, random_pairs):
        '''Seeded pairs of length 5 and 6 match the enumerators.'''
        params = AlignParams(twed_nu=0.25, twed_lambda=0.5)
        for x, y in random_pairs:
            assert dtw(x, y) == dtw_oracle(x, y)
            assert edr(x, y).raw_distance == edr_oracle(x, y)
            assert lcss(x, y).raw_distance == lcss_oracle(x, y)
            assert erp(x, y).raw_distance == pytest.approx(erp_oracle(x, y), abs=1e-9)
            assert twed(x, y, params).raw_distance == pytest.approx(twed_oracle(x, y, 0.25, 0.5), abs=1e-9)


# -------------------------------------------------------------------------------------------------
# Metric properties
# -------------------------------------------------------------------------------------------------

@pytest.mark.unit
class TestMetricProperties:
    '''Symmetry, identity, bounds and the ERP triangle inequality.'''

    def test_symmetry(self, equal_length_pairs):
        '''Swapping same-length arguments never changes a distance.'''
        for a, b in equal_length_pairs:
            assert dtw(a, b) == dtw(b, a)
            for metric in (twed, lcss, edr, erp):
                assert metric(a, b).raw_distance == metric(b, a).raw_distance

    def test_identity(self, random_sequences):
        '''Every metric reaches its best value on equal inputs.'''
        for a in random_sequences[:300]:
            assert dtw(a, a) == 0.0
            assert twed(a, a).similarity == 1.0
            assert lcss(a, a).similarity == 1.0
            assert edr(a, a).similarity == 1.0
            assert erp(a, a).similarity == 1.0

    def test_similarity_bounds(self, random_sequences):
        '''All similarities lie in [0, 1]; TWED and ERP stay positive.'''
        for a, b in zip(random_sequences[0:1000], random_sequences[1000:2000]):
            for score in alignment_scores(a, b).values():
                assert 0.0 <= score.similarity <= 1.0
            assert twed(a, b).similarity > 0.0
            assert erp(a, b).similarity > 0.0

    def test_erp_triangle_inequality(self, random_sequences):
        '''ERP(a, c) never exceeds ERP(a, b) + ERP(b, c).'''
        triples = zip(random_sequences[0:1000], random_sequences[1000:2000], random_sequences[2000:3000])
        for a, b, c in triples:
            lhs = erp(a, c).raw_distance
            rhs = erp(a, b).raw_distance + erp(b, c).raw_distance
            assert lhs <= rhs + 1e-9
