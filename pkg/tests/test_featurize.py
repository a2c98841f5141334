'''
Unit tests for pose featurisation.

Tests cover:
- Pairwise joint distances and their pair order
- Patch counting and slicing
- Rotation, translation and scale invariance
- Input validation
'''

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from motionprint.errors import (
    DegeneratePoseError,
    InvalidInputError,
    SequenceTooShortError,
)
from motionprint.featurize import (
    FeaturizerConfig,
    PoseSequence,
    feature_dim,
    feature_header,
    featurize_corpus,
    featurize_matrix,
    featurize_sequence,
    joint_pairs,
    pairwise_distances,
    patch_count,
)

# -------------------------------------------------------------------------------------------------
# Distances
# -------------------------------------------------------------------------------------------------


@pytest.mark.unit
class TestPairwiseDistances:
    '''Test suite for pairwise_distances.'''

    def test_two_joints(self):
        '''Unit distance between two joints.'''
        out = pairwise_distances(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
        np.testing.assert_array_equal(out, [1.0])

    def test_triangle(self, triangle_frame):
        '''Pairs (0,1), (0,2), (1,2) come out in lexicographic order.'''
        np.testing.assert_allclose(pairwise_distances(triangle_frame), [3.0, 4.0, 5.0])
        assert joint_pairs(3) == [[0, 1], [0, 2], [1, 2]]

    def test_rigid_motion_invariance(self, rng):
        '''A rotated and shifted frame gives the same distances.'''
        frame = rng.normal(size=(6, 3))
        moved = Rotation.from_euler('xyz', [0.3, -1.1, 2.0]).apply(frame) + np.array([4.0, -2.0, 0.5])
        np.testing.assert_allclose(pairwise_distances(moved), pairwise_distances(frame), atol=1e-12)

    def test_rejects_bad_frames(self):
        '''Non-finite coordinates and a single joint are refused.'''
        with pytest.raises(InvalidInputError):
            pairwise_distances(np.array([[0.0, 0.0, np.nan], [1.0, 0.0, 0.0]]))
        with pytest.raises(InvalidInputError):
            pairwise_distances(np.zeros((1, 3)))


# -------------------------------------------------------------------------------------------------
# Patches
# -------------------------------------------------------------------------------------------------


@pytest.mark.unit
class TestPatches:
    '''Test suite for patch slicing.'''

    def test_patch_count(self):
        '''Boundary and strided counts.'''
        assert patch_count(8, FeaturizerConfig(patch_len=8, stride=8)) == 1
        assert patch_count(20, FeaturizerConfig(patch_len=8, stride=4)) == 4
        assert patch_count(7, FeaturizerConfig(patch_len=8, stride=8)) == 0

    def test_matrix_shape(self, moving_pose):
        '''Each row concatenates P frames of V(V-1)/2 distances.'''
        cfg = FeaturizerConfig(patch_len=8, stride=4)
        matrix = featurize_matrix(moving_pose, cfg)
        assert matrix.shape == (4, feature_dim(5, cfg))
        assert feature_dim(5, cfg) == 8 * 10

    def test_patch_contents(self, moving_pose):
        '''Patch i starts at frame i * stride, frames in time order.'''
        cfg = FeaturizerConfig(patch_len=4, stride=2, scale_norm=False)
        matrix = featurize_matrix(moving_pose, cfg)
        expected = np.concatenate([pairwise_distances(moving_pose.frames[t]) for t in range(2, 6)])
        np.testing.assert_allclose(matrix[1], expected, atol=1e-12)

    def test_scale_invariance(self, moving_pose):
        '''Doubling all coordinates leaves normalised features unchanged.'''
        big = PoseSequence(id='big', frames=moving_pose.frames * 2.0)
        cfg = FeaturizerConfig()
        np.testing.assert_allclose(featurize_matrix(big, cfg), featurize_matrix(moving_pose, cfg), atol=1e-12)

    def test_patch_features(self, moving_pose):
        '''PatchFeature carries its index and length.'''
        patches = featurize_sequence(moving_pose, FeaturizerConfig(patch_len=8, stride=4))
        assert [p.patch_index for p in patches] == [0, 1, 2, 3]
        assert all(p.patch_len == 8 and p.dim == 80 for p in patches)

    def test_too_short(self, moving_pose):
        '''Fewer frames than one patch is an error.'''
        with pytest.raises(SequenceTooShortError):
            featurize_matrix(moving_pose, FeaturizerConfig(patch_len=32, stride=8))

    def test_degenerate_pose(self):
        '''Coincident joints cannot be scale-normalised.'''
        seq = PoseSequence(id='dot', frames=np.zeros((8, 4, 3)))
        with pytest.raises(DegeneratePoseError):
            featurize_matrix(seq, FeaturizerConfig())


@pytest.mark.unit
class TestConfigAndCorpus:
    '''Test suite for configuration, headers and corpus featurisation.'''

    def test_stride_must_not_exceed_patch(self):
        '''Gaps between patches are refused.'''
        with pytest.raises(InvalidInputError):
            FeaturizerConfig(patch_len=4, stride=8)

    def test_pose_validation(self):
        '''Wrong shapes and non-finite frames are refused.'''
        with pytest.raises(InvalidInputError):
            PoseSequence(id='x', frames=np.zeros((4, 5, 2)))
        with pytest.raises(InvalidInputError):
            PoseSequence(id='x', frames=np.full((4, 5, 3), np.inf))

    def test_header(self):
        '''The header records what tokenisation needs to reproduce features.'''
        meta = feature_header(FeaturizerConfig(), 3)
        assert meta['patch_len'] == 8 and meta['stride'] == 8 and meta['scale_norm'] is True
        assert meta['n_joints'] == 3
        assert meta['pair_order'] == 'lexicographic'
        assert meta['joint_pairs'] == [[0, 1], [0, 2], [1, 2]]

    def test_corpus_owners(self, moving_pose):
        '''Rows are tagged with the sequence they came from.'''
        other = PoseSequence(id='other', frames=moving_pose.frames[:16])
        features = featurize_corpus([moving_pose, other], FeaturizerConfig())
        assert features.matrix.shape[0] == 2 + 2
        assert features.owners == ['walk', 'walk', 'other', 'other']
        assert features.n_joints == 5

    def test_corpus_joint_mismatch(self, moving_pose):
        '''All sequences must share a skeleton.'''
        other = PoseSequence(id='other', frames=np.random.default_rng(0).normal(size=(16, 4, 3)))
        with pytest.raises(InvalidInputError):
            featurize_corpus([moving_pose, other], FeaturizerConfig())
