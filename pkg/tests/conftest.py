'''
Shared fixtures for the motionprint test suite.
'''

import numpy as np
import pytest

from motionprint.codebook import TokenSequence
from motionprint.featurize import PoseSequence

# -------------------------------------------------------------------------------------------------
# Token corpora
# -------------------------------------------------------------------------------------------------

TOY_K = 12


@pytest.fixture
def toy_corpus():
    '''Three classes of five sequences each, drawn from disjoint four-word sub-alphabets.'''
    rng = np.random.default_rng(7)
    corpus = []
    for c in range(3):
        alphabet = np.arange(4 * c, 4 * c + 4)
        for m in range(5):
            length = int(rng.integers(8, 13))
            corpus.append(
                TokenSequence(
                    id=f'c{c}_m{m}',
                    words=rng.choice(alphabet, size=length).tolist(),
                    label=f'class_{c}',
                )
            )
    return corpus


@pytest.fixture
def toy_K():
    '''Vocabulary size of the toy corpus.'''
    return TOY_K


@pytest.fixture
def rng():
    '''Seeded generator for property tests.'''
    return np.random.default_rng(20240611)


# -------------------------------------------------------------------------------------------------
# Pose data
# -------------------------------------------------------------------------------------------------

@pytest.fixture
def triangle_frame():
    '''Three joints forming a 3-4-5 right triangle.'''
    return np.array([[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0, 4.0, 0.0]])


@pytest.fixture
def moving_pose():
    '''Twenty frames of a five-joint skeleton whose joints drift smoothly.'''
    rng = np.random.default_rng(3)
    base = rng.normal(0.0, 0.5, size=(5, 3))
    drift = np.linspace(0.0, 1.0, 20)[:, None, None] * rng.normal(0.0, 0.2, size=(1, 5, 3))
    return PoseSequence(id='walk', frames=base[None, :, :] + drift, fps=30.0, label='walk')
