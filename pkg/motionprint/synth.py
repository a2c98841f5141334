"""
Synthetic Corpora

Seeded class-structured corpora for desk-scale experiments. Each class owns a block of
the vocabulary (widened by an overlap fraction), draws one template from it, and every
member is that template after random substitutions, insertions, deletions and tempo
jitter. The pose generator renders the same kind of token corpus as skeleton motion.
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.spatial.transform import Rotation

from motionprint.codebook import TokenSequence
from motionprint.errors import InvalidInputError
from motionprint.featurize import PoseSequence

logger = logging.getLogger(__name__)


def member_id(c: int, m: int) -> str:
    return f"c{c:03d}_m{m:03d}"


def class_label(c: int) -> str:
    return f"class_{c:03d}"


@dataclass(frozen=True)
class SynthCorpusConfig:
    n_classes: int = 10
    per_class: int = 20
    template_len: int = 40
    K: int = 512
    substitution_rate: float = 0.10
    insertion_rate: float = 0.05
    deletion_rate: float = 0.05
    tempo_jitter: float = 0.0
    overlap: float = 0.2
    rng_seed: int = 0

    def __post_init__(self):
        _check_common(self)
        if self.K < self.n_classes:
            raise InvalidInputError(f"K={self.K} is too small for {self.n_classes} class blocks")


def _check_common(cfg):
    if cfg.n_classes < 1 or cfg.per_class < 1:
        raise InvalidInputError("n_classes and per_class must be positive")
    if cfg.n_classes * cfg.per_class < 2:
        raise InvalidInputError("a corpus needs at least two sequences")
    if cfg.template_len < 1:
        raise InvalidInputError("template_len must be positive")
    rates = (cfg.substitution_rate, cfg.insertion_rate, cfg.deletion_rate)
    if any(not 0.0 <= r < 1.0 for r in rates):
        raise InvalidInputError(f"edit rates must lie in [0, 1), got {rates}")
    if sum(rates) >= 1.0:
        raise InvalidInputError(f"edit rates must sum to less than 1, got {sum(rates)}")
    if not 0.0 <= cfg.tempo_jitter <= 0.5:
        raise InvalidInputError(f"tempo_jitter must lie in [0, 0.5], got {cfg.tempo_jitter}")
    if not 0.0 <= cfg.overlap <= 1.0:
        raise InvalidInputError(f"overlap must lie in [0, 1], got {cfg.overlap}")


def class_alphabet(c: int, n_classes: int, vocab: int, overlap: float) -> np.ndarray:
    """Block c of the vocabulary, extended into the next block by the overlap fraction"""
    block = vocab // n_classes
    width = min(block + int(round(overlap * block)), vocab)
    return (c * block + np.arange(width)) % vocab


def perturb(template: np.ndarray, alphabet: np.ndarray, cfg, rng: np.random.Generator) -> List[int]:
    sub, ins, dele = cfg.substitution_rate, cfg.insertion_rate, cfg.deletion_rate
    edited = []
    for token in template:
        u = rng.random()
        if u < sub:
            edited.append(int(rng.choice(alphabet)))
        elif u < sub + ins:
            edited.append(int(token))
            edited.append(int(rng.choice(alphabet)))
        elif u < sub + ins + dele:
            continue
        else:
            edited.append(int(token))

    jitter = cfg.tempo_jitter
    if jitter > 0.0:
        paced = []
        for token in edited:
            r = rng.random()
            if r < 0.5 * jitter:
                paced.extend((token, token))
            elif r < jitter:
                continue
            else:
                paced.append(token)
        edited = paced
    return edited or [int(template[0])]


def _class_templates(cfg, vocab: int, rng: np.random.Generator):
    for c in range(cfg.n_classes):
        alphabet = class_alphabet(c, cfg.n_classes, vocab, cfg.overlap)
        yield c, alphabet, rng.choice(alphabet, size=cfg.template_len)


def gen_synth_corpus(cfg: SynthCorpusConfig) -> List[TokenSequence]:
    rng = np.random.default_rng(cfg.rng_seed)
    corpus = []
    for c, alphabet, template in _class_templates(cfg, cfg.K, rng):
        for m in range(cfg.per_class):
            corpus.append(
                TokenSequence(id=member_id(c, m), words=perturb(template, alphabet, cfg, rng), label=class_label(c))
            )
    logger.info(f"✅ Generated {len(corpus)} synthetic token sequences ({cfg.n_classes} classes, K={cfg.K})")
    return corpus


# -------------------------------------------------------------------------------------------------
# Skeleton corpus
# -------------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthPoseConfig:
    """
    Pose corpus settings

    Each template step is a motion primitive held for ``frames_per_primitive`` frames.
    Primitives are keyframe poses; members get a random rotation about the vertical
    axis, a translation, a performer scale in [0.8, 1.2] and joint noise.
    """

    n_classes: int = 4
    per_class: int = 5
    template_len: int = 12
    n_primitives: int = 32
    n_joints: int = 17
    frames_per_primitive: int = 8
    substitution_rate: float = 0.10
    insertion_rate: float = 0.05
    deletion_rate: float = 0.05
    tempo_jitter: float = 0.0
    overlap: float = 0.2
    noise_std: float = 0.005
    fps: float = 30.0
    rng_seed: int = 0

    def __post_init__(self):
        _check_common(self)
        if self.n_primitives < self.n_classes:
            raise InvalidInputError("need at least one primitive per class")
        if self.n_joints < 2:
            raise InvalidInputError("need at least two joints")
        if self.frames_per_primitive < 1:
            raise InvalidInputError("frames_per_primitive must be positive")
        if self.noise_std < 0 or not self.fps > 0:
            raise InvalidInputError("noise_std must be non-negative and fps positive")


def _primitive_poses(cfg: SynthPoseConfig, rng: np.random.Generator) -> np.ndarray:
    """n_primitives x V x 3 keyframes around one rest skeleton, about 1.7 m tall"""
    rest = rng.normal(0.0, 0.25, size=(cfg.n_joints, 3))
    rest[:, 2] = np.linspace(0.0, 1.7, cfg.n_joints)
    offsets = rng.normal(0.0, 0.2, size=(cfg.n_primitives, cfg.n_joints, 3))
    return rest[None, :, :] + offsets


def gen_synth_poses(cfg: SynthPoseConfig) -> List[PoseSequence]:
    rng = np.random.default_rng(cfg.rng_seed)
    primitives = _primitive_poses(cfg, rng)
    corpus = []
    for c, alphabet, template in _class_templates(cfg, cfg.n_primitives, rng):
        for m in range(cfg.per_class):
            steps = perturb(template, alphabet, cfg, rng)
            frames = np.repeat(primitives[steps], cfg.frames_per_primitive, axis=0)

            rot = Rotation.from_euler("z", rng.uniform(0.0, 2.0 * np.pi))
            scale = rng.uniform(0.8, 1.2)
            shift = rng.uniform(-1.0, 1.0, size=3)
            flat = rot.apply(frames.reshape(-1, 3)) * scale + shift
            flat += rng.normal(0.0, cfg.noise_std, size=flat.shape)

            corpus.append(
                PoseSequence(
                    id=member_id(c, m),
                    frames=flat.reshape(frames.shape),
                    fps=cfg.fps,
                    label=class_label(c),
                )
            )
    logger.info(f"✅ Generated {len(corpus)} synthetic pose sequences ({cfg.n_classes} classes, V={cfg.n_joints})")
    return corpus
