"""
Pose Featurisation

Turns skeleton sequences into fixed-length patch features built from inter-joint
distances. Distances do not change under rotation or translation of the whole body, and
dividing by the sequence's mean distance removes performer size.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.spatial.distance import pdist

from motionprint.errors import (
    DegeneratePoseError,
    InvalidInputError,
    SequenceTooShortError,
)

logger = logging.getLogger(__name__)

PAIR_ORDER = "lexicographic"


@dataclass
class PoseSequence:
    """T frames of V joints in metres, plus frame rate and optional class label"""

    id: str
    frames: np.ndarray
    fps: float = 30.0
    label: Optional[str] = None

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[2] != 3:
            raise InvalidInputError(
                f"sequence {self.id!r}: frames must have shape (T, V, 3), got {frames.shape}"
            )
        if frames.shape[0] < 1:
            raise InvalidInputError(f"sequence {self.id!r}: no frames")
        if frames.shape[1] < 2:
            raise InvalidInputError(f"sequence {self.id!r}: need at least 2 joints")
        if not np.all(np.isfinite(frames)):
            raise InvalidInputError(f"sequence {self.id!r}: non-finite coordinates")
        if not (np.isfinite(self.fps) and self.fps > 0):
            raise InvalidInputError(f"sequence {self.id!r}: fps must be positive")
        self.frames = frames

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_joints(self) -> int:
        return self.frames.shape[1]


@dataclass
class PatchFeature:
    values: np.ndarray
    patch_index: int
    patch_len: int

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FeaturizerConfig:
    """Patch length and stride are in frames; no resampling is done here"""

    patch_len: int = 8
    stride: int = 8
    scale_norm: bool = True

    def __post_init__(self):
        if self.patch_len < 1:
            raise InvalidInputError("patch_len must be a positive number of frames")
        if self.stride < 1:
            raise InvalidInputError("stride must be a positive number of frames")
        if self.stride > self.patch_len:
            raise InvalidInputError(
                f"stride ({self.stride}) must not exceed patch_len ({self.patch_len})"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {"patch_len": self.patch_len, "stride": self.stride, "scale_norm": self.scale_norm}


def joint_pairs(n_joints: int) -> List[List[int]]:
    """Joint pairs (i, j), i < j, in the order the distance vector uses"""
    rows, cols = np.triu_indices(n_joints, k=1)
    return [[int(i), int(j)] for i, j in zip(rows, cols)]


def feature_dim(n_joints: int, cfg: FeaturizerConfig) -> int:
    return cfg.patch_len * n_joints * (n_joints - 1) // 2


def feature_header(cfg: FeaturizerConfig, n_joints: int) -> Dict[str, Any]:
    """Header recorded with a codebook so tokenisation can be reproduced"""
    meta = cfg.to_dict()
    meta.update({
        "n_joints": n_joints,
        "pair_order": PAIR_ORDER,
        "joint_pairs": joint_pairs(n_joints),
    })
    return meta


def pairwise_distances(frame: np.ndarray) -> np.ndarray:
    """Euclidean distance of every joint pair of one V x 3 frame"""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2 or frame.shape[1] != 3 or frame.shape[0] < 2:
        raise InvalidInputError(f"frame must have shape (V>=2, 3), got {frame.shape}")
    if not np.all(np.isfinite(frame)):
        raise InvalidInputError("frame contains non-finite coordinates")
    # pdist's condensed layout is the lexicographic (i<j) pair order
    return pdist(frame)


def frame_distances(frames: np.ndarray) -> np.ndarray:
    """T x V(V-1)/2 matrix of per-frame pairwise distances"""
    rows, cols = np.triu_indices(frames.shape[1], k=1)
    diffs = frames[:, rows, :] - frames[:, cols, :]
    return np.sqrt(np.einsum("tpc,tpc->tp", diffs, diffs))


def patch_count(n_frames: int, cfg: FeaturizerConfig) -> int:
    if n_frames < cfg.patch_len:
        return 0
    return (n_frames - cfg.patch_len) // cfg.stride + 1


def featurize_matrix(seq: PoseSequence, cfg: FeaturizerConfig) -> np.ndarray:
    """Patch features of a sequence stacked into an (n_patches, D_f) array"""
    if seq.n_frames < cfg.patch_len:
        raise SequenceTooShortError(
            f"sequence {seq.id!r} has {seq.n_frames} frames, patch length is {cfg.patch_len}"
        )
    dists = frame_distances(seq.frames)
    if cfg.scale_norm:
        scale = float(dists.mean())
        if not scale > 0.0:
            raise DegeneratePoseError(f"sequence {seq.id!r}: all joints coincide in every frame")
        dists = dists / scale

    n = patch_count(seq.n_frames, cfg)
    starts = np.arange(n) * cfg.stride
    window = starts[:, None] + np.arange(cfg.patch_len)[None, :]
    return dists[window].reshape(n, -1)


def featurize_sequence(seq: PoseSequence, cfg: FeaturizerConfig) -> List[PatchFeature]:
    matrix = featurize_matrix(seq, cfg)
    return [
        PatchFeature(values=row, patch_index=i, patch_len=cfg.patch_len)
        for i, row in enumerate(matrix)
    ]


@dataclass
class FeatureSet:
    """Patch features of many sequences with the owner of each row"""

    matrix: np.ndarray
    owners: List[str] = field(default_factory=list)
    n_joints: int = 0


def featurize_corpus(seqs: List[PoseSequence], cfg: FeaturizerConfig) -> FeatureSet:
    if not seqs:
        raise InvalidInputError("no pose sequences to featurise")
    n_joints = seqs[0].n_joints
    blocks, owners = [], []
    for seq in seqs:
        if seq.n_joints != n_joints:
            raise InvalidInputError(
                f"sequence {seq.id!r} has {seq.n_joints} joints, corpus uses {n_joints}"
            )
        block = featurize_matrix(seq, cfg)
        blocks.append(block)
        owners.extend([seq.id] * block.shape[0])
    matrix = np.vstack(blocks)
    logger.info(f"✅ Featurised {len(seqs)} sequences into {matrix.shape[0]} patches (D={matrix.shape[1]})")
    return FeatureSet(matrix=matrix, owners=owners, n_joints=n_joints)
