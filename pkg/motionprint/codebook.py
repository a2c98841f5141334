"""
Motion-word Codebook

K code vectors learned with exponential moving averages of assignments. Codes left
unused during an epoch are revived from the epoch's patches. Patches are turned into
motion words by nearest-code search.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from motionprint.errors import (
    ConfigMismatchError,
    InsufficientDataError,
    InvalidInputError,
    RevivalStarvedError,
)
from motionprint.featurize import (
    FeaturizerConfig,
    PatchFeature,
    PoseSequence,
    featurize_corpus,
    featurize_matrix,
    feature_header,
)

logger = logging.getLogger(__name__)

RESERVOIRS = ("last_batch", "epoch")

PatchLike = Union[PatchFeature, np.ndarray, Sequence[float]]


@dataclass
class TokenSequence:
    """Motion-word fingerprint of one sequence"""

    id: str
    words: List[int] = field(default_factory=list)
    label: Optional[str] = None

    def __post_init__(self):
        self.words = [int(w) for w in self.words]
        if any(w < 0 for w in self.words):
            raise InvalidInputError(f"sequence {self.id!r}: motion words must be non-negative")

    def __len__(self) -> int:
        return len(self.words)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.words, dtype=np.float64)


@dataclass
class CodebookHealth:
    usage_pct: float
    assignment_entropy: float
    quantisation_mse: float
    n_patches: int = 0
    revived: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "usage_pct": self.usage_pct,
            "assignment_entropy": self.assignment_entropy,
            "quantisation_mse": self.quantisation_mse,
            "n_patches": self.n_patches,
            "revived": self.revived,
        }


@dataclass
class Codebook:
    """
    Code vectors with their EMA statistics

    ``ema_counts`` and ``ema_sums`` are n_k and m_k; after every update
    ``codes[k] == ema_sums[k] / max(ema_counts[k], epsilon)``.
    """

    codes: np.ndarray
    ema_counts: np.ndarray
    ema_sums: np.ndarray
    epoch_use: np.ndarray = None
    alpha: float = 0.5
    epsilon: float = 1e-5
    feature_meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.codes = np.array(self.codes, dtype=np.float64, ndmin=2)
        K = self.codes.shape[0]
        self.ema_counts = np.array(self.ema_counts, dtype=np.float64).reshape(K)
        self.ema_sums = np.array(self.ema_sums, dtype=np.float64).reshape(self.codes.shape)
        if self.epoch_use is None:
            self.epoch_use = np.zeros(K, dtype=np.int64)
        self.epoch_use = np.array(self.epoch_use, dtype=np.int64).reshape(K)
        if K < 1:
            raise InvalidInputError("codebook needs at least one code")
        if not np.all(np.isfinite(self.codes)):
            raise InvalidInputError("codebook contains non-finite code vectors")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.epsilon > 0.0:
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def K(self) -> int:
        return self.codes.shape[0]

    @property
    def D(self) -> int:
        return self.codes.shape[1]

    def refresh_codes(self):
        self.codes = self.ema_sums / np.maximum(self.ema_counts, self.epsilon)[:, None]

    def copy(self) -> "Codebook":
        return Codebook(
            codes=self.codes.copy(),
            ema_counts=self.ema_counts.copy(),
            ema_sums=self.ema_sums.copy(),
            epoch_use=self.epoch_use.copy(),
            alpha=self.alpha,
            epsilon=self.epsilon,
            feature_meta=dict(self.feature_meta),
        )


@dataclass(frozen=True)
class CodebookConfig:
    """Training settings; defaults follow the EMA-decay and vocabulary size of the method"""

    K: int = 512
    alpha: float = 0.5
    epsilon: float = 1e-5
    epochs: int = 10
    warmup_epochs: int = 1
    batch_size: int = 256
    reservoir: str = "last_batch"
    seed: int = 0

    def __post_init__(self):
        if self.K < 1:
            raise InvalidInputError("K must be at least 1")
        if self.epochs < 1:
            raise InvalidInputError("epochs must be at least 1")
        if not 0 <= self.warmup_epochs < self.epochs:
            raise InvalidInputError("warmup_epochs must be in [0, epochs)")
        if self.batch_size < 1:
            raise InvalidInputError("batch_size must be at least 1")
        if self.reservoir not in RESERVOIRS:
            raise InvalidInputError(f"reservoir must be one of {RESERVOIRS}")


def _as_matrix(patches: Union[Iterable[PatchLike], np.ndarray]) -> np.ndarray:
    if isinstance(patches, np.ndarray):
        return np.array(patches, dtype=np.float64, ndmin=2)
    rows = [p.values if isinstance(p, PatchFeature) else np.asarray(p, dtype=np.float64) for p in patches]
    if not rows:
        return np.empty((0, 0))
    return np.vstack(rows)


def quantize_batch(patches: np.ndarray, cb: Codebook) -> Tuple[np.ndarray, np.ndarray]:
    """Nearest code for every row; ties go to the lowest code index"""
    X = _as_matrix(patches)
    if X.shape[0] == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    if X.shape[1] != cb.D:
        raise InvalidInputError(f"patch dimension {X.shape[1]} does not match codebook D={cb.D}")
    sq = cdist(X, cb.codes, metric="sqeuclidean")
    words = np.argmin(sq, axis=1)
    dists = np.sqrt(sq[np.arange(X.shape[0]), words])
    return words.astype(np.int64), dists


def quantize(patch: PatchLike, cb: Codebook) -> Tuple[int, float]:
    values = patch.values if isinstance(patch, PatchFeature) else np.asarray(patch, dtype=np.float64)
    if values.ndim != 1:
        raise InvalidInputError("quantize expects a single patch vector")
    words, dists = quantize_batch(values[None, :], cb)
    return int(words[0]), float(dists[0])


def usage_ratio(cb: Codebook) -> float:
    return 100.0 * float(np.count_nonzero(cb.epoch_use > 0)) / cb.K


def assignment_entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log(p)).sum())


def init_codebook(
    sample: Union[List[PatchFeature], np.ndarray],
    K: int,
    alpha: float = 0.5,
    rng_seed: int = 0,
    epsilon: float = 1e-5,
    meta: Optional[Dict[str, Any]] = None,
) -> Codebook:
    """K distinct sample patches picked uniformly with a seeded generator"""
    X = _as_matrix(sample)
    if X.shape[0] < K:
        raise InsufficientDataError(f"need at least K={K} patches to initialise, got {X.shape[0]}")
    _, first_seen = np.unique(X, axis=0, return_index=True)
    distinct = np.sort(first_seen)
    if distinct.shape[0] < K:
        raise InsufficientDataError(
            f"need at least K={K} distinct patches to initialise, got {distinct.shape[0]}"
        )
    rng = np.random.default_rng(rng_seed)
    chosen = np.sort(rng.choice(distinct, size=K, replace=False))
    codes = X[chosen].copy()
    return Codebook(
        codes=codes,
        ema_counts=np.ones(K),
        ema_sums=codes.copy(),
        epoch_use=np.zeros(K, dtype=np.int64),
        alpha=alpha,
        epsilon=epsilon,
        feature_meta=dict(meta or {}),
    )


def revive_dead_codes(cb: Codebook, reservoir: Union[List[PatchFeature], np.ndarray], rng_seed: int = 0) -> int:
    """Overwrite every code unused this epoch with a random reservoir patch"""
    dead = np.flatnonzero(cb.epoch_use == 0)
    if dead.size == 0:
        return 0
    R = _as_matrix(reservoir)
    if R.shape[0] == 0:
        raise RevivalStarvedError(f"{dead.size} dead codes but the revival reservoir is empty")
    if R.shape[1] != cb.D:
        raise InvalidInputError(f"reservoir dimension {R.shape[1]} does not match codebook D={cb.D}")

    rng = np.random.default_rng(rng_seed)
    picks = rng.integers(0, R.shape[0], size=dead.size)
    cb.codes[dead] = R[picks]
    cb.ema_sums[dead] = R[picks]
    cb.ema_counts[dead] = 1.0
    cb.epoch_use[dead] = 1
    logger.debug(f"🔄 Revived {dead.size} dead codes")
    return int(dead.size)


def train_epoch(
    patch_batches: Iterable[Union[List[PatchFeature], np.ndarray]],
    cb: Codebook,
    warmup: bool = False,
    reservoir: str = "last_batch",
    rng_seed: int = 0,
) -> CodebookHealth:
    """
    One pass of EMA codebook updates

    Args:
        patch_batches: stream of patch batches
        cb: codebook, updated in place unless ``warmup``
        warmup: assign and measure only; statistics and codes stay untouched
        reservoir: revival source, the epoch's final batch or every patch of the epoch
        rng_seed: seed for revival sampling

    Returns:
        Health of the epoch's assignments, measured before revival
    """
    if reservoir not in RESERVOIRS:
        raise InvalidInputError(f"reservoir must be one of {RESERVOIRS}")

    cb.epoch_use[:] = 0
    sq_error = 0.0
    n_patches = 0
    last_batch = None
    seen = []
    alpha = cb.alpha

    for batch in patch_batches:
        X = _as_matrix(batch)
        if X.shape[0] == 0:
            raise InvalidInputError("empty patch batch")
        words, dists = quantize_batch(X, cb)
        counts = np.bincount(words, minlength=cb.K)
        cb.epoch_use += counts
        sq_error += float(np.dot(dists, dists))
        n_patches += X.shape[0]
        last_batch = X
        if reservoir == "epoch":
            seen.append(X)

        if warmup:
            continue
        sums = np.zeros_like(cb.ema_sums)
        np.add.at(sums, words, X)
        cb.ema_counts = alpha * cb.ema_counts + (1.0 - alpha) * counts
        cb.ema_sums = alpha * cb.ema_sums + (1.0 - alpha) * sums
        cb.refresh_codes()

    if n_patches == 0:
        raise InvalidInputError("patch stream is empty")

    health = CodebookHealth(
        usage_pct=usage_ratio(cb),
        assignment_entropy=assignment_entropy(cb.epoch_use.astype(np.float64)),
        quantisation_mse=sq_error / (n_patches * cb.D),
        n_patches=n_patches,
    )
    if not warmup:
        pool = np.vstack(seen) if reservoir == "epoch" else last_batch
        health.revived = revive_dead_codes(cb, pool, rng_seed)
    return health


def iter_batches(matrix: np.ndarray, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(matrix.shape[0])
    for start in range(0, order.shape[0], batch_size):
        yield matrix[order[start:start + batch_size]]


def train_codebook(
    matrix: np.ndarray,
    cfg: CodebookConfig,
    meta: Optional[Dict[str, Any]] = None,
) -> Tuple[Codebook, List[CodebookHealth]]:
    """Initialise from the data, then run warm-up and EMA epochs"""
    cb = init_codebook(matrix, cfg.K, alpha=cfg.alpha, rng_seed=cfg.seed, epsilon=cfg.epsilon, meta=meta)
    rng = np.random.default_rng(cfg.seed)
    history = []
    for epoch in range(cfg.epochs):
        warmup = epoch < cfg.warmup_epochs
        health = train_epoch(
            iter_batches(matrix, cfg.batch_size, rng),
            cb,
            warmup=warmup,
            reservoir=cfg.reservoir,
            rng_seed=cfg.seed + epoch,
        )
        history.append(health)
        logger.info(
            f"{'⏳' if warmup else '🔄'} Epoch {epoch + 1}/{cfg.epochs}: usage {health.usage_pct:.1f}%, "
            f"entropy {health.assignment_entropy:.3f}, mse {health.quantisation_mse:.5f}, revived {health.revived}"
        )
    return cb, history


def train_codebook_from_poses(
    seqs: List[PoseSequence],
    feat_cfg: FeaturizerConfig,
    cfg: CodebookConfig,
) -> Tuple[Codebook, List[CodebookHealth]]:
    features = featurize_corpus(seqs, feat_cfg)
    return train_codebook(features.matrix, cfg, meta=feature_header(feat_cfg, features.n_joints))


def check_compatible(cb: Codebook, cfg: FeaturizerConfig, n_joints: int):
    meta = cb.feature_meta
    if not meta:
        return
    expected = feature_header(cfg, n_joints)
    for key in ("patch_len", "stride", "scale_norm", "n_joints", "pair_order"):
        if key in meta and meta[key] != expected[key]:
            raise ConfigMismatchError(
                f"codebook was trained with {key}={meta[key]!r}, tokenising with {expected[key]!r}"
            )


def tokenize_sequence(seq: PoseSequence, cfg: FeaturizerConfig, cb: Codebook) -> TokenSequence:
    check_compatible(cb, cfg, seq.n_joints)
    matrix = featurize_matrix(seq, cfg)
    if matrix.shape[1] != cb.D:
        raise ConfigMismatchError(f"feature dimension {matrix.shape[1]} does not match codebook D={cb.D}")
    words, _ = quantize_batch(matrix, cb)
    return TokenSequence(id=seq.id, words=words.tolist(), label=seq.label)
