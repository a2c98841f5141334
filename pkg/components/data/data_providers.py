"""
Artefact Providers for the motionprint dashboard

This module contains the data abstraction layer behind the dashboard. A provider hands
out an index, an optional codebook with its training history, and the engine config.
Supports FILES (built artefacts on disk) and DEMO (a seeded synthetic pipeline).
"""

import os
from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, Optional, Tuple

import pandas as pd
import streamlit as st

from motionprint import io as mio
from motionprint.codebook import (
    Codebook,
    CodebookConfig,
    CodebookHealth,
    tokenize_sequence,
    train_codebook_from_poses,
)
from motionprint.config import EngineConfig, load_engine_config
from motionprint.engine import Backend, RetrievalResult, ScoreWeights, run_query
from motionprint.errors import MotionPrintError
from motionprint.evaluation import EvalProtocol, EvalReport, evaluate
from motionprint.featurize import FeaturizerConfig
from motionprint.index import MotionIndex, build_index
from motionprint.synth import SynthPoseConfig, gen_synth_poses


class ArtifactProvider(ABC):
    """Abstract base class for artefact providers"""

    @abstractmethod
    def get_index(self) -> MotionIndex:
        """Get the searchable index"""
        pass

    @abstractmethod
    def get_codebook(self) -> Optional[Codebook]:
        """Get the codebook, if one is available"""
        pass

    @abstractmethod
    def get_engine_config(self) -> EngineConfig:
        """Get the engine configuration"""
        pass

    @abstractmethod
    def describe(self) -> str:
        """One-line description of where the artefacts come from"""
        pass

    def get_health_history(self) -> List[CodebookHealth]:
        """Per-epoch codebook health, when the provider trained the codebook itself"""
        return []

    def index_frame(self) -> pd.DataFrame:
        idx = self.get_index()
        return pd.DataFrame(
            [
                {
                    "id": e.id,
                    "label": e.label or "-",
                    "length": e.hist.source_len,
                    "periodic": e.periodic,
                    "distinct_words": int((e.hist.bins > 0).sum()),
                }
                for e in idx.entries
            ],
            columns=["id", "label", "length", "periodic", "distinct_words"],
        )

    def code_usage_frame(self) -> pd.DataFrame:
        """Per-code usage: last-epoch assignments and word counts over the index"""
        cb = self.get_codebook()
        idx = self.get_index()
        K = idx.K if cb is None else cb.K
        index_counts = [0] * K
        for entry in idx.entries:
            for w in entry.tokens.words:
                if w < K:
                    index_counts[w] += 1
        frame = pd.DataFrame({"code": range(K), "index_count": index_counts})
        if cb is not None:
            frame["epoch_use"] = cb.epoch_use
        return frame

    def query(self, query_id: str, k: int, backend: Backend, weights: ScoreWeights) -> RetrievalResult:
        idx = self.get_index()
        cfg = self.get_engine_config().with_overrides(weights=weights.as_dict(), exclude_self=True)
        return run_query(idx.get(query_id).tokens, idx, cfg, k=k, backend=backend, diagnostics=True)

    def evaluate(self, backend: Backend, weights: ScoreWeights, top_n: int = 3) -> EvalReport:
        idx = self.get_index()
        cfg = self.get_engine_config().with_overrides(weights=weights.as_dict())
        corpus = [e.tokens for e in idx.entries]
        return evaluate(corpus, cfg, EvalProtocol(top_n=top_n), backend=backend, K=idx.K)


# -------------------------------------------------------------------------------------------------
# Files
# -------------------------------------------------------------------------------------------------

def _stamp(path: Optional[str]) -> float:
    return Path(path).stat().st_mtime if path and Path(path).exists() else 0.0


@st.cache_resource(show_spinner="Loading index...")
def _load_index(path: str, stamp: float) -> MotionIndex:
    return mio.load_index(path)


@st.cache_resource(show_spinner="Loading codebook...")
def _load_codebook(path: str, stamp: float) -> Codebook:
    return mio.load_codebook(path)


@st.cache_data
def _load_engine_config(path: str, stamp: float) -> dict:
    return load_engine_config(path).to_dict()


class FileArtifactProvider(ArtifactProvider):
    """Artefacts produced by the command-line pipeline"""

    def __init__(self, index_path: str, codebook_path: Optional[str] = None, engine_config_path: Optional[str] = None):
        self.index_path = index_path
        self.codebook_path = codebook_path
        self.engine_config_path = engine_config_path

    def get_index(self) -> MotionIndex:
        return _load_index(self.index_path, _stamp(self.index_path))

    def get_codebook(self) -> Optional[Codebook]:
        if not self.codebook_path:
            return None
        return _load_codebook(self.codebook_path, _stamp(self.codebook_path))

    def get_engine_config(self) -> EngineConfig:
        if not self.engine_config_path:
            return EngineConfig()
        return EngineConfig.from_dict(_load_engine_config(self.engine_config_path, _stamp(self.engine_config_path)))

    def describe(self) -> str:
        return f"Files: {self.index_path}"


# -------------------------------------------------------------------------------------------------
# Demo
# -------------------------------------------------------------------------------------------------

@st.cache_resource(show_spinner="Building demo artefacts...")
def _build_demo(seed: int, K: int) -> Tuple[MotionIndex, Codebook, List[CodebookHealth]]:
    poses = gen_synth_poses(SynthPoseConfig(n_classes=4, per_class=6, template_len=12, rng_seed=seed))
    feat_cfg = FeaturizerConfig()
    cb, history = train_codebook_from_poses(poses, feat_cfg, CodebookConfig(K=K, epochs=6, batch_size=64, seed=seed))
    tokens = [tokenize_sequence(p, feat_cfg, cb) for p in poses]
    return build_index(tokens, cb.K), cb, history


class DemoArtifactProvider(ArtifactProvider):
    """Seeded synthetic skeleton corpus run through the whole pipeline in memory"""

    def __init__(self, seed: int = 0, K: int = 32):
        self.seed = seed
        self.K = K

    def _artifacts(self):
        return _build_demo(self.seed, self.K)

    def get_index(self) -> MotionIndex:
        return self._artifacts()[0]

    def get_codebook(self) -> Optional[Codebook]:
        return self._artifacts()[1]

    def get_health_history(self) -> List[CodebookHealth]:
        return self._artifacts()[2]

    def get_engine_config(self) -> EngineConfig:
        return EngineConfig()

    def describe(self) -> str:
        return f"Demo: synthetic poses, seed {self.seed}, K={self.K}"


def get_data_provider(
    data_source: Optional[str] = None,
    index_path: Optional[str] = None,
    codebook_path: Optional[str] = None,
    engine_config_path: Optional[str] = None,
) -> Optional[ArtifactProvider]:
    """Factory function to get the appropriate provider based on configuration"""
    source = (data_source or os.getenv("DATA_SOURCE", "demo")).lower()
    try:
        if source == "files":
            index_path = index_path or os.getenv("MOTIONPRINT_INDEX")
            if not index_path:
                st.error("DATA_SOURCE=files needs MOTIONPRINT_INDEX to point at an index file")
                return None
            provider = FileArtifactProvider(
                index_path,
                codebook_path or os.getenv("MOTIONPRINT_CODEBOOK"),
                engine_config_path or os.getenv("MOTIONPRINT_ENGINE_CONFIG"),
            )
        else:
            provider = DemoArtifactProvider(seed=int(os.getenv("MOTIONPRINT_DEMO_SEED", "0")))
        provider.get_index()
        return provider
    except MotionPrintError as e:
        st.error(f"Failed to load artefacts: {e.one_line()}")
        return None
