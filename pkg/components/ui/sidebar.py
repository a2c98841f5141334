"""
Sidebar Component

This module contains the application sidebar with the artefact source summary and the
score weight sliders.
"""

import streamlit as st

from components.data.data_providers import ArtifactProvider
from motionprint.engine import ScoreWeights
from motionprint.errors import InvalidWeightsError

WEIGHT_LABELS = {
    "hist": "Histogram",
    "twed": "TWED",
    "lcss": "LCSS",
    "edr": "EDR",
    "erp": "ERP",
    "ngram": "n-gram",
}


def render_sidebar(data_provider: ArtifactProvider) -> ScoreWeights:
    """
    Render the sidebar with source info and weight sliders

    Args:
        data_provider: The artefact provider instance

    Returns:
        The selected weights, rescaled to sum to 1
    """
    defaults = data_provider.get_engine_config().weights

    with st.sidebar:
        st.markdown("### 📦 Artefacts")
        st.caption(data_provider.describe())
        stats = data_provider.get_index().stats()
        st.markdown(f"**{stats['n_entries']}** sequences · K = **{stats['K']}**")

        st.markdown("### ⚖️ Score weights")
        raw = {}
        for name, label in WEIGHT_LABELS.items():
            raw[name] = st.slider(
                label,
                min_value=0.0,
                max_value=1.0,
                value=float(getattr(defaults, name)),
                step=0.05,
                key=f"weight_{name}",
            )

        try:
            weights = ScoreWeights.from_dict(raw, renormalise=True)
        except InvalidWeightsError:
            st.warning("All weights are zero; using the configured weights.")
            weights = defaults

        st.caption("Weights are rescaled to sum to 1: " + ", ".join(
            f"{WEIGHT_LABELS[k]} {v:.2f}" for k, v in weights.as_dict().items()
        ))
        return weights
