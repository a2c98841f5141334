"""
Codebook Tab UI Component

Codebook health: usage, assignment entropy, per-epoch history and per-code usage.
"""

import plotly.express as px
import streamlit as st

from components.data.data_providers import ArtifactProvider
from motionprint.codebook import assignment_entropy, usage_ratio
from motionprint.io import health_frame


def render_codebook_tab(data_provider: ArtifactProvider):
    """
    Render the Codebook tab

    Args:
        data_provider: The artefact provider instance
    """
    st.markdown("### Codebook")
    cb = data_provider.get_codebook()
    if cb is None:
        st.info("No codebook loaded. Set MOTIONPRINT_CODEBOOK to show codebook health.")
        return

    usage = usage_ratio(cb)
    col1, col2, col3, col4 = st.columns(4)
    col1.metric("Codes (K)", cb.K)
    col2.metric("Feature dim (D)", cb.D)
    healthy = usage > 80
    col3.metric("Usage", f"{usage:.1f}%", delta="healthy" if healthy else "low",
                delta_color="normal" if healthy else "inverse")
    col4.metric("Assignment entropy", f"{assignment_entropy(cb.epoch_use):.3f} nats")

    history = data_provider.get_health_history()
    if history:
        st.markdown("#### Training history")
        frame = health_frame(history).reset_index()
        st.plotly_chart(
            px.line(frame, x="epoch", y=["usage_pct"], markers=True, title="Usage per epoch (%)"),
            use_container_width=True,
        )
        st.plotly_chart(
            px.line(frame, x="epoch", y="quantisation_mse", markers=True, title="Quantisation MSE"),
            use_container_width=True,
        )
        st.dataframe(frame, hide_index=True, use_container_width=True)

    st.markdown("#### Per-code usage")
    usage_df = data_provider.code_usage_frame()
    y = "epoch_use" if "epoch_use" in usage_df.columns else "index_count"
    st.plotly_chart(
        px.bar(usage_df, x="code", y=y, title="Assignments per code (last epoch)"),
        use_container_width=True,
    )
