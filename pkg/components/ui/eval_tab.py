"""
Evaluation Tab UI Component

Runs the leave-one-out protocol over the indexed corpus and shows mean score, match
rate, rank-1 rate and the best-rank distribution.
"""

import pandas as pd
import plotly.express as px
import streamlit as st

from components.data.data_providers import ArtifactProvider
from motionprint.engine import Backend, ScoreWeights
from motionprint.errors import MotionPrintError


def render_eval_tab(data_provider: ArtifactProvider, weights: ScoreWeights):
    """
    Render the Evaluation tab

    Args:
        data_provider: The artefact provider instance
        weights: Score weights chosen in the sidebar
    """
    st.markdown("### Evaluation")
    st.markdown(
        "Leave-one-out: every labeled sequence queries all others; "
        "a hit is a same-label candidate in the top n."
    )

    col1, col2 = st.columns([2, 1])
    with col1:
        backends = st.multiselect("Back-ends", [b.value for b in Backend], default=[Backend.TWO_STAGE.value])
    with col2:
        top_n = st.selectbox("Top n", [1, 2, 3], index=2)

    if not st.button("Run evaluation", type="primary", key="run_eval"):
        return

    reports = []
    for name in backends:
        try:
            with st.spinner(f"Evaluating {name}..."):
                reports.append(data_provider.evaluate(Backend(name), weights, top_n=top_n))
        except MotionPrintError as e:
            st.error(e.one_line())
            return

    for report in reports:
        st.markdown(f"#### {report.backend.value}")
        c1, c2, c3, c4 = st.columns(4)
        c1.metric("Queries", report.n_queries)
        c2.metric("Mean score", f"{report.mean_score:.3f}")
        c3.metric("Match rate", f"{report.match_rate_pct:.1f}%")
        c4.metric("Rank-1", f"{report.rank1_pct:.1f}%")

        hist = report.rank_histogram
        ranks = pd.DataFrame({"best rank": list(hist), "queries": list(hist.values())})
        fig = px.bar(ranks, x="best rank", y="queries", title="Best same-label rank")
        st.plotly_chart(fig, use_container_width=True)
        st.dataframe(report.per_class_frame(), use_container_width=True)

    by_backend = {r.backend: r for r in reports}
    two, brute = by_backend.get(Backend.TWO_STAGE), by_backend.get(Backend.BRUTE_FORCE)
    if two is not None and brute is not None and brute.mean_score > 0:
        ratio = two.mean_score / brute.mean_score
        st.success(f"Two-stage reaches {100 * ratio:.1f}% of the brute-force mean score")
