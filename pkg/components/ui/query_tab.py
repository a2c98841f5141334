"""
Query Tab UI Component

Pick an indexed sequence, retrieve its nearest neighbours and inspect how each
metric contributes to the combined score.
"""

import pandas as pd
import plotly.express as px
import streamlit as st

from components.data.data_providers import ArtifactProvider
from motionprint.engine import Backend, RetrievalResult, ScoreWeights


def result_frame(result: RetrievalResult) -> pd.DataFrame:
    """One row per ranked candidate with score, shortlist position and every phi"""
    rows = []
    for rank, c in enumerate(result.ranked, start=1):
        row = {
            "rank": rank,
            "candidate": c.candidate_id,
            "label": c.label or "-",
            "score": c.score,
            "shortlist_rank": c.shortlist_rank,
        }
        row.update({f"phi_{m}": parts["phi"] for m, parts in c.breakdown.items()})
        rows.append(row)
    return pd.DataFrame(rows)


def contribution_frame(result: RetrievalResult) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {"candidate": c.candidate_id, "metric": m, "contribution": parts["weighted"]}
            for c in result.ranked
            for m, parts in c.breakdown.items()
        ]
    )


def render_query_tab(data_provider: ArtifactProvider, weights: ScoreWeights):
    """
    Render the Query tab

    Args:
        data_provider: The artefact provider instance
        weights: Score weights chosen in the sidebar
    """
    st.markdown("### Query")
    idx = data_provider.get_index()
    if len(idx) < 2:
        st.info("The index needs at least two sequences to query.")
        return

    col1, col2, col3 = st.columns([2, 1, 1])
    with col1:
        query_id = st.selectbox("Query sequence", idx.ids, key="query_id")
    with col2:
        k = st.number_input("Top k", min_value=1, max_value=len(idx) - 1, value=min(10, len(idx) - 1))
    with col3:
        backend = st.radio("Back-end", [b.value for b in Backend], horizontal=True)

    result = data_provider.query(query_id, int(k), Backend(backend), weights)
    query_label = idx.get(query_id).label
    st.caption(
        f"Label **{query_label or '-'}** · {result.n_candidates} candidates scored · "
        f"Stage 1 {1000 * result.timing['stage1_s']:.1f} ms · Stage 2 {1000 * result.timing['stage2_s']:.1f} ms"
    )

    frame = result_frame(result)
    st.dataframe(
        frame.style.apply(
            lambda row: ["font-weight: bold" if row["label"] == query_label else "" for _ in row], axis=1
        ),
        hide_index=True,
        use_container_width=True,
        column_config={"score": st.column_config.ProgressColumn("Score", min_value=0.0, max_value=1.0, format="%.4f")},
    )

    st.plotly_chart(
        px.bar(
            contribution_frame(result),
            x="candidate",
            y="contribution",
            color="metric",
            title="Score contributions (weight × phi)",
        ),
        use_container_width=True,
    )

    detail_col, button_col = st.columns([3, 1])
    with detail_col:
        chosen = st.selectbox("Candidate details", result.ids, key="candidate_for_dialog")
    with button_col:
        if st.button("Show distances", key="show_candidate_btn", type="primary"):
            st.session_state.show_candidate_dialog = True
            st.session_state.candidate_dialog_data = {
                "query_id": query_id,
                "candidate": next(c for c in result.ranked if c.candidate_id == chosen),
            }
            st.rerun()
