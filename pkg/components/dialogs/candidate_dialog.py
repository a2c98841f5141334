"""
Candidate Dialog Component

This module provides a dialog with every raw distance between the query and one
candidate, the DTW diagnostic included.
"""

import pandas as pd
import streamlit as st

from motionprint.engine import RankedCandidate


@st.dialog("🔍 Candidate details", width="large")
def candidate_dialog(query_id: str, candidate: RankedCandidate, session_key: str = "show_candidate_dialog"):
    """
    Render the candidate detail dialog

    Args:
        query_id: The query sequence id
        candidate: The ranked candidate to show
        session_key: Session flag cleared when the dialog closes
    """
    st.markdown(f"**{query_id}** → **{candidate.candidate_id}** ({candidate.label or 'unlabeled'})")
    st.metric("Combined score", f"{candidate.score:.4f}")

    rows = []
    for metric, parts in candidate.breakdown.items():
        rows.append({
            "metric": metric,
            "raw": (candidate.raw or {}).get(metric),
            "phi": parts["phi"],
            "weighted": parts["weighted"],
        })
    if candidate.raw and "dtw" in candidate.raw:
        rows.append({"metric": "dtw (diagnostic)", "raw": candidate.raw["dtw"], "phi": None, "weighted": None})
    st.dataframe(pd.DataFrame(rows), hide_index=True, use_container_width=True)
    st.caption("LCSS raw is the common subsequence length; the histogram term has no raw distance.")

    if st.button("Close", key="close_candidate_dialog"):
        st.session_state[session_key] = False
        st.rerun()
