"""
Index Tab UI Component

Index statistics, periodicity counts and the entry table.
"""

import plotly.express as px
import streamlit as st

from components.data.data_providers import ArtifactProvider


def render_index_tab(data_provider: ArtifactProvider):
    """
    Render the Index tab

    Args:
        data_provider: The artefact provider instance
    """
    st.markdown("### Index")
    stats = data_provider.get_index().stats()
    col1, col2, col3, col4 = st.columns(4)
    col1.metric("Sequences", stats["n_entries"])
    col2.metric("Classes", stats["n_labels"])
    col3.metric("Periodic", stats["n_periodic"])
    col4.metric("Mean length", f"{stats['mean_length']:.1f} words")

    entries = data_provider.index_frame()
    if entries.empty:
        st.info("The index is empty.")
        return

    left, right = st.columns(2)
    with left:
        st.plotly_chart(
            px.histogram(entries, x="length", nbins=30, title="Sequence length (motion words)"),
            use_container_width=True,
        )
    with right:
        per_label = entries.groupby("label", as_index=False).agg(
            entries=("id", "size"), periodic=("periodic", "sum")
        )
        st.plotly_chart(
            px.bar(per_label, x="label", y=["entries", "periodic"], barmode="group", title="Entries per class"),
            use_container_width=True,
        )

    label_filter = st.selectbox("Class", ["All"] + sorted(entries["label"].unique().tolist()))
    if label_filter != "All":
        entries = entries[entries["label"] == label_filter]
    st.dataframe(
        entries,
        hide_index=True,
        use_container_width=True,
        column_config={
            "id": st.column_config.TextColumn("ID", width="medium"),
            "label": st.column_config.TextColumn("Label", width="medium"),
            "length": st.column_config.NumberColumn("Words"),
            "periodic": st.column_config.CheckboxColumn("Periodic"),
            "distinct_words": st.column_config.NumberColumn("Distinct words"),
        },
    )
