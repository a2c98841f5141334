"""
motionprint Dashboard

Streamlit front end for browsing motionprint artefacts: codebook health, index
statistics, interactive queries and the evaluation protocol. The dashboard only reads
artefacts; it never writes them.

    DATA_SOURCE=files MOTIONPRINT_INDEX=out/index.json streamlit run main.py
"""

import os
from dataclasses import dataclass, field

import streamlit as st

# Page configuration - must be first Streamlit command
st.set_page_config(
    page_title="motionprint",
    page_icon="🕺",
    layout="wide",
    initial_sidebar_state="expanded",
)

from components.data.data_providers import ArtifactProvider, get_data_provider  # noqa: E402
from components.ui.codebook_tab import render_codebook_tab  # noqa: E402
from components.ui.eval_tab import render_eval_tab  # noqa: E402
from components.ui.index_tab import render_index_tab  # noqa: E402
from components.ui.query_tab import render_query_tab  # noqa: E402
from components.ui.sidebar import render_sidebar  # noqa: E402
from motionprint.engine import ScoreWeights  # noqa: E402


@dataclass
class AppConfig:
    """Centralized configuration for the application"""
    # Data source configuration: "demo" or "files"
    DATA_SOURCE: str = field(default_factory=lambda: os.getenv("DATA_SOURCE", "demo"))

    # Artefact paths (files mode)
    INDEX_PATH: str = field(default_factory=lambda: os.getenv("MOTIONPRINT_INDEX", ""))
    CODEBOOK_PATH: str = field(default_factory=lambda: os.getenv("MOTIONPRINT_CODEBOOK", ""))
    ENGINE_CONFIG_PATH: str = field(default_factory=lambda: os.getenv("MOTIONPRINT_ENGINE_CONFIG", ""))


config = AppConfig()


def render_header():
    """Render the main header"""
    st.markdown("## 🕺 motionprint")
    st.caption("Motion-word fingerprints · histogram shortlist · alignment re-ranking")


def render_navigation_tabs():
    """Render the navigation tabs"""
    return st.tabs(["Codebook", "Index", "Query", "Evaluation"])


def render_main_content(data_provider: ArtifactProvider, weights: ScoreWeights):
    """Render the main content area with tabs"""
    codebook_tab, index_tab, query_tab, eval_tab = render_navigation_tabs()

    with codebook_tab:
        render_codebook_tab(data_provider)

    with index_tab:
        render_index_tab(data_provider)

    with query_tab:
        render_query_tab(data_provider, weights)

    with eval_tab:
        render_eval_tab(data_provider, weights)

    # one dialog at a time
    if st.session_state.get("show_candidate_dialog", False):
        from components.dialogs.candidate_dialog import candidate_dialog
        data = st.session_state.get("candidate_dialog_data", {})
        if data:
            candidate_dialog(data["query_id"], data["candidate"], "show_candidate_dialog")


def main():
    """Main application function"""
    data_provider = get_data_provider(
        config.DATA_SOURCE,
        config.INDEX_PATH or None,
        config.CODEBOOK_PATH or None,
        config.ENGINE_CONFIG_PATH or None,
    )
    if data_provider is None:
        st.stop()

    weights = render_sidebar(data_provider)
    render_header()
    render_main_content(data_provider, weights)


if __name__ == "__main__":
    main()
