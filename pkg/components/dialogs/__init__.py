"""
Dialogs Package

This package contains dialog components using Streamlit's native @st.dialog decorator.
"""

from .candidate_dialog import candidate_dialog

__all__ = ["candidate_dialog"]
