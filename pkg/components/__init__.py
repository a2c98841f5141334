"""
Components Package

This package contains the modular components of the motionprint dashboard.

Architecture:
- dialogs/     : Dialog components using @st.dialog
- data/        : Artefact providers (files on disk or an in-memory demo)
- ui/          : Main UI components (tabs, sidebar)

"""
