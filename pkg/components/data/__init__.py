"""
Data Components Package

This package contains the artefact providers behind the dashboard.
"""
