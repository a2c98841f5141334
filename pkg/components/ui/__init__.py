"""
UI Components Package

This package contains the sidebar and the dashboard tabs.
"""
