"""
motionprint

Skeleton motion to motion-word fingerprints, and two-stage retrieval over them.
"""

__version__ = "0.1.0"
