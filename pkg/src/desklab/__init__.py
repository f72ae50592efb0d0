"""Desk-scale physics lab.

Exact state-vector simulation of post-selected interferometric atom
experiments, Bell correlation statistics, and reversible event-driven
hard-disk billiards.
"""
__version__ = "0.1.0"
