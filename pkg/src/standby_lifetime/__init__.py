"""Lifetime of an n-element cold-standby system with a single repair device"""

__version__ = "1.0.0"
