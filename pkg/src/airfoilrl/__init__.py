"""Reinforcement-learning pipeline for supercritical airfoil drag reduction."""

__version__ = "0.1.0"
