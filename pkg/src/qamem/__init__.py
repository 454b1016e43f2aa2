"""Simulation and analysis toolkit for probabilistic quantum associative
memories: exact sparse circuit simulation of storage and retrieval,
amplitude amplification, effective thermodynamics of the retrieval
distribution, mean-field phase diagrams, and a classical Hopfield baseline.
"""

__version__ = "0.1.0"

from .patterns import Mask, Pattern, PatternSet  # noqa: F401
