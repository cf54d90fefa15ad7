"""Random k-SAT covers, Survey-Propagation type systems and moment computations."""
from __future__ import annotations

__version__ = "0.1.0"
