"""Far-ray evaluation of solutions of f' = S e^P f + 1 by contour rerouting."""

__version__ = "0.1.0"
