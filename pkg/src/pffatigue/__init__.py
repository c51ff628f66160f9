"""Phase field model for high-cycle fatigue: homogeneous and axisymmetric FEM solvers."""

__version__ = "0.1.0"
