"""Axisymmetric finite element solver for notched and smooth bars."""

from .assembly import AxisymmetricProblem, element_geometry, elasticity_matrix
from .mesh import (
    Mesh,
    NotchGeometry,
    element_adjacency,
    generate_notched_mesh,
    load_mesh,
    rectangle_mesh,
    save_mesh,
    severed,
    single_element_mesh,
)
from .simulation import FemResult, FieldState, constraints, run_fatigue_fem
from .solver import SolverOptions, StepResult, bfgs_solve
from .stress import elastic_scf
from .vtk import write_vtk

__all__ = [
    "AxisymmetricProblem", "FemResult", "FieldState", "Mesh", "NotchGeometry", "SolverOptions",
    "StepResult", "bfgs_solve", "constraints", "elastic_scf", "elasticity_matrix",
    "element_adjacency", "element_geometry", "generate_notched_mesh", "load_mesh",
    "rectangle_mesh", "run_fatigue_fem", "save_mesh", "severed", "single_element_mesh",
    "write_vtk",
]
