"""Legacy ASCII VTK unstructured-grid snapshots."""

from __future__ import annotations

import numpy as np

from .mesh import Mesh

VTK_QUAD = 9


def _block(values: np.ndarray) -> str:
    return "\n".join(" ".join(f"{v:.10g}" for v in row) for row in np.atleast_2d(values))


def write_vtk(path, mesh: Mesh, point_data: dict | None = None, cell_data: dict | None = None,
              title: str = "pffatigue snapshot") -> None:
    """
    Write nodes at (r, z, 0) with quad cells.

    Arrays of shape (n,) become scalars; (n, 2) or (n, 3) become vectors.
    """
    n, m = mesh.n_nodes, mesh.n_elements
    pts = np.column_stack([mesh.nodes, np.zeros(n)])
    lines = ["# vtk DataFile Version 3.0", title.replace("\n", " ")[:255], "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {n} double", _block(pts),
             f"CELLS {m} {5 * m}",
             _block(np.column_stack([np.full(m, 4), mesh.elements])),
             f"CELL_TYPES {m}", "\n".join([str(VTK_QUAD)] * m)]
    for kind, data, count in (("POINT_DATA", point_data, n), ("CELL_DATA", cell_data, m)):
        if not data:
            continue
        lines.append(f"{kind} {count}")
        for name, arr in data.items():
            arr = np.asarray(arr, dtype=float)
            if arr.shape[0] != count:
                raise ValueError(f"{name}: expected {count} values, got {arr.shape[0]}")
            if arr.ndim == 1:
                lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default", _block(arr[:, None])]
            else:
                if arr.shape[1] == 2:
                    arr = np.column_stack([arr, np.zeros(count)])
                lines += [f"VECTORS {name} double", _block(arr)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
