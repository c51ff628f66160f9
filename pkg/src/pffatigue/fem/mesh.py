"""
Axisymmetric meshes
===================

Four-node quadrilateral meshes in the (r, z) half plane, a mapped
generator for V-notched cylindrical bars, simple rectangular meshes, the
JSON mesh format and the net-section severance test.

JSON format (``format: "pffatigue-mesh"``, ``version: 1``)::

    {"nodes": [[r, z], ...],
     "elements": [[n0, n1, n2, n3], ...],      # counter-clockwise in (r, z)
     "node_sets": {"axis": [...], "symmetry": [...], "top": [...], ...},
     "edge_sets": {"top": [[na, nb], ...]},
     "traction_scale": 1.0}

``traction_scale`` converts a nominal (net-section) stress into the
traction applied on the ``top`` edges.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

MESH_FORMAT = "pffatigue-mesh"
MESH_VERSION = 1


@dataclass
class Mesh:
    nodes: np.ndarray
    elements: np.ndarray
    node_sets: dict = field(default_factory=dict)
    edge_sets: dict = field(default_factory=dict)
    traction_scale: float = 1.0

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise ValueError("nodes must have shape (n, 2)")
        if self.elements.ndim != 2 or self.elements.shape[1] != 4:
            raise ValueError("elements must have shape (m, 4)")
        n = len(self.nodes)
        if self.elements.size and (self.elements.min() < 0 or self.elements.max() >= n):
            raise ValueError("element connectivity references missing nodes")
        if np.any(self.nodes[:, 0] < -1e-12):
            raise ValueError("axisymmetric meshes need r >= 0")
        self.node_sets = {k: np.asarray(v, dtype=np.int64) for k, v in self.node_sets.items()}
        self.edge_sets = {k: np.asarray(v, dtype=np.int64).reshape(-1, 2)
                          for k, v in self.edge_sets.items()}
        for name, ids in list(self.node_sets.items()) + list(self.edge_sets.items()):
            if ids.size and (ids.min() < 0 or ids.max() >= n):
                raise ValueError(f"set {name!r} references missing nodes")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def length(self) -> float:
        """Axial extent of the modelled half specimen."""
        return float(self.nodes[:, 1].max() - self.nodes[:, 1].min())

    def element_sizes(self) -> np.ndarray:
        """Square root of each element's (r, z) area."""
        x = self.nodes[self.elements]
        r, z = x[..., 0], x[..., 1]
        area = 0.5 * np.abs((r * np.roll(z, -1, axis=1) - np.roll(r, -1, axis=1) * z).sum(axis=1))
        return np.sqrt(area)

    def to_dict(self) -> dict:
        return {
            "format": MESH_FORMAT,
            "version": MESH_VERSION,
            "nodes": self.nodes.tolist(),
            "elements": self.elements.tolist(),
            "node_sets": {k: v.tolist() for k, v in self.node_sets.items()},
            "edge_sets": {k: v.tolist() for k, v in self.edge_sets.items()},
            "traction_scale": self.traction_scale,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Mesh":
        if data.get("format") != MESH_FORMAT:
            raise ValueError(f"not a {MESH_FORMAT} document")
        if data.get("version") != MESH_VERSION:
            raise ValueError(f"unsupported mesh version {data.get('version')}")
        return cls(np.array(data["nodes"], dtype=float).reshape(-1, 2),
                   np.array(data["elements"], dtype=np.int64).reshape(-1, 4),
                   data.get("node_sets", {}), data.get("edge_sets", {}),
                   float(data.get("traction_scale", 1.0)))


def save_mesh(mesh: Mesh, path) -> None:
    with open(path, "w") as fh:
        json.dump(mesh.to_dict(), fh)


def load_mesh(path) -> Mesh:
    with open(path) as fh:
        return Mesh.from_dict(json.load(fh))


@dataclass(frozen=True)
class NotchGeometry:
    """
    Circumferential V-groove with a circular root.

    Attributes:
        D: gross diameter
        d: net diameter at the notch root
        rho: root radius
        groove_angle: included flank angle in degrees
        length: modelled half length (defaults to 2 D)
    """

    D: float = 12.7
    d: float = 6.35
    rho: float = 1.016
    groove_angle: float = 60.0
    length: float | None = None

    def __post_init__(self):
        if not 0 < self.d < self.D:
            raise ValueError(f"need 0 < d < D, got d={self.d}, D={self.D}")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not 0 < self.groove_angle < 180:
            raise ValueError("groove_angle must lie in (0, 180)")
        pr, _ = self.tangent_point
        if pr >= 0.5 * self.D:
            raise ValueError(f"root radius {self.rho} too large for the groove depth")
        if self.half_length <= self.flank_end:
            raise ValueError("specimen length shorter than the notch")

    @property
    def half_length(self) -> float:
        return 2.0 * self.D if self.length is None else float(self.length)

    @property
    def _beta(self) -> float:
        return math.radians(0.5 * self.groove_angle)

    @property
    def tangent_point(self) -> tuple[float, float]:
        """Where the root arc meets the flank."""
        theta = 0.5 * math.pi - self._beta
        a = 0.5 * self.d
        return a + self.rho * (1.0 - math.cos(theta)), self.rho * math.sin(theta)

    @property
    def flank_end(self) -> float:
        pr, pz = self.tangent_point
        return pz + (0.5 * self.D - pr) * math.tan(self._beta)

    def outer_radius(self, z) -> np.ndarray:
        """Specimen surface radius as a function of the axial coordinate."""
        z = np.abs(np.asarray(z, dtype=float))
        a, R, rho = 0.5 * self.d, 0.5 * self.D, self.rho
        pr, pz = self.tangent_point
        arc = a + rho - np.sqrt(np.maximum(rho**2 - np.minimum(z, rho) ** 2, 0.0))
        flank = pr + (z - pz) / math.tan(self._beta)
        return np.where(z <= pz, arc, np.where(z <= self.flank_end, flank, R))


def _graded(start: float, h0: float, h1: float, length: float, growth: float) -> np.ndarray:
    """Offsets from 0 to ``length``: sizes grow from h0 by ``growth`` up to h1."""
    pts = [0.0]
    h = h0
    while pts[-1] < length:
        pts.append(pts[-1] + h)
        h = min(h * growth, h1)
    pts = np.array(pts)
    # snap the last point onto the end, merging a tiny remainder
    if len(pts) > 2 and length - pts[-2] < 0.5 * (pts[-2] - pts[-3]):
        pts = pts[:-1]
    pts[-1] = length
    return start + pts


def generate_notched_mesh(geom: NotchGeometry, ell: float, ref_ratio: float = 10.0,
                          growth: float = 1.15, max_size: float | None = None,
                          root_divisions: float = 16.0) -> Mesh:
    """
    Mapped mesh of the upper half of a notched bar.

    Radial lines are uniform (size ell / ref_ratio) along the net section and
    graded down toward the root; axial rows grow away from the symmetry
    plane. Node (i, j) sits at r = eta_i * R(z_j), z = z_j where R is the
    specimen surface. The root element size is min(ell / ref_ratio, rho / root_divisions).
    """
    if not ref_ratio > 0:
        raise ValueError(f"ref_ratio must be positive, got {ref_ratio}")
    if not ell > 0:
        raise ValueError("ell must be positive")
    a, R = 0.5 * geom.d, 0.5 * geom.D
    h0 = ell / ref_ratio
    h_root = min(h0, geom.rho / root_divisions)
    h_max = max_size if max_size is not None else max(h0, R / 6.0)

    # radial stations at the net section, from the root inward
    depth = _graded(0.0, h_root, h0, a, growth)
    r_net = np.sort(a - depth)
    r_net[0] = 0.0
    eta = r_net / a

    zs = _graded(0.0, h_root, h_max, geom.half_length, growth)
    nr, nz = len(eta), len(zs)
    R_out = geom.outer_radius(zs)
    rr = eta[None, :] * R_out[:, None]
    zz = np.broadcast_to(zs[:, None], rr.shape)
    nodes = np.column_stack([rr.ravel(), zz.ravel()])

    idx = np.arange(nr * nz).reshape(nz, nr)
    elements = np.column_stack([idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel(),
                                idx[1:, 1:].ravel(), idx[1:, :-1].ravel()])
    top = idx[-1]
    notch = idx[zs <= geom.flank_end + 1e-12, -1]
    node_sets = {
        "axis": idx[:, 0],
        "symmetry": idx[0],
        "top": top,
        "surface": idx[:, -1],
        "notch": notch,
        "root": idx[:1, -1],
    }
    edge_sets = {"top": np.column_stack([top[:-1], top[1:]])}
    return Mesh(nodes, elements, node_sets, edge_sets, traction_scale=(a / R) ** 2)


def rectangle_mesh(r0: float, r1: float, height: float, nr: int, nz: int) -> Mesh:
    """Uniform nr x nz mesh of [r0, r1] x [0, height]."""
    if nr < 1 or nz < 1:
        raise ValueError("need at least one element in each direction")
    if not 0 <= r0 < r1 or not height > 0:
        raise ValueError("invalid rectangle")
    r = np.linspace(r0, r1, nr + 1)
    z = np.linspace(0.0, height, nz + 1)
    rr, zz = np.meshgrid(r, z)
    nodes = np.column_stack([rr.ravel(), zz.ravel()])
    idx = np.arange((nr + 1) * (nz + 1)).reshape(nz + 1, nr + 1)
    elements = np.column_stack([idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel(),
                                idx[1:, 1:].ravel(), idx[1:, :-1].ravel()])
    sets = {"symmetry": idx[0], "top": idx[-1], "surface": idx[:, -1]}
    if r0 == 0.0:
        sets["axis"] = idx[:, 0]
    edges = {"top": np.column_stack([idx[-1, :-1], idx[-1, 1:]])}
    return Mesh(nodes, elements, sets, edges)


def single_element_mesh(radius: float = 1.0, height: float = 1.0) -> Mesh:
    """One element on the axis: a solid cylinder under uniform axial load."""
    return rectangle_mesh(0.0, radius, height, 1, 1)


def element_adjacency(mesh: Mesh):
    """Sparse element-to-element graph for elements sharing an edge."""
    el = mesh.elements
    edges = np.stack([el, np.roll(el, -1, axis=1)], axis=-1).reshape(-1, 2)
    edges = np.sort(edges, axis=1)
    owner = np.repeat(np.arange(len(el)), 4)
    key = edges[:, 0] * mesh.n_nodes + edges[:, 1]
    order = np.argsort(key, kind="stable")
    k, o = key[order], owner[order]
    same = np.flatnonzero(k[1:] == k[:-1])
    a, b = o[same], o[same + 1]
    m = len(el)
    data = np.ones(2 * len(a))
    return coo_matrix((data, (np.concatenate([a, b]), np.concatenate([b, a]))), shape=(m, m)).tocsr()


def severed(mesh: Mesh, phi: np.ndarray, threshold: float = 0.95,
            start: str = "notch", end: str = "axis", adjacency=None) -> bool:
    """
    True when elements with mean nodal phi above ``threshold`` form a
    connected band touching both node sets.
    """
    if start not in mesh.node_sets or end not in mesh.node_sets:
        return False
    broken = phi[mesh.elements].mean(axis=1) > threshold
    if not broken.any():
        return False
    adj = adjacency if adjacency is not None else element_adjacency(mesh)
    sub = np.flatnonzero(broken)
    _, labels = connected_components(adj[sub][:, sub], directed=False)
    touches_start = np.isin(mesh.elements[sub], mesh.node_sets[start]).any(axis=1)
    touches_end = np.isin(mesh.elements[sub], mesh.node_sets[end]).any(axis=1)
    return bool(np.intersect1d(labels[touches_start], labels[touches_end]).size)
