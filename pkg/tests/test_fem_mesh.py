import numpy as np
import pytest

from oracles import revolved_volume
from pffatigue.fem import (
    AxisymmetricProblem,
    NotchGeometry,
    elastic_scf,
    generate_notched_mesh,
    load_mesh,
    rectangle_mesh,
    save_mesh,
    severed,
    single_element_mesh,
)
from pffatigue.material import MaterialParams, PfModel, SplitKind

ELL = 0.315
MAT = MaterialParams(E=210e3, nu=0.3, Gc=13.0, ell=ELL)


@pytest.fixture(scope="module")
def kt2_mesh():
    return generate_notched_mesh(NotchGeometry(rho=1.016), ELL, 5.0)


class TestNotchGeometry:
    def test_defaults(self):
        g = NotchGeometry()
        assert g.half_length == pytest.approx(2 * 12.7)

    def test_surface_profile(self):
        g = NotchGeometry(rho=0.368)
        assert g.outer_radius(0.0) == pytest.approx(0.5 * g.d)
        assert g.outer_radius(g.flank_end + 1.0) == pytest.approx(0.5 * g.D)
        z = np.linspace(0.0, g.half_length, 400)
        assert np.all(np.diff(g.outer_radius(z)) >= -1e-12)

    @pytest.mark.parametrize("kw", [dict(d=13.0), dict(rho=0.0), dict(groove_angle=180.0),
                                    dict(rho=8.0), dict(length=1.0)])
    def test_rejects_invalid(self, kw):
        with pytest.raises(ValueError):
            NotchGeometry(**kw)


class TestNotchedMesh:
    def test_zero_refinement_rejected(self):
        with pytest.raises(ValueError):
            generate_notched_mesh(NotchGeometry(), ELL, 0.0)

    @pytest.mark.parametrize("rho", [1.016, 0.368, 0.107])
    def test_volume_matches_revolved_profile(self, rho):
        g = NotchGeometry(rho=rho)
        mesh = generate_notched_mesh(g, ELL, 5.0)
        vol = AxisymmetricProblem(mesh, MAT, PfModel.AT1, SplitKind.NO_TENSION).volume()
        assert vol == pytest.approx(revolved_volume(g.outer_radius, 0.0, g.half_length), rel=5e-3)

    def test_root_refinement(self, kt2_mesh):
        root = kt2_mesh.node_sets["root"][0]
        near = np.any(kt2_mesh.elements == root, axis=1)
        # sqrt(area) of the curved root elements slightly exceeds the edge target
        assert kt2_mesh.element_sizes()[near].max() <= ELL / 5.0 * 1.01

    def test_node_sets(self, kt2_mesh):
        nodes = kt2_mesh.nodes
        assert np.allclose(nodes[kt2_mesh.node_sets["axis"], 0], 0.0)
        assert np.allclose(nodes[kt2_mesh.node_sets["symmetry"], 1], 0.0)
        assert np.allclose(nodes[kt2_mesh.node_sets["top"], 1], kt2_mesh.length)
        assert nodes[kt2_mesh.node_sets["root"][0]] == pytest.approx([3.175, 0.0])

    def test_positive_jacobians(self, kt2_mesh):
        pb = AxisymmetricProblem(kt2_mesh, MAT, PfModel.AT1, SplitKind.NO_TENSION)
        assert np.all(pb.geo.dV > 0.0)

    def test_roundtrip(self, kt2_mesh, tmp_path):
        save_mesh(kt2_mesh, tmp_path / "m.json")
        back = load_mesh(tmp_path / "m.json")
        np.testing.assert_array_equal(back.nodes, kt2_mesh.nodes)
        np.testing.assert_array_equal(back.elements, kt2_mesh.elements)
        assert back.traction_scale == kt2_mesh.traction_scale
        assert set(back.node_sets) == set(kt2_mesh.node_sets)


class TestStressConcentration:
    def test_kt2_geometry(self, kt2_mesh):
        assert elastic_scf(kt2_mesh, MAT) == pytest.approx(2.0, rel=0.05)

    def test_kt5_geometry(self):
        mesh = generate_notched_mesh(NotchGeometry(rho=0.107), ELL, 5.0)
        assert elastic_scf(mesh, MAT) == pytest.approx(5.0, rel=0.10)

    def test_ordering(self, kt2_mesh):
        k = [elastic_scf(generate_notched_mesh(NotchGeometry(rho=r), ELL, 5.0), MAT)
             for r in (1.016, 0.368, 0.107)]
        assert k[0] < k[1] < k[2]

    def test_smooth_bar_is_unity(self):
        mesh = rectangle_mesh(0.0, 1.0, 2.0, 4, 6)
        mesh.node_sets["root"] = mesh.node_sets["symmetry"][-1:]
        # displacements carry the residual stiffness factor (1 + k)
        assert elastic_scf(mesh, MAT) == pytest.approx(1.0 / (1.0 + MAT.k_residual), rel=1e-9)


class TestSeverance:
    def test_band_across_net_section(self, kt2_mesh):
        phi = np.zeros(kt2_mesh.n_nodes)
        assert not severed(kt2_mesh, phi)
        phi[kt2_mesh.node_sets["symmetry"]] = 1.0
        row1 = kt2_mesh.node_sets["symmetry"] + len(kt2_mesh.node_sets["symmetry"])
        phi[row1] = 1.0
        assert severed(kt2_mesh, phi)

    def test_partial_crack_not_severed(self, kt2_mesh):
        sym = kt2_mesh.node_sets["symmetry"]
        phi = np.zeros(kt2_mesh.n_nodes)
        outer = sym[len(sym) // 2:]
        phi[outer] = phi[outer + len(sym)] = 1.0
        assert not severed(kt2_mesh, phi)

    def test_mesh_without_sets(self):
        mesh = single_element_mesh()
        assert not severed(mesh, np.ones(mesh.n_nodes))


class TestRectangle:
    def test_counts(self):
        m = rectangle_mesh(0.0, 1.0, 1.0, 3, 2)
        assert m.n_nodes == 12 and m.n_elements == 6

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            rectangle_mesh(0.0, 1.0, 1.0, 0, 2)
