import pytest
import yaml

from pffatigue.config import (
    MANIFEST_FORMAT,
    ConfigError,
    build_campaign,
    load_config,
    material_of,
    parse_config,
    resolve,
    to_dict,
    with_max_cycles,
)
from pffatigue.homogeneous import Control
from pffatigue.material import PfModel, critical_point

BASE = {"version": 1, "material": {"preset": "ModelMaterial"}, "model": "AT1",
        "loading": {"values": [0.3, 0.5]}}


def cfg(**changes):
    data = {k: (dict(v) if isinstance(v, dict) else v) for k, v in BASE.items()}
    for key, value in changes.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key].update(value)
        else:
            data[key] = value
    return parse_config(data)


class TestSchema:
    def test_minimal(self):
        c = cfg()
        assert c.model is PfModel.AT1
        assert c.loading.ratios == [-1.0]

    @pytest.mark.parametrize("field,value,where", [
        ("material", {"nu": 0.7}, "material.nu"),
        ("material", {"E": -1.0}, "material.E"),
        ("material", {"preset": "Steel"}, "material.preset"),
        ("loading", {"values": [-0.1]}, "loading.values"),
        ("loading", {"ratios": [1.0]}, "loading.ratios"),
        ("fatigue", {"kappa": 2.0}, "fatigue.kappa"),
        ("model", "AT3", "model"),
        ("version", 2, "version"),
    ])
    def test_rejections_name_the_field(self, field, value, where):
        with pytest.raises(ConfigError) as err:
            cfg(**{field: value})
        assert where in str(err.value)

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="colour: Extra inputs"):
            cfg(colour="blue")

    def test_custom_material_needs_all_fields(self):
        with pytest.raises(ConfigError, match="preset"):
            cfg(material={"preset": None, "E": 1.0})

    def test_custom_material_needs_alpha0(self):
        with pytest.raises(ConfigError, match="alpha0"):
            cfg(material={"preset": None, "E": 1.0, "nu": 0.3, "Gc": 1.0, "ell": 0.3})

    def test_mesh_diameters(self):
        with pytest.raises(ConfigError, match="net diameter"):
            cfg(mesh={"D": 5.0, "d": 6.0})

    def test_not_a_mapping(self):
        with pytest.raises(ConfigError):
            parse_config([1, 2])


class TestFiles:
    def test_load(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text(yaml.safe_dump(BASE))
        assert load_config(p).name == "run"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "nope.yaml")

    def test_invalid_yaml(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text("version: [1\n")
        with pytest.raises(ConfigError, match="YAML"):
            load_config(p)

    def test_manifest_is_unwrapped(self):
        c = resolve(cfg())
        manifest = {"format": MANIFEST_FORMAT, "config": to_dict(c), "outputs": []}
        assert parse_config(manifest) == c


class TestResolve:
    def test_fills_preset(self):
        c = resolve(cfg(model="AT2"))
        assert c.material.ell == 0.1055
        assert c.fatigue.alpha0 == 100.0 and c.fatigue.sigma_e == 0.2

    def test_overrides_win(self):
        c = resolve(cfg(material={"ell": 0.5}, fatigue={"n": 3.0}))
        assert c.material.ell == 0.5 and c.fatigue.n == 3.0

    def test_idempotent(self):
        c = resolve(cfg())
        assert resolve(c) == c

    def test_fem_gets_default_mesh(self):
        c = resolve(cfg(solver={"kind": "fem"}))
        assert c.mesh is not None and c.mesh.ref_ratio == 5.0

    def test_dump_is_plain(self):
        text = yaml.safe_dump(to_dict(resolve(cfg())))
        assert "!!python" not in text


class TestCampaign:
    def test_relative_values(self):
        c = cfg()
        camp = build_campaign(c)
        sc, _ = critical_point(PfModel.AT1, material_of(c))
        assert camp.amplitudes == pytest.approx((0.3 * sc, 0.5 * sc))
        assert camp.fatigue.alpha_e == pytest.approx(0.02)

    def test_displacement_scales_by_strain(self):
        c = cfg(model="AT2", loading={"values": [0.5], "control": "DisplacementControl"})
        camp = build_campaign(c)
        _, ec = critical_point(PfModel.AT2, material_of(c))
        assert camp.control is Control.DISPLACEMENT
        assert camp.amplitudes[0] == pytest.approx(0.5 * ec)

    def test_absolute_values(self):
        camp = build_campaign(cfg(loading={"values": [250.0], "relative": False}))
        assert camp.amplitudes == (250.0,)

    def test_fem_campaign(self):
        camp = build_campaign(cfg(solver={"kind": "fem"}, mesh={"rho": 0.368}))
        assert camp.solver == "fem" and camp.notch.rho == 0.368

    def test_max_cycles_override(self):
        assert build_campaign(with_max_cycles(cfg(), 123)).max_cycles == 123
