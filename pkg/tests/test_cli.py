import csv

import pytest
import yaml

from pffatigue.cli import EXIT_CONFIG, EXIT_OK, main


def write(path, data):
    path.write_text(yaml.safe_dump(data))
    return path


SMOOTH = {"version": 1, "name": "smooth", "material": {"preset": "ModelMaterial"}, "model": "AT1",
          "loading": {"values": [0.15, 0.3, 0.5], "ratios": [-1, 0], "max_cycles": 100000}}


class TestRun:
    def test_one_row_per_grid_point(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", "--config", str(write(tmp_path / "c.yaml", SMOOTH)), "--out", str(out)]) == EXIT_OK
        rows = list(csv.DictReader(open(out / "results.csv")))
        assert len(rows) == 6
        assert [r["R"] for r in rows] == ["-1.0"] * 3 + ["0.0"] * 3
        assert rows[0]["runout"] == "1" and rows[1]["runout"] == "0"

    def test_manifest_reproduces_run(self, tmp_path):
        cfg = write(tmp_path / "c.yaml", SMOOTH)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "a")]) == EXIT_OK
        manifest = tmp_path / "a" / "manifest.yaml"
        data = yaml.safe_load(manifest.read_text())
        assert data["format"] == "pffatigue-manifest"
        assert data["config"]["material"]["ell"] == 0.375
        assert main(["run", "--config", str(manifest), "--out", str(tmp_path / "b")]) == EXIT_OK
        assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()

    def test_max_cycles_override(self, tmp_path):
        cfg = write(tmp_path / "c.yaml", SMOOTH)
        out = tmp_path / "o"
        assert main(["run", "--config", str(cfg), "--out", str(out), "--max-cycles-override", "50"]) == EXIT_OK
        rows = list(csv.DictReader(open(out / "results.csv")))
        assert all(int(r["N_f"]) <= 50 for r in rows)
        assert yaml.safe_load((out / "manifest.yaml").read_text())["config"]["loading"]["max_cycles"] == 50

    def test_invalid_poisson_ratio(self, tmp_path, capsys):
        bad = dict(SMOOTH, material={"preset": "ModelMaterial", "nu": 0.7})
        assert main(["run", "--config", str(write(tmp_path / "c.yaml", bad))]) == EXIT_CONFIG
        assert "material.nu" in capsys.readouterr().err

    def test_missing_config(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "none.yaml")]) == EXIT_CONFIG
        assert capsys.readouterr().err.startswith("error:")

    def test_bad_threads(self, tmp_path):
        cfg = write(tmp_path / "c.yaml", SMOOTH)
        assert main(["run", "--config", str(cfg), "--threads", "0"]) == EXIT_CONFIG


class TestNotchedRun:
    def test_vtk_snapshots(self, tmp_path):
        cfg = {"version": 1, "material": {"preset": "M300"}, "model": "AT1",
               "loading": {"values": [300.0], "relative": False, "mode": "max", "max_cycles": 10},
               "solver": {"kind": "fem"}, "mesh": {"rho": 0.107}, "output": {"snapshot_every": 5}}
        out = tmp_path / "fem"
        assert main(["run", "--config", str(write(tmp_path / "c.yaml", cfg)), "--out", str(out)]) == EXIT_OK
        snaps = sorted((out / "vtk" / "point_000").glob("*.vtk"))
        assert [p.name for p in snaps] == ["cycle_000000005.vtk", "cycle_000000010.vtk"]
        manifest = yaml.safe_load((out / "manifest.yaml").read_text())
        assert "vtk/point_000/cycle_000000010.vtk" in manifest["outputs"]


class TestOtherCommands:
    def test_presets(self, capsys):
        assert main(["presets"]) == EXIT_OK
        out = capsys.readouterr().out
        for name in ("AISI4340", "M300", "ModelMaterial"):
            assert name in out

    def test_mesh(self, tmp_path, capsys):
        cfg = dict(SMOOTH, mesh={"rho": 0.368})
        assert main(["mesh", "--config", str(write(tmp_path / "c.yaml", cfg)), "--out", str(tmp_path)]) == EXIT_OK
        assert (tmp_path / "mesh.json").exists() and (tmp_path / "mesh.vtk").exists()
        assert "elements" in capsys.readouterr().out

    def test_mesh_requires_section(self, tmp_path):
        assert main(["mesh", "--config", str(write(tmp_path / "c.yaml", SMOOTH))]) == EXIT_CONFIG

    def test_verify_oracle(self, capsys):
        assert main(["verify", "oracle"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "[PASS]  7" in out and "1/1 checks passed" in out

    def test_unknown_suite(self):
        with pytest.raises(SystemExit):
            main(["verify", "everything"])
