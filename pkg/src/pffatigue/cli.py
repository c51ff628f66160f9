"""
Command-line interface
======================

``pffatigue run --config cfg.yaml``
    Run a campaign; writes ``results.csv``, ``manifest.yaml`` and, for FEM
    campaigns, VTK snapshots under ``vtk/``.
``pffatigue verify {invariants,table1,oracle}``
    Run a verification suite; exits nonzero if any check fails.
``pffatigue mesh --config cfg.yaml``
    Generate the notched mesh of a configuration (JSON + VTK).
``pffatigue presets``
    List the built-in materials.

The manifest written by ``run`` is itself a valid ``--config`` input and
reproduces the run.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import yaml

from . import __version__
from .config import (MANIFEST_FORMAT, ConfigError, build_campaign, load_config, resolve,
                     to_dict, with_max_cycles, with_output)
from .study import material_presets, sn_curve, write_csv

log = logging.getLogger("pffatigue")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pffatigue", description=__doc__.split("\n\n")[0].strip(),
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a configured campaign")
    run.add_argument("--config", required=True, help="YAML configuration or manifest")
    run.add_argument("--out", help="output directory (overrides output.directory)")
    run.add_argument("--threads", type=int, help="worker processes (overrides threads)")
    run.add_argument("--max-cycles-override", type=int, metavar="N",
                     help="cap on cycles per point (overrides loading.max_cycles)")

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("suite", choices=("invariants", "table1", "oracle"))
    ver.add_argument("--config", help="configuration supplying seed and threads")
    ver.add_argument("--threads", type=int, default=None)

    mesh = sub.add_parser("mesh", help="generate and write a notched mesh")
    mesh.add_argument("--config", required=True)
    mesh.add_argument("--out", help="output directory (overrides output.directory)")

    sub.add_parser("presets", help="list built-in material presets")
    return p


def _setup_logging(level: int) -> None:
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg = with_output(cfg, args.out)
    if args.max_cycles_override is not None:
        if args.max_cycles_override < 1:
            raise ConfigError("--max-cycles-override must be >= 1")
        cfg = with_max_cycles(cfg, args.max_cycles_override)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = cfg.model_copy(update={"threads": args.threads})
    cfg = resolve(cfg)
    _setup_logging(cfg.log_level())
    try:
        campaign = build_campaign(cfg)
    except ValueError as err:
        raise ConfigError(f"invalid campaign: {err}") from None

    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    log.info("running %d grid points with the %s solver", len(campaign.grid()), campaign.solver)
    vtk_root = out / "vtk" if campaign.solver == "fem" else None
    points = sn_curve(campaign, cfg.threads, snapshot_root=vtk_root)
    write_csv(out / "results.csv", campaign, points)
    outputs = ["results.csv"]
    if vtk_root is not None and vtk_root.exists():
        outputs += sorted(str(p.relative_to(out)) for p in vtk_root.rglob("*.vtk"))
    manifest = {"format": MANIFEST_FORMAT, "tool": "pffatigue", "tool_version": __version__,
                "config": to_dict(cfg), "outputs": outputs}
    with open(out / "manifest.yaml", "w") as fh:
        yaml.safe_dump(manifest, fh, sort_keys=False)
    for p in points:
        if p.error:
            log.warning("point %g (R=%g) failed: %s", p.amplitude_or_max, p.R, p.error)
    log.info("wrote %s", out / "results.csv")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    seed, threads = 0, 1
    if args.config:
        cfg = load_config(args.config)
        seed, threads = cfg.seed, cfg.threads
    if args.threads is not None:
        threads = args.threads
    checks = run_suite(args.suite, threads=threads, seed=seed)
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_FAILED if failed else EXIT_OK


def cmd_mesh(args) -> int:
    from .fem import NotchGeometry, generate_notched_mesh, save_mesh, write_vtk

    cfg = resolve(load_config(args.config))
    g = cfg.mesh
    if g is None:
        raise ConfigError("configuration has no mesh section")
    try:
        geom = NotchGeometry(D=g.D, d=g.d, rho=g.rho, groove_angle=g.groove_angle,
                             length=g.length)
        mesh = generate_notched_mesh(geom, cfg.material.ell, g.ref_ratio, growth=g.growth,
                                     root_divisions=g.root_divisions)
    except ValueError as err:
        raise ConfigError(f"mesh: {err}") from None
    out = Path(args.out or cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    save_mesh(mesh, out / "mesh.json")
    write_vtk(out / "mesh.vtk", mesh, title="notched mesh")
    print(f"{mesh.n_nodes} nodes, {mesh.n_elements} elements -> {out / 'mesh.json'}")
    return EXIT_OK


def cmd_presets(args) -> int:
    rows = [("name", "E [MPa]", "nu", "Gc [N/mm]", "ell [mm]", "sigma_e", "alpha0", "n",
             "kappa")]
    for p in material_presets().values():
        ells = sorted({v for v in p.ell.values()})
        ell = "/".join(f"{v:g}" for v in ells) if len(ells) > 1 else f"{ells[0]:g}"
        rows.append((p.name, f"{p.E:g}", f"{p.nu:g}", f"{p.Gc:g}", ell, f"{p.sigma_e:g}",
                     f"{p.alpha0:g}", f"{p.n:g}", f"{p.kappa:g}"))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "mesh": cmd_mesh, "presets": cmd_presets}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        return 130
    except BrokenPipeError:
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
