"""Command-line entry point.

Configuration is plain ``key = value`` text with ``#`` comments and dotted
namespaces; ``--set key=value`` flags override file values.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 verify failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .energy import evaluate
from .flow import SolverError, write_history_csv
from .grid import Grid, GridError, default_half_width, default_points
from .oracle import gausson_energy
from .potential import KINDS, EigenSolveError, PotentialError, PotentialSpec, bind, lowest_eigenpairs

log = logging.getLogger("logvar")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4
COMMANDS = ("ground", "excited", "verify", "spectrum", "sweep")


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


# key -> (parser, default); None default means "derived" or "required"
KEYS = {
    "command": (str, None),
    "grid.dim": (int, None),
    "grid.half_width": (float, None),
    "grid.points_per_axis": (int, None),
    "potential.kind": (str, None),
    "potential.v_infinity": (float, 0.0),
    "potential.depth": (float, 0.0),
    "potential.sigma": (float, 1.0),
    "potential.coefficient": (float, 1.0),
    "potential.table_path": (str, ""),
    "solver.tol": (float, 1e-8),
    "solver.max_iters": (int, 50_000),
    "solver.seed": (int, 0),
    "solver.p": (float, 2.0),
    "solver.init": (str, "bump"),
    "excited.count": (int, 3),
    "excited.strategy": (str, "symmetry"),
    "excited.k_max": (int, 8),
    "spectrum.k": (int, 8),
    "sweep.values": (_floats, "0,0.1,0.2,0.3,0.4,0.5"),
    "sweep.workers": (int, 1),
    "output.dir": (str, "out"),
}
ALIASES = {"p": "solver.p"}
REQUIRED = ("grid.dim", "potential.kind")


@dataclass
class RunConfig:
    command: str
    dim: int
    half_width: float
    points_per_axis: int
    kind: str
    v_infinity: float = 0.0
    depth: float = 0.0
    sigma: float = 1.0
    coefficient: float = 1.0
    table_path: str = ""
    tol: float = 1e-8
    max_iters: int = 50_000
    seed: int = 0
    p: float = 2.0
    init: str = "bump"
    count: int = 3
    strategy: str = "symmetry"
    k_max: int = 8
    spectrum_k: int = 8
    sweep_values: list = field(default_factory=lambda: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
    sweep_workers: int = 1
    out: str = "out"

    @property
    def grid(self) -> Grid:
        return Grid(self.dim, self.half_width, self.points_per_axis)

    def potential_spec(self, depth: float | None = None) -> PotentialSpec:
        if self.kind == "constant":
            return PotentialSpec.constant(self.v_infinity)
        if self.kind == "gaussian_well":
            return PotentialSpec.gaussian_well(self.depth if depth is None else depth, self.sigma, self.v_infinity)
        if self.kind == "harmonic":
            return PotentialSpec.harmonic(self.coefficient)
        values = [float(line) for line in Path(self.table_path).read_text().split() if line]
        return PotentialSpec.from_table(values, self.v_infinity)

    def to_json(self) -> dict:
        return asdict(self)


def _parse_value(key: str, raw: str, where: str):
    parser = KEYS[key][0]
    try:
        return parser(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: key {key!r}: cannot parse {raw.strip()!r} as {parser.__name__.lstrip('_')}") from exc


def _assign(values: dict, lines: dict, key: str, raw: str, where: str):
    key = ALIASES.get(key.strip(), key.strip())
    if key not in KEYS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    values[key] = _parse_value(key, raw, where)
    lines[key] = where


def parse_config(path=None, overrides=(), command=None, seed=None, out=None) -> RunConfig:
    values: dict = {}
    lines: dict = {}
    if path is not None:
        text = Path(path).read_bytes().decode("utf-8")
        for no, line in enumerate(text.splitlines(), 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path}:{no}: expected 'key = value'")
            key, raw = body.split("=", 1)
            _assign(values, lines, key, raw, f"{path}:{no}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, raw = item.split("=", 1)
        _assign(values, lines, key, raw, f"--set {key.strip()}")
    if command is not None:
        values["command"] = command
    if seed is not None:
        values["solver.seed"] = int(seed)
    if out is not None:
        values["output.dir"] = out

    for key in REQUIRED:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    cmd = values.get("command")
    if cmd is None:
        raise ConfigError("missing required key 'command'")
    if cmd not in COMMANDS:
        raise ConfigError(f"{lines.get('command', 'command')}: command must be one of {', '.join(COMMANDS)}")
    dim = values["grid.dim"]
    if dim not in (1, 2, 3):
        raise ConfigError(f"{lines['grid.dim']}: key 'grid.dim': dim must be 1, 2, or 3")
    kind = values["potential.kind"]
    if kind not in KINDS:
        raise ConfigError(f"{lines['potential.kind']}: key 'potential.kind': must be one of {', '.join(KINDS)}")

    def get(key):
        return values.get(key, KEYS[key][1])

    sweep = get("sweep.values")
    cfg = RunConfig(
        command=cmd,
        dim=dim,
        half_width=values.get("grid.half_width", default_half_width(dim)),
        points_per_axis=values.get("grid.points_per_axis", default_points(dim)),
        kind=kind,
        v_infinity=get("potential.v_infinity"),
        depth=get("potential.depth"),
        sigma=get("potential.sigma"),
        coefficient=get("potential.coefficient"),
        table_path=get("potential.table_path"),
        tol=get("solver.tol"),
        max_iters=get("solver.max_iters"),
        seed=get("solver.seed"),
        p=get("solver.p"),
        init=get("solver.init"),
        count=get("excited.count"),
        strategy=get("excited.strategy"),
        k_max=get("excited.k_max"),
        spectrum_k=get("spectrum.k"),
        sweep_values=_floats(sweep) if isinstance(sweep, str) else sweep,
        sweep_workers=get("sweep.workers"),
        out=get("output.dir"),
    )
    _validate(cfg, lines)
    return cfg


def _validate(cfg: RunConfig, lines: dict):
    def fail(key, message):
        where = lines.get(key)
        raise ConfigError(f"{where}: key {key!r}: {message}" if where else f"key {key!r}: {message}")

    try:
        cfg.grid
    except GridError as exc:
        key = "grid.half_width" if "half_width" in str(exc) else "grid.points_per_axis"
        fail(key, str(exc))
    if not cfg.tol > 0:
        fail("solver.tol", "tol must be positive")
    if cfg.max_iters < 1:
        fail("solver.max_iters", "max_iters must be >= 1")
    if not cfg.p > 1:
        fail("solver.p", "p must exceed 1")
    if cfg.p != 2.0 and cfg.dim >= 2 and not cfg.p < cfg.dim:
        fail("solver.p", f"p must be < N = {cfg.dim}")
    if cfg.init not in ("bump", "random"):
        fail("solver.init", "init must be bump or random")
    if cfg.strategy not in ("symmetry", "deflation"):
        fail("excited.strategy", "strategy must be symmetry or deflation")
    if cfg.strategy == "symmetry" and cfg.command == "excited" and cfg.dim != 1:
        fail("excited.strategy", "symmetry strategy needs dim = 1")
    if cfg.count < 1:
        fail("excited.count", "count must be >= 1")
    if cfg.k_max < cfg.count:
        fail("excited.k_max", "k_max must be >= count")
    if cfg.kind == "table" and not cfg.table_path:
        fail("potential.table_path", "table potential needs potential.table_path")
    if cfg.kind == "gaussian_well" and (cfg.depth < 0 or not cfg.sigma > 0):
        fail("potential.depth", "gaussian_well needs depth >= 0 and sigma > 0")
    if not cfg.v_infinity > -1 and cfg.kind != "harmonic":
        fail("potential.v_infinity", "v_infinity must exceed -1")
    if cfg.command == "excited" and cfg.kind != "harmonic":
        fail("potential.kind", "excited needs a coercive (harmonic) potential")
    if cfg.sweep_workers < 1:
        fail("sweep.workers", "workers must be >= 1")


class Artifacts:
    def __init__(self, out: Path):
        self.out = out
        out.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.out / name

    def manifest(self, cfg: RunConfig, status: str):
        checksums = {name: io.sha256(self.out / name) for name in self.files}
        io.write_json(self.out / "manifest.json", {"config": cfg.to_json(), "status": status, "artifacts": checksums})


def _ground(cfg: RunConfig, art: Artifacts) -> int:
    from . import nehari, plaplace

    spec = cfg.potential_spec()
    grid = cfg.grid
    pot = bind(spec, grid)
    init = nehari.default_init(grid) if cfg.init == "bump" else nehari.random_init(grid, cfg.seed)
    if cfg.p != 2.0:
        u, report = plaplace.p_ground_state(pot, cfg.p, init=init, tol=cfg.tol, max_iters=cfg.max_iters)
    else:
        u, report = nehari.ground_state(pot, init=init, tol=cfg.tol, max_iters=cfg.max_iters)
    io.write_field(art.path("field.txt"), u)
    io.write_json(art.path("report.json"), report.to_json())
    write_history_csv(art.path("residual_history.csv"), report.residual_history)
    write_history_csv(art.path("energy_history.csv"), report.energy_history)
    if cfg.p == 2.0:
        io.write_json(art.path("energy.json"), evaluate(u, pot).to_json())
        if math.isfinite(spec.v_infinity):
            levels = nehari.levels_for(spec, grid, tol=cfg.tol, ground=u)
            io.write_json(art.path("levels.json"), levels.to_json())
    else:
        io.write_json(art.path("energy.json"), {"p": cfg.p, "total_J": plaplace.p_energy(u, pot, cfg.p)})
    return EXIT_OK


def _excited(cfg: RunConfig, art: Artifacts) -> int:
    from .multisol import build_scaffold, find_solutions

    pot = bind(cfg.potential_spec(), cfg.grid)
    scaffold = build_scaffold(pot, cfg.k_max, seed=cfg.seed)
    sols = find_solutions(pot, scaffold, cfg.count, cfg.strategy, tol=cfg.tol)
    names = []
    for i, e in enumerate(sols.entries):
        name = f"solution_{i}.txt"
        io.write_field(art.path(name), e.field)
        names.append(name)
    io.write_json(art.path("solutions.json"), sols.to_json(names))
    io.write_json(art.path("scaffold.json"), scaffold.to_json())
    if not sols.complete:
        log.warning("partial solution set: %s", sols.warning)
        return EXIT_SOLVER
    return EXIT_OK


def _spectrum(cfg: RunConfig, art: Artifacts) -> int:
    spec = lowest_eigenpairs(bind(cfg.potential_spec(), cfg.grid), cfg.spectrum_k, seed=cfg.seed)
    io.write_json(art.path("spectrum.json"), spec.to_json())
    return EXIT_OK


def _sweep_row(args):
    cfg, depth = args
    from . import nehari
    from .energy import total_energy

    spec = cfg.potential_spec(depth=depth) if cfg.kind == "gaussian_well" else PotentialSpec.gaussian_well(depth, cfg.sigma, cfg.v_infinity)
    pot = bind(spec, cfg.grid)
    u, _ = nehari.ground_state(pot, tol=cfg.tol, max_iters=cfg.max_iters)
    c_n = total_energy(u, pot)
    c_inf = gausson_energy(cfg.dim, spec.v_infinity)
    return depth, c_n, c_inf, c_inf - c_n


def _sweep(cfg: RunConfig, art: Artifacts) -> int:
    jobs = [(cfg, float(a)) for a in cfg.sweep_values]
    if cfg.sweep_workers > 1:
        with ProcessPoolExecutor(cfg.sweep_workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    with open(art.path("sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["A", "c_N", "c_infinity", "gap"])
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
    return EXIT_OK


def _verify(cfg: RunConfig, art: Artifacts) -> int:
    from .acceptance import run_all

    results = run_all(seed=cfg.seed)
    for r in results:
        print(r.line())
    io.write_json(art.path("verify.json"), [r.to_json() for r in results])
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


HANDLERS = {"ground": _ground, "excited": _excited, "spectrum": _spectrum, "sweep": _sweep, "verify": _verify}


def run(cfg: RunConfig) -> int:
    art = Artifacts(Path(cfg.out))
    try:
        code = HANDLERS[cfg.command](cfg, art)
    except (SolverError, EigenSolveError, PotentialError) as exc:
        log.error("%s failed: %s", cfg.command, exc)
        partial = getattr(exc, "report", None)
        if partial is not None:
            io.write_json(art.path("report.json"), partial.to_json())
        art.manifest(cfg, "partial")
        return EXIT_SOLVER
    art.manifest(cfg, "ok" if code == EXIT_OK else "partial")
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="logvar", description="Ground and excited states of the logarithmic Schrodinger equation.")
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key (repeatable)")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", type=int, help="random seed")
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.config is None and not any(s.split("=", 1)[0].strip() == "grid.dim" for s in overrides):
        # verify needs no problem description; supply a placeholder
        if args.command == "verify":
            overrides = ["grid.dim=1", "potential.kind=constant", *overrides]
    try:
        cfg = parse_config(args.config, overrides, command=args.command, seed=args.seed, out=args.out)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
