"""Command-line front end: config files, scenario presets, sweeps, output layout.

The config format is flat ``key = value`` text. ``#`` starts a comment,
blank lines are skipped, keys are dotted paths (``material.beta``),
duplicate and unknown keys are rejected. ``slfem scenarios`` prints the
presets with every default; the README documents the schema bit-exactly.

Output layout, per run: <output_dir>/<scenario>/<tag>/ containing
iterations.txt, radial.csv, opening.csv, field.vtk and manifest.txt.
The manifest is written last, atomically, and lists exactly the files
that exist. Identical configs produce identical bytes in every file;
nothing time- or path-dependent is serialized.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .constitutive import MaterialModel
from .fem import LoadSpec, mode1_constraints
from .mesh import MeshSpec, generate_mesh, validate_mesh
from .picard import IterationReport, SolverConfig, solve
from .postprocess import (
    PathSpec,
    crack_opening,
    export_csv,
    export_vtk,
    radial_samples,
)

SCENARIOS = {
    "fiber-x": 0.0,
    "fiber-y": math.pi / 2.0,
}

# Canonical sweep lists, selected by the literal value `default`.
DEFAULT_SWEEPS = {
    "beta": (0.0, 0.1, 1.0, 10.0),
    "alpha": (0.5, 1.0, 2.0),
    "sigma_top": (0.05, 0.1, 0.2),
}

_RUN_FILES = ("iterations.txt", "radial.csv", "opening.csv", "field.vtk")


class ConfigError(Exception):
    """Raised for unreadable, unknown, duplicated, or out-of-range config input."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved inputs for one invocation (before sweep expansion)."""

    scenario: str
    mesh: MeshSpec
    material: MaterialModel
    load: LoadSpec
    solver: SolverConfig
    path: PathSpec
    output_dir: str
    sweep: tuple[str, tuple[float, ...]] | None = None


@dataclass
class RunManifest:
    """Per-sweep-point record; serialized to manifest.txt without wall_time_s."""

    scenario: str
    tag: str
    converged: bool
    report: IterationReport | None
    error: str | None
    files: list[str]
    config_lines: list[str]
    wall_time_s: float

    def to_text(self) -> str:
        lines = [
            f"scenario: {self.scenario}",
            f"tag: {self.tag}",
            f"converged: {'true' if self.converged else 'false'}",
        ]
        if self.report is not None:
            lines.append(f"iterations: {self.report.iterations_used}")
            lines.append(f"final_residual: {self.report.residuals[-1]:.17g}")
            lines.append(f"clamped_total: {sum(self.report.clamp_counts)}")
        lines.append(f"error: {self.error if self.error else '(none)'}")
        lines.append("files: " + (", ".join(self.files) if self.files else "(none)"))
        lines.append("config:")
        lines.extend(f"  {entry}" for entry in self.config_lines)
        return "\n".join(lines) + "\n"


def _parse_lines(text: str) -> dict[str, str]:
    seen: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        seen[key] = value
    return seen


def _take_float(raw: dict[str, str], key: str, fallback: float) -> float:
    if key not in raw:
        return fallback
    value = raw.pop(key)
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"config key {key}: not a number: {value!r}") from None


def _take_int(raw: dict[str, str], key: str, fallback: int) -> int:
    if key not in raw:
        return fallback
    value = raw.pop(key)
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"config key {key}: not an integer: {value!r}") from None


def _take_sweep(raw: dict[str, str], key: str) -> tuple[float, ...] | None:
    if key not in raw:
        return None
    value = raw.pop(key)
    axis = key.split(".", 1)[1]
    if value == "default":
        return DEFAULT_SWEEPS[axis]
    try:
        values = tuple(float(part) for part in value.split(","))
    except ValueError:
        raise ConfigError(f"config key {key}: expected comma-separated numbers or 'default'") from None
    if not values:
        raise ConfigError(f"config key {key}: empty sweep list")
    return values


def _build(section: str, factory, kwargs):
    """Construct a validated dataclass, renaming failures to their config keys."""
    try:
        return factory(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"config section {section}: {exc}") from None


def parse_config(path: str) -> RunConfig:
    """Read and validate a config file; defaults fill everything not given."""
    try:
        with open(path, encoding="utf-8") as handle:
            raw = _parse_lines(handle.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from None

    scenario = raw.pop("scenario", "fiber-x")
    if scenario not in SCENARIOS and scenario != "custom":
        choices = ", ".join(sorted(SCENARIOS) + ["custom"])
        raise ConfigError(f"config key scenario: unknown scenario {scenario!r} (choose from {choices})")

    output_dir = raw.pop("output_dir", "out")

    mesh = _build("mesh", MeshSpec, dict(
        lx=_take_float(raw, "mesh.lx", 2.0),
        ly=_take_float(raw, "mesh.ly", 1.0),
        nx=_take_int(raw, "mesh.nx", 64),
        ny=_take_int(raw, "mesh.ny", 32),
        grading=_take_float(raw, "mesh.grading", 1.15),
        crack_tip=(_take_float(raw, "mesh.crack_tip_x", 1.0), 0.0),
    ))

    base = MaterialModel()
    engineering = [key for key in ("material.youngs", "material.poisson") if key in raw]
    lame = [key for key in ("material.mu", "material.lambda") if key in raw]
    if engineering and lame:
        raise ConfigError(
            "config keys " + ", ".join(engineering + lame)
            + ": give the moduli either as (youngs, poisson) or as (mu, lambda), not both"
        )
    if engineering:
        pair = _build("material", MaterialModel.from_engineering, dict(
            youngs=_take_float(raw, "material.youngs", 1.0),
            poisson=_take_float(raw, "material.poisson", 0.3),
        ))
        mu, lam = pair.mu, pair.lambda_lame
    else:
        mu = _take_float(raw, "material.mu", base.mu)
        lam = _take_float(raw, "material.lambda", base.lambda_lame)

    if scenario == "custom":
        if "material.fiber_angle" not in raw:
            raise ConfigError("config key material.fiber_angle: required when scenario = custom")
        fiber_angle = _take_float(raw, "material.fiber_angle", 0.0)
    else:
        if "material.fiber_angle" in raw:
            raise ConfigError(
                "config key material.fiber_angle: fixed by the scenario preset; use scenario = custom"
            )
        fiber_angle = SCENARIOS[scenario]

    material = _build("material", MaterialModel, dict(
        mu=mu,
        lambda_lame=lam,
        gamma=_take_float(raw, "material.gamma", base.gamma),
        beta=_take_float(raw, "material.beta", base.beta),
        alpha=_take_float(raw, "material.alpha", base.alpha),
        fiber_angle=fiber_angle,
    ))

    load = _build("load", LoadSpec, dict(
        sigma_top=_take_float(raw, "load.sigma_top", 0.1),
        body_force=(
            _take_float(raw, "load.body_force_x", 0.0),
            _take_float(raw, "load.body_force_y", 0.0),
        ),
    ))

    solver = _build("solver", SolverConfig, dict(
        tol=_take_float(raw, "solver.tol", 1e-6),
        max_iter=_take_int(raw, "solver.max_iter", 10),
        clamp_delta=_take_float(raw, "solver.clamp_delta", 1e-8),
        linear_rel_tol=_take_float(raw, "solver.linear_rel_tol", 1e-12),
        relaxation=_take_float(raw, "solver.relaxation", 1.0),
    ))

    defaults = PathSpec()
    r_min = _take_float(raw, "path.r_min", float("nan"))
    path_spec = _build("path", PathSpec, dict(
        r_max=_take_float(raw, "path.r_max", defaults.r_max),
        n_samples=_take_int(raw, "path.n_samples", defaults.n_samples),
        offset=_take_float(raw, "path.offset", float("nan")),
        r_min=r_min,
    ))
    # NaN marks "not given": fold back to the library's None fallbacks.
    path_spec = replace(
        path_spec,
        offset=None if math.isnan(path_spec.offset) else path_spec.offset,
        r_min=None if math.isnan(path_spec.r_min) else path_spec.r_min,
    )
    if not path_spec.r_max > 0.0:
        raise ConfigError(f"config key path.r_max: must be positive, got {path_spec.r_max:g}")
    if path_spec.n_samples < 2:
        raise ConfigError(f"config key path.n_samples: must be >= 2, got {path_spec.n_samples}")
    if path_spec.r_min is not None and not 0.0 < path_spec.r_min < path_spec.r_max:
        raise ConfigError(
            f"config key path.r_min: must lie in (0, r_max), got {path_spec.r_min:g}"
        )

    sweeps = {
        "beta": _take_sweep(raw, "sweep.beta"),
        "alpha": _take_sweep(raw, "sweep.alpha"),
        "sigma_top": _take_sweep(raw, "sweep.sigma_top"),
    }
    active = [(axis, values) for axis, values in sweeps.items() if values is not None]
    if len(active) > 1:
        names = ", ".join("sweep." + axis for axis, _ in active)
        raise ConfigError(f"config keys {names}: one sweep axis per run")
    sweep = active[0] if active else None

    if raw:
        unknown = sorted(raw)
        raise ConfigError("unknown config key" + ("s: " if len(unknown) > 1 else ": ") + ", ".join(unknown))

    config = RunConfig(
        scenario=scenario,
        mesh=mesh,
        material=material,
        load=load,
        solver=solver,
        path=path_spec,
        output_dir=output_dir,
        sweep=sweep,
    )
    _expand_sweep(config)  # validate every sweep variant before any solve
    return config


def _expand_sweep(config: RunConfig) -> list[tuple[str, MaterialModel, LoadSpec]]:
    """Sweep points as (tag, material, load); a single default point if no sweep."""
    if config.sweep is None:
        return [("default", config.material, config.load)]
    axis, values = config.sweep
    points = []
    for value in values:
        tag = f"{axis}-{value:g}"
        try:
            if axis == "sigma_top":
                points.append((tag, config.material, replace(config.load, sigma_top=value)))
            elif axis == "beta":
                points.append((tag, replace(config.material, beta=value), config.load))
            else:
                points.append((tag, replace(config.material, alpha=value), config.load))
        except ValueError as exc:
            raise ConfigError(f"config key sweep.{axis}: value {value:g}: {exc}") from None
    return points


def _config_lines(config: RunConfig, material: MaterialModel, load: LoadSpec) -> list[str]:
    """Resolved scalar settings, sorted, for the manifest. Paths stay out."""
    mesh, solver, path = config.mesh, config.solver, config.path
    entries = {
        "scenario": config.scenario,
        "mesh.lx": mesh.lx,
        "mesh.ly": mesh.ly,
        "mesh.nx": mesh.nx,
        "mesh.ny": mesh.ny,
        "mesh.grading": mesh.grading,
        "mesh.crack_tip_x": mesh.crack_tip[0],
        "material.mu": material.mu,
        "material.lambda": material.lambda_lame,
        "material.gamma": material.gamma,
        "material.beta": material.beta,
        "material.alpha": material.alpha,
        "material.fiber_angle": material.fiber_angle,
        "load.sigma_top": load.sigma_top,
        "load.body_force_x": load.body_force[0],
        "load.body_force_y": load.body_force[1],
        "solver.tol": solver.tol,
        "solver.max_iter": solver.max_iter,
        "solver.clamp_delta": solver.clamp_delta,
        "solver.linear_rel_tol": solver.linear_rel_tol,
        "solver.relaxation": solver.relaxation,
        "path.r_max": path.r_max,
        "path.n_samples": path.n_samples,
    }
    if path.r_min is not None:
        entries["path.r_min"] = path.r_min
    if path.offset is not None:
        entries["path.offset"] = path.offset

    def fmt(value):
        if isinstance(value, float):
            return f"{value:.17g}"
        return str(value)

    return [f"{key}: {fmt(value)}" for key, value in sorted(entries.items())]


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    os.replace(tmp, path)


def _run_point(config: RunConfig, tag: str, material: MaterialModel, load: LoadSpec) -> RunManifest:
    """Solve one sweep point and write its output directory."""
    started = time.perf_counter()
    run_dir = os.path.join(config.output_dir, config.scenario, tag)
    os.makedirs(run_dir, exist_ok=True)
    files: list[str] = []
    report = None
    error = None
    converged = False
    try:
        mesh = generate_mesh(config.mesh)
        diag = validate_mesh(mesh)
        if not diag.ok:
            raise RuntimeError("mesh validation failed: " + "; ".join(diag.failures))
        bcs = mode1_constraints(mesh)
        u, report = solve(mesh, material, load, bcs, config.solver)
        converged = report.converged

        _write_atomic(os.path.join(run_dir, "iterations.txt"), report.to_table())
        files.append("iterations.txt")
        if converged:
            samples = radial_samples(u, config.path, mesh, material)
            export_csv(samples, os.path.join(run_dir, "radial.csv"), sigma_top=load.sigma_top)
            files.append("radial.csv")
            export_csv(crack_opening(u, mesh), os.path.join(run_dir, "opening.csv"))
            files.append("opening.csv")
            export_vtk(u, mesh, material, os.path.join(run_dir, "field.vtk"))
            files.append("field.vtk")
        else:
            error = (
                f"did not converge: residual {report.residuals[-1]:.3g} after "
                f"{report.iterations_used} iterations (tol {config.solver.tol:g})"
            )
    except Exception as exc:  # record the failure; sibling sweep points continue
        error = f"{type(exc).__name__}: {exc}"

    manifest = RunManifest(
        scenario=config.scenario,
        tag=tag,
        converged=converged,
        report=report,
        error=error,
        files=files,
        config_lines=_config_lines(config, material, load),
        wall_time_s=time.perf_counter() - started,
    )
    _write_atomic(os.path.join(run_dir, "manifest.txt"), manifest.to_text())
    return manifest


def run(config: RunConfig, jobs: int = 1) -> list[RunManifest]:
    """Execute every sweep point; manifests come back in sweep order."""
    points = _expand_sweep(config)
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_point, config, tag, material, load)
                for tag, material, load in points
            ]
            return [future.result() for future in futures]
    return [_run_point(config, tag, material, load) for tag, material, load in points]


def list_scenarios() -> str:
    """Stable text listing of the presets, their bindings, and shared defaults."""
    mesh = MeshSpec()
    material = MaterialModel()
    solver = SolverConfig()
    lines = [
        "scenarios:",
        "  fiber-x   mode-I edge crack, fibers along the crack (fiber_angle = 0)",
        "  fiber-y   mode-I edge crack, fibers across the crack (fiber_angle = pi/2)",
        "  custom    same geometry, fiber_angle taken from material.fiber_angle",
        "",
        "shared defaults:",
        f"  mesh: {mesh.nx}x{mesh.ny} on {mesh.lx:g}x{mesh.ly:g}, tip at x = {mesh.crack_tip[0]:g}, "
        f"grading {mesh.grading:g}",
        f"  material: mu = {material.mu:g}, lambda = {material.lambda_lame:g}, "
        f"gamma = {material.gamma:g}, beta = {material.beta:g}, alpha = {material.alpha:g}",
        "  load: sigma_top = 0.1, body force 0",
        f"  solver: tol = {solver.tol:g}, max_iter = {solver.max_iter}, "
        f"relaxation = {solver.relaxation:g}",
        "",
        "sweep lists (value 'default'):",
    ]
    for axis, values in DEFAULT_SWEEPS.items():
        joined = ", ".join(f"{value:g}" for value in values)
        lines.append(f"  sweep.{axis} = {joined}")
    return "\n".join(lines) + "\n"


def _cmd_run(args) -> int:
    try:
        config = parse_config(args.config)
        if args.output_dir is not None:
            config = replace(config, output_dir=args.output_dir)
        manifests = run(config, jobs=args.jobs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    all_ok = True
    for manifest in manifests:
        status = "ok" if manifest.converged and manifest.error is None else "FAILED"
        all_ok = all_ok and status == "ok"
        detail = ""
        if manifest.report is not None:
            detail = (
                f" iterations={manifest.report.iterations_used}"
                f" residual={manifest.report.residuals[-1]:.3g}"
            )
        if manifest.error:
            detail += f" ({manifest.error})"
        print(
            f"{manifest.scenario}/{manifest.tag}: {status}{detail}"
            f" [{manifest.wall_time_s:.2f} s]"
        )
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slfem",
        description="Plane-strain crack solver for strain-limiting transversely isotropic elasticity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="execute the runs described by a config file")
    runp.add_argument("config", help="path to a key = value config file")
    runp.add_argument("--output-dir", default=None, help="override the config's output_dir")
    runp.add_argument("--jobs", type=int, default=1, help="parallel sweep-point processes")
    runp.add_argument(
        "--seed", type=int, default=None,
        help="reserved; accepted for interface stability (runs are deterministic)",
    )

    sub.add_parser("scenarios", help="list presets and their defaults")
    sub.add_parser("version", help="print the package version")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "scenarios":
        sys.stdout.write(list_scenarios())
        return 0
    if args.command == "version":
        from . import __version__

        print(f"slfem {__version__}")
        return 0
    return _cmd_run(args)


if __name__ == "__main__":
    raise SystemExit(main())
