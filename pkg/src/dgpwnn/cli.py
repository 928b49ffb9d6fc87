"""Command-line entry point: run a configured experiment or a named preset.

A run is described by a flat YAML or JSON mapping, for example::

    problem: waveguide2d
    omega: 4pi
    divisions: 4
    schedule: growing
    width: 7

Numbers may be written as multiples of pi (``2pi``, ``pi/2``, ``0.5*pi``) and
complex values as Python literals (``1+1j``).
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .dglsq import assemble_system, write_system
from .galerkin import RunReport, WidthSchedule, run
from .mesh import InvalidConfigError, build_uniform_mesh
from .planewave import init_directions
from .problems import manufactured_plane_wave, maxwell_dipole, point_source_3d, waveguide_exact_2d
from .trainer import TrainConfig

PROBLEMS = ("waveguide2d", "point_source_3d", "maxwell_dipole", "manufactured_plane_wave")
SCHEDULES = ("fixed", "growing")

# problem -> defaults that differ from the RunSpec field defaults
PROBLEM_DEFAULTS = {
    "waveguide2d": {"divisions": 1, "width": 13},
    "manufactured_plane_wave": {"divisions": 1, "width": 7},
    "point_source_3d": {"divisions": 2, "width": 4},
    "maxwell_dipole": {"divisions": 2, "width": 3, "epsilon": 1 + 1j},
}

PRESETS = {
    "waveguide-fixed-width": dict(
        problem="waveguide2d", omega=2 * np.pi, divisions=1, schedule="fixed", width=14, max_iter=12, max_epochs=100
    ),
    "waveguide-growing-width": dict(
        problem="waveguide2d", omega=2 * np.pi, divisions=1, schedule="growing", width=3, max_iter=12, max_epochs=100
    ),
    "waveguide-multidomain": dict(
        problem="waveguide2d", omega=4 * np.pi, divisions=4, schedule="growing", width=7, max_iter=10, max_epochs=100
    ),
    "helmholtz3d-point": dict(
        problem="point_source_3d", omega=np.pi, divisions=2, schedule="growing", width=4, max_iter=4, max_epochs=20
    ),
    "maxwell-dipole": dict(
        problem="maxwell_dipole", omega=np.pi, epsilon=1 + 1j, mu=1.0, divisions=2, schedule="growing", width=3,
        max_iter=5, max_epochs=30,
    ),
}


@dataclass
class RunSpec:
    problem: str
    omega: float
    divisions: Optional[int] = None
    schedule: str = "growing"
    width: Optional[int] = None
    tol: float = 1e-6
    max_iter: int = 20
    max_epochs: int = 500
    grad_tol: float = 1e-6
    lr0: float = 0.01
    seed: int = 0
    alpha: Optional[float] = None
    beta: float = 1.0
    rho1: float = 1.0
    rho2: float = 1.0
    sigma: float = 1.0
    epsilon: complex = 1.0
    mu: float = 1.0
    mode: Optional[float] = None  # waveguide mode number k
    angle: float = 0.0  # manufactured plane wave direction (2D)
    quad_order: Optional[int] = None
    output: Optional[str] = None

    def train_config(self) -> TrainConfig:
        return TrainConfig(max_epochs=self.max_epochs, grad_tol=self.grad_tol, lr0=self.lr0, seed=self.seed)


_PI_RE = re.compile(r"^(?P<sign>[+-])?(?P<coef>(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?)?\*?pi(?:/(?P<den>\d+\.?\d*))?$")


def parse_number(value, name: str, kind=float):
    """Parse ints, floats, complex literals and multiples of pi."""
    if isinstance(value, bool):
        raise InvalidConfigError(f"field '{name}': expected a number, got {value!r}")
    if isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        out = value
    elif isinstance(value, str):
        s = value.strip().lower().replace(" ", "").replace("π", "pi")
        m = _PI_RE.match(s)
        if m:
            c = float(m.group("coef")) if m.group("coef") else 1.0
            if m.group("sign") == "-":
                c = -c
            out = c * np.pi / (float(m.group("den")) if m.group("den") else 1.0)
        else:
            try:
                out = complex(s) if kind is complex else float(s)
            except ValueError:
                raise InvalidConfigError(f"field '{name}': cannot parse number {value!r}") from None
    else:
        raise InvalidConfigError(f"field '{name}': expected a number, got {value!r}")
    if kind is int:
        if float(np.real(out)) != int(np.real(out)) or np.imag(out) != 0:
            raise InvalidConfigError(f"field '{name}': expected an integer, got {value!r}")
        return int(np.real(out))
    if kind is float:
        if np.imag(out) != 0:
            raise InvalidConfigError(f"field '{name}': expected a real number, got {value!r}")
        return float(np.real(out))
    return complex(out)


_KINDS = {
    "omega": float, "divisions": int, "width": int, "tol": float, "max_iter": int, "max_epochs": int,
    "grad_tol": float, "lr0": float, "seed": int, "alpha": float, "beta": float, "rho1": float, "rho2": float,
    "sigma": float, "epsilon": complex, "mu": float, "mode": float, "angle": float, "quad_order": int,
}


def spec_from_mapping(data: dict) -> RunSpec:
    """Validate a flat mapping and fill in defaults."""
    if not isinstance(data, dict):
        raise InvalidConfigError("run spec must be a mapping of field names to values")
    known = {f.name for f in fields(RunSpec)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InvalidConfigError(f"unknown field(s): {', '.join(unknown)}")
    if "problem" not in data or data["problem"] in (None, ""):
        raise InvalidConfigError(f"field 'problem' is required (one of {', '.join(PROBLEMS)})")
    problem = str(data["problem"])
    if problem not in PROBLEMS:
        raise InvalidConfigError(f"field 'problem': unknown kind {problem!r} (one of {', '.join(PROBLEMS)})")
    if "omega" not in data:
        raise InvalidConfigError("field 'omega' is required")
    values = dict(PROBLEM_DEFAULTS[problem])
    for key, val in data.items():
        if key in _KINDS and val is not None:
            values[key] = parse_number(val, key, _KINDS[key])
        elif key not in _KINDS:
            values[key] = val
    spec = RunSpec(**values)
    _validate(spec)
    return spec


def _validate(spec: RunSpec) -> None:
    positive = ["omega", "tol", "grad_tol", "lr0", "beta", "rho1", "rho2", "sigma", "mu"]
    for name in positive:
        if not getattr(spec, name) > 0:
            raise InvalidConfigError(f"field '{name}' must be positive, got {getattr(spec, name)}")
    if spec.alpha is not None and not spec.alpha > 0:
        raise InvalidConfigError(f"field 'alpha' must be positive, got {spec.alpha}")
    if spec.schedule not in SCHEDULES:
        raise InvalidConfigError(f"field 'schedule' must be one of {', '.join(SCHEDULES)}, got {spec.schedule!r}")
    for name in ("divisions", "width", "max_iter", "max_epochs"):
        if getattr(spec, name) < (0 if name == "max_epochs" else 1):
            raise InvalidConfigError(f"field '{name}' out of range: {getattr(spec, name)}")
    if spec.problem in ("point_source_3d", "maxwell_dipole") and spec.width < 2:
        raise InvalidConfigError("field 'width': the 3D polar count must be >= 2")
    if spec.quad_order is not None and not 1 <= spec.quad_order <= 64:
        raise InvalidConfigError(f"field 'quad_order' must lie in [1, 64], got {spec.quad_order}")


def parse_spec(text: str) -> RunSpec:
    """Parse a YAML or JSON run description."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidConfigError(f"malformed run spec: {exc}") from None
    return spec_from_mapping(data)


def build_problem(spec: RunSpec):
    if spec.problem == "waveguide2d":
        return waveguide_exact_2d(spec.omega, spec.mode)
    if spec.problem == "manufactured_plane_wave":
        return manufactured_plane_wave(spec.omega, (np.cos(spec.angle), np.sin(spec.angle)))
    if spec.problem == "point_source_3d":
        return point_source_3d(spec.omega)
    return maxwell_dipole(spec.omega, epsilon=spec.epsilon, mu=spec.mu, sigma=spec.sigma)


def build_forms(spec: RunSpec, problem, mesh):
    if problem.physics == "helmholtz":
        return problem.forms(mesh, spec.quad_order, alpha=spec.alpha, beta=spec.beta)
    return problem.forms(mesh, spec.quad_order, rho1=spec.rho1, rho2=spec.rho2, sigma=spec.sigma)


def setup(spec: RunSpec):
    problem = build_problem(spec)
    lo, hi = problem.domain
    mesh = build_uniform_mesh(lo, hi, spec.divisions)
    forms = build_forms(spec, problem, mesh)
    if spec.schedule == "fixed":
        schedule = WidthSchedule.fixed(spec.width)
    else:
        schedule = WidthSchedule.growing(spec.width, mesh.dim)
    return problem, mesh, forms, schedule


def execute(spec: RunSpec, log=None) -> RunReport:
    problem, mesh, forms, schedule = setup(spec)
    report = run(
        problem, mesh, schedule, tol=spec.tol, config=spec.train_config(), max_iter=spec.max_iter, forms=forms, log=log
    )
    if spec.output:
        write_outputs(report, spec.output)
    return report


def dump_first_system(spec: RunSpec, path) -> None:
    """Write the least-squares system of the first basis function at its initial directions."""
    problem, mesh, forms, schedule = setup(spec)
    D = init_directions(mesh.dim, schedule.width(1), mesh.n_elements)
    write_system(assemble_system(D, None, mesh, forms), path)


def write_outputs(report: RunReport, prefix) -> list:
    prefix = Path(prefix)
    if prefix.parent and not prefix.parent.exists():
        prefix.parent.mkdir(parents=True, exist_ok=True)
    paths = [
        prefix.with_name(prefix.name + ".csv"),
        prefix.with_name(prefix.name + "_epochs.csv"),
        prefix.with_name(prefix.name + "_summary.txt"),
    ]
    paths[0].write_text(report.csv_text())
    paths[1].write_text(report.epochs_csv_text())
    paths[2].write_text(report.summary_table())
    return paths


def preset_spec(name: str, **overrides) -> RunSpec:
    if name not in PRESETS:
        raise InvalidConfigError(f"unknown preset {name!r}; available presets: {', '.join(PRESETS)}")
    data = dict(PRESETS[name])
    data.update({k: v for k, v in overrides.items() if v is not None})
    return spec_from_mapping(data)


def run_preset(name: str, **overrides) -> RunReport:
    """Run a named preset; keyword arguments override individual spec fields."""
    return execute(preset_spec(name, **overrides))


def _print_row(row):
    print(
        f"iter {row.iteration:3d}  width {row.width:3d}  eta {row.eta:.3e}  cond {row.cond:.3f}  "
        f"err_energy {row.err_energy:.3e}  err_l2 {row.err_l2:.3e}  epochs {row.epochs}",
        flush=True,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dgpwnn", description="Plane-wave neural network Galerkin solver")
    parser.add_argument("spec", nargs="?", help="YAML/JSON run spec file")
    parser.add_argument("--preset", help=f"named preset ({', '.join(PRESETS)})")
    parser.add_argument("--list-presets", action="store_true", help="print the preset names and exit")
    parser.add_argument("--output", help="output path prefix for CSV and summary files")
    parser.add_argument("--seed", type=int, help="override the training seed")
    parser.add_argument("--quad-order", type=int, help="override the quadrature points per direction")
    parser.add_argument("--dump-system", metavar="PATH", help="write the first least-squares system to PATH")
    parser.add_argument("--quiet", action="store_true", help="do not print per-iteration progress")
    args = parser.parse_args(argv)

    if args.list_presets:
        print("\n".join(PRESETS))
        return 0
    if (args.spec is None) == (args.preset is None):
        parser.error("give exactly one of a spec file or --preset")
    overrides = {"seed": args.seed, "quad_order": args.quad_order, "output": args.output}
    try:
        if args.preset:
            spec = preset_spec(args.preset, **overrides)
        else:
            spec = parse_spec(Path(args.spec).read_text())
            spec = spec_from_mapping({**_spec_mapping(spec), **{k: v for k, v in overrides.items() if v is not None}})
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.dump_system:
        dump_first_system(spec, args.dump_system)
    report = execute(spec, log=None if args.quiet else _print_row)
    print(report.summary_table(), end="")
    return 0


def _spec_mapping(spec: RunSpec) -> dict:
    return {k: v for k, v in asdict(spec).items() if v is not None}


if __name__ == "__main__":
    raise SystemExit(main())
