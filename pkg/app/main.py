"""
Command-line entry point for the position/momentum laboratory.

Reads a JSON run config, applies flag overrides, runs one command and writes
its CSV/JSON artifacts. Exit status: 0 on success, 2 when the config does
not validate, 1 on numeric failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Literal, get_args

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.errors import InvalidArgumentError
from app.physics.classical import (
    CorrelatedGaussian,
    PointMassMixture,
    UniformProduct,
    adversarial_search,
    sample_joint,
    straightline_report,
)
from app.physics.constants import ExperimentParams, make_context, make_params
from app.physics.design import DefectEvaluator, defect_curve, find_optimal_product, find_optimal_time, violation_range
from app.physics.fringes import FringeModel, fit_fringe, probability_from_fit, synthesize_fringe
from app.physics.states import Grid, superposition
from app.settings import LogLevel, get_settings
from app.storage import (
    read_dataset,
    write_atomic,
    write_curve,
    write_dataset,
    write_ensemble,
    write_json,
    write_wavefunction,
)

logger = logging.getLogger(__name__)

Command = Literal["simulate", "curve", "optimize", "classical", "synth", "analyze"]
COMMANDS: tuple[str, ...] = ("simulate", "curve", "optimize", "classical", "synth", "analyze")

# Distance (units of z_M) dumped by `simulate` when no z list is given.
SIMULATE_DEFAULT_Z = 1.4


# --- Config models ---


class PhysicsConfig(BaseModel):
    """Slit/lens geometry in SI metres."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    wavelength: float = Field(..., gt=0, description="Photon wavelength (m).")
    L: float = Field(..., gt=0, description="Position-slit width (m).")
    Lprime: float = Field(..., gt=0, description="Momentum-arm slit width (m).")
    f: float = Field(..., gt=0, description="Fourier-lens focal length (m).")


class NumericsConfig(BaseModel):
    """Grid and sampling choices; unset values fall back to the defaults."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    grid_points: int | None = Field(default=None, ge=2, description="Grid size (power of two recommended).")
    grid_half_width: float | None = Field(default=None, gt=0, description="Grid half-width (m).")
    z: list[float] | None = Field(default=None, min_length=1, description="Distances in units of z_M.")
    z_range: tuple[float, float, int] | None = Field(default=None, description="(start, stop, count) in units of z_M.")
    n_photons: int = Field(default=1_000_000, ge=1, description="Photons per synthesized dataset.")
    plane: Literal["position", "momentum"] = "position"
    profile: Literal["box", "gaussian"] = "box"
    optimize_product: bool = Field(default=False, description="Also search the optimal LB product.")
    classical_trials: int = Field(default=100, ge=1)
    classical_samples: int = Field(default=100_000, ge=1)
    adversarial_iterations: int = Field(default=50, ge=1)

    @model_validator(mode="after")
    def _check_grid(self) -> "NumericsConfig":
        if (self.grid_points is None) != (self.grid_half_width is None):
            raise ValueError("grid_points and grid_half_width must be given together")
        if self.z_range is not None and (self.z_range[2] < 2 or self.z_range[1] <= self.z_range[0]):
            raise ValueError("z_range needs stop > start and at least 2 points")
        return self

    def scaled_z(self) -> list[float]:
        if self.z is not None:
            return sorted(set(self.z))
        if self.z_range is not None:
            start, stop, count = self.z_range
            return [float(v) for v in np.linspace(start, stop, count)]
        return [float(v) for v in np.linspace(0.5, 10.0, 96)]


class IOConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    input: Path | None = Field(default=None, description="Dataset consumed by `analyze`.")
    output: Path = Field(default=Path("out"), description="Directory receiving artifacts.")
    seed: int = Field(default=0, ge=0, lt=2**64)


class RunConfig(BaseModel):
    """One reproducible run of the laboratory."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    command: Command
    physics: PhysicsConfig
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    visibility: float = Field(default=1.0, ge=0, le=1)
    io: IOConfig = Field(default_factory=IOConfig)

    @model_validator(mode="after")
    def _check_command_fields(self) -> "RunConfig":
        if self.command == "analyze" and self.io.input is None:
            raise ValueError("io.input is required for the analyze command")
        return self

    def experiment(self) -> ExperimentParams:
        ctx = make_context(self.physics.wavelength)
        return make_params(self.physics.L, self.physics.Lprime, self.physics.f, ctx)

    def grid(self) -> Grid | None:
        n = self.numerics.grid_points
        if n is None:
            return None
        return Grid.centered(n, 2.0 * self.numerics.grid_half_width / n)


# --- Commands ---


def _fmt_range(found) -> str:
    return "none" if found is None else f"[{found[0]:.3f}, {found[1]:.3f}] z_M"


def run_simulate(config: RunConfig) -> str:
    params, out = config.experiment(), config.io.output
    evaluator = DefectEvaluator(params, config.visibility, config.grid())
    psi_L0, psi_B0 = evaluator.arms_at(0.0)
    write_wavefunction(out / "psi_0.csv", superposition(psi_L0, psi_B0))
    summaries = []
    for scaled in config.numerics.z or [SIMULATE_DEFAULT_Z]:
        report = evaluator.report(scaled)
        psi_L, psi_B = evaluator.arms_at(scaled)
        tag = f"z{scaled:.4f}"
        write_wavefunction(out / f"psi_L_{tag}.csv", psi_L)
        write_wavefunction(out / f"psi_B_{tag}.csv", psi_B)
        write_wavefunction(out / f"psi_{tag}.csv", superposition(psi_L, psi_B))
        write_json(out / f"report_{tag}.json", report)
        summaries.append(f"z={scaled:.3f} z_M defect={report.defect:.4f} bound={report.bound_rhs:.4f}")
    return "simulate: " + "; ".join(summaries)


def run_curve(config: RunConfig) -> str:
    params = config.experiment()
    curve = defect_curve(params, config.numerics.scaled_z(), config.visibility, config.grid())
    path = write_curve(config.io.output / "curve.csv", curve)
    i = curve.argmax()
    found = violation_range(curve)
    logger.info(f"Wrote {path}")
    return (
        f"curve: max defect {curve.defect[i]:.4f} at z={curve.scaled_z[i]:.3f} z_M, "
        f"violation range {_fmt_range(found)}"
    )


def run_optimize(config: RunConfig) -> str:
    params = config.experiment()
    result = find_optimal_time(params, config.visibility, config.grid())
    write_json(config.io.output / "optimal_time.json", result)
    summary = f"optimize: z*={result.optimal_scaled_z:.3f} z_M, max defect {result.max_defect:.4f}"
    if config.numerics.optimize_product:
        product = find_optimal_product(params.context(), params.slit_L, params.focal_f, config.visibility)
        write_json(config.io.output / "optimal_product.json", product)
        summary += f"; LB*={product.optimal_lb_fraction:.4f}·2πħ, max defect {product.max_defect:.4f}"
    return summary


def _random_specs(L: float, B: float, count: int, rng: np.random.Generator) -> list:
    specs = []
    for k in range(count):
        kind = k % 3
        if kind == 0:
            x = np.sort(rng.uniform(-1.5, 1.5, 2)) * L
            p = np.sort(rng.uniform(-1.5, 1.5, 2)) * B
            specs.append(UniformProduct(x_lo=x[0], x_hi=x[1], p_lo=p[0], p_hi=p[1]))
        elif kind == 1:
            specs.append(
                CorrelatedGaussian(
                    mean_x=rng.normal(0, 0.3) * L,
                    mean_p=rng.normal(0, 0.3) * B,
                    sigma_x=rng.uniform(0.05, 1.5) * L,
                    sigma_p=rng.uniform(0.05, 1.5) * B,
                    rho=rng.uniform(-0.99, 0.99),
                )
            )
        else:
            n_points = int(rng.integers(1, 9))
            points = [(rng.uniform(-1, 1) * L, rng.uniform(-1, 1) * B) for _ in range(n_points)]
            specs.append(PointMassMixture(points=points, weights=list(rng.dirichlet(np.ones(n_points)))))
    return specs


def run_classical(config: RunConfig) -> str:
    params, numerics = config.experiment(), config.numerics
    ctx = params.context()
    L, B = params.slit_L, params.momentum_B
    rng = np.random.default_rng(np.random.SeedSequence(config.io.seed))
    specs = _random_specs(L, B, numerics.classical_trials, rng)

    records = []
    worst, worst_trial, worst_ens = -np.inf, 0, None
    for k, spec in enumerate(specs):
        scaled = numerics.scaled_z()[k % len(numerics.scaled_z())]
        t = scaled * params.t_M
        ens = sample_joint(spec, numerics.classical_samples, config.io.seed + k)
        report = straightline_report(ens, L, B, t, ctx)
        margin = report.defect - 3.0 * report.sigma_defect
        if margin > worst:
            worst, worst_trial, worst_ens = margin, k, ens
        records.append({"spec": spec.model_dump(), "scaled_z": scaled, "report": report.model_dump()})

    # the trial closest to violating the bound, for offline inspection
    write_ensemble(config.io.output / "ensemble_worst.csv", worst_ens)
    adversary = adversarial_search(L, B, params.t_M, ctx, numerics.adversarial_iterations, seed=config.io.seed)
    payload = {"trials": records, "worst_trial": worst_trial, "adversarial": adversary.model_dump()}
    write_atomic(config.io.output / "classical.json", json.dumps(payload, indent=2) + "\n")
    return (
        f"classical: {len(specs)} trials, max (defect - 3σ) {worst:.3e}, "
        f"adversarial worst defect {adversary.worst_defect:.3e}"
    )


def _fringe_model(config: RunConfig) -> FringeModel:
    params = config.experiment()
    numerics = config.numerics
    # fringe planes take one explicit distance; z_range only drives curves
    scaled = numerics.z[0] if numerics.z and numerics.plane == "position" else 0.0
    return FringeModel(
        params, z=scaled * params.z_M, plane=numerics.plane, profile=numerics.profile, grid=config.grid()
    )


def run_synth(config: RunConfig) -> str:
    model = _fringe_model(config)
    data = synthesize_fringe(
        model, config.visibility, model.pixel_grid(), config.numerics.n_photons, config.io.seed, label=model.plane
    )
    path = write_dataset(config.io.output / f"fringe_{model.plane}.csv", data)
    logger.info(f"Wrote {path}")
    return f"synth: {data.total_counts} counts over {data.positions.size} pixels at z={model.z:.4e} m"


def run_analyze(config: RunConfig) -> str:
    model = _fringe_model(config)
    data = read_dataset(config.io.input, z=model.z)
    fit = fit_fringe(data, model)
    write_json(config.io.output / f"fit_{data.label}.json", fit)
    probability = probability_from_fit(fit, model)
    window = {"momentum": "P(B)", "position": "P(L)" if model.z == 0 else "P(M)"}[model.plane]
    return f"analyze: V={fit.visibility:.4f} converged={fit.converged} {window}={probability:.4f}"


RUNNERS = {
    "simulate": run_simulate,
    "curve": run_curve,
    "optimize": run_optimize,
    "classical": run_classical,
    "synth": run_synth,
    "analyze": run_analyze,
}


# --- Entry point ---


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poslab", description=__doc__.strip().splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, required=True, help="JSON run config.")
    parser.add_argument("--out", type=Path, help="Output directory (overrides io.output).")
    parser.add_argument("--seed", type=int, help="Random seed (overrides io.seed).")
    parser.add_argument("--visibility", type=float, help="Interference visibility V in [0, 1].")
    parser.add_argument("--z", type=str, help="Comma-separated distances in units of z_M.")
    parser.add_argument("--n-photons", type=int, help="Photons per synthesized dataset.")
    parser.add_argument("--input", type=Path, help="Dataset CSV for analyze.")
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=get_args(LogLevel),
        help="Logging level (default from LAB_LOG_LEVEL).",
    )
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """Merge the JSON config with flag overrides and validate the result.

    Raises:
        ValidationError: If the merged config is invalid.
        InvalidArgumentError: If the config file cannot be read or parsed.
    """
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidArgumentError(f"config: cannot read {args.config}: {e}") from e
    if not isinstance(raw, dict):
        raise InvalidArgumentError("config: top level must be a JSON object")

    raw["command"] = args.command
    io_section = raw.setdefault("io", {})
    numerics = raw.setdefault("numerics", {})
    if args.out is not None:
        io_section["output"] = str(args.out)
    if args.seed is not None:
        io_section["seed"] = args.seed
    if args.input is not None:
        io_section["input"] = str(args.input)
    if args.visibility is not None:
        raw["visibility"] = args.visibility
    if args.n_photons is not None:
        numerics["n_photons"] = args.n_photons
    if args.z is not None:
        try:
            numerics["z"] = [float(v) for v in args.z.split(",") if v.strip()]
        except ValueError as e:
            raise InvalidArgumentError(f"z: cannot parse {args.z!r} as a list of numbers") from e
        numerics.pop("z_range", None)
    return RunConfig.model_validate(raw)


def _describe_validation(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "config"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings()
    except ValidationError as e:
        print(f"invalid settings: {_describe_validation(e)}", file=sys.stderr)
        return 2
    logging.basicConfig(
        level=args.log_level or settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = load_config(args)
    except ValidationError as e:
        print(f"invalid config: {_describe_validation(e)}", file=sys.stderr)
        return 2
    except InvalidArgumentError as e:
        print(f"invalid config: {e}", file=sys.stderr)
        return 2

    logger.info(f"Running {config.command} -> {config.io.output}")
    try:
        summary = RUNNERS[config.command](config)
    except (ValueError, RuntimeError) as e:
        # aliasing, degenerate fits, grids that cannot hold the states
        logger.error(f"{config.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1

    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
