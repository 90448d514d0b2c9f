"""Script to reproduce the headline numbers of the reference interferometer and print them as a table."""

import json
import os
import sys

import numpy as np
from scipy.optimize import brentq

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.physics.classical import adversarial_search  # noqa: E402
from app.physics.constants import make_context, make_params  # noqa: E402
from app.physics.design import (  # noqa: E402
    DefectEvaluator,
    defect_curve,
    far_field_defect,
    far_field_optimal_product,
    find_optimal_product,
    find_optimal_time,
    violation_range,
)
from app.physics.fringes import FringeModel, fit_fringe, probabilities_from_fits, synthesize_fringe  # noqa: E402
from app.physics.states import default_grid  # noqa: E402

# Configuration
CONFIG_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs", "reference.json")

MEASURED_VISIBILITY = 0.85
OBSERVATION_Z = 1.4
SEED = 20240101


def load_params():
    with open(CONFIG_PATH, encoding="utf-8") as fh:
        physics = json.load(fh)["physics"]
    ctx = make_context(physics["wavelength"])
    return make_params(physics["L"], physics["Lprime"], physics["f"], ctx)


def model_range(lb_fraction: float) -> str:
    """Zero crossings of the far-field model on either side of z_M."""
    lower = brentq(lambda z: far_field_defect(lb_fraction, z), 0.02, 1.0)
    upper = brentq(lambda z: far_field_defect(lb_fraction, z), 1.0, 50.0)
    return f"{lower:.2f} to {upper:.2f}"


def fitted_report(params, grid):
    """P(L), P(B) and P(M) from Poisson datasets fitted in the three detection planes."""
    planes = [
        FringeModel(params, plane="position", grid=grid),
        FringeModel(params, plane="momentum", grid=grid),
        FringeModel(params, z=OBSERVATION_Z * params.z_M, plane="position", grid=grid),
    ]
    fits = []
    for k, model in enumerate(planes):
        data = synthesize_fringe(model, MEASURED_VISIBILITY, model.pixel_grid(), 10**6, SEED + k)
        fits.append((fit_fringe(data, model), model))
        print(f"  ✓ Fitted {model.plane} plane at z = {model.z * 100:.1f} cm: V = {fits[-1][0].visibility:.3f}")
    return probabilities_from_fits(*fits)


def main() -> None:
    params = load_params()
    grid = default_grid(params)
    ctx = params.context()
    rows = []

    print(f"Reference geometry: LB = {params.lb_fraction:.4f}·2πħ, z_M = {params.z_M * 100:.2f} cm")
    print(f"Grid: {grid.n_points} points of {grid.dx * 1e9:.1f} nm")

    print("Scanning the ideal defect curve...")
    curve = defect_curve(params, np.geomspace(0.06, 10.0, 97), 1.0, grid)
    found = violation_range(curve)
    span = "none" if found is None else f"{found[0]:.2f} to {found[1]:.2f}"
    rows.append(("violation range (z/z_M)", model_range(params.lb_fraction), span))

    print("Refining the optimal distance...")
    best_time = find_optimal_time(params, 1.0, grid)
    rows.append(("optimal z/z_M (V = 1)", "1.000", f"{best_time.optimal_scaled_z:.3f}"))
    model_peak = far_field_defect(params.lb_fraction, 1.0)
    rows.append(("maximal defect (V = 1)", f"{model_peak:.4f}", f"{best_time.max_defect:.4f}"))

    print("Searching the optimal LB product (this takes a while)...")
    best_product = find_optimal_product(ctx, params.slit_L, params.focal_f, 1.0)
    rows.append(("optimal LB/2πħ", f"{far_field_optimal_product():.4f}", f"{best_product.optimal_lb_fraction:.4f}"))

    print(f"Evaluating the visibility model at V = {MEASURED_VISIBILITY}...")
    measured = DefectEvaluator(params, MEASURED_VISIBILITY, grid).report(OBSERVATION_Z)
    rows.append(("P(L) = P(B) (model)", "0.565", f"{measured.p_L:.4f} / {measured.p_B:.4f}"))
    rows.append(("P(M) at 1.4 z_M (model)", "0.072", f"{measured.p_M:.4f}"))
    rows.append(("defect at 1.4 z_M (model)", "0.059", f"{measured.defect:.4f}"))

    print("Fitting synthetic fringes...")
    fitted = fitted_report(params, grid)
    rows.append(("defect at 1.4 z_M (fitted)", "0.059", f"{fitted.defect:.4f}"))

    print("Running the classical adversary...")
    adversary = adversarial_search(params.slit_L, params.momentum_B, OBSERVATION_Z * params.t_M, ctx, 50, seed=SEED)
    rows.append(("worst classical defect", "≤ 0", f"{adversary.worst_defect:.2e}"))

    width = max(len(name) for name, _, _ in rows)
    print(f"\n{'quantity'.ljust(width)}  {'reference':>14}  {'computed':>16}")
    for name, target, value in rows:
        print(f"{name.ljust(width)}  {target:>14}  {value:>16}")
    print("\n✅ Reproduction finished")


if __name__ == "__main__":
    main()
