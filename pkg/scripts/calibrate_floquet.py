"""
Calibrate the effective-vs-full Floquet agreement.

Runs the nu_d/g ladder at t = T, a step-halving check on the same ladder and the three-spin
effective Hamiltonian comparison, then stores the numbers used as test
thresholds.

Usage:
  python scripts/calibrate_floquet.py [output.json]

Default output: data/floquet_calibration.json
"""
import sys
from pathlib import Path

# Add parent directory to path to import app modules
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from app.core.config import config
from app.core.exceptions import SimulationError
from app.core.utils import write_json
from app.models.models import ChiralCoupling, ModulationParams
from app.services.bessel import j0_first_root
from app.services.chiral import build_chiral_hamiltonian
from app.services.floquet import (
    cavity_residual,
    effective_hamiltonian,
    effective_kappa,
    run_ratio_ladder,
    vacuum_block,
)

LADDER = (10.0, 30.0, 100.0)
FIDELITY_FLOOR = 0.99
HALVING_STEPS = (config.STEPS_PER_PERIOD, 2 * config.STEPS_PER_PERIOD)
HALVING_TOLERANCE = 1e-6

OUTPUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/floquet_calibration.json")

print("=" * 60)
print("Floquet Calibration")
print("=" * 60)
print(f"Ladder: nu_d/g = {', '.join(f'{r:g}' for r in LADDER)}")
print(f"Output: {OUTPUT}")
print()


def check_ladder(f):
    """Fidelity at t = T for each ratio; infidelity must fall along the ladder."""
    points = run_ratio_ladder(LADDER, g=1.0, f=f, fractions=[1.0])
    infidelities = [1.0 - p.fidelity_to_effective for p in points]
    for point in points:
        print(f"  nu_d/g={point.nu_d_over_g:g}: fidelity={point.fidelity_to_effective:.10f} "
              f"vacuum_weight={point.vacuum_weight:.10f}")
    monotone = all(a > b for a, b in zip(infidelities, infidelities[1:]))
    top = points[-1].fidelity_to_effective
    print(f"  {'✓' if monotone else '✗'} infidelity decreases along the ladder")
    print(f"  {'✓' if top >= FIDELITY_FLOOR else '✗'} fidelity at nu_d/g={LADDER[-1]:g} >= {FIDELITY_FLOOR}")
    print()
    return points, monotone and top >= FIDELITY_FLOOR


def check_step_halving(f):
    """Fidelity at t = T with the default and doubled sub-step counts, per ratio."""
    coarse, fine = (
        run_ratio_ladder(LADDER, g=1.0, f=f, fractions=[1.0], steps_per_period=steps)
        for steps in HALVING_STEPS
    )
    changes = []
    for a, b in zip(coarse, fine):
        change = abs(a.fidelity_to_effective - b.fidelity_to_effective)
        changes.append(change)
        print(f"  nu_d/g={a.nu_d_over_g:g}: {HALVING_STEPS[0]} / {HALVING_STEPS[1]} sub-steps "
              f"{a.fidelity_to_effective:.12f} / {b.fidelity_to_effective:.12f} change {change:.3e}")
    change = max(changes)
    ok = change < HALVING_TOLERANCE
    print(f"  {'✓' if ok else '✗'} largest change {change:.3e} < {HALVING_TOLERANCE:.0e}")
    print()
    return changes, ok


def check_effective_block(f):
    params = ModulationParams.protocol(g=1.0, nu_d=100.0, f=f)
    kappa = effective_kappa(params.g, params.nu_d, f)
    expected = build_chiral_hamiltonian(ChiralCoupling(kappa=kappa), 3).entries
    block = vacuum_block(effective_hamiltonian(params))
    deviation = float(np.max(np.abs(block - expected)))
    residual = cavity_residual(params)
    print(f"  kappa = {kappa:.12g}")
    print(f"  vacuum block deviation from the chiral Hamiltonian: {deviation:.3e}")
    print(f"  cavity residual below the top Fock level: {residual:.3e}")
    print()
    return deviation, residual


def main():
    f = j0_first_root()
    print(f"f = {f:.15f}")
    print()

    print("Step 1: Ratio ladder at t = T...")
    try:
        points, ladder_ok = check_ladder(f)
    except SimulationError as e:
        print(f"✗ Ladder failed: {str(e)}")
        sys.exit(1)

    print("Step 2: Step halving...")
    try:
        changes, halving_ok = check_step_halving(f)
    except SimulationError as e:
        print(f"✗ Step halving failed: {str(e)}")
        sys.exit(1)

    print("Step 3: Effective Hamiltonian vacuum block...")
    deviation, residual = check_effective_block(f)

    write_json(OUTPUT, {
        "f": f,
        "ladder": [p.model_dump() for p in points],
        "fidelity_floor": FIDELITY_FLOOR,
        "step_halving_steps": list(HALVING_STEPS),
        "step_halving_changes": dict(zip((f"{r:g}" for r in LADDER), changes)),
        "step_halving_tolerance": HALVING_TOLERANCE,
        "vacuum_block_deviation": deviation,
        "cavity_residual": residual,
    })
    print(f"Wrote {OUTPUT}")

    print("=" * 60)
    if ladder_ok and halving_ok:
        print("✓ Calibration passed")
    else:
        print("✗ Calibration checks failed")
        sys.exit(1)
    print("=" * 60)


if __name__ == "__main__":
    main()
