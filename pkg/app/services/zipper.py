"""Quantum zipper: schedule generation and execution.

An odd register of M = 2n+1 spins is zipped into a GHZ state with 2n pi
pulses, one pi/2 pulse and n chiral interactions. The first interaction on
(1, 2, 3) runs for one rotation step T; every later block
Pulse(2k+2, pi); Interact((2k+1, 2k+2, 2k+3), 2T); Pulse(2k+1, pi) needs two
steps so that |uud> -> |udu> -> |duu> and |dud> -> |ddu> -> |udd> before the
closing pulse.
"""
import logging
import math
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from app.core.config import config
from app.core.exceptions import DimensionMismatchError, InvalidParameterError, ProtocolFailureError
from app.core.utils import write_csv, write_json
from app.models.models import (
    ChiralCoupling,
    InteractStep,
    PulseStep,
    Schedule,
    ScheduleStep,
    TrajectoryEntry,
    TrajectoryRecord,
    is_half_pi,
    is_pi,
)
from app.services.chiral import evolve_local, rotate_configuration, rotation_period
from app.services.pulses import apply_pulse
from app.services.spin_state import (
    SpinConfig,
    SpinState,
    basis_index,
    fidelity,
    ghz_state,
    populations,
    product_state,
)

logger = logging.getLogger(__name__)

# below this an all-up or all-down amplitude counts as missing
BRANCH_FLOOR = 1e-6
TRAJECTORY_COLUMNS = (
    "step_index",
    "step_kind",
    "target_or_triple",
    "duration",
    "fidelity_to_target",
    "fidelity_to_ghz",
)

Branches = Dict[SpinConfig, complex]


def generate_schedule(m_spins: int, half_pi_phase: float = -math.pi / 2) -> Schedule:
    """Zipper schedule for an odd register of m_spins spins.

    The pi/2 pulse is applied about the axis at `half_pi_phase` in the
    equatorial plane; the default (-y) gives (|d> + |u>)/sqrt2 and hence a
    GHZ state with a +1 branch ratio. Phase 0 (x axis) yields the -i variant.
    """
    if m_spins < 3 or m_spins % 2 != 1 or m_spins > config.MAX_SPINS:
        raise InvalidParameterError(
            f"the zipper needs an odd number of spins in [3, {config.MAX_SPINS}], got {m_spins}"
        )
    steps: List = [
        PulseStep(target=1, angle=math.pi),
        PulseStep(target=2, angle=math.pi / 2, phase=half_pi_phase),
        InteractStep(triple=(1, 2, 3), periods=1.0),
        PulseStep(target=2, angle=math.pi),
    ]
    for k in range(1, (m_spins - 3) // 2 + 1):
        steps += [
            PulseStep(target=2 * k + 2, angle=math.pi),
            InteractStep(triple=(2 * k + 1, 2 * k + 2, 2 * k + 3), periods=2.0),
            PulseStep(target=2 * k + 1, angle=math.pi),
        ]
    schedule = Schedule(m_spins=m_spins, steps=steps)
    logger.info(f"generated zipper schedule for M={m_spins}: {len(steps)} steps, {schedule.pulse_counts()}")
    return schedule


def _pulse_branches(branches: Branches, step: PulseStep) -> Optional[Branches]:
    """Exact image of a branch superposition under an ideal pi or pi/2 pulse."""
    if is_pi(step.angle):
        weights = (0.0, 1.0)
    elif is_half_pi(step.angle):
        weights = (1 / math.sqrt(2), 1 / math.sqrt(2))
    else:
        return None
    stay, flip = weights
    result: Branches = {}
    for cfg, coefficient in branches.items():
        up = cfg.orientations[step.target - 1]
        # -i n.sigma takes down -> e^{-i phase} up and up -> e^{i phase} down
        flip_factor = -1j * np.exp(1j * step.phase if up else -1j * step.phase)
        for image, factor in ((cfg, stay), (cfg.flipped(step.target), flip * flip_factor)):
            if factor != 0:
                result[image] = result.get(image, 0) + coefficient * factor
    return {cfg: c for cfg, c in result.items() if abs(c) > 1e-15}


def ideal_branches(schedule: Schedule) -> List[Optional[Branches]]:
    """Predicted ket after each step when starting from all-down.

    Whole-period interactions permute configurations with unit coefficient;
    any other duration or pulse angle ends the prediction.
    """
    branches: Optional[Branches] = {SpinConfig.all_down(schedule.m_spins): 1.0 + 0j}
    predictions: List[Optional[Branches]] = []
    for step in schedule.steps:
        if branches is not None:
            if isinstance(step, PulseStep):
                branches = _pulse_branches(branches, step)
            elif float(step.periods).is_integer():
                steps = int(step.periods)
                branches = {rotate_configuration(cfg, step.triple, steps): c for cfg, c in branches.items()}
            else:
                branches = None
        predictions.append(branches)
    return predictions


def branches_to_state(branches: Branches, n_spins: int) -> SpinState:
    amplitudes = np.zeros(2 ** n_spins, dtype=complex)
    for cfg, coefficient in branches.items():
        amplitudes[basis_index(cfg)] = coefficient
    return SpinState.from_amplitudes(n_spins, amplitudes)


def _phase_label(ratio: complex) -> str:
    for value, label in ((1, "+"), (-1, "-"), (1j, "+i"), (-1j, "-i")):
        if abs(ratio - value) < 1e-9:
            return label
    return f"+({ratio.real:.6g}{ratio.imag:+.6g}j)"


def ket_label(branches: Branches) -> str:
    """Text form such as '|udd> + |uud>', phases relative to the first term."""
    items = list(branches.items())
    _, first = items[0]
    text = f"|{items[0][0]}>"
    for cfg, coefficient in items[1:]:
        text += f" {_phase_label(coefficient / first)}|{cfg}>"
    return text


def _target_label(step) -> str:
    if isinstance(step, PulseStep):
        return str(step.target)
    return "-".join(str(s) for s in step.triple)


def iterate_schedule(
    schedule: Schedule, kappa: float, initial: SpinState
) -> Iterator[Tuple[int, ScheduleStep, SpinState, float]]:
    """Yield (step index, step, state after the step, duration) for each step in order."""
    period = rotation_period(kappa)
    state = initial
    for index, step in enumerate(schedule.steps, start=1):
        if isinstance(step, PulseStep):
            state = apply_pulse(state, step.as_pulse())
            duration = 0.0
        else:
            duration = step.periods * period
            state = evolve_local(state, ChiralCoupling(kappa=kappa, triple=step.triple), duration)
        logger.debug(f"step {index}: {step.describe()}")
        yield index, step, state, duration


def execute_schedule(
    schedule: Schedule,
    kappa: float,
    record: bool = True,
    record_populations: bool = False,
    initial: Optional[SpinState] = None,
) -> Tuple[SpinState, TrajectoryRecord]:
    """Run the schedule with ideal pulses and exact local chiral evolution."""
    period = rotation_period(kappa)
    m = schedule.m_spins
    if initial is None:
        state = product_state(SpinConfig.all_down(m))
        predictions = ideal_branches(schedule)
    else:
        if initial.n_spins != m:
            raise DimensionMismatchError(
                f"schedule for {m} spins cannot run on a {initial.n_spins}-spin register"
            )
        state = initial
        predictions = [None] * len(schedule.steps)

    ghz = ghz_state(m)
    trajectory = TrajectoryRecord(
        m_spins=m, kappa=kappa, rotation_period=period, pulse_counts=schedule.pulse_counts()
    )
    steps = iterate_schedule(schedule, kappa, state)
    for (index, step, state, duration), predicted in zip(steps, predictions):
        if not record:
            continue
        trajectory.entries.append(
            TrajectoryEntry(
                step_index=index,
                step_kind=step.kind,
                description=step.describe(),
                target_or_triple=_target_label(step),
                duration=duration,
                target_ket=ket_label(predicted) if predicted else None,
                fidelity_to_target=fidelity(state, branches_to_state(predicted, m)) if predicted else None,
                fidelity_to_ghz=fidelity(state, ghz),
                populations=populations(state).tolist() if record_populations else None,
            )
        )

    trajectory.final_fidelity_to_ghz = fidelity(state, ghz)
    try:
        ratio = verify_branch_phases(state, m)
        trajectory.branch_ratio = (ratio.real, ratio.imag)
    except ProtocolFailureError:
        logger.warning(f"M={m} run ended without both GHZ branches")
    logger.info(f"zipper M={m} finished: fidelity to GHZ {trajectory.final_fidelity_to_ghz:.12f}")
    return state, trajectory


def verify_branch_phases(state: SpinState, m_spins: int) -> complex:
    """amplitude(all up) / amplitude(all down)."""
    if state.n_spins != m_spins:
        raise DimensionMismatchError(f"expected a {m_spins}-spin state, got {state.n_spins} spins")
    down, up = state.amplitudes[0], state.amplitudes[-1]
    if abs(down) < BRANCH_FLOOR or abs(up) < BRANCH_FLOOR:
        raise ProtocolFailureError(
            f"GHZ branch missing: |amp(down...)|={abs(down):.3e}, |amp(up...)|={abs(up):.3e}"
        )
    return complex(up / down)


def leading_ghz_fidelity(state: SpinState, m_spins: int) -> float:
    """Fidelity to a GHZ state on spins 1..m_spins with every later spin down."""
    if not 2 <= m_spins <= state.n_spins:
        raise InvalidParameterError(f"cannot take a {m_spins}-spin GHZ prefix of {state.n_spins} spins")
    amplitudes = np.zeros(state.dimension, dtype=complex)
    amplitudes[0] = amplitudes[2 ** m_spins - 1] = 1 / math.sqrt(2)
    return fidelity(state, SpinState(state.n_spins, amplitudes))


def trajectory_to_csv(record: TrajectoryRecord, path: Optional[Path]) -> None:
    rows = (
        [getattr(entry, column) for column in TRAJECTORY_COLUMNS]
        for entry in record.entries
    )
    metadata = {"m_spins": record.m_spins, "kappa": record.kappa, "rotation_period": record.rotation_period}
    write_csv(path, TRAJECTORY_COLUMNS, rows, metadata=metadata)


def trajectory_to_json(record: TrajectoryRecord, path: Optional[Path]) -> None:
    write_json(path, record.model_dump(mode="json"))
