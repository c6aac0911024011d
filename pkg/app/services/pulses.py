import logging
import math

import numpy as np

from app.core.exceptions import InvalidParameterError
from app.models.models import PulseOp
from app.services.spin_state import SpinState, apply_local

logger = logging.getLogger(__name__)


def pulse_unitary(pulse: PulseOp) -> np.ndarray:
    """exp(-i angle n.sigma / 2) in the (down, up) single-spin basis.

    n = (cos(phase), sin(phase), 0); phase 0 is a rotation about x.
    """
    half = pulse.angle / 2
    # n.sigma = [[0, e^{i phase}], [e^{-i phase}, 0]] with down as the first basis state
    n_sigma = np.array(
        [[0.0, np.exp(1j * pulse.phase)], [np.exp(-1j * pulse.phase), 0.0]],
        dtype=complex,
    )
    return math.cos(half) * np.eye(2, dtype=complex) - 1j * math.sin(half) * n_sigma


def apply_pulse(state: SpinState, pulse: PulseOp) -> SpinState:
    if pulse.target > state.n_spins:
        raise InvalidParameterError(
            f"pulse target {pulse.target} outside the {state.n_spins}-spin register"
        )
    logger.debug(f"pulse on spin {pulse.target}: angle={pulse.angle:.6g} phase={pulse.phase:.6g}")
    return apply_local(state, (pulse.target,), pulse_unitary(pulse))
