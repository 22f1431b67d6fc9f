"""State transition matrices from first-order polynomial flow maps."""

from typing import Sequence

import numpy as np

from .integrators import IntegratorSettings


def stm_propagate(system, x_r: Sequence[float], t0: float, tf: float,
                  settings: IntegratorSettings = None) -> np.ndarray:
    """
    Φ(tf, t0) about the trajectory through ``x_r``.

    Args:
        system: Dynamical system exposing ``rhs``
        x_r: Reference state at t0
        t0: Initial time
        tf: Final time

    Returns:
        (N, N) matrix; the identity when tf == t0
    """
    x_r = np.asarray(x_r, dtype=float)
    if tf == t0:
        return np.eye(len(x_r))
    # Import here to avoid circular imports (flowmaps builds on the integrators)
    from flowmaps.maps import build_da_map

    return build_da_map(system, x_r, t0, tf, order=1, settings=settings).linear_part()
