"""Pure numpy fallback for the compiled kernels.

Same call surface as the Cython extension ``tcsde._kernels`` for the
operations that exist in both; selected by :mod:`tcsde.backend` when the
extension is absent or disabled.
"""

import numpy as np


def stable_transform(alpha, scale, u, w):
    """Map (U, W) draws to positive a-stable increments.

    U is uniform on (0, pi), W unit exponential.  The transform
    sin(a U) / sin(U)^(1/a) * (sin((1-a) U) / W)^((1-a)/a), multiplied by
    scale = delta^(1/a), yields an increment of an a-stable subordinator
    over an internal step delta: E[exp(-s S)] = exp(-delta s^a).
    """
    a = float(alpha)
    s = np.sin(a * u) / np.sin(u) ** (1.0 / a)
    s *= (np.sin((1.0 - a) * u) / w) ** ((1.0 - a) / a)
    return scale * s
