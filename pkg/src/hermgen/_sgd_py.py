"""Pure numpy fallback for the online-SGD kernel (same contract as ``_sgd``)."""

import numpy as np


def sgd_steps(V, u, a, X, Y, eta, start, stop):
    """Apply one SGD step per row ``X[start:stop]`` in place; -1 or failing row."""
    for t in range(start, stop):
        x = X[t]
        pre = V @ x + u
        act = np.maximum(pre, 0.0)
        g = 2.0 * (float(act @ a) - Y[t])
        if not np.isfinite(g):
            return t
        gp = g * a * (pre > 0)
        a -= (eta * g) * act
        u -= eta * gp
        V -= eta * np.outer(gp, x)
    return -1
