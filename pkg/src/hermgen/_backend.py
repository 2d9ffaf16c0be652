"""Select the compiled SGD kernel, falling back to numpy.

Set ``HERMGEN_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _sgd_py

if os.environ.get("HERMGEN_PURE_PYTHON", "") not in ("", "0"):
    sgd_steps = _sgd_py.sgd_steps
    BACKEND = "python"
else:
    try:
        from ._sgd import sgd_steps
        BACKEND = "cython"
    except ImportError:
        sgd_steps = _sgd_py.sgd_steps
        BACKEND = "python"

KERNELS = {"python": _sgd_py.sgd_steps}
try:
    from ._sgd import sgd_steps as _compiled

    KERNELS["cython"] = _compiled
except ImportError:
    pass
