"""Numerical hot loops: compiled backend with a pure-Python fallback.

The compiled module ``hawkes._kernels.native`` (built from native.pyx) is
selected at import time when available, otherwise ``hawkes._kernels.ref``
is used. Set the environment variable ``HAWKES_BACKEND`` to ``python`` or
``native`` to force a choice; forcing ``native`` raises if the extension
was not built. ``BACKEND`` names the active implementation.

Both implementations are kept operation-for-operation identical (including
floating-point order and uniform consumption), which tests/test_backend.py
verifies, so results do not depend on the backend.
"""

import os

_choice = os.environ.get("HAWKES_BACKEND")
if _choice not in (None, "native", "python"):
    raise ImportError(
        f"HAWKES_BACKEND must be 'native' or 'python', got {_choice!r}"
    )

if _choice == "python":
    from . import ref as _impl

    BACKEND = "python"
else:
    try:
        from . import native as _impl

        BACKEND = "native"
    except ImportError:
        if _choice == "native":
            raise
        from . import ref as _impl

        BACKEND = "python"

exp_loglik = _impl.exp_loglik
exp_excitations = _impl.exp_excitations
exp_compensators = _impl.exp_compensators
sim_thinning_exp = _impl.sim_thinning_exp
sim_exact_exp = _impl.sim_exact_exp
