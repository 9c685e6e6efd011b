"""Hot-loop kernels: compiled (Cython + FFTW) with a numpy fallback.

The compiled backend is selected automatically when the extension built;
set ``VACTRAP_PURE_PYTHON=1`` to force the numpy fallback.  Both backends
implement the same ``FusedCore`` contract, so results agree to rounding;
bit-level reproducibility of long stochastic runs is guaranteed only within
one backend.
"""

import os

# advance() status codes
STATUS_BUDGET = 0       # step budget exhausted
STATUS_JUMP_CAVITY = 1  # jump decision fired on the cavity channel
STATUS_JUMP_ATOM = 2    # jump decision fired on the atomic channel
STATUS_TOO_LARGE = 3    # per-step jump probability exceeded the 0.1 bound
STATUS_TARGET = 4       # norm^2 fell to the requested target

if os.environ.get("VACTRAP_PURE_PYTHON"):
    from . import _py as backend
else:
    try:
        from . import _cy as backend  # type: ignore[attr-defined]
    except ImportError:
        from . import _py as backend

BACKEND_NAME = backend.NAME
FusedCore = backend.FusedCore


def get_backend(name=None):
    """Return a backend module by name ("compiled" or "python")."""
    if name is None:
        return backend
    if name == "python":
        from . import _py
        return _py
    if name == "compiled":
        from . import _cy  # raises ImportError if not built
        return _cy
    raise ValueError(f"unknown backend {name!r}")
