"""vactrap: trapping a ground-state atom in the vacuum field of a cavity.

A weak laser detuned below the lower dressed state induces a
position-dependent light shift on the |g,0> level of an atom-cavity system;
that shift is an attractive potential, while the system stays essentially in
its ground state so photon emission is strongly suppressed.  This package
provides the closed-form design formulas (trap depth, effective lifetime,
optimal laser parameters) and a full 1D quantum-jump simulation with cavity
decay, spontaneous emission, and photon recoil.

Unit conventions are documented in :mod:`vactrap.units`; the compiled/python
kernel split in :mod:`vactrap._kernels`.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND_NAME
from .params import (ModeProfile, PhysicalParams, coupling_at,
                     microwave_preset, optical_preset, validate)

__all__ = [
    "__version__", "BACKEND_NAME",
    "ModeProfile", "PhysicalParams", "coupling_at",
    "optical_preset", "microwave_preset", "validate",
]
