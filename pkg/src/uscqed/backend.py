"""Selects the stepping kernel: compiled extension if built, NumPy otherwise.

Set ``USCQED_FORCE_FALLBACK=1`` to skip the extension (used by the backend
equivalence tests and the benchmark).
"""

from __future__ import annotations

import os

from ._fallback import DenseStepper, DressedStepper as _PyDressedStepper

__all__ = ["BACKEND", "HAVE_EXTENSION", "DenseStepper", "DressedStepper"]

HAVE_EXTENSION = False
DressedStepper = _PyDressedStepper
BACKEND = "numpy"

if not os.environ.get("USCQED_FORCE_FALLBACK"):
    try:
        from ._core import DressedStepper as _CoreDressedStepper
    except ImportError:
        pass
    else:
        HAVE_EXTENSION = True
        DressedStepper = _CoreDressedStepper
        BACKEND = "compiled"
