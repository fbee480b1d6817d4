"""Displacement accumulation kernel with backend selection.

The compiled Cython kernel is used when its extension module imported
successfully; otherwise (or when QRESTRICT_FORCE_FALLBACK is set to a
non-empty value) the NumPy implementation in :mod:`.fallback` is used.
Both expose the same ``accumulate_displacement(alphas, coeffs, out)``
signature.
"""

import os

from . import fallback

if os.environ.get("QRESTRICT_FORCE_FALLBACK"):
    _impl = fallback
    BACKEND = "fallback"
else:
    try:
        from . import _disp as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = fallback
        BACKEND = "fallback"

accumulate_displacement = _impl.accumulate_displacement

__all__ = ["accumulate_displacement", "BACKEND", "fallback"]
