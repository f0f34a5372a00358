"""Hot-loop kernels with a compiled core and a pure-NumPy fallback.

The compiled extension (``_core``, built from Cython by setup.py) is optional;
when it cannot be imported the NumPy implementation in ``_ref`` is used
instead.  ``BACKEND`` records which one is active.  Set the environment
variable ``DDSENSE_PURE_PYTHON=1`` before import to force the fallback.
"""

import os

from . import _ref

if os.environ.get("DDSENSE_PURE_PYTHON"):
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _ref
        BACKEND = "python"

phase_surface = _impl.phase_surface


def backends():
    """Importable backend name -> phase_surface implementation."""
    out = {"python": _ref.phase_surface}
    try:
        from . import _core
    except ImportError:
        pass
    else:
        out["compiled"] = _core.phase_surface
    return out
