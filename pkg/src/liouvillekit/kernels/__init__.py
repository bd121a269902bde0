"""Hot loops, compiled when the extension is available.

``BACKEND`` names the implementation picked at import.  Setting the environment
variable ``LIOUVILLEKIT_PURE=1`` forces the numpy fallback.
"""
import os

from . import _pykernels as python_backend

try:
    if os.environ.get("LIOUVILLEKIT_PURE") == "1":
        raise ImportError("pure backend requested")
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

_active = compiled_backend or python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

a_poly_grid = _active.a_poly_grid
da_contact_grid = _active.da_contact_grid
da_sync_birkhoff = _active.da_sync_birkhoff

__all__ = ["BACKEND", "a_poly_grid", "da_contact_grid", "da_sync_birkhoff",
           "python_backend", "compiled_backend"]
