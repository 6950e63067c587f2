"""Select the compiled kernel core when importable, else the numpy fallback.

Set ``TOABOX_BACKEND=python`` to force the fallback.
"""
import os

from . import _pykernels

python = _pykernels

try:
    from . import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None

if os.environ.get("TOABOX_BACKEND", "").lower() == "python" or compiled is None:
    active = _pykernels
else:
    active = compiled

BACKEND = active.BACKEND
