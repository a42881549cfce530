"""Backend selection for the hot kernels.

The compiled module is used when it imports; setting the environment variable
``EDGETOPO_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("EDGETOPO_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
transfer_product = _impl.transfer_product
green_top_block = _impl.green_top_block
link_phases = _impl.link_phases

python = _kernels_py


def compiled():
    """The compiled module, or None when it is not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
