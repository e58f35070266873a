"""Select the numeric core: compiled extension if present, else pure Python.

Set ``FRACFIELD_FORCE_PURE=1`` to skip the extension even when built (used
by the parity tests and benchmark).
"""
import os

from . import _purekern

if os.environ.get("FRACFIELD_FORCE_PURE") == "1":
    _impl = _purekern
    _name = "pure"
else:
    try:
        from . import _fastkern as _impl  # type: ignore[no-redef]
        _name = "compiled"
    except ImportError:
        _impl = _purekern
        _name = "pure"


def backend_name():
    """Which core is active: 'compiled' or 'pure'."""
    return _name


gammaln_sign = _impl.gammaln_sign
f21_family = _impl.f21_family
bm_closed = _impl.bm_closed
kernel_matrix = _impl.kernel_matrix
bm_row = _impl.bm_row
