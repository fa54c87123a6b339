"""Select the compiled kernels when importable, else the numpy fallback."""
import os

from . import _fallback

if os.environ.get("STATIONET_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _core as _impl
    except ImportError:  # extension not built
        _impl = _fallback

NAME = "cython" if _impl is not _fallback else "python"

activate = _impl.activate
activate_grad = _impl.activate_grad
hidden_layer = _impl.hidden_layer
