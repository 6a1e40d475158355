"""Backend selection for the chain kernels.

The compiled extension is preferred; the numpy fallback is a drop-in with
bit-identical output.  ``ESLINC_BACKEND=compiled|python`` forces a choice
(``compiled`` raises if the extension is missing instead of silently
degrading).
"""

import os

from . import _corepy
from .errors import ConfigurationError

STATUS_OK = _corepy.STATUS_OK
STATUS_SIGMA_GUARD = _corepy.STATUS_SIGMA_GUARD
SIGMA_RULE_NORM2 = _corepy.SIGMA_RULE_NORM2
SIGMA_RULE_NORM = _corepy.SIGMA_RULE_NORM


def _load(forced: str):
    if forced == "python":
        return _corepy, "python"
    try:
        from . import _core
        return _core, "compiled"
    except ImportError:
        if forced == "compiled":
            raise
        return _corepy, "python"


def get_backend(name: str):
    """Kernel module for an explicit backend name ('compiled' or 'python')."""
    if name not in ("compiled", "python"):
        raise ConfigurationError(f"unknown backend {name!r}")
    return _load(name)[0]


_forced = os.environ.get("ESLINC_BACKEND", "").strip().lower()
if _forced not in ("", "compiled", "python"):
    raise ConfigurationError(
        f"ESLINC_BACKEND must be 'compiled' or 'python', got {_forced!r}")

_impl, BACKEND = _load(_forced)

run_const_sigma_kernel = _impl.run_const_sigma_kernel
run_csa_kernel = _impl.run_csa_kernel
