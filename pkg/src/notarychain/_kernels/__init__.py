"""Hash kernel selection: compiled extension when available, else pure Python.

Set NOTARYCHAIN_PURE_KERNELS=1 to force the fallback (used by the benchmark
and by tests comparing the two implementations).
"""

import os

from . import fallback

if os.environ.get("NOTARYCHAIN_PURE_KERNELS"):
    _impl = fallback
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "c"
    except ImportError:
        _impl = fallback
        BACKEND = "python"

keccak256 = _impl.keccak256
double_sha256 = _impl.double_sha256
pow_search = _impl.pow_search
KECCAK_DOMAIN = _impl.KECCAK_DOMAIN


def available_backends() -> dict:
    """Importable kernel implementations, keyed by backend name."""
    impls = {"python": fallback}
    try:
        from . import _ckernels
        impls["c"] = _ckernels
    except ImportError:
        pass
    return impls
