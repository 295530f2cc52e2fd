"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``SLITLAB_KERNELS=python`` is set, the numpy/pure-Python
versions are used.  Both expose the same four functions.
"""

import os

from . import _kernels_py

_compiled = None
if os.environ.get("SLITLAB_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

backend = _compiled if _compiled is not None else _kernels_py
BACKEND_NAME = "compiled" if _compiled is not None else "python"

radial_rk4 = backend.radial_rk4
radial_shoot = backend.radial_shoot
p1_local = backend.p1_local
locate = backend.locate


def available_backends():
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
