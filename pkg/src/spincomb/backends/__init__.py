"""Integration backend selection.

The compiled Cython kernel is used when available; set ``SPINCOMB_PURE=1`` to
force the pure-numpy fallback.  Both expose the same module-level API.
"""

import os

if os.environ.get("SPINCOMB_PURE"):
    from . import pure as kernels
else:
    try:
        from . import kernels  # type: ignore[no-redef]
    except ImportError:
        from . import pure as kernels

BACKEND = kernels.BACKEND_NAME

SYS_FULL = kernels.SYS_FULL
SYS_REDUCED = kernels.SYS_REDUCED
SYS_GROUP = kernels.SYS_GROUP
SYS_FLOQUET = kernels.SYS_FLOQUET

rhs = kernels.rhs
integrate_final = kernels.integrate_final
integrate_sampled = kernels.integrate_sampled
integrate_to_section = kernels.integrate_to_section
