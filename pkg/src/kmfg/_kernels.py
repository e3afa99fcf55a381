"""Backend selection for the particle-stepping kernel.

Prefers the compiled extension; falls back to the numpy implementation when
the extension is unavailable or KMFG_FORCE_NUMPY is set.  Both backends give
identical trajectories for identical noise.
"""

import os

if os.environ.get("KMFG_FORCE_NUMPY"):
    from ._kernels_py import em_chunk

    BACKEND = "numpy"
else:
    try:
        from ._kernels_c import em_chunk

        BACKEND = "cython"
    except ImportError:
        from ._kernels_py import em_chunk

        BACKEND = "numpy"

__all__ = ["em_chunk", "BACKEND"]
