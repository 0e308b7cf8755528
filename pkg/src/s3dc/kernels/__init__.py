"""Shortest-path search kernels for the router.

The compiled Cython kernel is preferred; the pure-Python implementation is a
drop-in fallback selected at import time (or forced with S3DC_PURE_PYTHON=1).
Both implement the same lazy-deletion binary-heap Dijkstra with epoch-stamped
workspaces so per-search setup cost is O(touched), not O(graph).
"""

import os

if os.environ.get("S3DC_PURE_PYTHON"):
    from .pathcore_py import dijkstra_to_target
    HAVE_COMPILED = False
else:
    try:
        from ._pathcore import dijkstra_to_target
        HAVE_COMPILED = True
    except ImportError:
        from .pathcore_py import dijkstra_to_target
        HAVE_COMPILED = False

__all__ = ["dijkstra_to_target", "HAVE_COMPILED"]
