"""Radial N-Laplacian existence toolkit."""

try:
    from ._nlap import *  # noqa: F401,F403  (installed layout)
    from ._nlap import __version__  # noqa: F401
except ImportError:
    from _nlap import *  # noqa: F401,F403  (build-tree layout)
    from _nlap import __version__  # noqa: F401
