"""Algebraic Eraser tag-authentication lab.

E-multiplication over GF(256), the challenge/response authentication
protocol built on it, a framed wire emulation of tag and interrogator, and
the attacks that break the scheme (impersonation, private-matrix recovery,
lookup-table impersonation, meet-in-the-middle key recovery).
"""

from .backend import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
