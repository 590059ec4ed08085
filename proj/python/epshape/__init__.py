"""Rigid-body dynamics with advected parameters (bindings to the C++ core)."""

from ._core import *  # noqa: F401,F403
