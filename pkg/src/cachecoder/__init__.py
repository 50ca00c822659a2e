"""Exact simulator and analysis toolkit for keyed multi-transmitter
coded caching over finite-field linear networks."""

from .gf import BACKEND, FieldMatrix, FieldSpec, field_spec

__version__ = "0.1.0"

__all__ = ["BACKEND", "FieldMatrix", "FieldSpec", "field_spec", "__version__"]
