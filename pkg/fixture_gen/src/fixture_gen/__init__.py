"""Offline golden-vector generator for biquadratic-field fixtures."""

__version__ = "0.1.0"

from .generator import DEFAULT_FIELDS, generate_bundle, generate_fixtures  # noqa: F401
