"""Numerical tools for optimal universal quantum cloning and its physical realizations.

Each submodule is a small numpy/scipy calculation; ``qclone.cli`` turns them
into reproducible tables."""

__version__ = "0.1.0"
