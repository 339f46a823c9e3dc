"""Exceptions shared across loaders, reducers and the CLI."""


class DataError(Exception):
    """Raised when an input file or dataset is malformed or inconsistent."""
