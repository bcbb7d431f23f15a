"""HTTP inference shim for the embedding and NLI wire contracts."""

__all__ = ["__version__"]
__version__ = "0.1.0"
