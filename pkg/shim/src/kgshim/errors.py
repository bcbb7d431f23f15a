"""Shim exception hierarchy."""


class ShimError(Exception):
    """Base for all shim-raised errors."""


class ShimConfigError(ShimError):
    """Invalid or unreadable shim configuration."""


class UnknownModel(ShimError):
    """Model id matches no registered scheme, or its labels are unusable."""
