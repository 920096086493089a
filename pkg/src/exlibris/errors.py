"""Exception hierarchy shared across the package."""


class ExlibrisError(Exception):
    """Base for every error the tool raises deliberately."""
