"""Mine peer-review networks from commit trailers and measure review homophily."""

from reviewnet.errors import InputError, InvariantViolation, ReviewnetError

__version__ = "0.1.0"

__all__ = ["InputError", "InvariantViolation", "ReviewnetError", "__version__"]
