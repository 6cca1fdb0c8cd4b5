"""Strategic ambiguity in two-party competition: game solver and panel econometrics."""

__version__ = "0.1.0"
