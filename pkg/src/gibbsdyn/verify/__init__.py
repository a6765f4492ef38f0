"""Statistical and algebraic verification suite."""

__version__ = "0.1.0"
