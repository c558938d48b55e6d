"""Tag recommendation for Stack Overflow posts."""

__version__ = "0.1.0"
