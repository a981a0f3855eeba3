"""odp-check package metadata."""

__all__ = ["__version__", "TOOL_NAME"]

# Keep in sync with setup.py
__version__ = "0.1.0"
TOOL_NAME = "odp-check"
