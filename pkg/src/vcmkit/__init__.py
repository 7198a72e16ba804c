"""Machine-vision video coding experiment toolkit."""

__version__ = "0.1.0"
