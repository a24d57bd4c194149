"""Dynamic interference-threshold model for an underlay cognitive radio link."""

__version__ = "0.1.0"
