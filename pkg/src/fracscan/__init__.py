"""Contour-based long-bone fracture detection toolkit for leg X-ray images."""

__version__ = "0.1.0"
