"""Numerics for q-Racah weighted lozenge tilings of the hexagon."""
__version__ = "0.1.0"
