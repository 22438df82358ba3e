"""Simulation of HOM-filtered ghost imaging with rotated SPDC photon pairs."""

__version__ = "0.1.0"
