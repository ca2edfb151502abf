"""Planar design workbench for camera-sensed underactuated fingers."""

__version__ = "0.1.0"

__all__ = [
    "cli",
    "design",
    "errors",
    "finger",
    "geometry",
    "mechanism",
    "optics",
    "perception",
    "service",
    "workbench",
]
