"""Desk-scale date-fruit sorting pipeline: simulation, features, models, GA, RL, metrics."""

__version__ = "0.1.0"
