"""Forward-search temporal-numeric planner with lazy LP consistency checking."""

__version__ = "0.1.0"
