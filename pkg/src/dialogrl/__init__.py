"""Joint supervised and reinforcement training of a neural dialog agent and user simulator."""

__version__ = "0.1.0"
