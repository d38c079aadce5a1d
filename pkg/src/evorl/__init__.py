"""Evolution under live/die feedback alongside tabular reinforcement learning."""

__version__ = "0.1.0"
