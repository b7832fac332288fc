"""Markov-chain model of a multipartite entanglement switch.

Exact kernels, closed-form performance formulas, Monte Carlo estimation,
truncated stationary solving and Lyapunov-drift stability certification.
"""
from .errors import EntSwitchError, InvalidParams
from .model import SwitchParams

__version__ = "0.1.0"

__all__ = ["EntSwitchError", "InvalidParams", "SwitchParams", "__version__"]
