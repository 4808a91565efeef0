"""Multi-agent stochastic linear bandits with clustering and personalization."""
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
