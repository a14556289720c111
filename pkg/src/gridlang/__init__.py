"""Compositional goal-conditioned value functions in a pickup gridworld,
with Boolean task algebra and an in-context-learning semantic parser."""

from .kernels import KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
