"""Synchronous-round distributed (Delta+1)-coloring simulator.

A library plus CLI implementing a locally-iterative coloring pipeline
(Linial phase, quadratic reduction phase, standard reduction phase) and
its self-stabilizing variant, with per-round invariant verification.
"""

from .params import Params, derive, classify, log_star, smallest_prime_in

__all__ = ["Params", "derive", "classify", "log_star", "smallest_prime_in"]
__version__ = "0.1.0"
