"""Matrix-free space-time solver for state-constrained parabolic optimal control."""

from ._stoc import Problem, builtin_targets, set_worker_threads

__all__ = ["Problem", "builtin_targets", "set_worker_threads"]
