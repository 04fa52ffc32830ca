"""Storage-aware DC dispatch toolkit: model builders, a bounded-variable
simplex with branch and bound, penalty analysis, and the placement-under-
attack pipeline, all backed by the C++ core."""

try:
    from ._gridess import *  # noqa: F401,F403  (installed layout)
except ImportError:
    from _gridess import *  # noqa: F401,F403  (build-tree layout)
