"""Closed-form cost bounds for multi-robot tree exploration."""

import math
from fractions import Fraction

LOG_BASE = 2


def competitive_bound(p: int, log_base: float = LOG_BASE, alpha: float = 1.0) -> float:
    """Worst-case ratio of exploration cost to the offline optimum for p robots.

    ``alpha`` scales the bound when every leg may be up to alpha times the
    shortest path.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    lg = math.log(p, log_base)
    return alpha * 2 * (math.sqrt(2) * p + lg) / (1 + lg)


def tree_exploration_bound(c_tree, d_max, p: int, log_base: float = LOG_BASE) -> float:
    """Makespan bound 2 (C_tree + d_max log p) / (1 + log p) for exploring a tree of total length C_tree."""
    if p < 1:
        raise ValueError("p must be at least 1")
    if c_tree < 0 or d_max < 0:
        raise ValueError("lengths must be non-negative")
    if log_base == 2 and p & (p - 1) == 0:
        # integral logarithm: stay exact for exact inputs
        lg = p.bit_length() - 1
        return 2 * (Fraction(c_tree) + Fraction(d_max) * lg) / (1 + lg)
    lg = math.log(p, log_base)
    return 2 * (float(c_tree) + float(d_max) * lg) / (1 + lg)


def single_robot_ratio() -> float:
    """Ratio known for one robot following the clockwise extension order."""
    return math.sqrt(2)
