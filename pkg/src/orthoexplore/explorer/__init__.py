from .bounds import LOG_BASE, competitive_bound, single_robot_ratio, tree_exploration_bound
from .engine import Cluster, ExplorationResult, Explorer, explore, split_robots
from .tree import ExplorationTree, NodeState, StateError, TreeNode
from .worlds import GeometricWorld, GridParams, GridWorld, Route

__all__ = [
    "LOG_BASE", "competitive_bound", "single_robot_ratio", "tree_exploration_bound",
    "Cluster", "ExplorationResult", "Explorer", "explore", "split_robots",
    "ExplorationTree", "NodeState", "StateError", "TreeNode",
    "GeometricWorld", "GridParams", "GridWorld", "Route",
]
