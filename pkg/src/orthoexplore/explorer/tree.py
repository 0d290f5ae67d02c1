from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any


class NodeState(Enum):
    UNEXPLORED = "unexplored"
    UNDER_EXPLORATION = "under-exploration"
    EXPLORED = "explored"


_ORDER = {NodeState.UNEXPLORED: 0, NodeState.UNDER_EXPLORATION: 1, NodeState.EXPLORED: 2}


class StateError(RuntimeError):
    pass


@dataclass
class TreeNode:
    id: int
    position: Any
    kind: str  # root, extension-goal, frontier-goal
    parent: int | None = None
    children: list[int] = field(default_factory=list)
    state: NodeState = NodeState.UNEXPLORED
    edge_length: Fraction = Fraction(0)
    key: Any = None  # identity of the sensed feature, never added twice
    order: Any = 0  # clockwise sort key
    region: Any = None  # foreign-polygon cells in geometric mode
    payload: Any = None


class ExplorationTree:
    def __init__(self, root_position):
        self.nodes: list[TreeNode] = [TreeNode(0, root_position, "root")]
        self.keys: set = set()

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def __getitem__(self, i: int) -> TreeNode:
        return self.nodes[i]

    def __len__(self) -> int:
        return len(self.nodes)

    def add(self, parent: int, position, kind: str, edge_length, key=None, order=0, region=None, payload=None) -> TreeNode:
        if key is not None and key in self.keys:
            raise StateError(f"feature {key} is already in the tree")
        node = TreeNode(len(self.nodes), position, kind, parent, edge_length=Fraction(edge_length), key=key, order=order, region=region, payload=payload)
        self.nodes.append(node)
        self.nodes[parent].children.append(node.id)
        if key is not None:
            self.keys.add(key)
        return node

    def reparent(self, nid: int, new_parent: int, edge_length) -> None:
        node = self.nodes[nid]
        if new_parent == nid or nid in self.ancestors(new_parent):
            raise StateError(f"reparenting {nid} under {new_parent} would create a cycle")
        self.nodes[node.parent].children.remove(nid)
        node.parent = new_parent
        node.edge_length = Fraction(edge_length)
        kids = self.nodes[new_parent].children
        kids.append(nid)
        kids.sort(key=lambda c: self.nodes[c].order)

    def ancestors(self, nid: int) -> list[int]:
        out = []
        cur = self.nodes[nid].parent
        while cur is not None:
            out.append(cur)
            cur = self.nodes[cur].parent
        return out

    def set_state(self, nid: int, state: NodeState) -> None:
        node = self.nodes[nid]
        if _ORDER[state] < _ORDER[node.state]:
            raise StateError(f"node {nid}: {node.state.value} -> {state.value} goes backwards")
        node.state = state

    def open_children(self, nid: int) -> list[int]:
        return [c for c in self.nodes[nid].children if self.nodes[c].state is not NodeState.EXPLORED]

    def depth_distance(self, nid: int) -> Fraction:
        d = Fraction(0)
        node = self.nodes[nid]
        while node.parent is not None:
            d += node.edge_length
            node = self.nodes[node.parent]
        return d

    @property
    def total_length(self) -> Fraction:
        """Sum of edge lengths (the tree cost)."""
        return sum((n.edge_length for n in self.nodes[1:]), Fraction(0))

    @property
    def d_max(self) -> Fraction:
        leaves = [n.id for n in self.nodes if not n.children]
        return max((self.depth_distance(i) for i in leaves), default=Fraction(0))

    def leaves(self) -> list[int]:
        return [n.id for n in self.nodes if not n.children]

    def check(self) -> None:
        """Raise if parent links do not form a tree rooted at node 0."""
        for n in self.nodes[1:]:
            if n.parent is None or n.id not in self.nodes[n.parent].children:
                raise StateError(f"node {n.id} has an inconsistent parent link")
            if 0 not in self.ancestors(n.id):
                raise StateError(f"node {n.id} is not connected to the root")
        for n in self.nodes:
            if n.state is NodeState.EXPLORED and self.open_children(n.id):
                raise StateError(f"explored node {n.id} has unfinished children")

    def to_dot(self, fmt=lambda p: str(p)) -> str:
        lines = ["digraph tree {"]
        for n in self.nodes:
            lines.append(f'  n{n.id} [label="{n.id} {n.state.value}\\n{fmt(n.position)}"];')
        for n in self.nodes[1:]:
            lines.append(f'  n{n.parent} -> n{n.id} [label="{float(n.edge_length):.4g}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"
