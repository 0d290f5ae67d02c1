"""Event-driven multi-robot tree exploration.

Clusters of robots move at unit speed between tree nodes.  The simulation
jumps from one arrival to the next; simultaneous arrivals are handled in
order of the cluster's lowest robot id.  When a cluster reaches a node it
runs the per-node step: sense, grow and rewire the tree, split among the
unfinished children, or climb back toward the root.  Climbing is logical:
the cluster only travels when it has an unexplored node to reach, which
short-cuts the parent waypoints.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .bounds import tree_exploration_bound
from .tree import ExplorationTree, NodeState
from .worlds import Candidate, Route

log = logging.getLogger(__name__)

UNEXPLORED = NodeState.UNEXPLORED
UNDER = NodeState.UNDER_EXPLORATION
EXPLORED = NodeState.EXPLORED


@dataclass
class Cluster:
    id: int
    robots: tuple[int, ...]
    position: Any
    target: int | None = None
    route: Route | None = None
    t0: Fraction = Fraction(0)
    stops: list[int] = field(default_factory=list)
    next_stop: int = 0
    reached: int = 0  # index of the last route point recorded in trajectories
    version: int = 0
    replan: bool = False
    home: bool = False
    done: bool = False


@dataclass
class ExplorationResult:
    tree: ExplorationTree
    trajectories: dict[int, list[tuple[Fraction, Any]]]
    distances: dict[int, Fraction]
    visits: list[tuple[Fraction, int, tuple[int, ...]]]
    events: list[str]

    @property
    def c_tree(self) -> Fraction:
        return self.tree.total_length

    @property
    def d_max(self) -> Fraction:
        return self.tree.d_max

    @property
    def makespan(self) -> Fraction:
        return max(self.distances.values(), default=Fraction(0))

    @property
    def p(self) -> int:
        return len(self.distances)

    def tree_bound(self):
        return tree_exploration_bound(self.c_tree, self.d_max, self.p)


def split_robots(robots, k: int) -> list[tuple[int, ...]]:
    """Near-equal consecutive chunks for k children; earlier chunks get the remainder.

    With fewer robots than children only the first len(robots) chunks exist.
    """
    robots = sorted(robots)
    n = len(robots)
    if n < k:
        return [(r,) for r in robots]
    q, r = divmod(n, k)
    out, i = [], 0
    for j in range(k):
        size = q + (1 if j < r else 0)
        out.append(tuple(robots[i : i + size]))
        i += size
    return out


class Explorer:
    def __init__(self, world, p: int, max_events: int = 1_000_000):
        if p < 1:
            raise ValueError("p must be at least 1")
        self.world = world
        self.p = p
        self.max_events = max_events
        self.tree = ExplorationTree(world.start)
        self.clusters: dict[int, Cluster] = {}
        self.heap: list = []
        self.seq = 0
        self.now = Fraction(0)
        self.next_id = 0
        self.traj: dict[int, list] = {r: [(Fraction(0), world.start)] for r in range(p)}
        self.dist: dict[int, Fraction] = {r: Fraction(0) for r in range(p)}
        self.visits: list = []
        self.events: list[str] = []

    # bookkeeping

    def _note(self, msg: str) -> None:
        self.events.append(f"t={float(self.now):.6g} {msg}")

    def _new_cluster(self, robots, position) -> Cluster:
        c = Cluster(self.next_id, tuple(sorted(robots)), position)
        self.next_id += 1
        self.clusters[c.id] = c
        return c

    def _push(self, c: Cluster, t: Fraction) -> None:
        c.version += 1
        self.seq += 1
        heapq.heappush(self.heap, (t, c.robots[0], self.seq, c.id, c.version))

    def _record(self, c: Cluster, upto: int) -> None:
        route = c.route
        for j in range(c.reached + 1, upto + 1):
            t = c.t0 + route.cum[j]
            for r in c.robots:
                self.traj[r].append((t, route.points[j]))
                self.dist[r] += route.cum[j] - route.cum[j - 1]
        c.reached = max(c.reached, upto)
        c.position = route.points[upto]

    # movement

    def _travel(self, c: Cluster, route: Route, target: int | None) -> None:
        c.target, c.route, c.t0 = target, route, self.now
        c.stops = self.world.stops(route)
        c.next_stop, c.reached, c.replan = 0, 0, False
        self._push(c, self.now + route.cum[c.stops[0]])

    def _dispatch(self, c: Cluster, nid: int) -> None:
        node = self.tree[nid]
        if self.world.is_stale(node):
            self._note(f"node {nid} pruned: no unknown space left near it")
            self._mark_explored(nid, c.position)
            return self._goto_parent(c, nid)
        route = self.world.route(c.position, node.position)
        if route is None:
            log.warning("goal %s is unreachable, abandoned", self.world.fmt(node.position))
            self._note(f"node {nid} abandoned: unreachable")
            self._mark_explored(nid, c.position)
            return self._goto_parent(c, nid)
        self._travel(c, route, nid)

    def _go_home(self, c: Cluster) -> None:
        route = self.world.route(c.position, self.world.start)
        c.home = True
        self._travel(c, route, None)

    def _redirect(self, c: Cluster) -> None:
        """Stop a cluster whose goal was finished by someone else."""
        route, d = self.world.cut(c.route, self.now - c.t0)
        c.route = route
        c.stops = [len(route.points) - 1]
        c.next_stop = 0
        c.replan = True
        self._push(c, c.t0 + d)

    def _sweep(self) -> None:
        for c in list(self.clusters.values()):
            if c.done or c.home or c.replan or c.target is None:
                continue
            node = self.tree[c.target]
            if node.state is UNEXPLORED and self.world.is_stale(node):
                self._note(f"node {node.id} pruned: no unknown space left near it")
                self._mark_explored(node.id, c.position)
            if node.state is not UNEXPLORED:
                self._redirect(c)

    # per-node step

    def _goto(self, c: Cluster, nid: int) -> None:
        if self.tree[nid].state is UNEXPLORED:
            self._dispatch(c, nid)
        else:
            self._visit(c, nid)

    def _goto_parent(self, c: Cluster, nid: int) -> None:
        parent = self.tree[nid].parent
        if parent is None:
            if self.tree.root.state is EXPLORED:
                return self._go_home(c)
            return self._visit(c, nid)
        self._goto(c, parent)

    def _mark_explored(self, nid: int, pos) -> bool:
        """Mark nid explored and propagate upward; False if the root got new goals instead."""
        while True:
            if nid == 0 and not self._top_up_root(pos):
                return False
            self.tree.set_state(nid, EXPLORED)
            parent = self.tree[nid].parent
            if parent is None or self.tree[parent].state is not UNDER or self.tree.open_children(parent):
                return True
            nid = parent

    def _top_up_root(self, pos) -> bool:
        """Last chance for goals before the root closes; True when none remain."""
        cands = self.world.extra_root_goals(pos, self.tree)
        if not cands:
            return True
        self._note(f"root receives {len(cands)} late goals")
        self._add_children(0, cands)
        return False

    def _visit(self, c: Cluster, nid: int) -> None:
        node = self.tree[nid]
        if node.state is EXPLORED:
            return self._goto_parent(c, nid)
        if node.state is UNDER:
            kids = self.tree.open_children(nid)
            if kids:
                return self._divide(c, kids)
            if self._mark_explored(nid, c.position):
                return self._goto_parent(c, nid)
            return self._divide(c, self.tree.open_children(nid))
        self.tree.set_state(nid, UNDER)
        self.visits.append((self.now, nid, c.robots))
        self._note(f"cluster {c.robots} explores node {nid} at {self.world.fmt(node.position)}")
        cands = self.world.sense(node.position, self.tree)
        self._add_children(nid, cands)
        kids = self.tree.open_children(nid)
        if not kids:
            if self._mark_explored(nid, c.position):
                return self._goto_parent(c, nid)
            kids = self.tree.open_children(nid)
        self._divide(c, kids)

    def _add_children(self, nid: int, cands: list[Candidate]) -> None:
        parent = self.tree[nid]
        added = []
        for cand in cands:
            d = self.world.distance(parent.position, cand.position)
            if d is None:
                log.warning("goal %s is unreachable, dropped", self.world.fmt(cand.position))
                continue
            order = self.world.child_order(parent.position, cand)
            n = self.tree.add(nid, cand.position, cand.kind, d, cand.key, order, cand.region, cand.payload)
            added.append(n.id)
        parent.children.sort(key=lambda i: (self.tree[i].order, i))
        if any(self.tree[i].region is not None for i in added):
            self._rewire(added)

    def _rewire(self, ids: list[int]) -> None:
        """Nest the new nodes by foreign-region containment, then by clockwise precedence."""
        ids = sorted(ids, key=lambda i: (self.tree[i].order, i))
        R = {i: self.tree[i].region for i in ids}
        up: dict[int, set[int]] = {i: set() for i in ids}  # candidate parents
        for a in ids:
            for b in ids:
                if a != b and R[a] < R[b]:
                    up[a].add(b)

        def reaches(u, v):
            # v is an ancestor candidate of u
            stack, seen = [u], set()
            while stack:
                w = stack.pop()
                if w == v:
                    return True
                if w not in seen:
                    seen.add(w)
                    stack.extend(up[w])
            return False

        for i, a in enumerate(ids):
            for b in ids[i + 1 :]:
                ra, rb = R[a], R[b]
                if ra < rb or rb < ra or not (ra & rb):
                    continue
                if not reaches(a, b):
                    up[b].add(a)

        depth: dict[int, int] = {}

        def level(u):
            if u not in depth:
                depth[u] = 1 + max((level(v) for v in up[u]), default=-1)
            return depth[u]

        for a in ids:
            if not up[a]:
                continue
            best = max(up[a], key=lambda v: (level(v), self.tree[v].order, v))
            d = self.world.distance(self.tree[best].position, self.tree[a].position)
            self.tree.reparent(a, best, d)

    def _busy(self, nid: int) -> int:
        """Robots of other clusters currently heading into the subtree of nid."""
        n = 0
        for o in self.clusters.values():
            if o.target is not None and not o.home and (o.target == nid or nid in self.tree.ancestors(o.target)):
                n += len(o.robots)
        return n

    def _divide(self, c: Cluster, kids: list[int]) -> None:
        if len(c.robots) < len(kids):
            # pending children first, clockwise within equal load
            rank = {k: i for i, k in enumerate(kids)}
            kids = sorted(kids, key=lambda k: (self._busy(k), rank[k]))
        groups = split_robots(c.robots, len(kids))
        del self.clusters[c.id]
        if len(groups) > 1:
            self._note(f"cluster {c.robots} divides into {groups}")
        for g, kid in zip(groups, kids):
            sub = self._new_cluster(g, c.position)
            self._goto(sub, kid)

    # main loop

    def _arrive(self, c: Cluster) -> None:
        i = c.stops[c.next_stop]
        self._record(c, i)
        self.world.arrive(c.position, self.now)
        if i < len(c.route.points) - 1:
            c.next_stop += 1
            if c.home:
                return self._push(c, c.t0 + c.route.cum[c.stops[c.next_stop]])
            node = self.tree[c.target]
            if node.state is UNEXPLORED and self.world.is_stale(node):
                self._note(f"node {node.id} pruned: no unknown space left near it")
                self._mark_explored(node.id, c.position)
            if node.state is not UNEXPLORED:
                c.route = Route(c.route.points[: i + 1], c.route.cum[: i + 1])
                c.stops = [i]
                c.next_stop = 0
                c.replan = True
                return self._arrive_end(c)
            self._push(c, c.t0 + c.route.cum[c.stops[c.next_stop]])
            return
        self._arrive_end(c)

    def _arrive_end(self, c: Cluster) -> None:
        if c.home:
            c.done = True
            c.target = None
            return
        if c.replan:
            c.replan = False
            return self._goto(c, c.target)
        self._visit(c, c.target)

    def _merge_same_arrivals(self, c: Cluster, t: Fraction) -> None:
        """Absorb clusters arriving at the same node at the same time."""
        if c.home or c.replan or c.stops[c.next_stop] != len(c.route.points) - 1:
            return
        keep = []
        while self.heap and self.heap[0][0] == t:
            item = heapq.heappop(self.heap)
            o = self.clusters.get(item[3])
            if (
                o is not None
                and o.version == item[4]
                and not o.home
                and not o.replan
                and o.target == c.target
                and o.stops[o.next_stop] == len(o.route.points) - 1
            ):
                # both legs are booked before the robot sets combine
                self._record(o, len(o.route.points) - 1)
                self._record(c, len(c.route.points) - 1)
                del self.clusters[o.id]
                self._note(f"clusters {c.robots} and {o.robots} merge at node {c.target}")
                c.robots = tuple(sorted(c.robots + o.robots))
            else:
                keep.append(item)
        for item in keep:
            heapq.heappush(self.heap, item)

    def run(self) -> ExplorationResult:
        start = self.world.start
        self.world.arrive(start, self.now)
        c = self._new_cluster(range(self.p), start)
        self._visit(c, 0)
        self._sweep()
        n = 0
        while self.heap:
            n += 1
            if n > self.max_events:
                raise RuntimeError("event budget exhausted; exploration does not terminate")
            t, _, _, cid, ver = heapq.heappop(self.heap)
            c = self.clusters.get(cid)
            if c is None or ver != c.version or c.done:
                continue
            self.now = t
            self._merge_same_arrivals(c, t)
            self._arrive(c)
            self._sweep()
        self._check_final()
        return ExplorationResult(self.tree, self.traj, self.dist, self.visits, self.events)

    def _check_final(self) -> None:
        self.tree.check()
        if self.tree.root.state is not EXPLORED:
            raise RuntimeError("exploration ended before the root was explored")
        robots = sorted(r for c in self.clusters.values() for r in c.robots)
        if robots != list(range(self.p)):
            raise RuntimeError("robot sets do not partition the team")
        for r, pts in self.traj.items():
            if pts[-1][1] != self.world.start:
                raise RuntimeError(f"robot {r} did not return to start")


def explore(world, p: int) -> ExplorationResult:
    """Explore ``world`` with ``p`` robots starting together at its start point."""
    return Explorer(world, p).run()
