"""Integral minimum-cost flow with node supplies and demands.

The solver is the primal-dual form of successive shortest paths:

1. Potentials come from Bellman-Ford started at a virtual root joined to
   every node, so negative arc costs are fine.  If the arcs contain a
   negative cycle, every negative arc is saturated up front instead; that
   leaves a residual graph without negative costs and zero potentials work.
2. A super source feeds every supply node and every demand node drains
   into a super sink.
3. Each phase runs Dijkstra on reduced costs (stopping once the sink is
   settled), lifts the potentials, then pushes a blocking flow along
   zero-reduced-cost arcs with a depth-first search.

All choices are made in arc insertion order, so a given network always
yields the same flow.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, NamedTuple, Optional, Sequence

from .core import INT64_MAX, OBJECTIVE_LIMIT, AssignmentError, OverflowRisk

Overflow = OverflowRisk


class Infeasible(AssignmentError):
    """No flow meets every supply and demand within the arc capacities."""

    def __init__(self, message: str, shortfall: int = 0) -> None:
        super().__init__(message)
        self.shortfall = shortfall


class InvalidNetwork(AssignmentError, ValueError):
    pass


class Arc(NamedTuple):
    tail: int
    head: int
    capacity: int
    cost: int


@dataclass(frozen=True)
class FlowNetwork:
    """Directed graph with integer capacities, costs and node supplies.

    ``supply[v] > 0`` is a supply, ``< 0`` a demand.  Arcs refer to nodes by
    position; ``nodes`` only carries labels for reporting.
    """

    nodes: tuple
    supply: tuple[int, ...]
    arcs: tuple[Arc, ...]

    def __post_init__(self) -> None:
        n = len(self.nodes)
        if len(self.supply) != n:
            raise InvalidNetwork("one supply value per node is required")
        if sum(self.supply) != 0:
            raise InvalidNetwork(f"supplies sum to {sum(self.supply)}, not 0")
        for i, a in enumerate(self.arcs):
            if not (0 <= a.tail < n and 0 <= a.head < n):
                raise InvalidNetwork(f"arc {i} references a missing node")
            if a.capacity < 0 or int(a.capacity) != a.capacity:
                raise InvalidNetwork(f"arc {i} has invalid capacity {a.capacity}")

    @classmethod
    def build(cls, supplies: Mapping[Hashable, int],
              arcs: Iterable[tuple[Hashable, Hashable, int, int]]) -> "FlowNetwork":
        """Build from labelled nodes (in mapping order) and labelled arcs."""
        labels = list(supplies)
        index = {v: i for i, v in enumerate(labels)}
        return cls(
            tuple(labels),
            tuple(int(supplies[v]) for v in labels),
            tuple(Arc(index[u], index[v], int(c), int(w)) for u, v, c, w in arcs),
        )

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class Flow:
    per_arc: tuple[int, ...]
    total_cost: int

    def __getitem__(self, arc: int) -> int:
        return self.per_arc[arc]


def _bellman_ford_all(n: int, arcs: Sequence[Arc]) -> Optional[list[int]]:
    """Shortest distances from a virtual root joined to every node.

    Only arcs with positive capacity count.  Returns None when a negative
    cycle exists.
    """
    dist = [0] * n
    live = [(a.tail, a.head, a.cost) for a in arcs if a.capacity > 0]
    for _ in range(n + 1):
        changed = False
        for u, v, w in live:
            nd = dist[u] + w
            if nd < dist[v]:
                dist[v] = nd
                changed = True
        if not changed:
            return dist
    return None


class _Residual:
    __slots__ = ("to", "cap", "cost", "adj", "pos")

    def __init__(self, n: int) -> None:
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[int] = []
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.pos: list[int] = []

    def add(self, u: int, v: int, cap: int, cost: int) -> None:
        e = len(self.to)
        self.to += (v, u)
        self.cap += (cap, 0)
        self.cost += (cost, -cost)
        self.pos += (len(self.adj[u]), len(self.adj[v]))
        self.adj[u].append(e)
        self.adj[v].append(e + 1)


def _check_budget(network: FlowNetwork, cost_bound: Optional[int]) -> None:
    if cost_bound is None:
        cost_bound = sum(abs(a.cost) * a.capacity for a in network.arcs)
    if cost_bound > OBJECTIVE_LIMIT:
        raise Overflow(f"worst-case flow cost {cost_bound} exceeds 2**62")


def solve_min_cost_flow(network: FlowNetwork, *,
                        cost_bound: Optional[int] = None) -> Flow:
    """Return a minimum-cost integral flow meeting every supply and demand.

    ``cost_bound`` is a caller-proven bound on the magnitude of any
    feasible flow's cost; without it the crude bound sum(|cost| * capacity)
    is used.  Raises :class:`Infeasible` when the demands cannot be met and
    :class:`Overflow` when the cost could leave the 64-bit range.
    """
    _check_budget(network, cost_bound)
    n = len(network.nodes)
    src, snk = n, n + 1
    res = _Residual(n + 2)
    for a in network.arcs:
        res.add(a.tail, a.head, a.capacity, a.cost)

    balance = list(network.supply)
    pi = _bellman_ford_all(n, network.arcs)
    if pi is None:
        # negative cycle: pre-saturate negative arcs, residual costs become >= 0
        for i, a in enumerate(network.arcs):
            if a.cost < 0 and a.capacity > 0:
                res.cap[2 * i] = 0
                res.cap[2 * i + 1] = a.capacity
                balance[a.tail] -= a.capacity
                balance[a.head] += a.capacity
        pi = [0] * n
    floor = min(pi) if pi else 0
    pi = pi + [0, floor]

    required = 0
    for v, b in enumerate(balance):
        if b > 0:
            res.add(src, v, b, 0)
            required += b
        elif b < 0:
            res.add(v, snk, -b, 0)

    sent = 0
    while sent < required:
        dist_t = _dijkstra(res, pi, src, snk)
        if dist_t is None:
            raise Infeasible(
                f"only {sent} of {required} units can be routed", required - sent)
        pushed = _blocking_flow(res, pi, src, snk)
        sent += pushed

    per_arc = tuple(res.cap[2 * i + 1] for i in range(len(network.arcs)))
    total = sum(a.cost * f for a, f in zip(network.arcs, per_arc))
    if abs(total) > INT64_MAX:
        raise Overflow("total cost overflows 64 bits")
    return Flow(per_arc, total)


def _dijkstra(res: _Residual, pi: list[int], src: int, snk: int) -> Optional[int]:
    """Settle nodes up to the sink and lift potentials in place.

    Returns the reduced distance to the sink, or None if unreachable.
    """
    inf = None
    to, cap, cost, adj = res.to, res.cap, res.cost, res.adj
    n = len(adj)
    dist: list = [inf] * n
    done = [False] * n
    dist[src] = 0
    heap = [(0, src)]
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        d, u = pop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == snk:
            break
        base = d + pi[u]
        for e in adj[u]:
            if cap[e]:
                v = to[e]
                if done[v]:
                    continue
                nd = base + cost[e] - pi[v]
                dv = dist[v]
                if dv is None or nd < dv:
                    dist[v] = nd
                    push(heap, (nd, v))
    if not done[snk]:
        return None
    dt = dist[snk]
    for v in range(n):
        dv = dist[v]
        pi[v] += dt if (dv is None or dv > dt or not done[v]) else dv
    return dt


def _blocking_flow(res: _Residual, pi: list[int], src: int, snk: int) -> int:
    """Push flow along zero-reduced-cost paths until none is left.

    Reduced costs are fixed for the whole phase, so the admissible arcs are
    collected once per node; saturated arcs are dropped lazily and reverse
    arcs revived by an augmentation are appended.  Every search is a plain
    DFS (each node entered at most once); a node that fails without having
    skipped an already-visited neighbour can never reach the sink again in
    this phase and is marked dead.  The phase therefore ends only when no
    zero-cost path is left.
    """
    to, cap, cost, adj = res.to, res.cap, res.cost, res.adj
    n = len(adj)
    adm = []
    listed = bytearray(len(to))
    for u in range(n):
        pu = pi[u]
        lst = [e for e in adj[u] if cap[e] and cost[e] + pu == pi[to[e]]]
        for e in lst:
            listed[e] = 1
        adm.append(lst)
    dead = [False] * n
    soft = [False] * n
    stamp = [0] * n
    scan = [0] * n
    sid = 0
    total = 0
    while True:
        sid += 1
        path: list[int] = []
        u = src
        stamp[u] = sid
        soft[u] = False
        i = 0
        while u != snk:
            lst = adm[u]
            nxt = -1
            while i < len(lst):
                e = lst[i]
                v = to[e]
                if not cap[e] or dead[v]:
                    listed[e] = 0
                    last = lst.pop()
                    if i < len(lst):
                        lst[i] = last
                    continue
                if stamp[v] == sid:
                    soft[u] = True
                    i += 1
                    continue
                nxt = e
                break
            if nxt >= 0:
                scan[u] = i
                path.append(nxt)
                u = to[nxt]
                stamp[u] = sid
                soft[u] = False
                i = 0
                continue
            if not soft[u]:
                dead[u] = True
            if u == src:
                return total
            child = to[path.pop()]
            u = to[path[-1]] if path else src
            i = scan[u]
            if not dead[child]:
                soft[u] = True
                i += 1
        delta = min(cap[e] for e in path)
        for e in path:
            cap[e] -= delta
            r = e ^ 1
            cap[r] += delta
            if not listed[r]:
                listed[r] = 1
                adm[to[e]].append(r)
        total += delta


# -- verification helpers ---------------------------------------------------


def flow_violations(network: FlowNetwork, flow: Flow) -> list[str]:
    """Integrality, capacity and conservation problems of ``flow``."""
    out = []
    if len(flow.per_arc) != len(network.arcs):
        return ["flow has the wrong number of arcs"]
    net = [0] * len(network.nodes)
    for i, (a, f) in enumerate(zip(network.arcs, flow.per_arc)):
        if not isinstance(f, int):
            out.append(f"arc {i}: non-integral flow {f!r}")
        if f < 0 or f > a.capacity:
            out.append(f"arc {i}: flow {f} outside [0, {a.capacity}]")
        net[a.tail] += f
        net[a.head] -= f
    for v, (got, want) in enumerate(zip(net, network.supply)):
        if got != want:
            out.append(f"node {network.nodes[v]!r}: net outflow {got} != supply {want}")
    cost = sum(a.cost * f for a, f in zip(network.arcs, flow.per_arc))
    if cost != flow.total_cost:
        out.append(f"reported cost {flow.total_cost} != recomputed {cost}")
    return out


def residual_arcs(network: FlowNetwork, flow: Flow) -> list[tuple[int, int, int]]:
    """(tail, head, cost) for every residual arc with spare capacity."""
    out = []
    for a, f in zip(network.arcs, flow.per_arc):
        if f < a.capacity:
            out.append((a.tail, a.head, a.cost))
        if f > 0:
            out.append((a.head, a.tail, -a.cost))
    return out


def find_negative_cycle(network: FlowNetwork, flow: Flow) -> Optional[list[int]]:
    """Bellman-Ford search for a negative-cost cycle in the residual graph.

    A flow meeting the supplies is optimal exactly when this returns None.
    Otherwise the nodes of one negative cycle are returned in order.
    """
    n = len(network.nodes)
    edges = residual_arcs(network, flow)
    dist = [0] * n
    pred = [-1] * n
    last = -1
    for _ in range(n):
        last = -1
        for u, v, w in edges:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                pred[v] = u
                last = v
        if last < 0:
            return None
    for _ in range(n):
        last = pred[last]
    cycle = [last]
    v = pred[last]
    while v != last:
        cycle.append(v)
        v = pred[v]
    cycle.reverse()
    return cycle
