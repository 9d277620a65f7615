"""Exhaustive min-cost flow for very small networks.

Arcs are assigned one at a time; a node's balance is checked as soon as
its last incident arc is fixed, which keeps the search tractable without
relying on any optimality argument.
"""

from __future__ import annotations

import random
from typing import Optional

from classassign.flow import Arc, FlowNetwork


def brute_force_min_cost(net: FlowNetwork) -> Optional[int]:
    arcs = net.arcs
    n = len(net.nodes)
    last_touch = [-1] * n
    for i, a in enumerate(arcs):
        last_touch[a.tail] = max(last_touch[a.tail], i)
        last_touch[a.head] = max(last_touch[a.head], i)
    closing = [[] for _ in arcs]
    for v, i in enumerate(last_touch):
        if i >= 0:
            closing[i].append(v)
    if any(last_touch[v] < 0 and net.supply[v] for v in range(n)):
        return None

    net_out = [0] * n
    best = [None]

    def rec(i: int, cost: int) -> None:
        if i == len(arcs):
            if best[0] is None or cost < best[0]:
                best[0] = cost
            return
        a = arcs[i]
        for f in range(a.capacity + 1):
            net_out[a.tail] += f
            net_out[a.head] -= f
            if all(net_out[v] == net.supply[v] for v in closing[i]):
                rec(i + 1, cost + f * a.cost)
            net_out[a.tail] -= f
            net_out[a.head] += f

    rec(0, 0)
    return best[0]


def random_network(rng: random.Random, max_nodes: int = 6, max_arcs: int = 10,
                   max_cap: int = 3, cost_range: int = 9) -> FlowNetwork:
    n = rng.randint(2, max_nodes)
    arcs = []
    for _ in range(rng.randint(1, max_arcs)):
        u, v = rng.sample(range(n), 2)
        arcs.append(Arc(u, v, rng.randint(0, max_cap), rng.randint(-cost_range, cost_range)))
    supply = [0] * n
    for _ in range(rng.randint(0, 3)):
        u, v = rng.sample(range(n), 2)
        supply[u] += 1
        supply[v] -= 1
    return FlowNetwork(tuple(range(n)), tuple(supply), tuple(arcs))
