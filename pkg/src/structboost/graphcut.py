"""Exact s-t min-cut for binary submodular pairwise energies.

The energy is

    E(y) = sum_p unary_{y_p}[p] + sum_(p,q) theta01 [y_p=0, y_q=1] + theta10 [y_p=1, y_q=0]

with nonnegative ``theta01``/``theta10``. Nodes on the source side of the cut
take label 1, the rest label 0.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SubmodularityError

SATURATED = 1e-12


@dataclass
class FlowNetwork:
    source_cap: np.ndarray
    sink_cap: np.ndarray
    edges: np.ndarray
    cap_pq: np.ndarray
    cap_qp: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=int).reshape(-1, 2)
        for name in ("source_cap", "sink_cap", "cap_pq", "cap_qp"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"{name} must be finite and nonnegative")
            setattr(self, name, arr)

    @property
    def n(self):
        return self.source_cap.size

    def cut_value(self, labeling):
        """Capacity of the cut putting label-1 nodes on the source side."""
        y = np.asarray(labeling)
        value = float(np.sum(self.source_cap[y == 0]) + np.sum(self.sink_cap[y == 1]))
        if self.edges.size:
            p, q = self.edges[:, 0], self.edges[:, 1]
            value += float(np.sum(self.cap_pq[(y[p] == 1) & (y[q] == 0)]))
            value += float(np.sum(self.cap_qp[(y[q] == 1) & (y[p] == 0)]))
        return value


@dataclass
class FlowResult:
    labeling: np.ndarray
    cut_value: float
    flow_value: float
    source_flow: np.ndarray
    sink_flow: np.ndarray
    flow_pq: np.ndarray
    flow_qp: np.ndarray


def build_network(unary0, unary1, edges, theta01, theta10):
    """Reparameterise a submodular energy into a flow network.

    Each node keeps only the excess of one unary over the other (as a source or
    sink capacity); the shared part goes into ``offset``, so that
    ``cut value + offset == energy`` for every labeling.
    """
    u0 = np.asarray(unary0, dtype=float)
    u1 = np.asarray(unary1, dtype=float)
    t01 = np.asarray(theta01, dtype=float).ravel()
    t10 = np.asarray(theta10, dtype=float).ravel()
    if np.any(t01 < 0) or np.any(t10 < 0):
        raise SubmodularityError("pairwise disagreement costs must be nonnegative")
    diff = u1 - u0
    return FlowNetwork(
        source_cap=np.maximum(0.0, -diff),
        sink_cap=np.maximum(0.0, diff),
        edges=edges,
        cap_pq=t10,
        cap_qp=t01,
        offset=float(np.sum(np.minimum(u0, u1))),
    )


def max_flow(net):
    """Shortest-augmenting-path max flow; returns flows and the min cut."""
    n = net.n
    s, t = n, n + 1
    head, cap, adj = [], [], [[] for _ in range(n + 2)]

    def arc(u, v, c):
        adj[u].append(len(head))
        head.append(v)
        cap.append(float(c))
        adj[v].append(len(head))
        head.append(u)
        cap.append(0.0)
        return len(head) - 2

    src_arcs = [arc(s, p, net.source_cap[p]) for p in range(n)]
    snk_arcs = [arc(p, t, net.sink_cap[p]) for p in range(n)]
    pq_arcs, qp_arcs = [], []
    for k, (p, q) in enumerate(net.edges.tolist()):
        pq_arcs.append(arc(p, q, net.cap_pq[k]))
        qp_arcs.append(arc(q, p, net.cap_qp[k]))
    original = list(cap)

    # trivial s -> p -> t paths first
    for p in range(n):
        a, b = src_arcs[p], snk_arcs[p]
        f = min(cap[a], cap[b])
        if f > 0:
            cap[a] -= f
            cap[a ^ 1] += f
            cap[b] -= f
            cap[b ^ 1] += f

    while True:
        parent = [-1] * (n + 2)
        parent[s] = -2
        queue = deque([s])
        while queue and parent[t] == -1:
            u = queue.popleft()
            for a in adj[u]:
                v = head[a]
                if parent[v] == -1 and cap[a] > SATURATED:
                    parent[v] = a
                    queue.append(v)
        if parent[t] == -1:
            break
        f = np.inf
        v = t
        while v != s:
            a = parent[v]
            f = min(f, cap[a])
            v = head[a ^ 1]
        v = t
        while v != s:
            a = parent[v]
            cap[a] -= f
            cap[a ^ 1] += f
            v = head[a ^ 1]

    seen = [False] * (n + 2)
    seen[s] = True
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for a in adj[u]:
            v = head[a]
            if not seen[v] and cap[a] > SATURATED:
                seen[v] = True
                queue.append(v)
    labeling = np.array([1 if seen[p] else 0 for p in range(n)], dtype=int)

    def flows(arcs):
        return np.array([original[a] - cap[a] for a in arcs])

    src_flow = flows(src_arcs)
    return FlowResult(
        labeling=labeling,
        cut_value=net.cut_value(labeling),
        flow_value=float(src_flow.sum()),
        source_flow=src_flow,
        sink_flow=flows(snk_arcs),
        flow_pq=flows(pq_arcs),
        flow_qp=flows(qp_arcs),
    )


def min_cut(net):
    """``(labeling, cut_value)``; nodes cut off from the source get label 0."""
    res = max_flow(net)
    return res.labeling, res.cut_value


def minimize_energy(unary0, unary1, edges, theta01, theta10):
    """Minimum-energy labeling and its energy."""
    net = build_network(unary0, unary1, edges, theta01, theta10)
    labeling, cut = min_cut(net)
    return labeling, cut + net.offset
