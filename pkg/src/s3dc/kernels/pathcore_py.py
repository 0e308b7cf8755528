"""Pure-Python shortest-path kernel (fallback for the compiled extension)."""

import heapq
import math


def dijkstra_to_target(indptr, nbrs, node_cost, sources, targets, epoch_id,
                       dist, parent, stamp, target_stamp,
                       heap_dist=None, heap_node=None):
    """Multi-source, multi-target Dijkstra with additive node-entry costs.

    Source nodes start at distance 0 (entering the existing tree is free).
    Returns the first target finalized (ties broken by node id), or -1.
    ``dist``/``parent``/``stamp`` are epoch-stamped workspaces shared across
    calls; entries with stamp != epoch_id are stale. The heap_* arguments
    exist for signature parity with the compiled kernel and are unused.
    """
    inf = math.inf
    for t in targets:
        target_stamp[t] = epoch_id
    heap = []
    for s in sources:
        s = int(s)
        dist[s] = 0.0
        parent[s] = -1
        stamp[s] = epoch_id
        heapq.heappush(heap, (0.0, s))
    while heap:
        d, u = heapq.heappop(heap)
        if stamp[u] != epoch_id or d > dist[u]:
            continue
        if target_stamp[u] == epoch_id:
            return u
        for v in nbrs[indptr[u]:indptr[u + 1]]:
            v = int(v)
            c = node_cost[v]
            if c == inf:
                continue
            nd = d + c
            if stamp[v] != epoch_id or nd < dist[v]:
                stamp[v] = epoch_id
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return -1
