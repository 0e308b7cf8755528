# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled shortest-path kernel: lazy-deletion binary-heap Dijkstra.

Semantics are identical to kernels.pathcore_py: additive node-entry costs,
multi-source (distance 0) to nearest target, ties broken by node id,
epoch-stamped dist/parent workspaces.
"""

from libc.math cimport INFINITY


cdef inline bint _less(double d1, int n1, double d2, int n2) noexcept nogil:
    if d1 != d2:
        return d1 < d2
    return n1 < n2


cdef inline void _heap_push(double[:] hd, int[:] hn, Py_ssize_t* size,
                            double d, int node) noexcept nogil:
    cdef Py_ssize_t i = size[0]
    cdef Py_ssize_t p
    hd[i] = d
    hn[i] = node
    size[0] += 1
    while i > 0:
        p = (i - 1) >> 1
        if _less(hd[i], hn[i], hd[p], hn[p]):
            hd[i], hd[p] = hd[p], hd[i]
            hn[i], hn[p] = hn[p], hn[i]
            i = p
        else:
            break


cdef inline void _heap_pop(double[:] hd, int[:] hn, Py_ssize_t* size,
                           double* out_d, int* out_n) noexcept nogil:
    cdef Py_ssize_t i = 0, c
    cdef Py_ssize_t n = size[0] - 1
    out_d[0] = hd[0]
    out_n[0] = hn[0]
    hd[0] = hd[n]
    hn[0] = hn[n]
    size[0] = n
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and _less(hd[c + 1], hn[c + 1], hd[c], hn[c]):
            c += 1
        if _less(hd[c], hn[c], hd[i], hn[i]):
            hd[i], hd[c] = hd[c], hd[i]
            hn[i], hn[c] = hn[c], hn[i]
            i = c
        else:
            break


def dijkstra_to_target(int[:] indptr, int[:] nbrs, double[:] node_cost,
                       int[:] sources, int[:] targets, int epoch_id,
                       double[:] dist, int[:] parent, int[:] stamp,
                       int[:] target_stamp, double[:] heap_dist,
                       int[:] heap_node):
    cdef Py_ssize_t heap_size = 0
    cdef Py_ssize_t i, j
    cdef int u, v, found = -1
    cdef double d, c, nd

    with nogil:
        for i in range(targets.shape[0]):
            target_stamp[targets[i]] = epoch_id
        for i in range(sources.shape[0]):
            u = sources[i]
            dist[u] = 0.0
            parent[u] = -1
            stamp[u] = epoch_id
            _heap_push(heap_dist, heap_node, &heap_size, 0.0, u)
        while heap_size > 0:
            _heap_pop(heap_dist, heap_node, &heap_size, &d, &u)
            if stamp[u] != epoch_id or d > dist[u]:
                continue
            if target_stamp[u] == epoch_id:
                found = u
                break
            for j in range(indptr[u], indptr[u + 1]):
                v = nbrs[j]
                c = node_cost[v]
                if c == INFINITY:
                    continue
                nd = d + c
                if stamp[v] != epoch_id or nd < dist[v]:
                    stamp[v] = epoch_id
                    dist[v] = nd
                    parent[v] = u
                    _heap_push(heap_dist, heap_node, &heap_size, nd, v)
    return found
