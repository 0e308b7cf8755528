"""Negotiated-congestion router over the fabric resource graph.

Every net becomes a Steiner tree grown by sequential shortest-path
augmentation (nearest unconnected pin joins the growing tree). Congestion is
resolved PathFinder-style: resources may be shared transiently at a rising
present-usage penalty, overuse accrues history cost, and offending nets are
ripped up and rerouted in seeded-shuffle order until usage is conflict-free
or the iteration budget runs out.

Pin attachment model (drives both routing targets and functional extraction):
  * gate input pins attach at the innermost coax shell of their transistor
    site (the gate-electrode contact ring);
  * gate output pins attach at the cell's SB-ILC output junction;
  * SRAM bit-line pins attach at their wire terminal segment (or its coax);
  * primary I/O attaches at reserved perimeter coax positions (ports).
Attachment resources are reserved for their net, so no two nets can ever
touch the same pin: extraction back to a netlist is unambiguous.

Segments occupied by transistor sites are obstacles, except that a net may
run through the sites of its own driver cell (a gate's output leaves through
its stack). All other resources have unit capacity.
"""

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .cells import get_template
from .errors import Unroutable
from .fabric import BRIDGE, COAX, ILC, KIND_NAMES, SEG, ResourceGraph
from .kernels import dijkstra_to_target
from .netlist import Netlist
from .placer import Placement

PinRef = Tuple[str, str]        # ("cell", "inst.PIN") or ("port", name)

DEFAULT_BASE_COSTS = {"seg": 1.0, "brg": 1.0, "coax": 1.0, "ilc": 2.0}


@dataclass
class RouteOptions:
    seed: int = 1
    max_iters: int = 40
    base_costs: Optional[Dict[str, float]] = None
    pres_fac_init: float = 1.0
    pres_fac_mult: float = 2.0
    pres_fac_max: float = 64.0
    hist_fac: float = 1.0


@dataclass
class RouteTree:
    nodes: List[int]                 # insertion order, root first
    parents: Dict[int, int]          # node -> parent (root -> -1)


@dataclass
class RoutedDesign:
    placement: Placement
    netlist: Netlist
    graph: ResourceGraph
    routes: Dict[str, RouteTree]
    usage: Dict[int, str]                                  # node -> net
    attach_points: Dict[PinRef, List[int]]
    net_pins: Dict[str, List[PinRef]]
    stats: dict
    heat: Optional[object] = None                          # HeatStructures

    def dump_routes(self) -> str:
        lines = []
        for net in sorted(self.routes):
            names = " ".join(self.graph.node_name(i)
                             for i in self.routes[net].nodes)
            lines.append(f"{net}: {names}")
        return "\n".join(lines) + "\n"


def build_attachments(placement: Placement, graph: ResourceGraph):
    """Pin attachment nodes, reservations, and per-net allowances.

    Returns (attach_points, net_pins, reserved, allowed, blocked_nodes):
      reserved: node -> net owning it
      allowed: net -> sorted node list the net may use despite global blocks
      blocked: sorted node list blocked for everyone (sites, ilcs, HDPP)
    """
    cfg = graph.config
    netlist = placement.netlist
    attach_points: Dict[PinRef, List[int]] = {}
    reserved: Dict[int, str] = {}
    net_pins: Dict[str, List[PinRef]] = {}
    allowed: Dict[str, set] = {}

    def reserve(nodes, net, what):
        for n in nodes:
            if n in reserved and reserved[n] != net:
                raise Unroutable([net], [graph.node_name(n)])
            reserved[n] = net
        allowed.setdefault(net, set()).update(nodes)

    taken_port_coax = set()
    gate_by_id = netlist.gate_by_id()

    site_owner: Dict[int, str] = {}
    for inst in sorted(placement.cells):
        cell = placement.cells[inst]
        for coord, _ in cell.site_coords:
            site_owner[graph.seg_ids[coord]] = inst

    for inst in sorted(placement.cells):
        cell = placement.cells[inst]
        t = get_template(cell.kind)
        for pin in list(t.inputs) + [t.output]:
            spec = t.pins[pin]
            net = gate_by_id[inst].pins[pin]
            coord = cell.pin_coords[pin]
            nodes: List[int] = []
            if spec.attach == "output":
                nodes = [graph.ilc_ids[(cell.base[0], cell.base[1],
                                        cell.ilc_levels[0])]]
            elif spec.attach == "electrode":
                if cfg.coax_shells >= 1:
                    nodes = [graph.coax_ids[(coord.col_x, coord.col_y,
                                             coord.level, coord.seg, 0)]]
                else:
                    nodes = [graph.seg_ids[coord]]
            elif spec.attach == "wire":
                nodes = [graph.seg_ids[coord]]
                if cfg.coax_shells >= 1:
                    nodes.append(graph.coax_ids[(coord.col_x, coord.col_y,
                                                 coord.level, coord.seg, 0)])
            ref = ("cell", f"{inst}.{pin}")
            attach_points[ref] = nodes
            net_pins.setdefault(net, []).append(ref)
            reserve(nodes, net, ref)
            if spec.attach == "output":
                # a gate's output leaves through its own stack
                own = [graph.seg_ids[c] for c, _ in cell.site_coords]
                allowed[net].update(own)

    for name in placement.port_order:
        kind, net, coord = placement.ports[name]
        node = None
        x, y = coord.col_x, coord.col_y
        for g in range(cfg.gate_levels_per_wire
                       * cfg.segments_per_gate_level - 1, -1, -1):
            level, seg = divmod(g, cfg.segments_per_gate_level)
            cand = graph.coax_ids.get((x, y, level, seg, 0))
            if cand is None:
                break
            if cand not in reserved and cand not in taken_port_coax:
                node = cand
                coord = coord._replace(level=level, seg=seg)
                break
        if node is None:
            raise Unroutable([net], [f"no free port attachment at column ({x},{y})"])
        taken_port_coax.add(node)
        placement.ports[name] = (kind, net, coord)
        ref = ("port", name)
        attach_points[ref] = [node]
        net_pins.setdefault(net, []).append(ref)
        reserve([node], net, ref)

    blocked = set(site_owner)
    for (x, y, l), inst in placement.grid.ilc_occupancy.items():
        blocked.add(graph.ilc_ids[(x, y, l)])
    for i, desc in enumerate(graph.nodes):
        if desc[0] == BRIDGE:
            cols = {(desc[1], desc[2]), (desc[3], desc[4])}
        else:
            cols = {(desc[1], desc[2])}
        if cols & placement.grid.hdpp_columns:
            blocked.add(i)
    blocked |= set(reserved)

    # Root each net at its driver (gate output or primary-input port) so
    # route trees grow source-out and RC trees are rooted correctly.
    driver_refs = set()
    by_id = netlist.gate_by_id()
    for inst in sorted(placement.cells):
        kind = placement.cells[inst].kind
        driver_refs.add(("cell", f"{inst}.{get_template(kind).output}"))
    for name in placement.port_order:
        if placement.ports[name][0] == "in":
            driver_refs.add(("port", name))
    for net in net_pins:
        net_pins[net].sort(key=lambda ref: (ref not in driver_refs, ref))

    allowed_sorted = {net: sorted(nodes) for net, nodes in allowed.items()}
    return attach_points, net_pins, reserved, allowed_sorted, sorted(blocked)


class _Workspace:
    def __init__(self, graph: ResourceGraph):
        n = graph.n_nodes
        nnz = len(graph.nbrs)
        self.dist = np.full(n, np.inf, dtype=np.float64)
        self.parent = np.full(n, -1, dtype=np.int32)
        self.stamp = np.zeros(n, dtype=np.int32)
        self.target_stamp = np.zeros(n, dtype=np.int32)
        self.heap_dist = np.zeros(nnz + n + 16, dtype=np.float64)
        self.heap_node = np.zeros(nnz + n + 16, dtype=np.int32)
        self.epoch = 0


def route(placement: Placement, rgraph: ResourceGraph,
          options: Optional[RouteOptions] = None) -> RoutedDesign:
    """Route all nets with disjoint resources; deterministic per seed."""
    options = options or RouteOptions()
    graph = rgraph
    netlist = placement.netlist
    n = graph.n_nodes

    attach_points, net_pins, reserved, allowed, blocked_list = \
        build_attachments(placement, graph)

    type_cost = dict(DEFAULT_BASE_COSTS)
    if options.base_costs:
        type_cost.update(options.base_costs)
    base = np.empty(n, dtype=np.float64)
    base[graph.kind == SEG] = type_cost["seg"]
    base[graph.kind == BRIDGE] = type_cost["brg"]
    base[graph.kind == COAX] = type_cost["coax"]
    base[graph.kind == ILC] = type_cost["ilc"]

    blocked = np.zeros(n, dtype=bool)
    blocked[blocked_list] = True
    use = np.zeros(n, dtype=np.int32)
    hist = np.zeros(n, dtype=np.float64)

    nets = sorted(net_pins)
    trees: Dict[str, RouteTree] = {}
    ws = _Workspace(graph)
    rng = random.Random(options.seed)
    pres = options.pres_fac_init
    cost = np.empty(n, dtype=np.float64)

    def refresh(ids=None):
        if ids is None:
            np.multiply(base, (1.0 + hist) * (1.0 + pres * use), out=cost)
            cost[blocked] = np.inf
        else:
            ids = np.asarray(ids, dtype=np.int64)
            cost[ids] = np.where(
                blocked[ids], np.inf,
                base[ids] * (1.0 + hist[ids]) * (1.0 + pres * use[ids]))

    def route_net(net: str) -> RouteTree:
        own = allowed.get(net, [])
        own_arr = np.asarray(own, dtype=np.int64)
        if len(own_arr):
            cost[own_arr] = (base[own_arr] * (1.0 + hist[own_arr])
                             * (1.0 + pres * use[own_arr]))
        try:
            pins = net_pins[net]
            pending = list(pins)
            root_ref = pins[0]
            root_nodes = attach_points[root_ref]
            tree_nodes: List[int] = [root_nodes[0]]
            parents: Dict[int, int] = {root_nodes[0]: -1}
            in_tree = set(tree_nodes)

            def prune():
                done = [p for p in pending
                        if any(a in in_tree for a in attach_points[p])]
                for p in done:
                    pending.remove(p)

            prune()
            while pending:
                targets = sorted({a for p in pending
                                  for a in attach_points[p]} - in_tree)
                if not targets:
                    prune()
                    continue
                ws.epoch += 1
                src = np.asarray(sorted(in_tree), dtype=np.int32)
                tgt = np.asarray(targets, dtype=np.int32)
                found = dijkstra_to_target(
                    graph.indptr, graph.nbrs, cost, src, tgt, ws.epoch,
                    ws.dist, ws.parent, ws.stamp, ws.target_stamp,
                    ws.heap_dist, ws.heap_node)
                if found < 0:
                    raise Unroutable(
                        [net],
                        [graph.node_name(a) for p in pending
                         for a in attach_points[p]][:4])
                path = []
                node = int(found)
                while node != -1 and node not in in_tree:
                    path.append(node)
                    node = int(ws.parent[node])
                join = node if node != -1 else path[-1]
                for i, u in enumerate(reversed(path)):
                    prev = join if i == 0 else path[len(path) - i]
                    parents[u] = prev
                    tree_nodes.append(u)
                    in_tree.add(u)
                prune()
            return RouteTree(nodes=tree_nodes, parents=parents)
        finally:
            refresh(own_arr if len(own_arr) else [])

    def commit(net, tree):
        trees[net] = tree
        ids = np.asarray(tree.nodes, dtype=np.int64)
        use[ids] += 1
        refresh(ids)

    def rip(net):
        tree = trees.pop(net, None)
        if tree is None:
            return
        ids = np.asarray(tree.nodes, dtype=np.int64)
        use[ids] -= 1
        refresh(ids)

    iterations = 0
    for it in range(options.max_iters):
        iterations = it + 1
        refresh()
        order = list(nets)
        rng.shuffle(order)
        if it == 0:
            reroute = order
        else:
            over_nodes = set(np.nonzero(use > 1)[0].tolist())
            reroute = [net for net in order
                       if any(u in over_nodes for u in trees[net].nodes)]
        for net in reroute:
            rip(net)
            commit(net, route_net(net))
        if not (use > 1).any():
            break
        hist[use > 1] += options.hist_fac
        pres = min(pres * options.pres_fac_mult, options.pres_fac_max)
    else:
        over = np.nonzero(use > 1)[0]
        failing = sorted({net for net in nets
                          if any(u in set(over.tolist())
                                 for u in trees[net].nodes)})
        hot = [graph.node_name(int(i)) for i in
               over[np.argsort(-use[over], kind="stable")][:10]]
        raise Unroutable(failing, hot)

    usage_map: Dict[int, str] = {}
    for net in sorted(trees):
        for u in trees[net].nodes:
            usage_map[u] = net

    wl = {net: float(sum(graph.length_um[u] for u in trees[net].nodes))
          for net in sorted(trees)}
    histo = {name: 0 for name in KIND_NAMES.values()}
    for u in usage_map:
        histo[KIND_NAMES[int(graph.kind[u])]] += 1
    stats = {
        "wirelength_um": wl,
        "total_wirelength_um": float(sum(wl.values())),
        "resource_histogram": histo,
        "reroute_iterations": iterations,
    }
    return RoutedDesign(placement=placement, netlist=netlist, graph=graph,
                        routes=trees, usage=usage_map,
                        attach_points=attach_points, net_pins=net_pins,
                        stats=stats)


def check_routes(rd: RoutedDesign) -> List[str]:
    """Verify routed-design invariants independently of the router.

    Returns a list of violation descriptions; empty means ok.
    """
    graph = rd.graph
    violations = []

    seen: Dict[int, str] = {}
    for net in sorted(rd.routes):
        for u in rd.routes[net].nodes:
            if u in seen and seen[u] != net:
                violations.append(
                    f"capacity: {graph.node_name(u)} used by "
                    f"{seen[u]} and {net}")
            seen[u] = net

    site_owner: Dict[int, str] = {}
    driver_cell: Dict[str, str] = {}
    for inst in sorted(rd.placement.cells):
        cell = rd.placement.cells[inst]
        for coord, _ in cell.site_coords:
            site_owner[graph.seg_ids[coord]] = inst
    for g in rd.netlist.gates:
        driver_cell[g.output_net()] = g.instance

    for net in sorted(rd.routes):
        nodes = set(rd.routes[net].nodes)
        if not nodes:
            violations.append(f"disconnected tree: {net} has no resources")
            continue
        start = min(nodes)
        seen_nodes = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in graph.neighbors(u):
                v = int(v)
                if v in nodes and v not in seen_nodes:
                    seen_nodes.add(v)
                    stack.append(v)
        if seen_nodes != nodes:
            violations.append(f"disconnected tree: {net}")
        for ref in rd.net_pins.get(net, []):
            if not any(a in nodes for a in rd.attach_points[ref]):
                violations.append(f"pin not spanned: {ref[1]} on net {net}")
        for u in nodes:
            owner = site_owner.get(u)
            if owner is not None and owner != driver_cell.get(net):
                violations.append(
                    f"route through foreign transistor site: net {net} "
                    f"at {graph.node_name(u)}")
    return violations


def congestion_report(rd: RoutedDesign) -> dict:
    """Utilization per resource type, per-column peaks, and the fraction of
    routed wirelength realized inside active (transistor-bearing) levels."""
    graph = rd.graph
    total_by_kind = graph.counts_by_kind()
    used_by_kind = {name: 0 for name in total_by_kind}
    col_total: Dict[Tuple[int, int], int] = {}
    col_used: Dict[Tuple[int, int], int] = {}

    heat_nodes = set()
    if rd.heat is not None:
        heat_nodes = set(rd.heat.bridge_nodes)

    for i, desc in enumerate(graph.nodes):
        cols = [(desc[1], desc[2])]
        if desc[0] == BRIDGE:
            cols.append((desc[3], desc[4]))
        for colc in cols:
            col_total[colc] = col_total.get(colc, 0) + 1
        if i in rd.usage or i in heat_nodes:
            used_by_kind[KIND_NAMES[int(graph.kind[i])]] += 1
            for colc in cols:
                col_used[colc] = col_used.get(colc, 0) + 1

    utilization = {
        name: {"used": used_by_kind[name], "available": total_by_kind[name],
               "utilization": (used_by_kind[name] / total_by_kind[name]
                               if total_by_kind[name] else 0.0)}
        for name in sorted(total_by_kind)
    }
    peak_col, peak_util = None, 0.0
    for colc in sorted(col_total):
        u = col_used.get(colc, 0) / col_total[colc]
        if u > peak_util:
            peak_col, peak_util = colc, u

    active_levels = {coord.level
                     for cell in rd.placement.cells.values()
                     for coord, _ in cell.site_coords}
    if not active_levels:
        active_levels = set(range(graph.config.gate_levels_per_wire))
    total_wl = 0.0
    active_wl = 0.0
    for u in sorted(rd.usage):
        wl = float(graph.length_um[u])
        total_wl += wl
        if graph.node_level(u) in active_levels:
            active_wl += wl
    fraction = active_wl / total_wl if total_wl > 0 else 1.0

    return {
        "utilization": utilization,
        "peak_column": {"column": list(peak_col) if peak_col else None,
                        "utilization": peak_util},
        "in_active_layer_fraction": fraction,
        "total_wirelength_um": total_wl,
    }
