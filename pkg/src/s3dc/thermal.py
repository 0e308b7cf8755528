"""Heat extraction insertion and steady-state thermal analysis.

The analysis follows the electrical-domain analogy: temperatures are node
potentials, heat flows are currents, thermal conductances are edge weights,
and dissipated power enters as source currents. The network is built
pessimistically: signal wiring contributes no heat path, every column drains
only through its own wire into the substrate, plus whatever heat-extraction
structures (HEJs, heat-extraction bridges, HDPPs) were inserted.

Heat extraction: every gate receives one HEJ at its mid-stack segment,
connected by a chain of heat-extraction bridges (consuming free Bridge
resources in the routing graph) to the nearest heat-dissipating power pillar
column; pillars sink into the substrate through a lumped resistance.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .config import FabricConfig
from .errors import (DisconnectedNode, InternalCheckFailed, NoExtractionPath,
                     SingularSystem)
from .fabric import GridCoord

AMBIENT = ("ambient",)


@dataclass
class HeatPolicy:
    hejs_per_gate: int = 1
    hdpp_spacing: int = 4


@dataclass
class HeatStructures:
    hejs: List[dict]                 # {"instance", "column", "gseg", "plane"}
    bridge_nodes: List[int]          # routing-graph bridge resources claimed
    hdpp_columns: List[Tuple[int, int]]
    # per-HEJ chain of (bridge_node, col_a, col_b) hops toward its pillar
    paths: Dict[str, List[Tuple[int, Tuple[int, int], Tuple[int, int]]]]


def insert_heat_extraction(rd, policy: Optional[HeatPolicy] = None):
    """Attach one HEJ per gate and bridge it to the nearest HDPP column.

    Returns a new RoutedDesign sharing the routed data with heat structures
    attached; with hejs_per_gate=0 the design is returned unchanged (the
    no-extraction scenario). Heat-extraction bridges may merge into shared
    trunks (heat flows combine), but never reuse a bridge a signal occupies.
    """
    policy = policy or HeatPolicy()
    if policy.hejs_per_gate == 0:
        return rd
    graph = rd.graph
    grid = rd.placement.grid
    cfg = graph.config
    hdpp = sorted(grid.hdpp_columns)
    if not hdpp:
        raise NoExtractionPath("no HDPP columns reserved in this grid")
    hdpp_set = set(hdpp)

    X, Y = cfg.grid_cols_x, cfg.grid_cols_y
    signal_used = set(rd.usage)
    heat_bridges: List[int] = []
    heat_set = set()
    hejs: List[dict] = []
    paths: Dict[str, list] = {}

    def bridge_id(a, b, level, seg):
        (x1, y1), (x2, y2) = sorted((a, b))
        return graph.bridge_ids.get((x1, y1, x2, y2, level, seg))

    for inst in sorted(rd.placement.cells):
        cell = rd.placement.cells[inst]
        gsegs = sorted(grid.global_seg(c.level, c.seg)
                       for c, _ in cell.site_coords)
        mid = gsegs[len(gsegs) // 2]
        candidates = sorted(gsegs, key=lambda g: (abs(g - mid), g))
        col = (cell.base[0], cell.base[1])
        found = None
        for gseg in candidates:
            level, seg = divmod(gseg, cfg.segments_per_gate_level)
            # BFS over columns in the (level, seg) plane using free bridges
            prev = {col: None}
            queue = [col]
            goal = None
            while queue:
                cur = queue.pop(0)
                if cur in hdpp_set:
                    goal = cur
                    break
                cx, cy = cur
                for nxt in ((cx + 1, cy), (cx - 1, cy),
                            (cx, cy + 1), (cx, cy - 1)):
                    if not (0 <= nxt[0] < X and 0 <= nxt[1] < Y):
                        continue
                    if nxt in prev:
                        continue
                    bid = bridge_id(cur, nxt, level, seg)
                    if bid is None or bid in signal_used:
                        continue
                    prev[nxt] = cur
                    queue.append(nxt)
            if goal is not None:
                hops = []
                node = goal
                while prev[node] is not None:
                    p = prev[node]
                    hops.append((bridge_id(p, node, level, seg), p, node))
                    node = p
                hops.reverse()
                found = (gseg, level, seg, hops)
                break
        if found is None:
            raise NoExtractionPath(
                f"no free bridge path from {inst} at column {col} "
                f"to any HDPP column")
        gseg, level, seg, hops = found
        hejs.append({"instance": inst, "column": col, "gseg": gseg,
                     "plane": (level, seg)})
        paths[inst] = hops
        for bid, _, _ in hops:
            if bid not in heat_set:
                heat_set.add(bid)
                heat_bridges.append(bid)

    heat = HeatStructures(hejs=hejs, bridge_nodes=sorted(heat_bridges),
                          hdpp_columns=hdpp, paths=paths)
    return replace(rd, heat=heat)


@dataclass
class ThermalNetwork:
    """Node/conductance/source model; node 0 is always the ambient boundary."""

    labels: List[tuple]
    conductances: List[Tuple[int, int, float]]   # (i, j, G) in W/K
    sources: Dict[int, float]                    # node -> W
    boundary: Dict[int, float]                   # node -> K

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    def validate(self) -> None:
        if not self.boundary:
            raise SingularSystem("network has no boundary node")
        for i, j, g in self.conductances:
            if g <= 0:
                raise DisconnectedNode(f"non-positive conductance {i}-{j}")
        adj: Dict[int, List[int]] = {}
        for i, j, _ in self.conductances:
            adj.setdefault(i, []).append(j)
            adj.setdefault(j, []).append(i)
        reach = set(self.boundary)
        stack = list(self.boundary)
        while stack:
            u = stack.pop()
            for v in adj.get(u, ()):
                if v not in reach:
                    reach.add(v)
                    stack.append(v)
        for node in self.sources:
            if node not in reach:
                raise DisconnectedNode(
                    f"heat source at {self.labels[node]} has no path to a boundary")


@dataclass
class ThermalSolution:
    temperature: np.ndarray         # K per node
    hot_spot: Tuple[tuple, float]   # (label, K)
    residual: float

    def temp_of(self, network: ThermalNetwork, label: tuple) -> float:
        return float(self.temperature[network.labels.index(label)])


def build_thermal_network(rd, power_map: Dict[GridCoord, float],
                          config: FabricConfig) -> ThermalNetwork:
    """Equivalent thermal network of a routed design.

    Wire conductance per segment span is k_nanowire * A / L with the wire
    cross-section and segment pitch from config geometry; the wire foot
    reaches the substrate through the lumped contact resistance. Signal
    wiring is ignored (worst case); HEJ, heat-extraction-bridge, and HDPP
    paths contribute 1/r_hej, k_bridge * A / pitch, and 1/r_hdpp.
    """
    grid = rd.placement.grid
    cfg = config
    area = cfg.nanowire_area_m2
    seg_len = cfg.seg_pitch_nm * 1e-9
    g_wire_unit = cfg.k_nanowire_w_mk * area / seg_len   # per one-seg span

    labels: List[tuple] = [AMBIENT]
    index: Dict[tuple, int] = {AMBIENT: 0}

    def node(label: tuple) -> int:
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
        return index[label]

    site_gsegs: Dict[Tuple[int, int], set] = {}
    site_by_coord: Dict[GridCoord, Tuple[int, int, int]] = {}
    for inst in sorted(rd.placement.cells):
        cell = rd.placement.cells[inst]
        for coord, _ in cell.site_coords:
            col = (coord.col_x, coord.col_y)
            g = grid.global_seg(coord.level, coord.seg)
            site_gsegs.setdefault(col, set()).add(g)
            site_by_coord[coord] = (col[0], col[1], g)

    if rd.heat is not None:
        for h in rd.heat.hejs:
            site_gsegs.setdefault(h["column"], set()).add(h["gseg"])

    conductances: List[Tuple[int, int, float]] = []

    for col in sorted(site_gsegs):
        gsegs = sorted(site_gsegs[col])
        prev = None
        for g in gsegs:
            n = node(("seg", col[0], col[1], g))
            if prev is None:
                # wire foot: half-segment reach plus substrate contact
                r = (g + 0.5) * (1.0 / g_wire_unit) + cfg.r_substrate_k_per_w
                conductances.append((0, n, 1.0 / r))
            else:
                span = g - prev[1]
                conductances.append((prev[0], n, g_wire_unit / span))
            prev = (n, g)

    for coord in sorted(power_map):
        if coord not in site_by_coord:
            raise DisconnectedNode(
                f"power assigned to non-site coordinate {coord}")

    missing = [c for c in site_by_coord if c not in power_map]
    if missing:
        raise DisconnectedNode(
            f"power map does not cover site {sorted(missing)[0]}")

    sources: Dict[int, float] = {}
    for coord, w in sorted(power_map.items()):
        x, y, g = site_by_coord[coord]
        n = index[("seg", x, y, g)]
        sources[n] = sources.get(n, 0.0) + float(w)

    if rd.heat is not None:
        g_bridge = cfg.k_bridge_w_mk * area / (cfg.pitch_nm * 1e-9)
        g_hej = 1.0 / cfg.r_hej_k_per_w
        g_hdpp = 1.0 / cfg.r_hdpp_k_per_w
        for col in rd.heat.hdpp_columns:
            conductances.append((node(("hdpp", col[0], col[1])), 0, g_hdpp))
        hdpp_set = set(rd.heat.hdpp_columns)
        hej_by_inst = {h["instance"]: h for h in rd.heat.hejs}

        def end_label(col, inst, plane):
            if col in hdpp_set:
                return ("hdpp", col[0], col[1])
            if col == hej_by_inst[inst]["column"]:
                return ("hej", inst)
            return ("hebj", col[0], col[1], plane[0], plane[1])

        seen_bridges = set()
        for h in rd.heat.hejs:
            inst = h["instance"]
            wire_node = index[("seg", h["column"][0], h["column"][1], h["gseg"])]
            hn = node(("hej", inst))
            conductances.append((wire_node, hn, g_hej))
            for bid, ca, cb in rd.heat.paths[inst]:
                if bid in seen_bridges:
                    continue
                seen_bridges.add(bid)
                a = node(end_label(ca, inst, h["plane"]))
                bnode = node(end_label(cb, inst, h["plane"]))
                conductances.append((a, bnode, g_bridge))

    net = ThermalNetwork(labels=labels, conductances=conductances,
                         sources=sources,
                         boundary={0: cfg.ambient_k})
    net.validate()
    return net


def solve_steady_state(network: ThermalNetwork) -> ThermalSolution:
    """Direct sparse solve of G*T = P with fixed-temperature boundaries."""
    n = network.n_nodes
    if not network.boundary:
        raise SingularSystem("no boundary node")
    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    for i, j, g in network.conductances:
        rows.extend((i, j))
        cols.extend((j, i))
        vals.extend((-g, -g))
        diag[i] += g
        diag[j] += g
    lap = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    lap = lap + sp.diags(diag)

    bnd = sorted(network.boundary)
    unk = [i for i in range(n) if i not in network.boundary]
    t = np.zeros(n)
    for i in bnd:
        t[i] = network.boundary[i]

    if unk:
        # every unknown must couple (directly or transitively) to a boundary
        adj = lap.tolil().rows
        reach = set(bnd)
        stack = list(bnd)
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in reach:
                    reach.add(v)
                    stack.append(v)
        missing = [i for i in unk if i not in reach]
        if missing:
            raise SingularSystem(
                f"node {network.labels[missing[0]]} cannot reach a boundary")

        p = np.zeros(n)
        for i, w in network.sources.items():
            p[i] += w
        a = lap[unk][:, unk].tocsc()
        b = p[unk] - lap[unk][:, bnd] @ t[bnd]
        x = spla.spsolve(a, b)
        t[unk] = x
        scale = max(float(np.linalg.norm(b)), 1e-30)
        residual = float(np.linalg.norm(a @ x - b)) / scale
        if residual > 1e-9:
            raise InternalCheckFailed(
                f"thermal solve residual {residual:.3e} exceeds 1e-9")
    else:
        residual = 0.0

    hot_idx = int(np.argmax(t))
    return ThermalSolution(temperature=t,
                           hot_spot=(network.labels[hot_idx], float(t[hot_idx])),
                           residual=residual)
