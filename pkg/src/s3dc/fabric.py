"""Uniform vertical-nanowire grid and its routing-resource graph.

The fabric is a lattice of vertical nanowires (columns). Each wire carries
``gate_levels_per_wire`` gate levels of ``segments_per_gate_level`` segments.
Within a level the wire is split at the midpoint into an n-doped and a p-doped
region; alternating levels mirror the split so that level boundaries join
same-doping material (conductive), while the intra-level doping boundary is
conductive only through its SB-ILC contact.

Routing resources:
  * NanowireSeg  - one wire segment, a vertical conductor
  * Bridge       - horizontal link between 4-adjacent columns at equal (level, seg)
  * Coax         - one concentric routing shell around a segment, insulated
                   from the wire; vertically continuous per shell
  * SBILC        - inter-doping-layer contact at a level's p/n boundary

Every resource has unit capacity. The graph is undirected and deterministic
for a given configuration.
"""

from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .config import FabricConfig
from .errors import InvalidConfig, OutOfBounds, Overlap

# Resource kinds
SEG = 0
BRIDGE = 1
COAX = 2
ILC = 3

KIND_NAMES = {SEG: "seg", BRIDGE: "brg", COAX: "coax", ILC: "ilc"}


class GridCoord(NamedTuple):
    col_x: int
    col_y: int
    level: int
    seg: int


def region_of(config: FabricConfig, level: int, seg: int) -> str:
    """Doping region of a segment ('n' or 'p'); levels alternate orientation."""
    b = config.segments_per_gate_level // 2
    lower = seg < b
    if level % 2 == 0:
        return "n" if lower else "p"
    return "p" if lower else "n"


def region_seg(config: FabricConfig, level: int, region: str, slot: int) -> int:
    """Map a region-local slot (0 = at the doping boundary) to a seg index."""
    s = config.segments_per_gate_level
    b = s // 2
    if slot >= (b if region_of(config, level, 0) == region else s - b):
        # caller exceeds the region's segment budget
        raise OutOfBounds(
            f"slot {slot} does not fit region {region!r} "
            f"({s} segments per gate level)")
    if region_of(config, level, 0) == region:
        return b - 1 - slot        # lower region, grows downward from boundary
    return b + slot                # upper region, grows upward from boundary


class NanowireGrid:
    """Addressable segment lattice plus occupancy bookkeeping.

    Occupancy maps a GridCoord to the occupying instance id; SB-ILC occupancy
    is tracked per (col_x, col_y, level). HDPP columns are whole columns
    reserved for heat-dissipating pillars.
    """

    def __init__(self, config: FabricConfig,
                 hdpp_columns: Optional[set] = None):
        self.config = config
        self.occupancy: Dict[GridCoord, str] = {}
        self.ilc_occupancy: Dict[Tuple[int, int, int], str] = {}
        self.hdpp_columns = set(hdpp_columns or ())
        for (x, y) in self.hdpp_columns:
            if not (0 <= x < config.grid_cols_x and 0 <= y < config.grid_cols_y):
                raise OutOfBounds(f"HDPP column ({x},{y}) outside grid")

    @property
    def n_segments(self) -> int:
        c = self.config
        return (c.grid_cols_x * c.grid_cols_y
                * c.gate_levels_per_wire * c.segments_per_gate_level)

    def in_bounds(self, coord: GridCoord) -> bool:
        c = self.config
        return (0 <= coord.col_x < c.grid_cols_x
                and 0 <= coord.col_y < c.grid_cols_y
                and 0 <= coord.level < c.gate_levels_per_wire
                and 0 <= coord.seg < c.segments_per_gate_level)

    def occupant(self, coord: GridCoord):
        return self.occupancy.get(coord)

    def occupy(self, coord: GridCoord, instance: str):
        if not self.in_bounds(coord):
            raise OutOfBounds(f"segment {coord} outside grid")
        if coord in self.occupancy:
            raise Overlap(coord)
        self.occupancy[coord] = instance

    def free(self, coord: GridCoord):
        del self.occupancy[coord]

    def occupy_ilc(self, x: int, y: int, level: int, instance: str):
        key = (x, y, level)
        if key in self.ilc_occupancy:
            raise Overlap(key, f"SB-ILC already used at {key}")
        self.ilc_occupancy[key] = instance

    def free_ilc(self, x: int, y: int, level: int):
        del self.ilc_occupancy[(x, y, level)]

    def global_seg(self, level: int, seg: int) -> int:
        return level * self.config.segments_per_gate_level + seg

    def columns(self):
        c = self.config
        for x in range(c.grid_cols_x):
            for y in range(c.grid_cols_y):
                yield (x, y)


def build_grid(config: FabricConfig,
               hdpp_columns: Optional[set] = None) -> NanowireGrid:
    """Validate config and return an empty grid."""
    config.validate()
    return NanowireGrid(config, hdpp_columns=hdpp_columns)


@dataclass
class ResourceGraph:
    """Unit-capacity routing-resource graph in CSR form.

    ``nodes[i]`` is a descriptor tuple, one of::

        (SEG,    x, y, level, seg)
        (BRIDGE, x1, y1, x2, y2, level, seg)
        (COAX,   x, y, level, seg, shell)
        (ILC,    x, y, level)

    ``indptr``/``nbrs`` hold the symmetric adjacency; ``length_um[i]`` is the
    geometric conductor length a route pays for using node i.
    """

    config: FabricConfig
    nodes: List[tuple]
    kind: np.ndarray
    indptr: np.ndarray
    nbrs: np.ndarray
    length_um: np.ndarray
    seg_ids: Dict[Tuple[int, int, int, int], int] = field(default_factory=dict)
    coax_ids: Dict[Tuple[int, int, int, int, int], int] = field(default_factory=dict)
    ilc_ids: Dict[Tuple[int, int, int], int] = field(default_factory=dict)
    bridge_ids: Dict[tuple, int] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def neighbors(self, i: int) -> np.ndarray:
        return self.nbrs[self.indptr[i]:self.indptr[i + 1]]

    def node_name(self, i: int) -> str:
        d = self.nodes[i]
        if d[0] == SEG:
            return "seg(%d,%d,%d,%d)" % d[1:]
        if d[0] == BRIDGE:
            x1, y1, x2, y2, l, s = d[1:]
            return "brg(%d,%d|%d,%d,%d,%d)" % (x1, y1, x2, y2, l, s)
        if d[0] == COAX:
            return "coax(%d,%d,%d,%d,%d)" % d[1:]
        return "ilc(%d,%d,%d)" % d[1:]

    def node_column(self, i: int) -> Tuple[int, int]:
        """Owning column; bridges report their lower-ordered endpoint."""
        d = self.nodes[i]
        return (d[1], d[2])

    def node_level(self, i: int) -> int:
        d = self.nodes[i]
        if d[0] == BRIDGE:
            return d[5]
        if d[0] == ILC:
            return d[3]
        return d[3]

    def counts_by_kind(self) -> Dict[str, int]:
        out = {}
        for k, name in KIND_NAMES.items():
            out[name] = int(np.count_nonzero(self.kind == k))
        return out


def resource_graph(grid: NanowireGrid) -> ResourceGraph:
    """Derive the deterministic routing-resource graph of a grid."""
    c = grid.config
    X, Y, L, S = (c.grid_cols_x, c.grid_cols_y,
                  c.gate_levels_per_wire, c.segments_per_gate_level)
    K = c.coax_shells
    b = S // 2

    nodes: List[tuple] = []
    seg_ids = {}
    coax_ids = {}
    ilc_ids = {}
    bridge_ids = {}

    def add(desc):
        nodes.append(desc)
        return len(nodes) - 1

    for x in range(X):
        for y in range(Y):
            for l in range(L):
                for s in range(S):
                    seg_ids[(x, y, l, s)] = add((SEG, x, y, l, s))
    for x in range(X):
        for y in range(Y):
            for l in range(L):
                for s in range(S):
                    for k in range(K):
                        coax_ids[(x, y, l, s, k)] = add((COAX, x, y, l, s, k))
    for x in range(X):
        for y in range(Y):
            for l in range(L):
                ilc_ids[(x, y, l)] = add((ILC, x, y, l))
    for x in range(X):
        for y in range(Y):
            for (dx, dy) in ((1, 0), (0, 1)):
                x2, y2 = x + dx, y + dy
                if x2 >= X or y2 >= Y:
                    continue
                for l in range(L):
                    for s in range(S):
                        key = (x, y, x2, y2, l, s)
                        bridge_ids[key] = add((BRIDGE, x, y, x2, y2, l, s))

    edges: List[Tuple[int, int]] = []

    # Vertical wire continuity: consecutive segments connect except across the
    # intra-level doping boundary, which only the SB-ILC crosses. Mirrored
    # stacking makes level boundaries same-doping, hence conductive.
    for x in range(X):
        for y in range(Y):
            for g in range(L * S - 1):
                l, s = divmod(g, S)
                l2, s2 = divmod(g + 1, S)
                if l == l2 and s2 == b and S >= 2:
                    continue  # doping boundary, SB-ILC only
                edges.append((seg_ids[(x, y, l, s)], seg_ids[(x, y, l2, s2)]))

    # Coax shells run vertically along the whole wire, one channel per shell.
    for x in range(X):
        for y in range(Y):
            for k in range(K):
                for g in range(L * S - 1):
                    l, s = divmod(g, S)
                    l2, s2 = divmod(g + 1, S)
                    edges.append((coax_ids[(x, y, l, s, k)],
                                  coax_ids[(x, y, l2, s2, k)]))

    # SB-ILC joins the segments immediately below and above its boundary.
    for x in range(X):
        for y in range(Y):
            for l in range(L):
                i = ilc_ids[(x, y, l)]
                if S >= 2:
                    edges.append((i, seg_ids[(x, y, l, b - 1)]))
                    edges.append((i, seg_ids[(x, y, l, b)]))
                else:
                    edges.append((i, seg_ids[(x, y, l, 0)]))

    # Bridges land on the wire and on every coax shell of both endpoints.
    for (x1, y1, x2, y2, l, s), i in bridge_ids.items():
        edges.append((i, seg_ids[(x1, y1, l, s)]))
        edges.append((i, seg_ids[(x2, y2, l, s)]))
        for k in range(K):
            edges.append((i, coax_ids[(x1, y1, l, s, k)]))
            edges.append((i, coax_ids[(x2, y2, l, s, k)]))

    n = len(nodes)
    kind = np.fromiter((d[0] for d in nodes), dtype=np.int8, count=n)

    deg = np.zeros(n, dtype=np.int64)
    for a, bb in edges:
        deg[a] += 1
        deg[bb] += 1
    indptr = np.zeros(n + 1, dtype=np.int32)
    np.cumsum(deg, out=indptr[1:])
    nbrs = np.zeros(indptr[-1], dtype=np.int32)
    cursor = indptr[:-1].copy()
    for a, bb in edges:
        nbrs[cursor[a]] = bb
        cursor[a] += 1
        nbrs[cursor[bb]] = a
        cursor[bb] += 1
    # canonical neighbor order for deterministic traversal
    for i in range(n):
        nbrs[indptr[i]:indptr[i + 1]].sort()

    length = np.empty(n, dtype=np.float64)
    length[kind == SEG] = c.seg_pitch_um
    length[kind == COAX] = c.seg_pitch_um
    length[kind == BRIDGE] = c.pitch_um
    length[kind == ILC] = c.seg_pitch_um

    return ResourceGraph(config=c, nodes=nodes, kind=kind, indptr=indptr,
                         nbrs=nbrs, length_um=length, seg_ids=seg_ids,
                         coax_ids=coax_ids, ilc_ids=ilc_ids,
                         bridge_ids=bridge_ids)


def expected_counts(config: FabricConfig) -> Dict[str, int]:
    """Closed-form resource counts for a config."""
    X, Y = config.grid_cols_x, config.grid_cols_y
    L, S = config.gate_levels_per_wire, config.segments_per_gate_level
    return {
        "seg": X * Y * L * S,
        "brg": (2 * X * Y - X - Y) * L * S,
        "coax": X * Y * L * S * config.coax_shells,
        "ilc": X * Y * L,
    }
