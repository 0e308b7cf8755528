"""Slot placement: gates onto (column, gate-level) positions.

Placement exploits vertical stacking (gate_levels_per_wire cells per column)
and minimizes 3D half-perimeter wirelength: (dx + dy) * pitch in the plane
plus dlevel * level_height vertically. A greedy constructive pass seeds a
seeded simulated-annealing refinement (swap / relocate moves, geometric
cooling); the returned placement never costs more than the greedy seed.

Primary I/O is anchored to port positions on the grid perimeter so pad-bound
nets pull their logic outward, mirroring how the fabric meets its package.
"""

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .cells import PlacedCell, get_template, instantiate
from .config import FabricConfig
from .errors import CapacityExceeded
from .fabric import GridCoord, NanowireGrid
from .netlist import Netlist


@dataclass
class PlaceOptions:
    seed: int = 1
    effort: str = "medium"       # low | medium | high


@dataclass
class Placement:
    netlist: Netlist
    grid: NanowireGrid
    assignment: Dict[str, Tuple[int, int, int]]   # instance -> (x, y, level)
    cells: Dict[str, PlacedCell]
    ports: Dict[str, Tuple[str, str, GridCoord]]  # net -> (kind, net, coord)
    port_order: List[str]
    seed: int
    greedy_cost_um: float
    final_cost_um: float

    def dump(self) -> str:
        lines = [f"{inst} {x} {y} {l}"
                 for inst, (x, y, l) in sorted(self.assignment.items())]
        return "\n".join(lines) + "\n"


def _net_members(netlist: Netlist):
    """net -> ordered unique list of instances touching it."""
    members: Dict[str, List[str]] = {}
    for g in netlist.gates:
        for net in g.pins.values():
            lst = members.setdefault(net, [])
            if not lst or lst[-1] != g.instance:
                if g.instance not in lst:
                    lst.append(g.instance)
    return members


def _port_positions(netlist: Netlist, grid: NanowireGrid):
    """Assign each primary input/output a perimeter column, round-robin."""
    c = grid.config
    X, Y = c.grid_cols_x, c.grid_cols_y
    ring: List[Tuple[int, int]] = []
    for x in range(X):
        ring.append((x, 0))
    for y in range(1, Y):
        ring.append((X - 1, y))
    if Y > 1:
        for x in range(X - 2, -1, -1):
            ring.append((x, Y - 1))
    if X > 1:
        for y in range(Y - 2, 0, -1):
            ring.append((0, y))
    ring = [col for col in ring if col not in grid.hdpp_columns] or ring

    ports: Dict[str, Tuple[str, str, GridCoord]] = {}
    order: List[str] = []
    names = [("in", n) for n in netlist.inputs] + \
            [("out", n) for n in netlist.outputs]
    level = c.gate_levels_per_wire - 1
    seg = c.segments_per_gate_level - 1
    step = max(1, len(ring) // max(1, len(names)))
    for i, (kind, name) in enumerate(names):
        x, y = ring[(i * step) % len(ring)]
        ports[name] = (kind, name, GridCoord(x, y, level, seg))
        order.append(name)
    return ports, order


def _bbox_cost(positions, cfg: FabricConfig) -> float:
    if len(positions) < 2:
        return 0.0
    xs = [p[0] for p in positions]
    ys = [p[1] for p in positions]
    ls = [p[2] for p in positions]
    return ((max(xs) - min(xs)) + (max(ys) - min(ys))) * cfg.pitch_um \
        + (max(ls) - min(ls)) * cfg.level_height_um


def hpwl(placement: Placement, netlist: Netlist,
         config: FabricConfig) -> float:
    """Total 3D half-perimeter wirelength in micrometers."""
    members = _net_members(netlist)
    nets = set(members) | {n for n in placement.ports}
    total = 0.0
    for net in sorted(nets):
        positions = [placement.assignment[i] for i in members.get(net, ())]
        if net in placement.ports:
            pc = placement.ports[net][2]
            positions.append((pc.col_x, pc.col_y, pc.level))
        total += _bbox_cost(positions, config)
    return total


class _Annealer:
    """Seeded SA over slot assignments with incremental net-bbox costs."""

    def __init__(self, netlist, grid, ports, rng):
        self.cfg = grid.config
        self.grid = grid
        self.rng = rng
        self.members = _net_members(netlist)
        self.port_pos: Dict[str, Tuple[int, int, int]] = {}
        for net, (_, _, coord) in ports.items():
            self.port_pos[net] = (coord.col_x, coord.col_y, coord.level)
        self.nets_of: Dict[str, List[str]] = {}
        for g in netlist.gates:
            self.nets_of[g.instance] = sorted(set(g.pins.values()))
        self.gates = {g.instance: g for g in netlist.gates}
        self.span = {g.instance: get_template(g.kind).levels_used
                     for g in netlist.gates}
        self.pos: Dict[str, Tuple[int, int, int]] = {}
        self.occupant: Dict[Tuple[int, int, int], str] = {}
        self.columns = [colc for colc in grid.columns()
                        if colc not in grid.hdpp_columns]

    # slot bookkeeping

    def put(self, inst, base):
        self.pos[inst] = base
        x, y, l = base
        for dl in range(self.span[inst]):
            self.occupant[(x, y, l + dl)] = inst

    def take(self, inst):
        x, y, l = self.pos.pop(inst)
        for dl in range(self.span[inst]):
            del self.occupant[(x, y, l + dl)]

    def span_free(self, x, y, l, k, ignore=None):
        if l + k > self.cfg.gate_levels_per_wire:
            return False
        for dl in range(k):
            occ = self.occupant.get((x, y, l + dl))
            if occ is not None and occ != ignore:
                return False
        return True

    # cost model

    def net_cost(self, net) -> float:
        positions = [self.pos[i] for i in self.members.get(net, ())
                     if i in self.pos]
        if net in self.port_pos:
            positions.append(self.port_pos[net])
        return _bbox_cost(positions, self.cfg)

    def total_cost(self) -> float:
        nets = set(self.members) | set(self.port_pos)
        return sum(self.net_cost(n) for n in sorted(nets))

    # greedy constructive seed

    def greedy(self, order: List[str], capacity=None):
        X = self.cfg.grid_cols_x
        Y = self.cfg.grid_cols_y
        # multi-level cells first so spans never fragment
        order = sorted(order, key=lambda i: -self.span[i])
        for inst in order:
            anchor_pts = []
            for net in self.nets_of[inst]:
                for other in self.members.get(net, ()):
                    if other in self.pos:
                        anchor_pts.append(self.pos[other])
                if net in self.port_pos:
                    anchor_pts.append(self.port_pos[net])
            if anchor_pts:
                ax = sum(p[0] for p in anchor_pts) / len(anchor_pts)
                ay = sum(p[1] for p in anchor_pts) / len(anchor_pts)
            else:
                ax, ay = (X - 1) / 2.0, (Y - 1) / 2.0
            base = self._nearest_free(ax, ay, self.span[inst])
            if base is None:
                needed, available = capacity or (len(self.pos) + 1, len(self.pos))
                raise CapacityExceeded(needed, available)
            self.put(inst, base)

    def _nearest_free(self, ax: float, ay: float, k: int):
        cx, cy = int(round(ax)), int(round(ay))
        X, Y = self.cfg.grid_cols_x, self.cfg.grid_cols_y
        L = self.cfg.gate_levels_per_wire
        for radius in range(X + Y + 1):
            best = None
            for x in range(max(0, cx - radius), min(X, cx + radius + 1)):
                for y in range(max(0, cy - radius), min(Y, cy + radius + 1)):
                    if max(abs(x - cx), abs(y - cy)) != radius:
                        continue
                    if (x, y) in self.grid.hdpp_columns:
                        continue
                    for l in range(L - k + 1):
                        if self.span_free(x, y, l, k):
                            d = (x - ax) ** 2 + (y - ay) ** 2 + 0.01 * l
                            if best is None or d < best[0]:
                                best = (d, (x, y, l))
            if best is not None:
                return best[1]
        return None

    # annealing

    def anneal(self, total_moves: int):
        if total_moves <= 0 or not self.pos:
            return
        rng = self.rng
        insts = sorted(self.pos)
        L = self.cfg.gate_levels_per_wire

        # calibrate T0 from sampled move deltas
        deltas = []
        for _ in range(min(64, 8 * len(insts))):
            d = self._try_move(insts, rng, temperature=None, probe=True)
            if d is not None:
                deltas.append(abs(d))
        t0 = 2.0 * (sum(deltas) / len(deltas)) if deltas else 1.0
        if t0 <= 0:
            t0 = 1.0
        t_end = max(t0 * 1e-4, 1e-12)
        steps = 40
        alpha = (t_end / t0) ** (1.0 / max(1, steps - 1))
        per_step = max(1, total_moves // steps)

        best_cost = self.total_cost()
        best = dict(self.pos)
        cur = best_cost
        temperature = t0
        for _ in range(steps):
            for _ in range(per_step):
                d = self._try_move(insts, rng, temperature)
                if d is not None:
                    cur += d
                    if cur < best_cost - 1e-12:
                        best_cost = cur
                        best = dict(self.pos)
            temperature *= alpha
        # restore the best assignment seen
        for inst in list(self.pos):
            self.take(inst)
        for inst, base in best.items():
            self.put(inst, base)

    def _try_move(self, insts, rng, temperature, probe=False):
        """Attempt one move/swap; returns applied delta or None if rejected."""
        inst = insts[rng.randrange(len(insts))]
        k = self.span[inst]
        x, y = self.columns[rng.randrange(len(self.columns))]
        L = self.cfg.gate_levels_per_wire
        l = rng.randrange(L - k + 1) if L > k else 0
        target = (x, y, l)
        if target == self.pos[inst]:
            return None
        occupants = {self.occupant[(x, y, l + dl)]
                     for dl in range(k) if (x, y, l + dl) in self.occupant}
        occupants.discard(inst)
        if len(occupants) > 1:
            return None
        other = occupants.pop() if occupants else None
        if other is not None and self.span[other] != k:
            return None

        nets = set(self.nets_of[inst])
        if other is not None:
            nets |= set(self.nets_of[other])
        nets = sorted(nets)
        old = sum(self.net_cost(n) for n in nets)

        src = self.pos[inst]
        self.take(inst)
        if other is not None:
            if self.pos[other] != target:
                # other occupies an overlapping but offset span; put back
                self.put(inst, src)
                return None
            self.take(other)
            self.put(other, src)
        self.put(inst, target)
        new = sum(self.net_cost(n) for n in nets)
        delta = new - old

        accept = delta <= 0 or (
            temperature is not None and temperature > 0
            and rng.random() < math.exp(-delta / temperature))
        if probe or not accept:
            # undo
            self.take(inst)
            if other is not None:
                self.take(other)
                self.put(other, target)
            self.put(inst, src)
            return delta if probe else None
        return delta


_EFFORT_MOVES = {"low": 60, "medium": 220, "high": 900}


def place(netlist: Netlist, grid: NanowireGrid,
          options: Optional[PlaceOptions] = None) -> Placement:
    """Legal deterministic placement; final cost never exceeds the greedy seed."""
    options = options or PlaceOptions()
    cfg = grid.config
    L = cfg.gate_levels_per_wire
    usable_cols = cfg.grid_cols_x * cfg.grid_cols_y - len(grid.hdpp_columns)
    available = usable_cols * L
    needed = sum(get_template(g.kind).levels_used for g in netlist.gates)
    if needed > available:
        raise CapacityExceeded(needed, available)

    ports, port_order = _port_positions(netlist, grid)
    rng = random.Random(options.seed)
    ann = _Annealer(netlist, grid, ports, rng)
    ann.greedy([g.instance for g in netlist.gates],
               capacity=(needed, available))
    greedy_cost = ann.total_cost()

    per_cell = _EFFORT_MOVES.get(options.effort, _EFFORT_MOVES["medium"])
    total_moves = max(4000, per_cell * len(netlist.gates))
    ann.anneal(total_moves)
    final_cost = ann.total_cost()
    assert final_cost <= greedy_cost + 1e-9

    by_id = netlist.gate_by_id()
    cells: Dict[str, PlacedCell] = {}
    for inst in sorted(ann.pos):
        x, y, l = ann.pos[inst]
        cells[inst] = instantiate(get_template(by_id[inst].kind),
                                  (x, y, l), grid, instance=inst)
    return Placement(netlist=netlist, grid=grid,
                     assignment=dict(sorted(ann.pos.items())), cells=cells,
                     ports=ports, port_order=port_order, seed=options.seed,
                     greedy_cost_um=greedy_cost, final_cost_um=final_cost)
