"""Vector logic simulation, routed-design extraction, and SRAM protocol model.

simulate() evaluates a combinational netlist in topological order using the
cell library's truth functions. equivalence_check() re-derives a netlist from
a routed design purely from geometry (which route tree touches which pin
attachment resource) and compares behavior against the golden netlist, so the
whole compile pipeline is guarded by an independent functional oracle.

The SRAM model is behavioral: word-line drive levels must fall inside the
weak-read / strong-write windows, otherwise the step is rejected as a
protocol violation (modeling read-disturb risk as a hard error). Windows are
calibration constants: read valid in (0, 0.3*vdd], write in [0.9*vdd, vdd].
"""

import random
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

from .cells import get_template
from .config import FabricConfig
from .errors import ExtractionFailure, ProtocolViolation, StateElementPresent
from .netlist import Gate, Netlist

READ_WEAK_MAX_FRAC = 0.3
WRITE_STRONG_MIN_FRAC = 0.9


def _topo_gates(netlist: Netlist) -> List[Gate]:
    """Gates in evaluation order; rejects state elements."""
    for g in netlist.gates:
        if get_template(g.kind).state_element:
            raise StateElementPresent(f"{g.instance} is a state element")
    known = set(netlist.inputs)
    order: List[Gate] = []
    pending = list(netlist.gates)
    while pending:
        remaining = []
        for g in pending:
            if all(n in known for n in g.input_nets()):
                order.append(g)
                known.add(g.output_net())
            else:
                remaining.append(g)
        if len(remaining) == len(pending):
            stuck = sorted({n for g in remaining for n in g.input_nets()
                            if n not in known})
            raise ExtractionFailure("evaluation stuck; nets undriven: "
                                    + ",".join(stuck[:5]))
        pending = remaining
    return order


def simulate_batch(netlist: Netlist, vectors) -> List[Tuple[int, ...]]:
    """Evaluate many input vectors bit-parallel (one mask bit per vector)."""
    vectors = [tuple(int(b) & 1 for b in v) for v in vectors]
    for v in vectors:
        if len(v) != len(netlist.inputs):
            raise ValueError(
                f"expected {len(netlist.inputs)} input bits, got {len(v)}")
    order = _topo_gates(netlist)
    results: List[Tuple[int, ...]] = []
    chunk = 256
    for start in range(0, len(vectors), chunk):
        batch = vectors[start:start + chunk]
        width = len(batch)
        full = (1 << width) - 1
        values: Dict[str, int] = {}
        for i, name in enumerate(netlist.inputs):
            mask = 0
            for j, vec in enumerate(batch):
                mask |= vec[i] << j
            values[name] = mask
        for g in order:
            ins = [values[n] for n in g.input_nets()]
            if g.kind == "INV":
                out = ~ins[0] & full
            elif g.kind.startswith("NAND"):
                acc = full
                for m in ins:
                    acc &= m
                out = ~acc & full
            elif g.kind.startswith("NOR"):
                acc = 0
                for m in ins:
                    acc |= m
                out = ~acc & full
            else:
                # fall back to the template truth function bit by bit
                t = get_template(g.kind)
                out = 0
                for j in range(width):
                    bits = tuple((m >> j) & 1 for m in ins)
                    out |= t.logic(bits) << j
            values[g.output_net()] = out
        for j in range(width):
            results.append(tuple((values[o] >> j) & 1 for o in netlist.outputs))
    return results


def simulate(netlist: Netlist, inputs) -> Tuple[int, ...]:
    """Evaluate a combinational netlist on one input vector.

    ``inputs`` follows netlist.inputs order. Raises StateElementPresent if the
    netlist contains SRAM cells.
    """
    return simulate_batch(netlist, [inputs])[0]


def simulate_words(netlist: Netlist, a: int, b: int, bits: int) -> int:
    """Drive a multiplier-style netlist with two little-endian operands."""
    vec = [(a >> i) & 1 for i in range(bits)] + [(b >> i) & 1 for i in range(bits)]
    out = simulate(netlist, vec)
    return sum(bit << i for i, bit in enumerate(out))


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    mismatch_vector: Optional[Tuple[int, ...]]
    vectors_checked: int
    exhaustive: bool

    @property
    def verdict(self) -> str:
        return "equivalent" if self.equivalent else "mismatch"


def extract_netlist(rd) -> Netlist:
    """Rebuild a netlist from routed geometry alone.

    Route trees are anonymous here: each tree is identified by the pins and
    ports whose attachment resources it contains, never by its route label.
    Raises ExtractionFailure for disconnected trees, unreached pins, or a
    resource claimed by two trees.
    """
    graph = rd.graph
    trees = [(name, set(tree.nodes)) for name, tree in sorted(rd.routes.items())]

    owner_of_node: Dict[int, int] = {}
    for idx, (_, nodes) in enumerate(trees):
        for n in nodes:
            if n in owner_of_node:
                raise ExtractionFailure(
                    f"resource {graph.node_name(n)} appears in two route trees")
            owner_of_node[n] = idx

    # Connectivity of each tree over real graph edges.
    for label, nodes in trees:
        if not nodes:
            continue
        start = next(iter(sorted(nodes)))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in graph.neighbors(u):
                v = int(v)
                if v in nodes and v not in seen:
                    seen.add(v)
                    stack.append(v)
        if seen != nodes:
            raise ExtractionFailure(f"route tree for {label} is disconnected")

    def tree_of(attach_nodes, what: str) -> int:
        owners = {owner_of_node[n] for n in attach_nodes if n in owner_of_node}
        if not owners:
            raise ExtractionFailure(f"no route reaches {what}")
        if len(owners) > 1:
            raise ExtractionFailure(f"{what} is shorted by multiple routes")
        return owners.pop()

    placement = rd.placement
    net_name: Dict[int, str] = {}
    for port in placement.port_order:
        kind, name, _ = placement.ports[port]
        idx = tree_of(rd.attach_points[("port", port)], f"port {port}")
        if kind == "in":
            net_name[idx] = name
    for port in placement.port_order:
        kind, name, _ = placement.ports[port]
        if kind == "out":
            idx = tree_of(rd.attach_points[("port", port)], f"port {port}")
            net_name.setdefault(idx, name)

    fresh = 0
    def name_of(idx: int) -> str:
        nonlocal fresh
        if idx not in net_name:
            net_name[idx] = f"x{fresh}"
            fresh += 1
        return net_name[idx]

    gates: List[Gate] = []
    for inst in sorted(placement.cells):
        cell = placement.cells[inst]
        t = get_template(cell.kind)
        pins = {}
        for pin in list(t.inputs) + [t.output]:
            idx = tree_of(rd.attach_points[("cell", f"{inst}.{pin}")],
                          f"pin {inst}.{pin}")
            pins[pin] = name_of(idx)
        gates.append(Gate(inst, cell.kind, pins))

    inputs = [placement.ports[p][1] for p in placement.port_order
              if placement.ports[p][0] == "in"]
    outputs = []
    for port in placement.port_order:
        kind, name, _ = placement.ports[port]
        if kind == "out":
            idx = tree_of(rd.attach_points[("port", port)], f"port {port}")
            outputs.append(name_of(idx))
    return Netlist(name=rd.netlist.name + "_extracted", inputs=inputs,
                   outputs=outputs, gates=gates)


def equivalence_check(golden: Netlist, rd, limit: int = 4096,
                      seed: int = 1) -> EquivalenceResult:
    """Compare golden netlist behavior against the extracted routed design.

    Exhaustive when 2**inputs <= limit, otherwise 10,000 seeded random
    vectors. The first failing vector is reported.
    """
    extracted = extract_netlist(rd)
    n = len(golden.inputs)
    if set(extracted.inputs) != set(golden.inputs):
        raise ExtractionFailure("extracted inputs differ from golden inputs")

    # align extracted input order with golden order
    extracted.inputs = list(golden.inputs)

    exhaustive = 2 ** n <= limit
    if exhaustive:
        vectors = [[(v >> i) & 1 for i in range(n)] for v in range(2 ** n)]
    else:
        rng = random.Random(seed)
        vectors = [[rng.randint(0, 1) for _ in range(n)] for _ in range(10_000)]

    got = simulate_batch(extracted, vectors)
    want = simulate_batch(golden, vectors)
    for i, vec in enumerate(vectors):
        if got[i] != want[i]:
            return EquivalenceResult(False, tuple(vec), i + 1, exhaustive)
    return EquivalenceResult(True, None, len(vectors), exhaustive)


# SRAM behavioral protocol model


@dataclass(frozen=True)
class Read:
    pass


@dataclass(frozen=True)
class Write:
    bit: int


@dataclass(frozen=True)
class SramState:
    stored: int
    rbl: object           # "floating" | 0 | 1
    config: FabricConfig


def sram_state(config: FabricConfig, stored: int = 0) -> SramState:
    return SramState(stored=int(stored) & 1, rbl="floating", config=config)


def sram_step(state: SramState, op) -> Tuple[SramState, Optional[int]]:
    """Apply one Read/Write; returns (state', read_value or None).

    Read requires a weak word-line level (<= 0.3*vdd): the read bit line
    samples the stored value without disturbing it. Write requires a strong
    level (>= 0.9*vdd) so the write bit line overpowers the feedback inverter.
    """
    cfg = state.config
    if isinstance(op, Read):
        level = cfg.rwl_read_v
        if not (0 < level <= READ_WEAK_MAX_FRAC * cfg.vdd_v):
            raise ProtocolViolation(
                f"read level {level} V outside weak window "
                f"(0, {READ_WEAK_MAX_FRAC * cfg.vdd_v:.3g}] V")
        return replace(state, rbl=state.stored), state.stored
    if isinstance(op, Write):
        level = cfg.wwl_write_v
        if not (WRITE_STRONG_MIN_FRAC * cfg.vdd_v <= level <= cfg.vdd_v):
            raise ProtocolViolation(
                f"write level {level} V outside strong window "
                f"[{WRITE_STRONG_MIN_FRAC * cfg.vdd_v:.3g}, {cfg.vdd_v}] V")
        return replace(state, stored=int(op.bit) & 1), None
    raise TypeError(f"unknown SRAM op: {op!r}")
