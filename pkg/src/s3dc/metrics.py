"""Benchmark metrics: timing (Elmore), power, density, baseline ratios.

The behavioral device model is first order: on-resistance vdd/ion, leakage
ion/on_off_ratio, one effective gate capacitance per transistor. Net delays
come from RC trees extracted from routed geometry (per-micron parasitics
from config applied to each resource's conductor length); gate drive
resistance is the worst-case conducting path through the stack. Throughput
is defined as 1/critical-path delay.

Worst-case gate heat follows the full conduction path: with every transistor
turned on, a stack of n series devices and n parallel devices carries
I = vdd / (n*r_series + r_parallel/n); series sites dissipate I^2*r each,
parallel sites (I/n)^2*r each. This is the power model the thermal scenarios
use; it decreases with fan-in, which is what makes low fan-in stacks the
thermal worst case.
"""

import json
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .cells import PULL_DOWN, PULL_UP, get_template
from .config import BaselineEntry, FabricConfig
from .errors import StateElementPresent
from .fabric import GridCoord

# an input pin loads its net with a p/n gate-electrode pair
TRANSISTORS_PER_INPUT = 2
# assumed drive resistance of primary-input pads
PI_DRIVER = "r_on_p"


@dataclass(frozen=True)
class DeviceModel:
    r_on_n: float      # ohm
    r_on_p: float      # ohm
    i_off_n: float     # A
    i_off_p: float     # A
    c_gate: float      # F per transistor


def device_model(config: FabricConfig) -> DeviceModel:
    ion_n = config.ion_n_ua * 1e-6
    ion_p = config.ion_p_ua * 1e-6
    return DeviceModel(
        r_on_n=config.vdd_v / ion_n,
        r_on_p=config.vdd_v / ion_p,
        i_off_n=ion_n / config.on_off_ratio,
        i_off_p=ion_p / config.on_off_ratio,
        c_gate=config.gate_cap_ff * 1e-15,
    )


def drive_resistance(kind: str, dm: DeviceModel) -> float:
    """Worst-case output drive resistance of a gate's conducting network."""
    t = get_template(kind)
    if t.state_element:
        raise StateElementPresent(kind)
    n = len(t.inputs)
    if kind.startswith("NOR"):
        return max(n * dm.r_on_p, dm.r_on_n)
    return max(dm.r_on_p, n * dm.r_on_n)


def worst_case_gate_power(kind: str, dm: DeviceModel,
                          vdd: float) -> Tuple[float, Dict[int, float]]:
    """Total worst-case heat of one gate and its split across template sites.

    Returns (total_w, {site_index: watts}). All transistors conduct; the
    series stack limits the current.
    """
    t = get_template(kind)
    per_site: Dict[int, float] = {}
    if t.state_element:
        # storage inverters in contention, access devices off
        i = vdd / (dm.r_on_n + dm.r_on_p)
        for idx, s in enumerate(t.sites):
            if s.role == PULL_DOWN:
                per_site[idx] = i * i * dm.r_on_n
            elif s.role == PULL_UP:
                per_site[idx] = i * i * dm.r_on_p
            else:
                per_site[idx] = 0.0
        return sum(per_site.values()), per_site

    n = len(t.inputs)
    if kind.startswith("NOR"):
        r_series, r_par = dm.r_on_p, dm.r_on_n
        series_role = PULL_UP
    else:
        r_series, r_par = dm.r_on_n, dm.r_on_p
        series_role = PULL_DOWN
    i = vdd / (n * r_series + r_par / n)
    for idx, s in enumerate(t.sites):
        if s.role == series_role:
            per_site[idx] = i * i * r_series
        else:
            per_site[idx] = (i / n) ** 2 * r_par
    return sum(per_site.values()), per_site


def worst_case_power_map(rd, dm: DeviceModel,
                         config: FabricConfig) -> Dict[GridCoord, float]:
    """Per-site worst-case heat for every placed cell."""
    out: Dict[GridCoord, float] = {}
    for inst in sorted(rd.placement.cells):
        cell = rd.placement.cells[inst]
        _, per_site = worst_case_gate_power(cell.kind, dm, config.vdd_v)
        for idx, (coord, _) in enumerate(cell.site_coords):
            out[coord] = per_site[idx]
    return out


@dataclass
class RCTree:
    """RC tree mirroring one net's route; resistances live on parent edges."""

    net: str
    order: List[int]                 # nodes, parents before children
    parent: Dict[int, int]           # node -> parent (-1 at root)
    r_ohm: Dict[int, float]          # edge resistance from parent into node
    c_f: Dict[int, float]            # capacitance at node (wire + sinks)
    root: int
    sinks: Dict[Tuple[str, str], int]   # pin ref -> tree node

    def total_cap(self) -> float:
        return sum(self.c_f[u] for u in self.order)


def extract_rc(rd, config: FabricConfig) -> Dict[str, RCTree]:
    """Per-net RC trees from routed geometry.

    Each resource contributes R = wire_r_ohm_per_um * length and
    C = wire_c_ff_per_um * length; every sink input pin adds its
    gate-electrode load.
    """
    graph = rd.graph
    dm = device_model(config)
    r_per = config.wire_r_ohm_per_um
    c_per = config.wire_c_ff_per_um * 1e-15
    trees: Dict[str, RCTree] = {}
    for net in sorted(rd.routes):
        tree = rd.routes[net]
        order = list(tree.nodes)
        r_ohm = {}
        c_f = {}
        for u in order:
            ln = float(graph.length_um[u])
            r_ohm[u] = r_per * ln
            c_f[u] = c_per * ln
        sinks: Dict[Tuple[str, str], int] = {}
        nodes = set(order)
        for ref in rd.net_pins.get(net, []):
            attach = [a for a in rd.attach_points[ref] if a in nodes]
            if not attach:
                continue
            node = min(attach)
            sinks[ref] = node
            if ref[0] == "cell":
                inst, pin = ref[1].rsplit(".", 1)
                if pin != get_template(rd.placement.cells[inst].kind).output:
                    c_f[node] += TRANSISTORS_PER_INPUT * dm.c_gate
        trees[net] = RCTree(net=net, order=order, parent=dict(tree.parents),
                            r_ohm=r_ohm, c_f=c_f, root=order[0], sinks=sinks)
    return trees


def elmore_delay(tree: RCTree, driver_r: float) -> Dict[int, float]:
    """First-moment delay from the driver to every tree node, seconds.

    delay(v) = driver_r * C_total + sum over edges e on root->v of
    R_e * C_subtree(e).
    """
    subtree = {u: tree.c_f[u] for u in tree.order}
    for u in reversed(tree.order):
        p = tree.parent[u]
        if p != -1:
            subtree[p] += subtree[u]
    total_c = subtree[tree.root]
    delay: Dict[int, float] = {}
    for u in tree.order:
        p = tree.parent[u]
        up = delay[p] if p != -1 else driver_r * total_c
        delay[u] = up + tree.r_ohm[u] * subtree[u]
    return delay


def critical_path(rd, netlist, dm: DeviceModel, config: FabricConfig,
                  rc: Optional[Dict[str, RCTree]] = None) -> dict:
    """Longest register-free path; throughput = 1 / critical delay."""
    if rc is None:
        rc = extract_rc(rd, config)
    gates = {g.instance: g for g in netlist.gates
             if not get_template(g.kind).state_element}

    arrival: Dict[str, float] = {}      # net -> arrival at net driver output
    pred: Dict[str, Tuple[str, str]] = {}

    def net_delays(net: str, driver_r: float) -> Dict[Tuple[str, str], float]:
        tree = rc.get(net)
        if tree is None:
            return {}
        d = elmore_delay(tree, driver_r)
        return {ref: d[node] for ref, node in tree.sinks.items()}

    for net in sorted(rd.net_pins):
        arrival.setdefault(net, 0.0)

    # topological order over combinational gates
    order = []
    ready_nets = set(netlist.inputs)
    for g in netlist.gates:
        if get_template(g.kind).state_element:
            ready_nets.add(g.output_net())
    pending = list(gates.values())
    while pending:
        rest = []
        for g in pending:
            if all(n in ready_nets for n in g.input_nets()):
                order.append(g)
                ready_nets.add(g.output_net())
            else:
                rest.append(g)
        if len(rest) == len(pending):
            raise StateElementPresent("timing graph is not acyclic")
        pending = rest

    sink_delay_cache: Dict[str, Dict[Tuple[str, str], float]] = {}
    driver_gate = {g.output_net(): g for g in netlist.gates}
    pi_set = set(netlist.inputs)

    def delays_for(net: str) -> Dict[Tuple[str, str], float]:
        if net not in sink_delay_cache:
            drv = driver_gate.get(net)
            if net in pi_set or drv is None or \
                    get_template(drv.kind).state_element:
                r = getattr(dm, PI_DRIVER)
            else:
                r = drive_resistance(drv.kind, dm)
            sink_delay_cache[net] = net_delays(net, r)
        return sink_delay_cache[net]

    for g in order:
        t = get_template(g.kind)
        best = 0.0
        best_pred = None
        for pin in t.inputs:
            net = g.pins[pin]
            d = delays_for(net).get(("cell", f"{g.instance}.{pin}"), 0.0)
            cand = arrival.get(net, 0.0) + d
            if cand > best:
                best = cand
                best_pred = (net, pin)
        out = g.output_net()
        arrival[out] = best
        if best_pred:
            pred[out] = (best_pred[0], g.instance)

    worst = 0.0
    worst_net = None
    for name in rd.placement.port_order:
        kind, net, _ = rd.placement.ports[name]
        if kind != "out":
            continue
        d = delays_for(net).get(("port", name), 0.0)
        cand = arrival.get(net, 0.0) + d
        if cand > worst:
            worst = cand
            worst_net = net

    path = []
    node = worst_net
    while node is not None:
        entry = pred.get(node)
        if entry is None:
            path.append(node)
            break
        path.append(f"{entry[1]}:{node}")
        node = entry[0]
    path.reverse()

    delay = max(worst, 1e-15)
    return {"delay_s": delay, "throughput_ops_s": 1.0 / delay, "path": path}


def power(rd, netlist, dm: DeviceModel, config: FabricConfig,
          activity: float = 0.1, freq: Optional[float] = None,
          rc: Optional[Dict[str, RCTree]] = None) -> dict:
    """Dynamic + leakage power in microwatts."""
    if rc is None:
        rc = extract_rc(rd, config)
    if freq is None:
        freq = critical_path(rd, netlist, dm, config, rc)["throughput_ops_s"]
    c_total = sum(rc[net].total_cap() for net in sorted(rc))
    dynamic_w = activity * c_total * config.vdd_v ** 2 * freq
    i_off = 0.5 * (dm.i_off_n + dm.i_off_p)
    leakage_w = sum(i_off * config.vdd_v for _ in netlist.gates)
    return {
        "dynamic_uw": dynamic_w * 1e6,
        "leakage_uw": leakage_w * 1e6,
        "total_uw": (dynamic_w + leakage_w) * 1e6,
        "c_total_ff": c_total * 1e15,
        "activity": activity,
        "freq_ops_s": freq,
    }


def density(rd, config: FabricConfig, instances: int = 1) -> dict:
    """Instances per mm^2 over the placed bounding box (HDPP columns count)."""
    cols = {(c.base[0], c.base[1]) for c in rd.placement.cells.values()}
    cols |= set(rd.placement.grid.hdpp_columns)
    if not cols:
        return {"density_per_mm2": 0.0, "footprint_um2": 0.0,
                "span_cols": [0, 0]}
    xs = [c[0] for c in cols]
    ys = [c[1] for c in cols]
    span_x = max(xs) - min(xs) + 1
    span_y = max(ys) - min(ys) + 1
    fx = span_x * config.pitch_um
    fy = span_y * config.pitch_um
    footprint_um2 = fx * fy
    footprint_mm2 = footprint_um2 * 1e-6
    return {
        "density_per_mm2": instances / footprint_mm2,
        "footprint_um2": footprint_um2,
        "span_cols": [span_x, span_y],
    }


def compare_baseline(entry: dict, baseline: Optional[BaselineEntry]) -> dict:
    """Ratios vs the configured planar baseline (missing baseline -> note)."""
    if baseline is None:
        return {"note": "no baseline entry configured for this benchmark"}
    return {
        "throughput_ratio": entry["throughput_ops_s"] / baseline.throughput_ops_s,
        "power_ratio": entry["power_uw"] / baseline.power_uw,
        "perf_per_watt_ratio":
            entry["perf_per_watt"]
            / (baseline.throughput_ops_s / (baseline.power_uw * 1e-6)),
        "density_ratio": entry["density_per_mm2"] / baseline.density_per_mm2,
    }


def benchmark_metrics(rd, netlist, config: FabricConfig,
                      benchmark: Optional[str] = None,
                      activity: float = 0.1) -> dict:
    """The full per-benchmark metric set plus baseline ratios."""
    from .router import congestion_report
    dm = device_model(config)
    rc = extract_rc(rd, config)
    timing = critical_path(rd, netlist, dm, config, rc)
    pw = power(rd, netlist, dm, config, activity=activity,
               freq=timing["throughput_ops_s"], rc=rc)
    dens = density(rd, config)
    congestion = congestion_report(rd)
    power_w = pw["total_uw"] * 1e-6
    entry = {
        "throughput_ops_s": timing["throughput_ops_s"],
        "power_uw": pw["total_uw"],
        "perf_per_watt": timing["throughput_ops_s"] / power_w,
        "density_per_mm2": dens["density_per_mm2"],
        "footprint_um2": dens["footprint_um2"],
        "wirelength_um": rd.stats["total_wirelength_um"],
        "in_active_layer_fraction": congestion["in_active_layer_fraction"],
    }
    name = benchmark or netlist.name
    entry["ratios"] = compare_baseline(entry, config.cmos_baseline.get(name))
    entry["critical_path"] = timing["path"]
    entry["power_detail"] = pw
    return entry


def report_json(report: dict) -> str:
    """Stable-order JSON for golden-file comparison and reproducibility."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
