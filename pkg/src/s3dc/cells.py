"""Standard-cell templates on the nanowire fabric.

Cells follow the static CMOS style: a pull-up stack in the p region and a
pull-down stack in the n region of one gate level, joined by the level's
SB-ILC, which is the output junction. All transistor sites use one uniform
device geometry; templates carry no sizing attribute by design.

NOR templates are provided by symmetry with NAND (series pull-up, parallel
pull-down) so mapped benchmarks have a full inverting family; see README.

Site slots are region-local: slot 0 sits at the doping boundary (the output
end of a stack) and higher slots grow toward the rail end. Supply attaches at
the outermost p slot, ground at the outermost n slot of each gate level.
"""

from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Tuple

from .config import FabricConfig
from .errors import OutOfBounds, Overlap, UnknownCell
from .fabric import GridCoord, NanowireGrid, region_seg

PULL_UP = "pull_up"
PULL_DOWN = "pull_down"
ACCESS = "access"


@dataclass(frozen=True)
class TransistorSite:
    col_offset: int
    region: str          # 'p' | 'n'
    slot: int            # region-local, 0 = at the doping boundary
    role: str            # pull_up | pull_down | access
    level_offset: int = 0


@dataclass(frozen=True)
class InternalLink:
    kind: str            # only 'ilc' in the current library
    level_offset: int


@dataclass(frozen=True)
class PinSpec:
    """Where a pin attaches and what it attaches to.

    attach 'electrode': gate electrode of a transistor site, reached through
    the innermost coax shell at the site's segment.
    attach 'wire': a wire terminal on a (free) segment, reached through the
    segment itself or its coax shell.
    attach 'output': the cell's SB-ILC output junction.
    attach 'rail': supply/ground tap; not routed as a signal.
    """
    attach: str
    col_offset: int = 0
    level_offset: int = 0
    region: str = ""
    slot: int = 0


@dataclass(frozen=True)
class CellTemplate:
    kind: str
    sites: Tuple[TransistorSite, ...]
    internal_links: Tuple[InternalLink, ...]
    pins: Dict[str, PinSpec]
    inputs: Tuple[str, ...]
    output: Optional[str]
    logic: Optional[Callable[[Tuple[int, ...]], int]]
    state_element: bool = False
    columns_used: int = 1
    levels_used: int = 1


def _nand_logic(n):
    def fn(bits):
        return 0 if all(bits[:n]) else 1
    return fn


def _nor_logic(n):
    def fn(bits):
        return 0 if any(bits[:n]) else 1
    return fn


def _inverting_family(kind: str, fanin: int, series_region: str) -> CellTemplate:
    """NAND (series_region='n') or NOR (series_region='p') of given fan-in."""
    sites = []
    for i in range(fanin):
        sites.append(TransistorSite(0, "p", i, PULL_UP))
        sites.append(TransistorSite(0, "n", i, PULL_DOWN))
    pin_names = "ABCD"[:fanin]
    pins = {}
    for i, name in enumerate(pin_names):
        # input attaches at the gate electrode of its n-region transistor
        pins[name] = PinSpec("electrode", region="n", slot=i)
    pins["Y"] = PinSpec("output")
    pins["VDD"] = PinSpec("rail", region="p")
    pins["GND"] = PinSpec("rail", region="n")
    logic = _nand_logic(fanin) if series_region == "n" else _nor_logic(fanin)
    return CellTemplate(
        kind=kind,
        sites=tuple(sites),
        internal_links=(InternalLink("ilc", 0),),
        pins=pins,
        inputs=tuple(pin_names),
        output="Y",
        logic=logic,
    )


def _sram6t() -> CellTemplate:
    sites = (
        # storage inverter pair, one per gate level
        TransistorSite(0, "p", 0, PULL_UP, level_offset=0),
        TransistorSite(0, "n", 0, PULL_DOWN, level_offset=0),
        TransistorSite(0, "p", 0, PULL_UP, level_offset=1),
        TransistorSite(0, "n", 0, PULL_DOWN, level_offset=1),
        # n-type write access next to inverter 1, p-type read access next to inverter 2
        TransistorSite(0, "n", 1, ACCESS, level_offset=0),
        TransistorSite(0, "p", 1, ACCESS, level_offset=1),
    )
    pins = {
        "WWL": PinSpec("electrode", level_offset=0, region="n", slot=1),
        "WBL": PinSpec("wire", level_offset=0, region="n", slot=2),
        "RWL": PinSpec("electrode", level_offset=1, region="p", slot=1),
        "RBL": PinSpec("wire", level_offset=1, region="p", slot=2),
        "VDD": PinSpec("rail", region="p"),
        "GND": PinSpec("rail", region="n"),
    }
    return CellTemplate(
        kind="SRAM6T",
        sites=sites,
        internal_links=(InternalLink("ilc", 0), InternalLink("ilc", 1)),
        pins=pins,
        inputs=("WWL", "WBL", "RWL"),
        output="RBL",
        logic=None,
        state_element=True,
        levels_used=2,
    )


_TEMPLATES: Dict[str, CellTemplate] = {
    "INV": _inverting_family("INV", 1, "n"),
    "NAND2": _inverting_family("NAND2", 2, "n"),
    "NAND3": _inverting_family("NAND3", 3, "n"),
    "NAND4": _inverting_family("NAND4", 4, "n"),
    "NOR2": _inverting_family("NOR2", 2, "p"),
    "NOR3": _inverting_family("NOR3", 3, "p"),
    "SRAM6T": _sram6t(),
}

CELL_KINDS = tuple(sorted(_TEMPLATES))


def get_template(kind: str) -> CellTemplate:
    try:
        return _TEMPLATES[kind]
    except KeyError:
        raise UnknownCell(kind) from None


def validate_template(t: CellTemplate) -> List[str]:
    """Check template invariants; returns a list of violations (empty = ok)."""
    violations = []
    for s in t.sites:
        if s.role == PULL_UP and s.region != "p":
            violations.append(f"region mismatch: pull-up site in {s.region} region")
        if s.role == PULL_DOWN and s.region != "n":
            violations.append(f"region mismatch: pull-down site in {s.region} region")
    ilcs = [l for l in t.internal_links if l.kind == "ilc"]
    if t.kind.startswith(("NAND", "NOR")) or t.kind == "INV":
        fanin = len(t.inputs)
        n_pu = sum(1 for s in t.sites if s.role == PULL_UP)
        n_pd = sum(1 for s in t.sites if s.role == PULL_DOWN)
        if n_pu != fanin or n_pd != fanin:
            violations.append(
                f"{t.kind}: expected {fanin} pull-up and {fanin} pull-down sites, "
                f"got {n_pu}/{n_pd}")
        if len(ilcs) != 1:
            violations.append("single output SB-ILC expected, got %d" % len(ilcs))
    if t.kind == "SRAM6T":
        if len(t.sites) != 6:
            violations.append("SRAM6T must have exactly 6 sites")
        n_inv = sum(1 for s in t.sites if s.role in (PULL_UP, PULL_DOWN))
        acc_p = sum(1 for s in t.sites if s.role == ACCESS and s.region == "p")
        acc_n = sum(1 for s in t.sites if s.role == ACCESS and s.region == "n")
        if n_inv != 4 or acc_p != 1 or acc_n != 1:
            violations.append(
                "SRAM6T needs 4 inverter sites, 1 p read access, 1 n write access")
        if len(ilcs) != 2:
            violations.append("SRAM6T stores on two SB-ILC junctions")
    return violations


@dataclass
class PlacedCell:
    instance: str
    kind: str
    base: Tuple[int, int, int]                       # (col_x, col_y, level)
    site_coords: List[Tuple[GridCoord, TransistorSite]]
    pin_coords: Dict[str, GridCoord]
    ilc_levels: List[int]                            # absolute levels

    @property
    def template(self) -> CellTemplate:
        return get_template(self.kind)


def _normalize_base(base) -> Tuple[int, int, int]:
    if isinstance(base, GridCoord):
        return (base.col_x, base.col_y, base.level)
    x, y, level = base[0], base[1], base[2]
    return (int(x), int(y), int(level))


def _region_capacity(config: FabricConfig, level: int, region: str) -> int:
    from .fabric import region_of
    s = config.segments_per_gate_level
    b = s // 2
    return b if region_of(config, level, 0) == region else s - b


def instantiate(template: CellTemplate, base, grid: NanowireGrid,
                instance: str = "u0") -> PlacedCell:
    """Place a template at base=(col_x, col_y, level), updating occupancy.

    Raises OutOfBounds when the template does not fit the grid and Overlap
    (naming the first conflicting coordinate) when a target resource is taken.
    """
    c = grid.config
    bx, by, blevel = _normalize_base(base)
    if not (0 <= bx and bx + template.columns_used <= c.grid_cols_x
            and 0 <= by < c.grid_cols_y):
        raise OutOfBounds(f"{template.kind} at column ({bx},{by}) outside grid")
    if not (0 <= blevel and blevel + template.levels_used <= c.gate_levels_per_wire):
        raise OutOfBounds(
            f"{template.kind} needs {template.levels_used} gate levels "
            f"starting at level {blevel}")

    # Region budget check (sites and pin landing segs) before touching the grid.
    need: Dict[Tuple[int, str], int] = {}
    for s in template.sites:
        key = (blevel + s.level_offset, s.region)
        need[key] = max(need.get(key, 0), s.slot + 1)
    for spec in template.pins.values():
        if spec.attach in ("electrode", "wire"):
            key = (blevel + spec.level_offset, spec.region)
            need[key] = max(need.get(key, 0), spec.slot + 1)
    for (level, region), count in sorted(need.items()):
        cap = _region_capacity(c, level, region)
        if count > cap:
            raise OutOfBounds(
                f"{template.kind}: {count} series sites need {count} segs, "
                f"{region} region of a gate level has {cap}")

    site_coords = []
    for s in template.sites:
        level = blevel + s.level_offset
        seg = region_seg(c, level, s.region, s.slot)
        site_coords.append((GridCoord(bx + s.col_offset, by, level, seg), s))

    for coord, _ in site_coords:
        if grid.occupant(coord) is not None:
            raise Overlap(coord)
    ilc_levels = [blevel + l.level_offset for l in template.internal_links
                  if l.kind == "ilc"]
    for level in ilc_levels:
        if (bx, by, level) in grid.ilc_occupancy:
            raise Overlap((bx, by, level), f"SB-ILC already used at level {level}")

    for coord, _ in site_coords:
        grid.occupy(coord, instance)
    for level in ilc_levels:
        grid.occupy_ilc(bx, by, level, instance)

    pin_coords = {}
    for name, spec in template.pins.items():
        level = blevel + spec.level_offset
        x = bx + spec.col_offset
        if spec.attach == "output":
            # the SB-ILC junction; report the boundary seg above it
            seg = c.segments_per_gate_level // 2
            level = ilc_levels[0] if ilc_levels else level
        elif spec.attach == "rail":
            cap = _region_capacity(c, level, spec.region)
            seg = region_seg(c, level, spec.region, cap - 1)
        else:
            seg = region_seg(c, level, spec.region, spec.slot)
        pin_coords[name] = GridCoord(x, by, level, seg)

    return PlacedCell(instance=instance, kind=template.kind,
                      base=(bx, by, blevel), site_coords=site_coords,
                      pin_coords=pin_coords, ilc_levels=ilc_levels)


def remove(placed: PlacedCell, grid: NanowireGrid) -> None:
    """Undo an instantiation, restoring prior occupancy exactly."""
    for coord, _ in placed.site_coords:
        grid.free(coord)
    for level in placed.ilc_levels:
        grid.free_ilc(placed.base[0], placed.base[1], level)


def template_summary(kind: str) -> dict:
    """Serializable description of a template (for the dump command)."""
    t = get_template(kind)
    return {
        "kind": t.kind,
        "columns_used": t.columns_used,
        "levels_used": t.levels_used,
        "sites": [
            {"col_offset": s.col_offset, "region": s.region, "slot": s.slot,
             "role": s.role, "level_offset": s.level_offset}
            for s in t.sites
        ],
        "internal_links": [
            {"kind": l.kind, "level_offset": l.level_offset}
            for l in t.internal_links
        ],
        "inputs": list(t.inputs),
        "output": t.output,
        "state_element": t.state_element,
    }
