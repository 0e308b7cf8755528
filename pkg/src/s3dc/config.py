"""Fabric configuration: the single calibration surface of the toolchain.

A FabricConfig carries every geometric, electrical, and thermal constant of a
fabric instance. Configs are read from plain-text ``key = value`` files; the
built-in defaults describe a 16 nm vertical-nanowire fabric calibrated against
the reference two-stacked-gate worst-case scenarios (see thermal module).
"""

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict

from .errors import InvalidConfig


@dataclass(frozen=True)
class BaselineEntry:
    """Planar-CMOS reference numbers for one benchmark."""

    throughput_ops_s: float
    power_uw: float
    density_per_mm2: float


@dataclass(frozen=True)
class FabricConfig:
    # Grid geometry
    pitch_nm: float = 150.0
    grid_cols_x: int = 12
    grid_cols_y: int = 12
    gate_levels_per_wire: int = 2
    segments_per_gate_level: int = 6
    coax_shells: int = 2
    seg_pitch_nm: float = 20.0
    nanowire_diameter_nm: float = 16.0

    # Electrical operating points
    vdd_v: float = 1.2
    rwl_read_v: float = 0.1
    wwl_write_v: float = 1.2
    ion_n_ua: float = 17.0
    ion_p_ua: float = 16.0
    on_off_ratio: float = 1.0e5
    gate_cap_ff: float = 0.05

    # Interconnect parasitics (per micron of routed conductor)
    wire_r_ohm_per_um: float = 150.0
    wire_c_ff_per_um: float = 0.15

    # Thermal constants. k_nanowire_w_mk is an effective per-segment value
    # lumping surface scattering, confinement, and interface resistance of a
    # thin gated wire; it is calibrated, not a bulk material property.
    k_nanowire_w_mk: float = 12.0
    k_bridge_w_mk: float = 150.0
    r_hej_k_per_w: float = 2.0e5
    r_hdpp_k_per_w: float = 1.0e6
    r_substrate_k_per_w: float = 5.0e7
    ambient_k: float = 300.0

    cmos_baseline: Dict[str, BaselineEntry] = field(default_factory=dict)

    def validate(self) -> None:
        """Raise InvalidConfig naming the first offending key."""
        positive = [
            "pitch_nm", "seg_pitch_nm", "nanowire_diameter_nm", "vdd_v",
            "ion_n_ua", "ion_p_ua", "gate_cap_ff", "wire_r_ohm_per_um",
            "wire_c_ff_per_um", "k_nanowire_w_mk", "k_bridge_w_mk",
            "r_hej_k_per_w", "r_hdpp_k_per_w", "r_substrate_k_per_w",
            "ambient_k",
        ]
        for key in positive:
            if getattr(self, key) <= 0:
                raise InvalidConfig(key, f"{key} must be > 0")
        for key in ("grid_cols_x", "grid_cols_y", "gate_levels_per_wire",
                    "segments_per_gate_level"):
            if getattr(self, key) < 1:
                raise InvalidConfig(key, f"{key} must be >= 1")
        if self.coax_shells < 0:
            raise InvalidConfig("coax_shells", "coax_shells must be >= 0")
        if self.on_off_ratio < 1:
            raise InvalidConfig("on_off_ratio", "on_off_ratio must be >= 1")
        if self.vdd_v < self.wwl_write_v:
            raise InvalidConfig("wwl_write_v", "wwl_write_v must not exceed vdd_v")
        if not (0 < self.rwl_read_v < self.wwl_write_v):
            raise InvalidConfig("rwl_read_v",
                                "rwl_read_v must lie in (0, wwl_write_v)")
        for name, entry in self.cmos_baseline.items():
            if (entry.throughput_ops_s <= 0 or entry.power_uw <= 0
                    or entry.density_per_mm2 <= 0):
                raise InvalidConfig(f"cmos_baseline.{name}",
                                    "baseline values must be > 0")

    # Derived geometry helpers

    @property
    def level_height_um(self) -> float:
        return self.segments_per_gate_level * self.seg_pitch_nm * 1e-3

    @property
    def pitch_um(self) -> float:
        return self.pitch_nm * 1e-3

    @property
    def seg_pitch_um(self) -> float:
        return self.seg_pitch_nm * 1e-3

    @property
    def nanowire_area_m2(self) -> float:
        import math
        d = self.nanowire_diameter_nm * 1e-9
        return math.pi * d * d / 4.0

    def with_overrides(self, **kwargs) -> "FabricConfig":
        cfg = replace(self, **kwargs)
        cfg.validate()
        return cfg


# Table-derived planar baseline entries for the shipped benchmarks; these are
# inputs to ratio reporting, never recomputed.
DEFAULT_BASELINE = {
    "mult4": BaselineEntry(throughput_ops_s=4.97e9, power_uw=172.0,
                           density_per_mm2=2.0e4),
    "mult16": BaselineEntry(throughput_ops_s=4.48e9, power_uw=1.26e4,
                            density_per_mm2=6.94e2),
}

_INT_FIELDS = {"grid_cols_x", "grid_cols_y", "gate_levels_per_wire",
               "segments_per_gate_level", "coax_shells"}
_BASELINE_FIELDS = {"throughput_ops_s", "power_uw", "density_per_mm2"}


def default_config() -> FabricConfig:
    cfg = FabricConfig(cmos_baseline=dict(DEFAULT_BASELINE))
    cfg.validate()
    return cfg


def parse_config(text: str, base: FabricConfig = None) -> FabricConfig:
    """Parse ``key = value`` lines into a FabricConfig.

    Lines are `key = value`, one per line; `#` starts a comment. Baseline
    entries use dotted keys, e.g. ``cmos_baseline.mult4.power_uw = 172``.
    Unknown keys are an error. Keys not present keep their default value.
    """
    if base is None:
        base = default_config()
    scalar_names = {f.name for f in fields(FabricConfig)} - {"cmos_baseline"}
    overrides = {}
    baseline = {k: {"throughput_ops_s": v.throughput_ops_s,
                    "power_uw": v.power_uw,
                    "density_per_mm2": v.density_per_mm2}
                for k, v in base.cmos_baseline.items()}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(line, f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not value:
            raise InvalidConfig(key, f"line {lineno}: missing value")
        if key.startswith("cmos_baseline."):
            parts = key.split(".")
            if len(parts) != 3 or parts[2] not in _BASELINE_FIELDS:
                raise InvalidConfig(key, f"line {lineno}: unknown key")
            baseline.setdefault(parts[1], {})[parts[2]] = _num(key, value, lineno)
        elif key in scalar_names:
            n = _num(key, value, lineno)
            overrides[key] = int(n) if key in _INT_FIELDS else n
        else:
            raise InvalidConfig(key, f"line {lineno}: unknown key")

    entries = {}
    for name, vals in baseline.items():
        missing = _BASELINE_FIELDS - set(vals)
        if missing:
            raise InvalidConfig(f"cmos_baseline.{name}",
                                f"incomplete baseline entry, missing {sorted(missing)}")
        entries[name] = BaselineEntry(**vals)
    cfg = replace(base, cmos_baseline=entries, **overrides)
    cfg.validate()
    return cfg


def load_config(path) -> FabricConfig:
    return parse_config(Path(path).read_text())


def dump_config(cfg: FabricConfig) -> str:
    """Emit a config file equivalent to cfg (stable ordering)."""
    lines = []
    for f in fields(FabricConfig):
        if f.name == "cmos_baseline":
            continue
        v = getattr(cfg, f.name)
        lines.append(f"{f.name} = {v!r}")
    for name in sorted(cfg.cmos_baseline):
        e = cfg.cmos_baseline[name]
        lines.append(f"cmos_baseline.{name}.throughput_ops_s = {e.throughput_ops_s!r}")
        lines.append(f"cmos_baseline.{name}.power_uw = {e.power_uw!r}")
        lines.append(f"cmos_baseline.{name}.density_per_mm2 = {e.density_per_mm2!r}")
    return "\n".join(lines) + "\n"


def _num(key, value, lineno):
    try:
        return float(value)
    except ValueError:
        raise InvalidConfig(key, f"line {lineno}: not a number: {value!r}") from None
