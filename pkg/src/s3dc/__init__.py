"""Compiler and electro-thermal analyzer for vertical-nanowire 3D IC fabrics."""

__version__ = "0.1.0"

from .config import FabricConfig, default_config, load_config, parse_config

__all__ = ["FabricConfig", "default_config", "load_config", "parse_config",
           "__version__"]
