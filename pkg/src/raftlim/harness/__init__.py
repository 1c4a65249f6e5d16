from .config import ConfigError, RunConfig, parse_config, build_meshes
from .io import (read_csv, read_snapshot, read_summary, records_from_states,
                 snapshot_filename, write_csv, write_snapshot, write_summary)
from .sweep import run_single, run_sweep

__all__ = [
    "ConfigError", "RunConfig", "parse_config", "build_meshes",
    "read_csv", "read_snapshot", "read_summary", "records_from_states",
    "snapshot_filename", "write_csv", "write_snapshot", "write_summary",
    "run_single", "run_sweep",
]
