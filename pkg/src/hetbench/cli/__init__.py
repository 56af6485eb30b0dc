"""Batch command-line pipelines with config files and run manifests."""
from .commands import COMMANDS, SCHEMAS
from .config import ConfigError, RunConfig, build_config
from .main import main, run
from .rundir import RunDir, read_manifest

__all__ = ["COMMANDS", "SCHEMAS", "ConfigError", "RunConfig", "build_config", "main", "run", "RunDir",
           "read_manifest"]
