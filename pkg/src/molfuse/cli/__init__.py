from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .config import ConfigError, RunConfig, config_from_dict, load_config, parse_config_text

__all__ = [
    "Checkpoint",
    "CheckpointError",
    "ConfigError",
    "RunConfig",
    "config_from_dict",
    "load_config",
    "load_checkpoint",
    "parse_config_text",
    "save_checkpoint",
]
