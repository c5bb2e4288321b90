import os
from pathlib import Path

from drds.util.yaml import dump_yaml, load_yaml_config, load_yaml_document

PROJECT_ROOT = Path(os.environ.get("DRDS_ROOT", Path.cwd()))

__all__ = ["PROJECT_ROOT", "dump_yaml", "load_yaml_config", "load_yaml_document"]
