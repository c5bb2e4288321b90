import sys

from drds.cli.app import run
from drds.util import PROJECT_ROOT, load_yaml_config
from drds.util.logging import configure_logging

_OBSERVABILITY_CONFIG_PATH = PROJECT_ROOT / "config" / "observability.yaml"


def _init_logging() -> None:
    try:
        obs_config = load_yaml_config(_OBSERVABILITY_CONFIG_PATH)
        logging_config = obs_config.get("logging", {})
    except Exception:
        configure_logging(json_output=False)
        return

    json_output = logging_config.get("json_output", False)
    log_level = logging_config.get("log_level", "INFO")
    configure_logging(json_output=bool(json_output), log_level=str(log_level))


def main() -> None:
    _init_logging()
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
