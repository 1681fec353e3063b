from chronoscope.cli.config import ConfigError, ExperimentConfig, validate_config
from chronoscope.cli.experiments import run

__all__ = ["ConfigError", "ExperimentConfig", "validate_config", "run"]
