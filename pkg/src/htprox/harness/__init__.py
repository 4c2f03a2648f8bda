"""Configuration, orchestration and persistence for htprox experiments."""

from .config import ConfigError, ExperimentConfig, load_config
from .experiments import (run_bounds_overlay, run_separation, run_single, run_validation,
                          summarize_separation)
from .output import HEADER, ResultRow, read_csv, write_csv, write_svg

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "run_bounds_overlay",
           "run_separation", "run_single", "run_validation", "summarize_separation",
           "HEADER", "ResultRow", "read_csv", "write_csv", "write_svg"]
