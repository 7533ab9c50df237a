"""Command-line experiments, configuration and file formats."""

from .config import ExperimentConfig, load_config, parse_estimator
from .io import ParseError, ResultRow, read_edge_list, read_rows, read_signal, write_edge_list, write_rows, write_signal

__all__ = [
    "ExperimentConfig", "load_config", "parse_estimator",
    "ParseError", "ResultRow", "read_edge_list", "read_rows", "read_signal",
    "write_edge_list", "write_rows", "write_signal",
]
