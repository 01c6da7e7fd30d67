"""Run configuration: defaults, JSON config file, environment override.

Precedence, lowest to highest: built-in defaults, config file values,
explicit command-line flags, then the HS_OUTPUT_DIR environment variable
(which always wins for the output directory).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

MAX_WINDOW_HARD_CAP = 1024


@dataclass
class RunConfig:
    output_dir: Path = Path("hsteer-out")
    seed: int = 12345
    tail_tol: float = 1e-12
    p_max: int = 2 ** 14
    dt_min: float = 1e-8
    dt_start: float = 0.1
    max_window: int = MAX_WINDOW_HARD_CAP
    jobs: int = 1
    figures: bool = True

    def __post_init__(self) -> None:
        self.output_dir = Path(self.output_dir)
        for name in ("tail_tol", "dt_min", "dt_start"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not 1 <= self.max_window <= MAX_WINDOW_HARD_CAP:
            raise ValueError(f"max_window must be in [1, {MAX_WINDOW_HARD_CAP}]")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def ensure_output_dir(self) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir


def load_config_file(path: str | Path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    return data


def build_config(file_path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge defaults, optional config file, explicit overrides, environment."""
    values: dict = {}
    if file_path:
        values.update(load_config_file(file_path))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    env_out = os.environ.get("HS_OUTPUT_DIR")
    if env_out:
        values["output_dir"] = env_out
    return RunConfig(**values)
