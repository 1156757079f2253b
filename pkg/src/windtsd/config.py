"""Pipeline configuration and its flat ``key = value`` text form."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .diagnostics import WelchConfig
from .ingest import DAY_SECONDS


@dataclass
class PipelineConfig:
    interval_s: float = 600
    n_interior: int = 18
    dx_mode: str = "interval"
    inner_product: int = 0
    bd_energy_threshold: float = 0.9
    kle_energy_threshold: float = 0.9
    bd_modes: int | None = None
    kle_terms: int | None = None
    kle_method: str = "auto"
    covariance_ddof: int = 0
    bandwidth_rule: str = "approx"
    welch_nperseg: int = 256
    welch_overlap: float = 0.5
    welch_window: str = "hann"
    synth_seed: int = 0
    store_covariance: bool = True
    input_paths: list[str] = field(default_factory=list)
    output_path: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("bd_energy_threshold", "kle_energy_threshold"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if self.interval_s <= 0 or DAY_SECONDS % self.interval_s:
            raise ValueError(f"interval_s={self.interval_s:g} does not divide {DAY_SECONDS}")
        if self.inner_product not in (0, 1, 2):
            raise ValueError(f"inner_product must be 0, 1 or 2, got {self.inner_product}")
        if self.bandwidth_rule not in ("approx", "exact"):
            raise ValueError(f"bandwidth_rule must be approx or exact, got {self.bandwidth_rule!r}")
        if self.dx_mode not in ("interval", "global"):
            raise ValueError(f"dx_mode must be interval or global, got {self.dx_mode!r}")

    @property
    def welch(self) -> WelchConfig:
        return WelchConfig(self.welch_nperseg, self.welch_overlap, self.welch_window)

    def to_text(self, include_paths: bool = False) -> str:
        lines = []
        for f in fields(self):
            if not include_paths and f.name in ("input_paths", "output_path"):
                continue
            lines.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        kinds = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in kinds:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            values[key] = _parse(kinds[key], val)
        return cls(**values)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def _format(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return ",".join(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(kind: str, val: str):
    low = val.lower()
    if "None" in kind and low == "none":
        return None
    if kind.startswith("bool"):
        if low not in ("true", "false", "1", "0"):
            raise ValueError(f"not a boolean: {val!r}")
        return low in ("true", "1")
    if kind.startswith("int"):
        return int(val)
    if kind.startswith("float"):
        return float(val)
    if kind.startswith("list"):
        return [s.strip() for s in val.split(",") if s.strip()]
    return val
