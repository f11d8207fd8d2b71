"""YAML run configuration with strict validation and round-trip support."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .design import MaterialParams
from .heat import SOURCE_KINDS


class ConfigError(ValueError):
    pass


@dataclass
class MeshConfig:
    nx: int = 64
    ny: int = 64
    domain: list[float] = field(default_factory=lambda: [0.0, 1.0, 0.0, 1.0])


@dataclass
class DesignConfig:
    gamma: float = 0.5
    m: int = 3
    phi0: float = 0.5


@dataclass
class OptimizerSection:
    epsilon: float = 1e-4
    tau: float | None = None  # default resolved per mode (see OptimizerConfig)
    q: float = 0.9
    delta_reg: float = 1e-3
    eta1: float | None = None
    eta2: float = 8e-5
    max_iters: int = 8000


@dataclass
class ModeConfig:
    kind: str = "elliptic"   # "elliptic" | "parabolic"
    T: float = 1.0
    nt: int | None = None


@dataclass
class SourceConfig:
    kind: str = "constant"
    amplitude: float = 10.0
    table: list[list[float]] = field(default_factory=list)


@dataclass
class RunConfig:
    mesh: MeshConfig = field(default_factory=MeshConfig)
    material: MaterialParams = field(default_factory=lambda: MaterialParams(1.0, 10.0))
    design: DesignConfig = field(default_factory=DesignConfig)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    mode: ModeConfig = field(default_factory=ModeConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    u0: float = 1.0
    output_dir: str = "out"
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.mesh.nx < 1 or self.mesh.ny < 1:
            raise ConfigError("mesh.nx and mesh.ny must be >= 1")
        if len(self.mesh.domain) != 4:
            raise ConfigError("mesh.domain must be [x_min, x_max, y_min, y_max]")
        x0, x1, y0, y1 = self.mesh.domain
        if not (x1 > x0 and y1 > y0):
            raise ConfigError(f"mesh.domain is degenerate: {self.mesh.domain}")
        if not self.material.beta > self.material.alpha > 0.0:
            raise ConfigError("material ordering violated: need beta > alpha > 0")
        if not 0.0 < self.design.gamma < 1.0:
            raise ConfigError(f"design.gamma must lie in (0, 1), got {self.design.gamma}")
        if self.design.m < 1:
            raise ConfigError("design.m must be >= 1")
        if abs(self.design.phi0) > 1.0:
            raise ConfigError("design.phi0 must satisfy |phi0| <= 1")
        o = self.optimizer
        if o.epsilon <= 0 or (o.tau is not None and o.tau <= 0) \
                or not 0 < o.q < 1 or o.delta_reg <= 0:
            raise ConfigError("optimizer: need epsilon, tau, delta_reg > 0 and q in (0, 1)")
        if o.eta2 <= 0 or o.max_iters < 1:
            raise ConfigError("optimizer: need eta2 > 0 and max_iters >= 1")
        if self.mode.kind not in ("elliptic", "parabolic"):
            raise ConfigError(f"mode.kind must be elliptic or parabolic, got {self.mode.kind!r}")
        if self.mode.T <= 0:
            raise ConfigError("mode.T must be positive")
        if self.mode.nt is not None and self.mode.nt < 1:
            raise ConfigError("mode.nt must be >= 1")
        if self.source.kind not in SOURCE_KINDS:
            raise ConfigError(f"source.kind must be one of {SOURCE_KINDS}")
        return self


_SECTIONS = {
    "mesh": MeshConfig,
    "material": MaterialParams,
    "design": DesignConfig,
    "optimizer": OptimizerSection,
    "mode": ModeConfig,
    "source": SourceConfig,
}
_SCALARS = {"u0", "output_dir", "seed"}


def from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(data) - set(_SECTIONS) - _SCALARS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for name, cls in _SECTIONS.items():
        if name not in data:
            continue
        section = data[name]
        if not isinstance(section, dict):
            raise ConfigError(f"section {name!r} must be a mapping")
        valid = set(cls.__dataclass_fields__)
        bad = set(section) - valid
        if bad:
            raise ConfigError(f"unknown keys in section {name!r}: {sorted(bad)}")
        if name == "source" and "table" in section:
            section = dict(section, table=[list(map(float, row)) for row in section["table"]])
        try:
            kwargs[name] = cls(**section)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"section {name!r}: {exc}") from exc
    for name in _SCALARS & set(data):
        kwargs[name] = data[name]
    return RunConfig(**kwargs).validate()


def to_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["material"] = {"alpha": cfg.material.alpha, "beta": cfg.material.beta}
    return d


def parse_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark else ""
        raise ConfigError(f"cannot parse {path}{where}: {exc}") from exc
    return from_dict(data or {})


def write_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(to_dict(cfg), sort_keys=False))


def apply_overrides(cfg: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply dotted key=value overrides, e.g. mode.T=5 or material.beta=8."""
    data = to_dict(cfg)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, raw = item.split("=", 1)
        target = data
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in target or not isinstance(target[part], dict):
                raise ConfigError(f"unknown override section {key!r}")
            target = target[part]
        leaf = parts[-1]
        if leaf not in target:
            raise ConfigError(f"unknown override key {key!r}")
        value = yaml.safe_load(raw)
        if isinstance(value, str):
            # YAML leaves exponents like 1e-3 (no dot) as strings
            try:
                value = float(value)
            except ValueError:
                pass
        target[leaf] = value
    return from_dict(data)
