"""
config.py – Carga y validación de la configuración de una corrida desde YAML o JSON.

Provee dataclasses tipadas para cada sección del archivo de configuración.
A diferencia de otros cargadores, las keys desconocidas son un error: una
corrida debe ser reproducible a partir de su config y su hash.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .lattice import GENERATOR_NAMES

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path("stagger.yaml")

MODEL_KINDS = ("scalar", "staggered", "dirac-gauge")
MASS_KINDS = ("none", "susskind", "alternating")
EXPERIMENTS = (
    "spectrum",
    "bands",
    "evolve",
    "verify-symmetry",
    "classify",
    "gauge-fix",
    "staticity",
    "spinor-check",
    "parity",
)
EVOLUTION_METHODS = ("exact", "chebyshev", "auto")
OUTPUT_FORMATS = ("csv", "json")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _choice(value: Any, options: tuple[str, ...], what: str) -> None:
    if value not in options:
        raise ConfigError(f"{what} inválido: {value!r} (opciones: {', '.join(options)})")


def _triple(value: Any, what: str, kind: type = float) -> list:
    try:
        items = [kind(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{what} debe ser una lista de 3 números: {value!r}") from None
    if len(items) != 3:
        raise ConfigError(f"{what} debe tener 3 entradas: {value!r}")
    return items


# ──────────────────────────────────────────────
# Dataclasses de configuración
# ──────────────────────────────────────────────


@dataclass
class LatticeConfig:
    dims: list[int] = field(default_factory=lambda: [4, 4, 4])

    def __post_init__(self) -> None:
        self.dims = _triple(self.dims, "lattice.dims", int)


@dataclass
class ModelConfig:
    kind: str = "staggered"  # "scalar" | "staggered" | "dirac-gauge"
    mass: str = "none"  # "none" | "susskind" | "alternating"
    mu: float = 0.0

    def __post_init__(self) -> None:
        _choice(self.kind, MODEL_KINDS, "model.kind")
        _choice(self.mass, MASS_KINDS, "model.mass")
        self.mu = float(self.mu)


@dataclass
class ExperimentConfig:
    name: str = "spectrum"
    t: float = 1.0
    method: str = "exact"  # "exact" | "chebyshev" | "auto"
    steps: int = 10  # puntos de la trayectoria en evolve
    width: float = 4.0  # λ del paquete, en sitios
    k0: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    center: list[float] | None = None  # None = centro de la red
    seed: int = 0
    symmetry: str = "Rz"  # generador para verify-symmetry
    samples: int = 20  # funciones de onda aleatorias en spinor-check
    sectors: int | None = None  # None = inferido del campo
    generators: list[str] = field(default_factory=lambda: list(GENERATOR_NAMES))

    def __post_init__(self) -> None:
        _choice(self.name, EXPERIMENTS, "experiment.name")
        _choice(self.method, EVOLUTION_METHODS, "experiment.method")
        _choice(self.symmetry, GENERATOR_NAMES, "experiment.symmetry")
        for name in self.generators:
            _choice(name, GENERATOR_NAMES, "experiment.generators")
        if self.sectors not in (None, 4, 8):
            raise ConfigError(f"experiment.sectors debe ser 4 u 8: {self.sectors!r}")
        if int(self.steps) < 1 or int(self.samples) < 1:
            raise ConfigError("experiment.steps y experiment.samples deben ser >= 1")
        self.k0 = _triple(self.k0, "experiment.k0")
        if self.center is not None:
            self.center = _triple(self.center, "experiment.center")
        self.t, self.width = float(self.t), float(self.width)
        self.seed, self.steps, self.samples = int(self.seed), int(self.steps), int(self.samples)


@dataclass
class OutputConfig:
    path: str = ""  # vacío = results/<experimento>.<formato>
    format: str = "json"  # "csv" | "json"

    def __post_init__(self) -> None:
        _choice(self.format, OUTPUT_FORMATS, "output.format")

    def resolve(self, experiment: str) -> Path:
        return Path(self.path) if self.path else Path("results") / f"{experiment}.{self.format}"


@dataclass
class RuntimeConfig:
    threads: int = 1
    log_level: str = "INFO"
    log_dir: str = "logs"  # vacío = solo consola

    def __post_init__(self) -> None:
        self.log_level = str(self.log_level).upper()
        _choice(self.log_level, LOG_LEVELS, "runtime.log_level")
        if int(self.threads) < 1:
            raise ConfigError(f"runtime.threads debe ser >= 1: {self.threads!r}")
        self.threads = int(self.threads)


@dataclass
class RunConfig:
    """Configuración raíz de una corrida."""

    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def config_hash(self) -> str:
        """SHA-256 del JSON canónico (keys ordenadas)."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


SECTIONS: dict[str, type] = {
    "lattice": LatticeConfig,
    "model": ModelConfig,
    "experiment": ExperimentConfig,
    "output": OutputConfig,
    "runtime": RuntimeConfig,
}


# ──────────────────────────────────────────────
# Carga
# ──────────────────────────────────────────────


def _dict_to_dataclass(cls: type, data: Any, section: str) -> Any:
    """Construye un dataclass desde un dict; las keys desconocidas son error."""
    if not data:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"La sección {section!r} debe ser un mapeo")
    fieldnames = {f.name for f in cls.__dataclass_fields__.values()}
    unknown = sorted(set(data) - fieldnames)
    if unknown:
        raise ConfigError(f"Keys desconocidas en {section!r}: {', '.join(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"Valor inválido en {section!r}: {exc}") from exc


def config_from_dict(raw: dict[str, Any]) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("La configuración debe ser un mapeo de secciones")
    unknown = sorted(set(raw) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"Secciones desconocidas: {', '.join(unknown)}")
    return RunConfig(**{
        name: _dict_to_dataclass(cls, raw.get(name, {}), name) for name, cls in SECTIONS.items()
    })


def load_config(path: Path | str | None = None) -> RunConfig:
    """Carga un archivo YAML o JSON y devuelve RunConfig tipado."""
    config_path = Path(path) if path else DEFAULT_CONFIG_PATH

    if not config_path.exists():
        logger.warning("Config no encontrado en %s, usando defaults.", config_path)
        return RunConfig()

    try:
        with open(config_path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"No se pudo parsear {config_path}: {exc}") from exc

    cfg = config_from_dict(raw)
    logger.info("Config cargado desde %s (sha256 %s)", config_path, cfg.config_hash()[:12])
    return cfg
