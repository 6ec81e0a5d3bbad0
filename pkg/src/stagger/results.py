"""
results.py – Emisión de artefactos (CSV / JSON) con procedencia.

Todo archivo incluye la herramienta, su versión y el SHA-256 de la configuración.
Los flotantes se escriben con 17 dígitos significativos.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .config import RunConfig

logger = logging.getLogger(__name__)

TOOL_NAME = "stagger"


@dataclass
class ExperimentResult:
    """Salida de un experimento: filas tabulares y/o un resumen estructurado."""

    experiment: str
    rows: list[dict[str, Any]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def to_jsonable(obj: Any) -> Any:
    """Convierte tipos numpy y complejos a tipos JSON nativos."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _csv_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return f"{format_float(value.real)}{'+' if value.imag >= 0 else '-'}{format_float(abs(value.imag))}j"
    return json.dumps(to_jsonable(value)) if isinstance(value, (list, tuple, dict, np.ndarray)) else str(value)


def provenance(config: RunConfig) -> dict[str, str]:
    return {"tool": TOOL_NAME, "version": __version__, "config_sha256": config.config_hash()}


def write_json(result: ExperimentResult, config: RunConfig, path: Path) -> None:
    document = {
        **provenance(config),
        "experiment": result.experiment,
        "config": config.to_dict(),
        "summary": to_jsonable(result.summary),
        "rows": to_jsonable(result.rows),
    }
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_csv(result: ExperimentResult, config: RunConfig, path: Path) -> None:
    """Cabecera de comentarios con la procedencia; si no hay filas, el resumen como key,value."""
    rows = result.rows or [{"key": k, "value": v} for k, v in result.summary.items()]
    with open(path, "w", encoding="utf-8", newline="") as f:
        for key, value in provenance(config).items():
            f.write(f"# {key}={value}\n")
        f.write(f"# experiment={result.experiment}\n")
        if not rows:
            return
        writer = csv.writer(f)
        header = list(rows[0])
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(row.get(col, "")) for col in header])


def write_result(result: ExperimentResult, config: RunConfig, path: Path | str, fmt: str) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        write_csv(result, config, out)
    else:
        write_json(result, config, out)
    logger.info("Resultado %s escrito en %s", result.experiment, out)
    return out
