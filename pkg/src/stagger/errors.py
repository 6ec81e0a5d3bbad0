"""
errors.py – Jerarquía de excepciones de stagger.

Cada clase se corresponde con un código de salida del CLI:
  ConfigError        → 1  (esquema de configuración inválido)
  PreconditionError  → 2  (dimensiones impares, gauge no unimodular, ...)
  NumericalError     → 3  (tolerancia violada; nombra el invariante)
"""

from __future__ import annotations


class StaggerError(Exception):
    """Error base del paquete."""

    exit_code = 1


class ConfigError(StaggerError, ValueError):
    exit_code = 1


class PreconditionError(StaggerError, ValueError):
    exit_code = 2


class NumericalError(StaggerError, RuntimeError):
    """Violación de una tolerancia numérica. `invariant` identifica la propiedad."""

    exit_code = 3

    def __init__(self, invariant: str, message: str) -> None:
        super().__init__(f"[{invariant}] {message}")
        self.invariant = invariant


class InconclusiveError(NumericalError):
    """La medición quedó por debajo de la resolución."""
