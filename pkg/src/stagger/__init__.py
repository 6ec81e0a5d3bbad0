"""stagger – propagación en red cúbica con simetrías módulo transformaciones de gauge."""

__version__ = "0.1.0"
