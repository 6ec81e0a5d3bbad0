"""
main.py – Punto de entrada de stagger.

Carga configuración, aplica los flags de la línea de comandos, ejecuta el
experimento y escribe el artefacto. Los errores se traducen en códigos de salida:
1 configuración, 2 precondición, 3 falla numérica.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import EXPERIMENTS, OUTPUT_FORMATS, config_from_dict, load_config
from .errors import NumericalError, StaggerError

_HANDLER_TAG = "_stagger_handler"


def setup_logging(level: str = "INFO", log_dir: str | None = "logs") -> None:
    """Configura logging global (consola + archivo opcional)."""
    from datetime import datetime

    log_level = getattr(logging, level.upper(), logging.INFO)
    fmt = "%(asctime)s │ %(name)-20s │ %(levelname)-5s │ %(message)s"
    datefmt = "%H:%M:%S"

    root = logging.getLogger()
    root.setLevel(log_level)
    # Reemplazar solo los handlers propios de una configuración anterior
    for handler in [h for h in root.handlers if getattr(h, _HANDLER_TAG, False)]:
        root.removeHandler(handler)
        handler.close()

    console = logging.StreamHandler()
    console.setLevel(log_level)
    console.setFormatter(logging.Formatter(fmt, datefmt=datefmt))
    setattr(console, _HANDLER_TAG, True)
    root.addHandler(console)

    if log_dir:
        path = Path(log_dir)
        path.mkdir(parents=True, exist_ok=True)
        log_file = path / f"stagger_{datetime.now().strftime('%Y-%m-%d_%H-%M-%S')}.log"
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(log_level)
        file_handler.setFormatter(logging.Formatter(fmt, datefmt="%Y-%m-%d %H:%M:%S"))
        setattr(file_handler, _HANDLER_TAG, True)
        root.addHandler(file_handler)
        logging.getLogger("stagger").info("Log file: %s", log_file)

    # Silenciar loggers ruidosos
    for noisy in ["matplotlib", "numba", "hypothesis"]:
        logging.getLogger(noisy).setLevel(logging.WARNING)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stagger",
        description="Propagación en red cúbica con simetrías módulo gauge.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        cmd = sub.add_parser(name, help=f"ejecuta el experimento {name}")
        cmd.add_argument("--config", type=Path, default=None, help="YAML o JSON de la corrida")
        cmd.add_argument("--out", type=Path, default=None, help="archivo de salida")
        cmd.add_argument("--format", choices=OUTPUT_FORMATS, default=None)
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--threads", type=int, default=None)
    return parser


def run_cli(argv: list[str] | None = None) -> int:
    """Ejecuta una corrida y devuelve el código de salida."""
    try:
        from dotenv import load_dotenv
        load_dotenv()
    except ImportError:
        pass

    args = build_parser().parse_args(argv)
    env_level = os.getenv("STAGGER_LOG_LEVEL", "")
    logger = logging.getLogger("stagger")

    try:
        raw = load_config(args.config).to_dict()
        raw["experiment"]["name"] = args.experiment
        if args.out is not None:
            raw["output"]["path"] = str(args.out)
        if args.format is not None:
            raw["output"]["format"] = args.format
        if args.seed is not None:
            raw["experiment"]["seed"] = args.seed
        if args.threads is not None:
            raw["runtime"]["threads"] = args.threads
        config = config_from_dict(raw)
    except StaggerError as exc:
        setup_logging(env_level or "INFO", None)
        logger.error("Configuración inválida: %s", exc)
        return exc.exit_code

    setup_logging(env_level or config.runtime.log_level, config.runtime.log_dir or None)
    logger.info("stagger v%s – %s", __version__, args.experiment)

    from .pipeline import ExperimentPipeline
    from .results import write_result

    try:
        pipeline = ExperimentPipeline(config)
        pipeline.load()
        result = pipeline.run()
        out = config.output.resolve(args.experiment)
        write_result(result, config, out, config.output.format)
    except NumericalError as exc:
        logger.error("Invariante violado (%s): %s", exc.invariant, exc)
        return exc.exit_code
    except StaggerError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except Exception as exc:
        logger.error("Error inesperado: %s", exc, exc_info=True)
        return 1
    return 0


def main() -> None:
    """Punto de entrada principal."""
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
