"""
hopping.py – Campos de amplitudes de salto y transformaciones de gauge.

Un HoppingField guarda κ(s, n) para cada enlace dirigido (ambas direcciones
materializadas) y el término on-site aparte, porque su ley de gauge es distinta.
La hermiticidad κ(s,-n) = conj(κ(s-n, n)) es un invariante que se verifica,
no una convención implícita.

Configuraciones canónicas:
  - escalar:     κ ≡ 1
  - staggered:   κ(±x)=1, κ(±y)=(-1)^x, κ(±z)=(-1)^(x+y)
  - gauge Dirac: la staggered transformada con g = i^(x+y+z)
Y las dos deformaciones de masa (Susskind on-site y alternante en x).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import PreconditionError
from .lattice import (
    LINK_DIRECTIONS,
    OPPOSITE,
    Direction,
    LatticeSpec,
)

logger = logging.getLogger(__name__)

EXACT_TOL = 1e-12

PX, MX, PY, MY, PZ, MZ = range(6)


# ──────────────────────────────────────────────
# Transformaciones de gauge
# ──────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class GaugeTransform:
    """Fase unimodular g(s) por sitio."""

    lattice: LatticeSpec
    phase: np.ndarray

    def __post_init__(self) -> None:
        phase = np.array(self.phase, dtype=complex).reshape(-1)
        if phase.shape != (self.lattice.n_sites,):
            raise PreconditionError(
                f"Gauge con {phase.size} fases para {self.lattice.n_sites} sitios"
            )
        deviation = float(np.max(np.abs(np.abs(phase) - 1.0))) if phase.size else 0.0
        if deviation > EXACT_TOL:
            raise PreconditionError(f"Gauge no unimodular (desviación {deviation:.3e})")
        phase.setflags(write=False)
        object.__setattr__(self, "phase", phase)

    @classmethod
    def identity(cls, lattice: LatticeSpec) -> GaugeTransform:
        return cls(lattice, np.ones(lattice.n_sites, dtype=complex))

    @classmethod
    def constant(cls, lattice: LatticeSpec, value: complex) -> GaugeTransform:
        return cls(lattice, np.full(lattice.n_sites, value, dtype=complex))

    @classmethod
    def random(cls, lattice: LatticeSpec, seed: int | np.random.Generator = 0) -> GaugeTransform:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        angles = rng.uniform(0.0, 2.0 * np.pi, lattice.n_sites)
        return cls(lattice, np.exp(1j * angles))

    @classmethod
    def dirac(cls, lattice: LatticeSpec) -> GaugeTransform:
        """g(s) = i^(x+y+z); univaluado en el toro solo si cada L es múltiplo de 4."""
        lattice.require_divisible(4, "El gauge i^(x+y+z)")
        exponent = lattice.coords.sum(axis=1) % 4
        return cls(lattice, np.array([1, 1j, -1, -1j])[exponent])

    def at(self, site) -> complex:
        return complex(self.phase[self.lattice.index(site)])

    def inverse(self) -> GaugeTransform:
        return GaugeTransform(self.lattice, np.conj(self.phase))

    def compose(self, other: GaugeTransform) -> GaugeTransform:
        if other.lattice != self.lattice:
            raise PreconditionError("Gauges sobre redes distintas")
        return GaugeTransform(self.lattice, self.phase * other.phase)

    def is_constant(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.phase - self.phase[0])) <= tol)

    def pinned(self) -> GaugeTransform:
        """Mismo gauge módulo fase global, con g(origen) = 1."""
        return GaugeTransform(self.lattice, self.phase * np.conj(self.phase[0]))


# ──────────────────────────────────────────────
# Campo de amplitudes
# ──────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class HoppingField:
    """κ(s, n) en un array (N, 6) con columnas +x,-x,+y,-y,+z,-z, y κ(s, 0) aparte."""

    lattice: LatticeSpec
    links: np.ndarray
    onsite: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        n = self.lattice.n_sites
        links = np.array(self.links, dtype=complex)
        onsite = np.array(self.onsite, dtype=complex).reshape(-1)
        if links.shape != (n, 6):
            raise PreconditionError(f"links con forma {links.shape}, se esperaba {(n, 6)}")
        if onsite.shape != (n,):
            raise PreconditionError(f"onsite con forma {onsite.shape}, se esperaba {(n,)}")
        if not (np.all(np.isfinite(links)) and np.all(np.isfinite(onsite))):
            raise PreconditionError("Amplitudes no finitas")
        links.setflags(write=False)
        onsite.setflags(write=False)
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "onsite", onsite)

    def amp(self, site, direction: Direction) -> complex:
        i = self.lattice.index(site)
        if direction is Direction.ONSITE:
            return complex(self.onsite[i])
        return complex(self.links[i, direction.index])

    def is_unimodular(self, tol: float = EXACT_TOL) -> bool:
        return bool(np.max(np.abs(np.abs(self.links) - 1.0)) <= tol)

    def require_unimodular(self, what: str) -> None:
        if not self.is_unimodular():
            raise PreconditionError(f"{what} requiere |κ| = 1 en todos los enlaces")

    def replace(self, *, links=None, onsite=None, label: str | None = None) -> HoppingField:
        return HoppingField(
            self.lattice,
            self.links if links is None else links,
            self.onsite if onsite is None else onsite,
            self.label if label is None else label,
        )

    def allclose(self, other: HoppingField, tol: float = EXACT_TOL) -> bool:
        return (
            self.lattice == other.lattice
            and bool(np.max(np.abs(self.links - other.links)) <= tol)
            and bool(np.max(np.abs(self.onsite - other.onsite)) <= tol)
        )

    # ── Serialización ──

    def to_json_dict(self) -> dict[str, Any]:
        links = []
        for i, site in enumerate(self.lattice.sites()):
            for d, direction in enumerate(LINK_DIRECTIONS):
                value = self.links[i, d]
                links.append({
                    "site": list(site),
                    "dir": direction.value,
                    "re": float(value.real),
                    "im": float(value.imag),
                })
        return {
            "dims": list(self.lattice.dims),
            "label": self.label,
            "links": links,
            "onsite": [float(v.real) for v in self.onsite],
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> HoppingField:
        lattice = LatticeSpec(tuple(data["dims"]))
        links = np.zeros((lattice.n_sites, 6), dtype=complex)
        for entry in data["links"]:
            direction = Direction.from_label(entry["dir"])
            links[lattice.index(entry["site"]), direction.index] = complex(
                entry["re"], entry.get("im", 0.0)
            )
        onsite = np.asarray(data.get("onsite") or np.zeros(lattice.n_sites), dtype=float)
        return cls(lattice, links, onsite, data.get("label", ""))


def save_field(field: HoppingField, path: Path | str) -> None:
    Path(path).write_text(json.dumps(field.to_json_dict()), encoding="utf-8")


def load_field(path: Path | str) -> HoppingField:
    return HoppingField.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ──────────────────────────────────────────────
# Configuraciones canónicas
# ──────────────────────────────────────────────


def links_from_positive(lattice: LatticeSpec, plus: list[np.ndarray]) -> np.ndarray:
    """Arma el array (N, 6) a partir de amplitudes +x,+y,+z independientes de la coordenada propia."""
    links = np.empty((lattice.n_sites, 6), dtype=complex)
    for axis, values in enumerate(plus):
        links[:, 2 * axis] = values
        links[:, 2 * axis + 1] = np.conj(values)
    return links


def make_scalar(lattice: LatticeSpec) -> HoppingField:
    n = lattice.n_sites
    return HoppingField(lattice, np.ones((n, 6), dtype=complex), np.zeros(n), "scalar")


def make_staggered(lattice: LatticeSpec) -> HoppingField:
    lattice.require_even("make_staggered")
    ones = np.ones(lattice.n_sites)
    links = links_from_positive(
        lattice, [ones, lattice.sign_field(1, 0, 0), lattice.sign_field(1, 1, 0)]
    )
    return HoppingField(lattice, links, np.zeros(lattice.n_sites), "staggered")


def make_dirac_gauge(lattice: LatticeSpec) -> HoppingField:
    """Amplitudes de la ecuación de Dirac discretizada: κ(±x)=±i, κ(±y)=±i(-1)^x, κ(±z)=±i(-1)^(x+y)."""
    lattice.require_divisible(4, "make_dirac_gauge")
    sx = lattice.sign_field(1, 0, 0)
    sxy = lattice.sign_field(1, 1, 0)
    links = np.empty((lattice.n_sites, 6), dtype=complex)
    links[:, PX], links[:, MX] = 1j, -1j
    links[:, PY], links[:, MY] = 1j * sx, -1j * sx
    links[:, PZ], links[:, MZ] = 1j * sxy, -1j * sxy
    return HoppingField(lattice, links, np.zeros(lattice.n_sites), "dirac-gauge")


def is_dirac_gauge_links(field: HoppingField, tol: float = EXACT_TOL) -> bool:
    if any(d % 4 for d in field.lattice.dims):
        return False
    reference = make_dirac_gauge(field.lattice)
    return bool(np.max(np.abs(field.links - reference.links)) <= tol)


def apply_gauge(field: HoppingField, gauge: GaugeTransform) -> HoppingField:
    """κ'(s,n) = g(s+n) κ(s,n) g(s)⁻¹; el on-site no cambia bajo gauges estáticos."""
    if gauge.lattice != field.lattice:
        raise PreconditionError("Gauge y campo sobre redes distintas")
    g = gauge.phase
    nbr = field.lattice.neighbor_table
    links = g[nbr] * field.links * np.conj(g)[:, None]
    return field.replace(links=links)


def add_susskind_mass(field: HoppingField, mu: float) -> HoppingField:
    """onsite(s) += μ(-1)^(x+y+z)."""
    field.lattice.require_even("La masa de Susskind")
    if mu == 0:
        return field
    onsite = field.onsite + mu * field.lattice.sign_field(1, 1, 1)
    return field.replace(onsite=onsite, label=f"{field.label}+susskind")


def add_alternating_mass(field: HoppingField, mu: float) -> HoppingField:
    """κ(s,+x) = i + iμ(-1)^x, κ(s,-x) = -i + iμ(-1)^x (espaciado alternante en x)."""
    if not is_dirac_gauge_links(field):
        raise PreconditionError("La masa alternante solo está definida en el gauge de Dirac")
    sx = field.lattice.sign_field(1, 0, 0)
    links = np.array(field.links)
    links[:, PX] = 1j + 1j * mu * sx
    links[:, MX] = -1j + 1j * mu * sx
    return field.replace(links=links, label=f"{field.label}+alternating")


# ──────────────────────────────────────────────
# Hermiticidad
# ──────────────────────────────────────────────


def hermiticity_residual(field: HoppingField) -> float:
    """max |κ(s,-n) - conj(κ(s-n,n))| junto con max |Im onsite|."""
    nbr = field.lattice.neighbor_table
    worst = float(np.max(np.abs(field.onsite.imag))) if field.onsite.size else 0.0
    for d in range(6):
        back = OPPOSITE[d]
        # s - n = vecino de s en la dirección opuesta
        partner = field.links[nbr[:, back], d]
        worst = max(worst, float(np.max(np.abs(field.links[:, back] - np.conj(partner)))))
    return worst


def check_hermiticity(field: HoppingField, tol: float = EXACT_TOL) -> bool:
    return hermiticity_residual(field) <= tol


# ──────────────────────────────────────────────
# Holonomías (invariantes de gauge)
# ──────────────────────────────────────────────


def straight_holonomies(field: HoppingField, axis: int) -> np.ndarray:
    """Producto de κ(·,+eje) a lo largo de cada fila periódica completa."""
    lattice = field.lattice
    length = lattice.dims[axis]
    starts = lattice.coords[lattice.coords[:, axis] == 0]
    step = np.zeros(3, dtype=np.int64)
    step[axis] = 1
    rows = lattice.indices(starts[:, None, :] + np.arange(length)[None, :, None] * step)
    return np.prod(field.links[rows, 2 * axis], axis=1)


def plaquette_holonomies(field: HoppingField, plane: tuple[int, int]) -> np.ndarray:
    """κ(s,+a) κ(s+a,+b) κ(s+a+b,-a) κ(s+b,-b) para cada sitio s."""
    a, b = plane
    nbr = field.lattice.neighbor_table
    s_a = nbr[:, 2 * a]
    s_ab = nbr[s_a, 2 * b]
    s_b = nbr[:, 2 * b]
    links = field.links
    return (
        links[:, 2 * a]
        * links[s_a, 2 * b]
        * links[s_ab, 2 * a + 1]
        * links[s_b, 2 * b + 1]
    )


def holonomy_signature(field: HoppingField) -> np.ndarray:
    """Todas las plaquetas y todos los lazos rectos: invariante completo en el toro."""
    parts = [plaquette_holonomies(field, plane) for plane in ((0, 1), (0, 2), (1, 2))]
    parts += [straight_holonomies(field, axis) for axis in range(3)]
    return np.concatenate(parts)
