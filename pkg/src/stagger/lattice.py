"""
lattice.py – Geometría de la red cúbica periódica y grupo de simetrías.

Responsabilidades:
  - Indexado de sitios (orden lexicográfico, x más rápido) con envoltura periódica.
  - Álgebra de direcciones (±x, ±y, ±z y el salto on-site).
  - Operaciones de simetría: rotaciones propias del cubo + traslaciones,
    generadas por las rotaciones de 90° Rx y Rz alrededor del origen.

Todos los tipos son valores inmutables; las funciones son puras.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache

import numpy as np

from .errors import PreconditionError

logger = logging.getLogger(__name__)

Site = tuple[int, int, int]
Matrix3 = tuple[tuple[int, int, int], tuple[int, int, int], tuple[int, int, int]]


# ──────────────────────────────────────────────
# Red
# ──────────────────────────────────────────────


@dataclass(frozen=True)
class LatticeSpec:
    """Toro Lx × Ly × Lz. La frontera es siempre periódica."""

    dims: tuple[int, int, int]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3:
            raise PreconditionError(f"Se esperan 3 dimensiones, llegaron {len(dims)}")
        if any(d < 2 for d in dims):
            raise PreconditionError(f"Cada dimensión debe ser >= 2: {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_sites(self) -> int:
        lx, ly, lz = self.dims
        return lx * ly * lz

    @property
    def is_even(self) -> bool:
        return all(d % 2 == 0 for d in self.dims)

    def require_even(self, what: str) -> None:
        if not self.is_even:
            raise PreconditionError(
                f"{what} requiere dimensiones pares (signos (-1)^x univaluados): {self.dims}"
            )

    def require_divisible(self, m: int, what: str) -> None:
        if any(d % m for d in self.dims):
            raise PreconditionError(f"{what} requiere dimensiones divisibles por {m}: {self.dims}")

    # ── Indexado ──

    def reduce(self, site: Sequence[int]) -> Site:
        return (site[0] % self.dims[0], site[1] % self.dims[1], site[2] % self.dims[2])

    def index(self, site: Sequence[int]) -> int:
        x, y, z = self.reduce(site)
        lx, ly, _ = self.dims
        return x + lx * (y + ly * z)

    def site(self, index: int) -> Site:
        lx, ly, _ = self.dims
        return (index % lx, (index // lx) % ly, index // (lx * ly))

    def sites(self) -> Iterator[Site]:
        for i in range(self.n_sites):
            yield self.site(i)

    def indices(self, coords: np.ndarray) -> np.ndarray:
        """Versión vectorizada de `index` para un array (..., 3)."""
        c = np.mod(np.asarray(coords, dtype=np.int64), self.dims)
        lx, ly, _ = self.dims
        return c[..., 0] + lx * (c[..., 1] + ly * c[..., 2])

    @cached_property
    def coords(self) -> np.ndarray:
        """Coordenadas (N, 3) en orden de índice."""
        idx = np.arange(self.n_sites)
        lx, ly, _ = self.dims
        out = np.stack([idx % lx, (idx // lx) % ly, idx // (lx * ly)], axis=1)
        out.setflags(write=False)
        return out

    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """nbr[s, d] = índice de s + d para d en LINK_DIRECTIONS."""
        table = np.stack(
            [self.indices(self.coords + np.array(d.vector)) for d in LINK_DIRECTIONS],
            axis=1,
        )
        table.setflags(write=False)
        return table

    def sign_field(self, cx: int, cy: int, cz: int) -> np.ndarray:
        """(-1)^(cx·x + cy·y + cz·z) por sitio."""
        exponent = self.coords @ np.array([cx, cy, cz])
        return np.where(exponent % 2 == 0, 1.0, -1.0)

    def to_grid(self, values: np.ndarray) -> np.ndarray:
        """Vista (Lz, Ly, Lx) de un campo por sitio; eje 2 = x."""
        values = np.asarray(values)
        lx, ly, lz = self.dims
        return values.reshape(values.shape[:-1] + (lz, ly, lx))

    def from_grid(self, grid: np.ndarray) -> np.ndarray:
        grid = np.asarray(grid)
        return grid.reshape(grid.shape[:-3] + (self.n_sites,))


# ──────────────────────────────────────────────
# Direcciones
# ──────────────────────────────────────────────


class Direction(Enum):
    PX = "+x"
    MX = "-x"
    PY = "+y"
    MY = "-y"
    PZ = "+z"
    MZ = "-z"
    ONSITE = "0"

    @property
    def vector(self) -> Site:
        return _VECTORS[self]

    @property
    def axis(self) -> int | None:
        if self is Direction.ONSITE:
            return None
        return "xyz".index(self.value[1])

    @property
    def sign(self) -> int:
        return 0 if self is Direction.ONSITE else (1 if self.value[0] == "+" else -1)

    @property
    def index(self) -> int:
        """Posición en LINK_DIRECTIONS (columna de los arrays de enlaces)."""
        if self is Direction.ONSITE:
            raise PreconditionError("La dirección on-site no es un enlace")
        return LINK_DIRECTIONS.index(self)

    def __neg__(self) -> Direction:
        if self is Direction.ONSITE:
            return self
        return Direction.from_vector(tuple(-c for c in self.vector))

    @classmethod
    def from_vector(cls, vector: Sequence[int]) -> Direction:
        key = tuple(int(c) for c in vector)
        for direction, vec in _VECTORS.items():
            if vec == key:
                return direction
        raise PreconditionError(f"{key} no es un vector de eje con signo")

    @classmethod
    def from_label(cls, label: str) -> Direction:
        normalized = label.strip().replace("−", "-").lower()
        if normalized in ("0", "onsite", "on-site"):
            return cls.ONSITE
        if len(normalized) == 1:
            normalized = "+" + normalized
        try:
            return cls(normalized)
        except ValueError:
            raise PreconditionError(f"Dirección desconocida: {label!r}") from None


_VECTORS: dict[Direction, Site] = {
    Direction.PX: (1, 0, 0),
    Direction.MX: (-1, 0, 0),
    Direction.PY: (0, 1, 0),
    Direction.MY: (0, -1, 0),
    Direction.PZ: (0, 0, 1),
    Direction.MZ: (0, 0, -1),
    Direction.ONSITE: (0, 0, 0),
}

# Orden canónico de columnas: +x, -x, +y, -y, +z, -z
LINK_DIRECTIONS: tuple[Direction, ...] = (
    Direction.PX, Direction.MX, Direction.PY, Direction.MY, Direction.PZ, Direction.MZ,
)
POSITIVE_DIRECTIONS: tuple[Direction, ...] = (Direction.PX, Direction.PY, Direction.PZ)
OPPOSITE = np.array([1, 0, 3, 2, 5, 4])


def neighbor(site: Sequence[int], direction: Direction, lattice: LatticeSpec) -> Site:
    """s + n reducido módulo dims."""
    if direction is Direction.ONSITE:
        raise PreconditionError("neighbor() no acepta la dirección on-site")
    dx, dy, dz = direction.vector
    return lattice.reduce((site[0] + dx, site[1] + dy, site[2] + dz))


# ──────────────────────────────────────────────
# Simetrías
# ──────────────────────────────────────────────

IDENTITY_ROTATION: Matrix3 = ((1, 0, 0), (0, 1, 0), (0, 0, 1))

# Rx: S(x,y,z) = (x,-z,y), de modo que S⁻¹(x,y,z) = (x,z,-y)
ROT_X: Matrix3 = ((1, 0, 0), (0, 0, -1), (0, 1, 0))
# Rz: S(x,y,z) = (-y,x,z), de modo que S⁻¹(x,y,z) = (y,-x,z)
ROT_Z: Matrix3 = ((0, -1, 0), (1, 0, 0), (0, 0, 1))


def _as_matrix3(m: np.ndarray) -> Matrix3:
    return tuple(tuple(int(v) for v in row) for row in np.asarray(m))  # type: ignore[return-value]


@dataclass(frozen=True)
class SymmetryOp:
    """S·s = R·s + a. R es una rotación propia del cubo (det = +1)."""

    rotation: Matrix3 = IDENTITY_ROTATION
    translation: Site = (0, 0, 0)
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        r = np.asarray(self.rotation, dtype=np.int64)
        if r.shape != (3, 3):
            raise PreconditionError(f"Rotación debe ser 3×3: {self.rotation}")
        if not np.array_equal(r @ r.T, np.eye(3, dtype=np.int64)) or round(np.linalg.det(r)) != 1:
            raise PreconditionError(f"No es una rotación propia del cubo: {self.rotation}")
        object.__setattr__(self, "rotation", _as_matrix3(r))
        object.__setattr__(self, "translation", tuple(int(a) for a in self.translation))

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.rotation, dtype=np.int64)

    @property
    def is_translation(self) -> bool:
        return self.rotation == IDENTITY_ROTATION

    def label(self) -> str:
        return self.name or f"R={self.rotation} a={self.translation}"

    def inverse(self) -> SymmetryOp:
        rt = self.matrix.T
        a = -(rt @ np.asarray(self.translation))
        name = f"{self.name}⁻¹" if self.name else ""
        return SymmetryOp(_as_matrix3(rt), tuple(int(v) for v in a), name)

    def normalized(self, lattice: LatticeSpec) -> SymmetryOp:
        """Misma operación con la traslación reducida módulo dims."""
        return SymmetryOp(self.rotation, lattice.reduce(self.translation), self.name)

    def check_compatible(self, lattice: LatticeSpec) -> None:
        """Una rotación solo envía el toro en sí mismo si permuta ejes de igual longitud."""
        r = self.matrix
        for src in range(3):
            dst = int(np.flatnonzero(r[:, src])[0])
            if lattice.dims[src] != lattice.dims[dst]:
                raise PreconditionError(
                    f"Simetría {self.label()} incompatible con dims {lattice.dims}"
                )

    def apply_site(self, site: Sequence[int], lattice: LatticeSpec) -> Site:
        image = self.matrix @ np.asarray(site, dtype=np.int64) + np.asarray(self.translation)
        return lattice.reduce(tuple(int(v) for v in image))

    def apply_direction(self, direction: Direction) -> Direction:
        if direction is Direction.ONSITE:
            return direction
        return Direction.from_vector(self.matrix @ np.asarray(direction.vector))

    def site_permutation(self, lattice: LatticeSpec) -> np.ndarray:
        """perm[i] = índice de S·s_i."""
        self.check_compatible(lattice)
        image = lattice.coords @ self.matrix.T + np.asarray(self.translation)
        return lattice.indices(image)

    def direction_permutation(self) -> np.ndarray:
        """dmap[d] = columna de S·d."""
        return np.array([self.apply_direction(d).index for d in LINK_DIRECTIONS])


def identity() -> SymmetryOp:
    return SymmetryOp(name="id")


def translate(a: Sequence[int]) -> SymmetryOp:
    return SymmetryOp(IDENTITY_ROTATION, tuple(int(v) for v in a), f"t{tuple(a)}")


def rotation(matrix: Matrix3, name: str = "") -> SymmetryOp:
    return SymmetryOp(matrix, (0, 0, 0), name)


def compose(s1: SymmetryOp, s2: SymmetryOp) -> SymmetryOp:
    """s1 ∘ s2: primero s2, luego s1."""
    r = s1.matrix @ s2.matrix
    a = s1.matrix @ np.asarray(s2.translation) + np.asarray(s1.translation)
    return SymmetryOp(_as_matrix3(r), tuple(int(v) for v in a))


def inverse(s: SymmetryOp) -> SymmetryOp:
    return s.inverse()


def apply_symmetry_site(s: SymmetryOp, site: Sequence[int], lattice: LatticeSpec) -> Site:
    return s.apply_site(site, lattice)


def apply_symmetry_direction(s: SymmetryOp, direction: Direction) -> Direction:
    return s.apply_direction(direction)


GENERATOR_NAMES: tuple[str, ...] = ("tx", "ty", "tz", "Rx", "Rz")


def generator(name: str) -> SymmetryOp:
    """Generadores con nombre: traslaciones unitarias y las dos rotaciones de 90°."""
    table = {
        "tx": lambda: SymmetryOp(IDENTITY_ROTATION, (1, 0, 0), "tx"),
        "ty": lambda: SymmetryOp(IDENTITY_ROTATION, (0, 1, 0), "ty"),
        "tz": lambda: SymmetryOp(IDENTITY_ROTATION, (0, 0, 1), "tz"),
        "Rx": lambda: rotation(ROT_X, "Rx"),
        "Rz": lambda: rotation(ROT_Z, "Rz"),
    }
    try:
        return table[name]()
    except KeyError:
        raise PreconditionError(
            f"Generador desconocido: {name!r} (opciones: {', '.join(GENERATOR_NAMES)})"
        ) from None


def default_generators() -> list[SymmetryOp]:
    return [generator(n) for n in GENERATOR_NAMES]


@lru_cache(maxsize=1)
def cubic_rotation_group() -> tuple[Matrix3, ...]:
    """Cierre de {Rx, Rz} bajo composición: las 24 rotaciones propias del cubo."""
    gens = [np.asarray(ROT_X), np.asarray(ROT_Z)]
    seen = {IDENTITY_ROTATION}
    frontier = [np.eye(3, dtype=np.int64)]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                prod = _as_matrix3(g @ m)
                if prod not in seen:
                    seen.add(prod)
                    nxt.append(np.asarray(prod))
        frontier = nxt
    group = tuple(sorted(seen))
    logger.debug("Grupo de rotaciones cúbicas: %d elementos", len(group))
    return group


def inversion_permutation(lattice: LatticeSpec) -> np.ndarray:
    """perm[i] = índice de -s_i. La inversión es impropia y queda fuera de SymmetryOp."""
    return lattice.indices(-lattice.coords)
