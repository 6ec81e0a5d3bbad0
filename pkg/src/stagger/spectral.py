"""
spectral.py – Hamiltoniano de salto, espectros, bandas de Bloch y evolución temporal.

Convención: (Hψ)(s) = Σ_n κ(s,n) ψ(s+n) + κ(s,0) ψ(s), es decir H[s, s+n] = κ(s,n).
Las entradas repetidas (redes de lado 2, donde s+x = s-x) se suman.

La unidad de tiempo es la del salto con |κ| = 1; el reescalado 2a de la
ecuación de Dirac continua nunca se aplica implícitamente.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.special import jv

from .errors import InconclusiveError, NumericalError, PreconditionError
from .hopping import (
    EXACT_TOL,
    HoppingField,
    check_hermiticity,
    hermiticity_residual,
    make_dirac_gauge,
    make_scalar,
)
from .lattice import LINK_DIRECTIONS, LatticeSpec

logger = logging.getLogger(__name__)

DENSE_LIMIT = 8192
NORM_TOL = 1e-10
METHODS = ("exact", "chebyshev", "auto")


# ──────────────────────────────────────────────
# Función de onda
# ──────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class WaveFunction:
    lattice: LatticeSpec
    amplitude: np.ndarray

    def __post_init__(self) -> None:
        amp = np.array(self.amplitude, dtype=complex).reshape(-1)
        if amp.shape != (self.lattice.n_sites,):
            raise PreconditionError(
                f"Función de onda con {amp.size} entradas, la red tiene {self.lattice.n_sites}"
            )
        if not np.all(np.isfinite(amp)):
            raise PreconditionError("Función de onda con entradas no finitas")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitude", amp)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitude))

    def normalized(self) -> WaveFunction:
        n = self.norm()
        if n == 0:
            raise PreconditionError("No se puede normalizar una función de onda nula")
        return WaveFunction(self.lattice, self.amplitude / n)

    def overlap(self, other: WaveFunction) -> complex:
        return complex(np.vdot(self.amplitude, other.amplitude))

    def probability(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    @classmethod
    def random(cls, lattice: LatticeSpec, seed: int | np.random.Generator = 0) -> WaveFunction:
        rng = np.random.default_rng(seed)
        amp = rng.normal(size=lattice.n_sites) + 1j * rng.normal(size=lattice.n_sites)
        return cls(lattice, amp).normalized()


# ──────────────────────────────────────────────
# Hamiltoniano
# ──────────────────────────────────────────────


class Hamiltonian:
    """Matriz dispersa hermítica construida a partir de un HoppingField."""

    def __init__(self, field_: HoppingField, matrix: sp.csr_matrix) -> None:
        self.field = field_
        self.lattice = field_.lattice
        self.matrix = matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, amplitude: np.ndarray) -> np.ndarray:
        return self.matrix @ amplitude

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def hermiticity_residual(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0

    def gershgorin_bound(self) -> float:
        """max_s Σ_t |H[s,t]|: cota superior del radio espectral (6 + |onsite|máx si |κ|=1)."""
        return float(np.max(np.asarray(abs(self.matrix).sum(axis=1)).ravel()))

    @cached_property
    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        if self.dim > DENSE_LIMIT:
            raise PreconditionError(
                f"Diagonalización densa limitada a N ≤ {DENSE_LIMIT} (N = {self.dim}); "
                "usar bloch_bands o el método chebyshev"
            )
        evals, evecs = scipy.linalg.eigh(self.to_dense())
        logger.debug("Diagonalización densa: N=%d", self.dim)
        return evals, evecs


def build_hamiltonian(field_: HoppingField) -> Hamiltonian:
    if not check_hermiticity(field_):
        raise PreconditionError(
            f"Campo no hermítico (residuo {hermiticity_residual(field_):.3e})"
        )
    lattice = field_.lattice
    n = lattice.n_sites
    nbr = lattice.neighbor_table
    rows = np.concatenate([np.repeat(np.arange(n), 6), np.arange(n)])
    cols = np.concatenate([nbr.ravel(), np.arange(n)])
    data = np.concatenate([field_.links.ravel(), field_.onsite])
    matrix = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    matrix.sum_duplicates()
    matrix.eliminate_zeros()

    ham = Hamiltonian(field_, matrix)
    residual = ham.hermiticity_residual()
    if residual > EXACT_TOL:
        raise NumericalError("hermiticity", f"H - H† = {residual:.3e}")
    logger.debug("Hamiltoniano %s: N=%d, nnz=%d", field_.label or "?", n, matrix.nnz)
    return ham


def spectrum_dense(ham: Hamiltonian) -> np.ndarray:
    return np.array(ham.eigensystem[0])


def chiral_residual(ham: Hamiltonian) -> float:
    """max |ΓHΓ + H| con Γ = (-1)^(x+y+z); nulo si H solo conecta sitios de paridad opuesta."""
    gamma = sp.diags(ham.lattice.sign_field(1, 1, 1))
    diff = gamma @ ham.matrix @ gamma + ham.matrix
    return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0


def is_chirally_paired(spectrum: np.ndarray, tol: float = 1e-9) -> bool:
    values = np.sort(np.asarray(spectrum))
    return bool(np.allclose(values, -values[::-1], atol=tol))


# ──────────────────────────────────────────────
# Bandas de Bloch (celda 2×2×2)
# ──────────────────────────────────────────────


@dataclass
class BlochSpectrum:
    k_points: np.ndarray  # (M, 3)
    bands: np.ndarray  # (M, 8), ascendente por fila
    cell: tuple[int, int, int] = (2, 2, 2)

    def union(self) -> np.ndarray:
        return np.sort(self.bands.ravel())

    def min_abs_energy(self) -> float:
        return float(np.min(np.abs(self.bands)))

    def at(self, k: Sequence[float], tol: float = 1e-9) -> np.ndarray:
        hits = np.flatnonzero(np.all(np.abs(self.k_points - np.asarray(k)) <= tol, axis=1))
        if not hits.size:
            raise PreconditionError(f"k = {tuple(k)} no pertenece a la zona reducida")
        return self.bands[hits[0]]

    def rows(self) -> Iterable[dict[str, Any]]:
        for k, energies in zip(self.k_points, self.bands):
            for band, energy in enumerate(energies):
                yield {"kx": k[0], "ky": k[1], "kz": k[2], "band": band, "energy": energy}


def _require_two_periodic(field_: HoppingField, tol: float = EXACT_TOL) -> None:
    lattice = field_.lattice
    lattice.require_even("bloch_bands")
    for axis in range(3):
        shift = np.zeros(3, dtype=np.int64)
        shift[axis] = 2
        perm = lattice.indices(lattice.coords + shift)
        worst = max(
            float(np.max(np.abs(field_.links[perm] - field_.links))),
            float(np.max(np.abs(field_.onsite[perm] - field_.onsite))),
        )
        if worst > tol:
            raise PreconditionError(
                f"El campo no es invariante bajo traslaciones por 2 en el eje {'xyz'[axis]}"
            )


def bloch_bands(field_: HoppingField) -> BlochSpectrum:
    """Bloques 8×8 H_K[c, c+n mod 2] = Σ κ(c,n) e^{iK·n}, K_i = 2πm/L_i con m < L_i/2.

    La unión de las bandas sobre K reproduce exactamente el espectro denso.
    """
    _require_two_periodic(field_)
    lattice = field_.lattice
    axes = [2 * np.pi * np.arange(d // 2) / d for d in lattice.dims]
    kx, ky, kz = np.meshgrid(*axes, indexing="ij")
    k_points = np.stack([kx.ravel(), ky.ravel(), kz.ravel()], axis=1)

    blocks = np.zeros((len(k_points), 8, 8), dtype=complex)
    for cz in range(2):
        for cy in range(2):
            for cx in range(2):
                c = cx + 2 * (cy + 2 * cz)
                site = lattice.index((cx, cy, cz))
                blocks[:, c, c] += field_.onsite[site]
                for d, direction in enumerate(LINK_DIRECTIONS):
                    n = np.asarray(direction.vector)
                    tx, ty, tz = (np.array([cx, cy, cz]) + n) % 2
                    target = tx + 2 * (ty + 2 * tz)
                    blocks[:, c, target] += field_.links[site, d] * np.exp(1j * k_points @ n)

    bands = np.linalg.eigvalsh(blocks)
    logger.debug("Bandas de Bloch: %d puntos k", len(k_points))
    return BlochSpectrum(k_points, bands)


# ──────────────────────────────────────────────
# Evolución
# ──────────────────────────────────────────────


def _chebyshev_propagate(ham: Hamiltonian, amplitude: np.ndarray, t: float) -> np.ndarray:
    """exp(-iHt)ψ = Σ_k c_k T_k(H/R) ψ con c_0 = J_0(Rt), c_k = 2(-i)^k J_k(Rt)."""
    bound = ham.gershgorin_bound()
    if bound == 0:
        return amplitude.copy()
    x = bound * t
    k_max = int(abs(x) + 10 * max(abs(x), 1.0) ** (1 / 3) + 60)
    bessel = jv(np.arange(k_max), x)
    significant = np.flatnonzero(np.abs(bessel) > 1e-16)
    order = int(significant[-1]) + 1 if significant.size else 1

    scaled = ham.matrix / bound
    t_prev = amplitude
    result = bessel[0] * t_prev
    if order == 1:
        return result
    t_curr = scaled @ amplitude
    result = result + 2 * (-1j) * bessel[1] * t_curr
    phase = -1j
    for k in range(2, order):
        phase *= -1j
        t_next = 2 * (scaled @ t_curr) - t_prev
        result = result + 2 * phase * bessel[k] * t_next
        t_prev, t_curr = t_curr, t_next
    logger.debug("Chebyshev: R=%.4f, t=%.4f, orden=%d", bound, t, order)
    return result


def evolve(ham: Hamiltonian, psi0: WaveFunction, t: float, method: str = "exact") -> WaveFunction:
    """ψ(t) = exp(-iHt) ψ0, por autodescomposición ('exact') o serie de Chebyshev."""
    if method not in METHODS:
        raise PreconditionError(f"Método desconocido: {method!r} (opciones: {', '.join(METHODS)})")
    norm0 = psi0.norm()
    if norm0 == 0:
        raise PreconditionError("evolve requiere ‖ψ0‖ > 0")
    if psi0.lattice != ham.lattice:
        raise PreconditionError("ψ0 y H sobre redes distintas")
    if method == "auto":
        method = "exact" if ham.dim <= DENSE_LIMIT else "chebyshev"

    if t == 0:
        return psi0
    if method == "exact":
        evals, evecs = ham.eigensystem
        coeff = evecs.conj().T @ psi0.amplitude
        amplitude = evecs @ (np.exp(-1j * evals * t) * coeff)
    else:
        amplitude = _chebyshev_propagate(ham, psi0.amplitude, t)

    psi_t = WaveFunction(ham.lattice, amplitude)
    drift = abs(psi_t.norm() - norm0)
    if drift > NORM_TOL:
        raise NumericalError("norm-conservation", f"|‖ψ(t)‖ - ‖ψ0‖| = {drift:.3e} ({method}, t={t})")
    return psi_t


def energy_expectation(ham: Hamiltonian, psi: WaveFunction) -> float:
    amp = psi.amplitude
    return float(np.vdot(amp, ham.apply(amp)).real / np.vdot(amp, amp).real)


# ──────────────────────────────────────────────
# Paquetes gaussianos y observables
# ──────────────────────────────────────────────


def _minimal_image(delta: np.ndarray, length: int) -> np.ndarray:
    return (delta + length / 2) % length - length / 2


def gaussian_packet(
    lattice: LatticeSpec,
    center: Sequence[float],
    width: float,
    k0: Sequence[float],
    axes: Sequence[int] = (0, 1, 2),
) -> WaveFunction:
    """ψ(s) ∝ Π_i env_i(s_i)·e^{i k0·d}, con d la distancia mínima al centro en el toro.

    Sobre los ejes localizados la envolvente exp(-d²/4λ²) suma las imágenes vecinas;
    en el resto el paquete es uniforme (onda plana e^{i k0_i x_i}).
    """
    for axis in axes:
        length = lattice.dims[axis]
        if not 2 <= width <= length / 4:
            raise PreconditionError(
                f"Ancho λ={width} fuera de [2, L/4] en el eje {'xyz'[axis]} (L={length})"
            )
    amplitude = np.ones(lattice.n_sites, dtype=complex)
    for axis in range(3):
        length = lattice.dims[axis]
        coord = lattice.coords[:, axis].astype(float)
        d = _minimal_image(coord - center[axis], length)
        if axis in axes:
            envelope = sum(np.exp(-((d + m * length) ** 2) / (4 * width**2)) for m in (-1, 0, 1))
            amplitude *= envelope * np.exp(1j * k0[axis] * d)
        else:
            amplitude *= np.exp(1j * k0[axis] * coord)
    return WaveFunction(lattice, amplitude).normalized()


def centroid(psi: WaveFunction) -> np.ndarray:
    """Media circular por eje: ángulo de Σ|ψ|² e^{2πix/L}, llevado a [0, L)."""
    prob = psi.probability()
    out = np.empty(3)
    for axis, length in enumerate(psi.lattice.dims):
        phase = np.exp(2j * np.pi * psi.lattice.coords[:, axis] / length)
        out[axis] = (np.angle(np.sum(prob * phase)) * length / (2 * np.pi)) % length
    return out


def displacement(a: np.ndarray, b: np.ndarray, lattice: LatticeSpec) -> np.ndarray:
    return _minimal_image(np.asarray(b) - np.asarray(a), np.asarray(lattice.dims))


def packet_width(psi: WaveFunction) -> float:
    prob = psi.probability() / np.sum(psi.probability())
    center = centroid(psi)
    var = 0.0
    for axis, length in enumerate(psi.lattice.dims):
        d = _minimal_image(psi.lattice.coords[:, axis] - center[axis], length)
        var += float(np.sum(prob * d**2))
    return float(np.sqrt(var))


@dataclass
class TrajectoryPoint:
    t: float
    centroid: np.ndarray
    width: float
    norm: float
    energy: float

    def to_row(self) -> dict[str, float]:
        return {
            "t": self.t,
            "centroid_x": self.centroid[0],
            "centroid_y": self.centroid[1],
            "centroid_z": self.centroid[2],
            "width": self.width,
            "norm": self.norm,
            "energy": self.energy,
        }


def trajectory(
    ham: Hamiltonian, psi0: WaveFunction, times: Iterable[float], method: str = "exact"
) -> list[TrajectoryPoint]:
    points = []
    for t in times:
        psi = evolve(ham, psi0, float(t), method)
        points.append(
            TrajectoryPoint(float(t), centroid(psi), packet_width(psi), psi.norm(), energy_expectation(ham, psi))
        )
    return points


# ──────────────────────────────────────────────
# Experimento de estaticidad
# ──────────────────────────────────────────────


@dataclass
class StaticityResult:
    dims: tuple[int, int, int]
    width: float
    k0: float
    t: float
    scalar_displacement: float
    staggered_displacement: float

    @property
    def ratio(self) -> float:
        return self.scalar_displacement / self.staggered_displacement

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "dims": list(self.dims),
            "width": self.width,
            "k0": self.k0,
            "t": self.t,
            "scalar_displacement": self.scalar_displacement,
            "staggered_displacement": self.staggered_displacement,
            "ratio": self.ratio,
        }


def staticity_experiment(
    lattice: LatticeSpec, width: float, k0: float, method: str = "exact"
) -> StaticityResult:
    """Mismo paquete en x bajo el campo escalar y el staggered (en gauge de Dirac) durante T = Lx/8.

    La velocidad de grupo escalar es 2|sin k0| y la staggered 2cos k0, así que el
    cociente de desplazamientos tiende a tan k0.
    """
    lattice.require_even("staticity_experiment")
    lx = lattice.dims[0]
    t = lx / 8
    psi0 = gaussian_packet(lattice, (lx // 2, 0, 0), width, (k0, 0.0, 0.0), axes=(0,))
    start = centroid(psi0)

    moved = {}
    for name, builder in (("scalar", make_scalar), ("staggered", make_dirac_gauge)):
        ham = build_hamiltonian(builder(lattice))
        psi_t = evolve(ham, psi0, t, method)
        moved[name] = float(abs(displacement(start, centroid(psi_t), lattice)[0]))
        logger.debug("Estaticidad %s: desplazamiento %.6f", name, moved[name])

    if moved["scalar"] < 0.1 and moved["staggered"] < 0.1:
        raise InconclusiveError(
            "staticity-resolution",
            f"Ambos desplazamientos por debajo de 0.1 sitios (k0={k0}, T={t})",
        )
    result = StaticityResult(lattice.dims, width, k0, t, moved["scalar"], moved["staggered"])
    logger.info(
        "Estaticidad k0=%.5f: escalar %.4f, staggered %.4f, cociente %.4f",
        k0, result.scalar_displacement, result.staggered_displacement, result.ratio,
    )
    return result


def staticity_ratio(lattice: LatticeSpec, width: float, k0: float, method: str = "exact") -> float:
    return staticity_experiment(lattice, width, k0, method).ratio
