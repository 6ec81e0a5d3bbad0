"""
spinor.py – Estructura espinorial de las funciones de onda de una componente.

Una función de onda en gauge de Dirac se descompone de forma exacta en campos
de componente por sectores de momento:

    ψ(s) = Σ_AB (-1)^(A·x + B·y) ψ_AB(s)          (4 sectores, sin masa o masa alternante)
    ψ(s) = Σ_ABC (-1)^(A·x + B·y + C·z) ψ_ABC(s)  (8 sectores, masa de Susskind)

con cada ψ_AB limitado en banda a k ∈ (-π/2, π/2] en los ejes escalonados
(el borde π/2 pertenece al sector inferior). Sobre esas componentes el salto
actúa como un operador de Dirac con factores tensoriales de Pauli.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Any

import numpy as np
import scipy.sparse as sp

from .errors import InconclusiveError, PreconditionError
from .hopping import (
    EXACT_TOL,
    MX,
    MY,
    MZ,
    PX,
    PY,
    PZ,
    HoppingField,
    make_dirac_gauge,
)
from .lattice import LatticeSpec, inversion_permutation
from .spectral import WaveFunction, build_hamiltonian

logger = logging.getLogger(__name__)

LEAKAGE_TOL = 1e-10
MASS_KINDS = ("none", "susskind", "alternating")

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)


def _kron(*factors: np.ndarray) -> np.ndarray:
    return reduce(np.kron, factors)


def _staggered_axes(n_sectors: int) -> tuple[int, ...]:
    if n_sectors == 4:
        return (0, 1)
    if n_sectors == 8:
        return (0, 1, 2)
    raise PreconditionError(f"Número de sectores inválido: {n_sectors} (4 u 8)")


def _zone_bits(length: int) -> np.ndarray:
    """bit[m] = 0 si k = 2πm/L cae en (-π/2, π/2], 1 si no (aritmética entera)."""
    m = np.arange(length)
    wrapped = np.where(2 * m > length, m - length, m)
    return np.where((4 * wrapped > -length) & (4 * wrapped <= length), 0, 1)


def _grid_axis(axis: int) -> int:
    # to_grid devuelve (Lz, Ly, Lx)
    return 2 - axis


# ──────────────────────────────────────────────
# Campos de componente
# ──────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class ComponentFields:
    lattice: LatticeSpec
    n_sectors: int
    fields: np.ndarray  # (n_sectors, N)

    def sector_bits(self, index: int) -> tuple[int, ...]:
        n_axes = len(_staggered_axes(self.n_sectors))
        return tuple((index >> (n_axes - 1 - i)) & 1 for i in range(n_axes))

    def sector_label(self, index: int) -> str:
        return "".join(str(b) for b in self.sector_bits(index))

    def sector_norms(self) -> np.ndarray:
        return np.linalg.norm(self.fields, axis=1)

    def total_norm_squared(self) -> float:
        return float(np.sum(np.abs(self.fields) ** 2))

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "dims": list(self.lattice.dims),
            "sectors": [
                {
                    "sector": self.sector_label(i),
                    "re": self.fields[i].real.tolist(),
                    "im": self.fields[i].imag.tolist(),
                }
                for i in range(self.n_sectors)
            ],
        }


def _sector_sign(lattice: LatticeSpec, bits: tuple[int, ...]) -> np.ndarray:
    exponents = [0, 0, 0]
    for axis, bit in enumerate(bits):
        exponents[axis] = bit
    return lattice.sign_field(*exponents)


def _sector_mask(lattice: LatticeSpec, bits: tuple[int, ...]) -> np.ndarray:
    """Máscara booleana (Lz, Ly, Lx) de los momentos asignados a un sector."""
    lx, ly, lz = lattice.dims
    mask = np.ones((lz, ly, lx), dtype=bool)
    for axis, bit in enumerate(bits):
        axis_bits = _zone_bits(lattice.dims[axis]) == bit
        shape = [1, 1, 1]
        shape[_grid_axis(axis)] = lattice.dims[axis]
        mask &= axis_bits.reshape(shape)
    return mask


def project_components(psi: WaveFunction, sectors: int = 4) -> ComponentFields:
    """Parte el espectro de Fourier de ψ en sectores y quita el factor de signo de cada pieza."""
    lattice = psi.lattice
    lattice.require_even("project_components")
    axes = _staggered_axes(sectors)
    spectrum = np.fft.fftn(lattice.to_grid(psi.amplitude))
    fields = np.empty((sectors, lattice.n_sites), dtype=complex)
    for index in range(sectors):
        bits = tuple((index >> (len(axes) - 1 - i)) & 1 for i in range(len(axes)))
        piece = np.fft.ifftn(np.where(_sector_mask(lattice, bits), spectrum, 0))
        fields[index] = _sector_sign(lattice, bits) * lattice.from_grid(piece)
    return ComponentFields(lattice, sectors, fields)


def component_leakage(components: ComponentFields) -> float:
    """Norma de la parte de cada componente fuera de la zona reducida."""
    lattice = components.lattice
    axes = _staggered_axes(components.n_sectors)
    inside = _sector_mask(lattice, (0,) * len(axes))
    worst = 0.0
    for f in components.fields:
        spectrum = np.fft.fftn(lattice.to_grid(f), norm="ortho")
        worst = max(worst, float(np.linalg.norm(spectrum[~inside])))
    return worst


def recompose(components: ComponentFields) -> WaveFunction:
    leakage = component_leakage(components)
    if leakage > LEAKAGE_TOL:
        raise PreconditionError(f"Componentes fuera de la zona reducida (fuga {leakage:.3e})")
    lattice = components.lattice
    amplitude = np.zeros(lattice.n_sites, dtype=complex)
    for index in range(components.n_sectors):
        amplitude += _sector_sign(lattice, components.sector_bits(index)) * components.fields[index]
    return WaveFunction(lattice, amplitude)


# ──────────────────────────────────────────────
# Operador de Dirac
# ──────────────────────────────────────────────


def _shift_sum(grid: np.ndarray, axis: int) -> np.ndarray:
    """f(·+1) + f(·-1) a lo largo del eje espacial."""
    g = _grid_axis(axis) + grid.ndim - 3
    return np.roll(grid, -1, axis=g) + np.roll(grid, 1, axis=g)


def _i_delta(grid: np.ndarray, axis: int) -> np.ndarray:
    """i·(f(·+1) - f(·-1)); símbolo -2 sin k."""
    g = _grid_axis(axis) + grid.ndim - 3
    return 1j * (np.roll(grid, -1, axis=g) - np.roll(grid, 1, axis=g))


@dataclass(frozen=True, eq=False)
class DiracOperator:
    """D = Σ_i α_i·iΔ_i + término de masa, actuando sobre ComponentFields."""

    n_sectors: int
    alphas: tuple[np.ndarray, np.ndarray, np.ndarray]
    mass: str = "none"
    mu: float = 0.0
    beta: np.ndarray | None = None

    def symbol(self, k: np.ndarray) -> np.ndarray:
        """D(k) para un k o un lote (..., 3) de momentos."""
        k = np.asarray(k, dtype=float)
        sines = -2 * np.sin(k)
        out = np.einsum("...i,iab->...ab", sines, np.stack(self.alphas))
        if self.mass == "susskind":
            out = out + self.mu * self.beta
        elif self.mass == "alternating":
            out = out + np.asarray(self.mu * 2 * np.cos(k[..., 0]))[..., None, None] * self.beta
        return out

    def reduced_zone(self, lattice: LatticeSpec) -> np.ndarray:
        staggered = _staggered_axes(self.n_sectors)
        per_axis = []
        for axis, length in enumerate(lattice.dims):
            m = np.arange(length)
            m = np.where(2 * m > length, m - length, m)
            if axis in staggered:
                m = m[_zone_bits(length) == 0]
            per_axis.append(2 * np.pi * m / length)
        grids = np.meshgrid(*per_axis, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def reduced_zone_spectrum(self, lattice: LatticeSpec) -> np.ndarray:
        return np.sort(np.linalg.eigvalsh(self.symbol(self.reduced_zone(lattice))).ravel())

    def apply(self, components: ComponentFields) -> ComponentFields:
        if components.n_sectors != self.n_sectors:
            raise PreconditionError(
                f"Operador de {self.n_sectors} sectores aplicado a {components.n_sectors}"
            )
        lattice = components.lattice
        grids = lattice.to_grid(components.fields)
        out = np.zeros_like(grids)
        for axis, alpha in enumerate(self.alphas):
            out += np.einsum("ab,b...->a...", alpha, _i_delta(grids, axis))
        if self.mass == "susskind":
            out += self.mu * np.einsum("ab,b...->a...", self.beta, grids)
        elif self.mass == "alternating":
            out += self.mu * np.einsum("ab,b...->a...", self.beta, _shift_sum(grids, 0))
        return ComponentFields(lattice, self.n_sectors, lattice.from_grid(out))

    def dirac_algebra_residual(self) -> float:
        """max de {α_i,α_j} - 2δ_ij, β² - 1 y {α_i,β}; exactamente 0 para estas matrices."""
        dim = self.alphas[0].shape[0]
        eye = np.eye(dim)
        worst = 0.0
        for i, a in enumerate(self.alphas):
            for j, b in enumerate(self.alphas):
                target = 2 * eye if i == j else 0 * eye
                worst = max(worst, float(np.max(np.abs(a @ b + b @ a - target))))
            if self.beta is not None:
                worst = max(worst, float(np.max(np.abs(a @ self.beta + self.beta @ a))))
        if self.beta is not None:
            worst = max(worst, float(np.max(np.abs(self.beta @ self.beta - eye))))
        return worst

    def is_hermitian(self) -> bool:
        mats = list(self.alphas) + ([self.beta] if self.beta is not None else [])
        return all(np.array_equal(m, m.conj().T) for m in mats)


def assemble_dirac(sectors: int = 4, mass: str = "none", mu: float = 0.0) -> DiracOperator:
    if mass not in MASS_KINDS:
        raise PreconditionError(f"Masa desconocida: {mass!r} (opciones: {', '.join(MASS_KINDS)})")
    if mass == "susskind" and sectors != 8:
        raise PreconditionError("La masa de Susskind requiere 8 sectores")
    if mass in ("none", "alternating") and sectors != 4:
        raise PreconditionError(f"La masa {mass!r} usa 4 sectores")

    if sectors == 4:
        alphas = (
            _kron(SIGMA_3, SIGMA_0),
            _kron(SIGMA_1, SIGMA_3),
            _kron(SIGMA_1, SIGMA_1),
        )
        beta = _kron(SIGMA_2, SIGMA_0) if mass == "alternating" else None
    else:
        alphas = (
            _kron(SIGMA_3, SIGMA_0, SIGMA_0),
            _kron(SIGMA_1, SIGMA_3, SIGMA_0),
            _kron(SIGMA_1, SIGMA_1, SIGMA_3),
        )
        beta = _kron(SIGMA_1, SIGMA_1, SIGMA_1)
    return DiracOperator(sectors, alphas, mass, float(mu), beta)


def infer_dirac_operator(field_: HoppingField, tol: float = EXACT_TOL) -> DiracOperator:
    """Operador de Dirac que corresponde a un campo en gauge de Dirac, con o sin masa."""
    lattice = field_.lattice
    if any(d % 4 for d in lattice.dims):
        raise PreconditionError(f"El gauge de Dirac requiere dims divisibles por 4: {lattice.dims}")
    reference = make_dirac_gauge(lattice)
    transverse = [PY, MY, PZ, MZ]
    if np.max(np.abs(field_.links[:, transverse] - reference.links[:, transverse])) > tol:
        raise PreconditionError("El campo no está en gauge de Dirac")

    sx = lattice.sign_field(1, 0, 0)
    extra = (field_.links[:, PX] - 1j) / (1j * sx)
    mu_alt = float(extra[0].real)
    alt_ok = (
        np.max(np.abs(field_.links[:, PX] - (1j + 1j * mu_alt * sx))) <= tol
        and np.max(np.abs(field_.links[:, MX] - (-1j + 1j * mu_alt * sx))) <= tol
    )
    if not alt_ok:
        raise PreconditionError("Enlaces en x fuera del gauge de Dirac")

    stagger_sign = lattice.sign_field(1, 1, 1)
    mu_susskind = float(field_.onsite[0].real)
    has_onsite = bool(np.max(np.abs(field_.onsite)) > tol)
    if has_onsite and np.max(np.abs(field_.onsite - mu_susskind * stagger_sign)) > tol:
        raise PreconditionError("Término on-site que no es una masa de Susskind")

    if abs(mu_alt) > tol and has_onsite:
        raise PreconditionError("Masa alternante y de Susskind a la vez no están soportadas")
    if abs(mu_alt) > tol:
        return assemble_dirac(4, "alternating", mu_alt)
    if has_onsite:
        return assemble_dirac(8, "susskind", mu_susskind)
    return assemble_dirac(4, "none")


def verify_equivalence(
    field_: HoppingField, psi: WaveFunction, operator: DiracOperator | None = None
) -> float:
    """‖Hψ - recompose(D·project(ψ))‖ / ‖ψ‖. Es exacto en la red, no solo en el continuo."""
    operator = operator or infer_dirac_operator(field_)
    ham = build_hamiltonian(field_)
    lhs = ham.apply(psi.amplitude)
    rhs = recompose(operator.apply(project_components(psi, operator.n_sectors))).amplitude
    residual = float(np.linalg.norm(lhs - rhs) / psi.norm())
    logger.debug("Equivalencia %s/%s: residuo %.3e", field_.label, operator.mass, residual)
    return residual


# ──────────────────────────────────────────────
# Límite continuo
# ──────────────────────────────────────────────


def continuum_error(k0: float, width: float, length: int, t: float) -> float:
    """Desviación media por modo entre exp(-it·2sin k·α1) y exp(-it·2k·α1) sobre un paquete 1D.

    Los pesos son |ψ̂(k)|² de un paquete gaussiano de ancho λ centrado en k0. Para k0
    pequeño el error escala como k0³ (sin k ≈ k - k³/6).
    """
    if not 2 <= width <= length / 4:
        raise PreconditionError(f"Ancho λ={width} fuera de [2, L/4] (L={length})")
    d = np.arange(length) - length // 2
    packet = sum(np.exp(-((d + m * length) ** 2) / (4 * width**2)) for m in (-1, 0, 1))
    packet = packet * np.exp(1j * k0 * d)
    weights = np.abs(np.fft.fft(packet)) ** 2
    weights /= weights.sum()
    k = 2 * np.pi * np.fft.fftfreq(length)

    alpha = assemble_dirac(4).alphas[0]
    evals, evecs = np.linalg.eigh(alpha)
    spinor = np.full(alpha.shape[0], 1 / np.sqrt(alpha.shape[0]), dtype=complex)
    coeff = evecs.conj().T @ spinor

    def _propagate(symbol: np.ndarray) -> np.ndarray:
        phases = np.exp(-1j * t * symbol[:, None] * evals[None, :])
        return (phases * coeff) @ evecs.T

    deviation = np.linalg.norm(_propagate(2 * np.sin(k)) - _propagate(2 * k), axis=1)
    return float(np.sum(weights * deviation))


def continuum_scaling(k0: float, width: float, length: int, t: float) -> float:
    """error(k0) / error(k0/2); ≈ 8 salvo por el ancho del paquete en momento."""
    coarse = continuum_error(k0, width, length, t)
    fine = continuum_error(k0 / 2, width, length, t)
    if coarse < 1e-12 and fine < 1e-12:
        raise InconclusiveError("continuum-resolution", f"Errores por debajo de 1e-12 (k0={k0})")
    return coarse / fine


# ──────────────────────────────────────────────
# Paridad y dobladores
# ──────────────────────────────────────────────


def parity_operator(lattice: LatticeSpec) -> sp.csr_matrix:
    """(Pψ)(s) = (-1)^(x+y+z) ψ(-s)."""
    lattice.require_even("parity_operator")
    n = lattice.n_sites
    perm = inversion_permutation(lattice)
    return sp.csr_matrix((lattice.sign_field(1, 1, 1), (np.arange(n), perm)), shape=(n, n))


def parity_check(field_: HoppingField) -> float:
    """max_col Σ_row |P H P⁻¹ - H| (norma 1 de la diferencia); P es involutiva."""
    infer_dirac_operator(field_)
    p = parity_operator(field_.lattice)
    ham = build_hamiltonian(field_).matrix
    diff = p @ ham @ p - ham
    if diff.nnz == 0:
        return 0.0
    return float(np.max(np.asarray(abs(diff).sum(axis=0)).ravel()))


@dataclass
class DoublingReport:
    mu: float
    min_abs_energy: float
    k_min: tuple[float, float, float]
    gap_at_origin: float

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "mu": self.mu,
            "min_abs_energy": self.min_abs_energy,
            "k_min": list(self.k_min),
            "gap_at_origin": self.gap_at_origin,
        }


def doubling_report(mu: float, lattice: LatticeSpec) -> DoublingReport:
    """min|E| de la masa alternante sobre la zona reducida; solo datos, sin conteo de dobladores."""
    operator = assemble_dirac(4, "alternating", mu)
    zone = operator.reduced_zone(lattice)
    energies = np.abs(np.linalg.eigvalsh(operator.symbol(zone)))
    per_k = energies.min(axis=1)
    best = int(np.argmin(per_k))
    origin = float(np.min(np.abs(np.linalg.eigvalsh(operator.symbol(np.zeros(3))))))
    return DoublingReport(
        float(mu), float(per_k[best]), tuple(float(v) for v in zone[best]), origin
    )
