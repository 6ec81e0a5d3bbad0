"""
gauge_solver.py – Simetrías módulo gauge: equivalencias, fijado de gauge y clasificación.

Responsabilidades:
  - Transformar un campo por una simetría de la red: κ'(s,n) = κ(S⁻¹s, S⁻¹n).
  - Decidir si dos campos son gauge-equivalentes (árbol BFS + chequeo de ciclos),
    devolviendo el gauge o un lazo testigo con holonomías distintas.
  - Fijado maximal de gauge sobre el árbol x-filas / plano x=0 / línea x=y=0.
  - Estabilizador residual: solo quedan fases globales, por lo que un gauge
    no puede generar dependencia temporal en los enlaces.
  - Clasificación de configuraciones simétricas módulo gauge (escalar y staggered),
    más un oráculo sin ansatz que resuelve el núcleo lineal sobre fases Z_n en redes 2³.
  - Término on-site: invariancia estricta y eliminación por una fase global g(t).
"""

from __future__ import annotations

import itertools
import logging
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import networkx as nx
import numpy as np

from .errors import PreconditionError
from .hopping import (
    GaugeTransform,
    HoppingField,
    apply_gauge,
    links_from_positive,
)
from .lattice import (
    LINK_DIRECTIONS,
    OPPOSITE,
    Direction,
    LatticeSpec,
    Site,
    SymmetryOp,
    default_generators,
)

logger = logging.getLogger(__name__)

EQUIVALENCE_TOL = 1e-10

TreeEdge = tuple[int, int, int]  # (padre, columna de dirección, hijo)


@dataclass(frozen=True)
class DirectedLink:
    site: Site
    direction: Direction

    def to_json_dict(self) -> dict[str, Any]:
        return {"site": list(self.site), "dir": self.direction.value}


def loop_holonomy(field_: HoppingField, loop: Sequence[DirectedLink]) -> complex:
    value = 1.0 + 0.0j
    for link in loop:
        value *= field_.amp(link.site, link.direction)
    return complex(value)


# ──────────────────────────────────────────────
# Transformación por simetrías
# ──────────────────────────────────────────────


def transform_field(field_: HoppingField, op: SymmetryOp) -> HoppingField:
    """κ'(s,n) = κ(S⁻¹s, S⁻¹n); onsite'(s) = onsite(S⁻¹s)."""
    lattice = field_.lattice
    op.check_compatible(lattice)
    inv = op.inverse()
    src = inv.site_permutation(lattice)
    dmap = inv.direction_permutation()
    links = field_.links[src][:, dmap]
    return field_.replace(links=links, onsite=field_.onsite[src])


# ──────────────────────────────────────────────
# Equivalencia de gauge
# ──────────────────────────────────────────────


@dataclass
class EquivalenceResult:
    equivalent: bool
    max_residual: float
    gauge: GaugeTransform | None = None
    failing_loop: list[DirectedLink] | None = None
    holonomy_a: complex | None = None
    holonomy_b: complex | None = None
    onsite_witness: tuple[Site, complex, complex] | None = None

    @property
    def gauge_kind(self) -> str | None:
        if self.gauge is None:
            return None
        return "constant" if self.gauge.is_constant() else "site-dependent"

    def to_json_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "equivalent": self.equivalent,
            "gauge": self.gauge_kind,
            "max_residual": self.max_residual,
        }
        if self.gauge is not None:
            data["gauge_phases"] = [[float(g.real), float(g.imag)] for g in self.gauge.phase]
        if self.failing_loop is not None:
            data["failing_loop"] = [link.to_json_dict() for link in self.failing_loop]
            data["holonomy_a"] = [self.holonomy_a.real, self.holonomy_a.imag]
            data["holonomy_b"] = [self.holonomy_b.real, self.holonomy_b.imag]
        if self.onsite_witness is not None:
            site, value_a, value_b = self.onsite_witness
            data["onsite_witness"] = {
                "site": list(site),
                "onsite_a": [value_a.real, value_a.imag],
                "onsite_b": [value_b.real, value_b.imag],
            }
        return data


@lru_cache(maxsize=32)
def _bfs_tree(lattice: LatticeSpec) -> tuple[tuple[TreeEdge, ...], dict[int, tuple[int, int]]]:
    """Árbol BFS desde el origen sobre el grafo de la red (networkx)."""
    nbr = lattice.neighbor_table
    graph = nx.Graph()
    graph.add_nodes_from(range(lattice.n_sites))
    for d in (0, 2, 4):
        graph.add_edges_from(zip(range(lattice.n_sites), nbr[:, d].tolist()))
    edges: list[TreeEdge] = []
    parents: dict[int, tuple[int, int]] = {}
    for u, v in nx.bfs_edges(graph, 0):
        d = int(np.flatnonzero(nbr[u] == v)[0])
        edges.append((u, d, v))
        parents[v] = (u, d)
    return tuple(edges), parents


def _witness_loop(
    lattice: LatticeSpec, parents: dict[int, tuple[int, int]], site: int, d: int
) -> list[DirectedLink]:
    """Origen → s por el árbol, enlace (s, d), y vuelta al origen por el árbol."""
    down: list[DirectedLink] = []
    node = site
    while node in parents:
        parent, pd = parents[node]
        down.append(DirectedLink(lattice.site(parent), LINK_DIRECTIONS[pd]))
        node = parent
    loop = list(reversed(down))
    loop.append(DirectedLink(lattice.site(site), LINK_DIRECTIONS[d]))
    node = int(lattice.neighbor_table[site, d])
    while node in parents:
        parent, pd = parents[node]
        loop.append(DirectedLink(lattice.site(node), LINK_DIRECTIONS[OPPOSITE[pd]]))
        node = parent
    return loop


def find_gauge_equivalence(
    field_a: HoppingField,
    field_b: HoppingField,
    tol: float = EQUIVALENCE_TOL,
    compare_onsite: bool = True,
) -> EquivalenceResult:
    """Busca g con g(s+n) κA(s,n) g(s)⁻¹ = κB(s,n) y g(origen) = 1.

    Las fases se propagan por un árbol BFS; luego se comprueba cada enlace.
    Si alguno falla, el lazo testigo cierra ese enlace con caminos del árbol.
    Un gauge estático no toca el término on-site, así que con compare_onsite
    ambos on-site deben coincidir; si no, se devuelve el sitio testigo.
    """
    if field_a.lattice != field_b.lattice:
        raise PreconditionError(
            f"Redes distintas: {field_a.lattice.dims} vs {field_b.lattice.dims}"
        )
    field_a.require_unimodular("find_gauge_equivalence")
    field_b.require_unimodular("find_gauge_equivalence")

    lattice = field_a.lattice
    edges, parents = _bfs_tree(lattice)
    ratio = field_b.links / field_a.links
    g = np.ones(lattice.n_sites, dtype=complex)
    for u, d, v in edges:
        g[v] = g[u] * ratio[u, d]

    nbr = lattice.neighbor_table
    residual = np.abs(g[nbr] * field_a.links * np.conj(g)[:, None] - field_b.links)
    worst = float(residual.max())
    if worst <= tol:
        if compare_onsite:
            mismatch = np.abs(field_a.onsite - field_b.onsite)
            if mismatch.max() > tol:
                i = int(np.argmax(mismatch))
                logger.debug("On-site distinto en el sitio %s", lattice.site(i))
                return EquivalenceResult(
                    False,
                    float(mismatch.max()),
                    onsite_witness=(
                        lattice.site(i),
                        complex(field_a.onsite[i]),
                        complex(field_b.onsite[i]),
                    ),
                )
        return EquivalenceResult(True, worst, gauge=GaugeTransform(lattice, g / np.abs(g)))

    site, d = np.unravel_index(int(np.argmax(residual)), residual.shape)
    loop = _witness_loop(lattice, parents, int(site), int(d))
    return EquivalenceResult(
        False,
        worst,
        failing_loop=loop,
        holonomy_a=loop_holonomy(field_a, loop),
        holonomy_b=loop_holonomy(field_b, loop),
    )


def verify_symmetry_mod_gauge(
    field_: HoppingField,
    op: SymmetryOp,
    tol: float = EQUIVALENCE_TOL,
    compare_onsite: bool = True,
) -> EquivalenceResult:
    return find_gauge_equivalence(field_, transform_field(field_, op), tol, compare_onsite)


# ──────────────────────────────────────────────
# Fijado maximal de gauge
# ──────────────────────────────────────────────


@lru_cache(maxsize=32)
def _fixing_tree(lattice: LatticeSpec) -> tuple[TreeEdge, ...]:
    """Línea x=y=0 en z, plano x=0 en y, filas completas en x (sin enlaces de envoltura)."""
    lx, ly, lz = lattice.dims
    idx = lattice.index
    edges: list[TreeEdge] = []
    for z in range(lz - 1):
        edges.append((idx((0, 0, z)), 4, idx((0, 0, z + 1))))
    for z in range(lz):
        for y in range(ly - 1):
            edges.append((idx((0, y, z)), 2, idx((0, y + 1, z))))
    for z in range(lz):
        for y in range(ly):
            for x in range(lx - 1):
                edges.append((idx((x, y, z)), 0, idx((x + 1, y, z))))
    return tuple(edges)


def gauge_fix_tree_links(lattice: LatticeSpec) -> list[DirectedLink]:
    return [
        DirectedLink(lattice.site(p), LINK_DIRECTIONS[d]) for p, d, _ in _fixing_tree(lattice)
    ]


def maximal_gauge_fix(field_: HoppingField) -> tuple[HoppingField, GaugeTransform]:
    """Lleva a 1 todos los enlaces del árbol; los de envoltura guardan las holonomías."""
    field_.require_unimodular("maximal_gauge_fix")
    lattice = field_.lattice
    g = np.ones(lattice.n_sites, dtype=complex)
    for parent, d, child in _fixing_tree(lattice):
        g[child] = g[parent] * np.conj(field_.links[parent, d])
    gauge = GaugeTransform(lattice, g / np.abs(g))
    fixed = apply_gauge(field_, gauge)
    logger.debug("Fijado maximal: %d enlaces de árbol", len(_fixing_tree(lattice)))
    return fixed, gauge


def _require_fixed(field_: HoppingField, tol: float = EQUIVALENCE_TOL) -> None:
    tree = _fixing_tree(field_.lattice)
    if not tree:
        return
    parents = np.array([p for p, _, _ in tree])
    cols = np.array([d for _, d, _ in tree])
    deviation = float(np.max(np.abs(field_.links[parents, cols] - 1.0)))
    if deviation > tol:
        raise PreconditionError(
            f"El campo no está en gauge maximal (desviación en el árbol {deviation:.3e})"
        )


@dataclass
class StabilizerReport:
    free_parameters: int
    tree_links: int
    spanning: bool
    description: str

    @property
    def forbids_time_dependence(self) -> bool:
        """Un gauge global no altera κ(s,n≠0): los enlaces son estrictamente estáticos."""
        return self.free_parameters == 1

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "free_parameters": self.free_parameters,
            "tree_links": self.tree_links,
            "spanning": self.spanning,
            "description": self.description,
            "forbids_time_dependence": self.forbids_time_dependence,
        }


def residual_gauge_stabilizer(fixed: HoppingField) -> StabilizerReport:
    """Gauges que preservan las condiciones del árbol: g(hijo) = g(padre) en cada arista.

    Como el árbol cubre todos los sitios, la propagación desde g(origen) determina g
    en todas partes y solo queda una fase global.
    """
    _require_fixed(fixed)
    lattice = fixed.lattice
    tree = nx.Graph()
    tree.add_nodes_from(range(lattice.n_sites))
    tree.add_edges_from((p, c) for p, _, c in _fixing_tree(lattice))
    components = nx.number_connected_components(tree)
    spanning = nx.is_tree(tree)
    description = "global phase" if components == 1 else f"{components} independent phases"
    return StabilizerReport(components, tree.number_of_edges(), spanning, description)


def time_shift_stabilizer(fixed: HoppingField) -> bool:
    """Un desplazamiento temporal módulo gauge conserva el árbol en todo t ⇒ gauge global."""
    return residual_gauge_stabilizer(fixed).forbids_time_dependence


@dataclass
class StabilizerSearch:
    n_phases: int
    n_candidates: int
    n_solutions: int
    all_constant: bool


def stabilizer_search(
    fixed: HoppingField, n_phases: int = 4, max_candidates: int = 1 << 20
) -> StabilizerSearch:
    """Búsqueda exhaustiva de gauges con fases 2πm/n que preservan el árbol (redes chicas)."""
    _require_fixed(fixed)
    n_sites = fixed.lattice.n_sites
    count = n_phases**n_sites
    if count > max_candidates:
        raise PreconditionError(
            f"{count} candidatos exceden el límite {max_candidates}; usar una red más chica"
        )
    digits = (np.arange(count)[:, None] // n_phases ** np.arange(n_sites)) % n_phases
    keep = np.ones(count, dtype=bool)
    for parent, _, child in _fixing_tree(fixed.lattice):
        keep &= (digits[:, child] - digits[:, parent]) % n_phases == 0
    solutions = digits[keep]
    all_constant = bool(np.all(solutions == solutions[:, :1]))
    return StabilizerSearch(n_phases, count, int(keep.sum()), all_constant)


# ──────────────────────────────────────────────
# Clasificación
# ──────────────────────────────────────────────


@dataclass
class SolutionClass:
    alpha: float
    beta: float
    gamma: float
    representative: HoppingField
    members: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def kind(self) -> str:
        phases = np.exp(1j * np.array([self.alpha, self.beta, self.gamma]))
        if np.allclose(phases, 1.0):
            return "scalar"
        if np.allclose(phases, -1.0):
            return "staggered"
        return "other"

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "members": [list(m) for m in self.members],
        }


def candidate_field(lattice: LatticeSpec, alpha: float, beta: float, gamma: float) -> HoppingField:
    """κ(+x)=1, κ(+y)=e^{iαx}, κ(+z)=e^{i(βx+γy)}; las direcciones negativas por hermiticidad."""
    x, y = lattice.coords[:, 0], lattice.coords[:, 1]
    plus = [
        np.ones(lattice.n_sites, dtype=complex),
        np.exp(1j * alpha * x),
        np.exp(1j * (beta * x + gamma * y)),
    ]
    links = links_from_positive(lattice, plus)
    return HoppingField(lattice, links, np.zeros(lattice.n_sites), f"candidate({alpha:.4f},{beta:.4f},{gamma:.4f})")


def check_candidate(
    lattice: LatticeSpec,
    alpha: float,
    beta: float,
    gamma: float,
    generators: Sequence[SymmetryOp] | None = None,
) -> str | None:
    """Nombre del primer generador que no es simetría módulo gauge, o None."""
    field_ = candidate_field(lattice, alpha, beta, gamma)
    for op in generators or default_generators():
        if not verify_symmetry_mod_gauge(field_, op).equivalent:
            return op.label()
    return None


def _candidate_phases(lattice: LatticeSpec) -> list[tuple[float, float, float]]:
    lx, ly, _ = lattice.dims
    return [
        (2 * np.pi * a / lx, 2 * np.pi * b / lx, 2 * np.pi * c / ly)
        for a in range(lx)
        for b in range(lx)
        for c in range(ly)
    ]


def classify_symmetric_configs(
    lattice: LatticeSpec,
    generators: Sequence[SymmetryOp] | None = None,
    threads: int = 1,
) -> list[SolutionClass]:
    """Filtra el ansatz (α, β, γ) por los generadores y agrupa en clases de gauge."""
    lattice.require_even("classify_symmetric_configs")
    ops = list(generators or default_generators())
    for op in ops:
        op.check_compatible(lattice)

    t0 = time.perf_counter()
    candidates = _candidate_phases(lattice)

    def _survives(phases: tuple[float, float, float]) -> bool:
        return check_candidate(lattice, *phases, generators=ops) is None

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        verdicts = list(executor.map(_survives, candidates))
    survivors = sorted(p for p, ok in zip(candidates, verdicts) if ok)

    classes: list[SolutionClass] = []
    for phases in survivors:
        field_ = candidate_field(lattice, *phases)
        for cls in classes:
            if find_gauge_equivalence(cls.representative, field_).equivalent:
                cls.members.append(phases)
                break
        else:
            classes.append(SolutionClass(*phases, representative=field_, members=[phases]))

    logger.info(
        "Clasificación %s: %d candidatos, %d sobreviven, %d clases (%.2f s)",
        lattice.dims, len(candidates), len(survivors), len(classes), time.perf_counter() - t0,
    )
    return classes


@dataclass
class GenericSearchResult:
    n_phases: int
    n_candidates: int
    n_free_links: int
    survivors: list[HoppingField]

    @property
    def n_classes(self) -> int:
        # Cada órbita de gauge tiene un único representante con el árbol en 1
        return len(self.survivors)


def _prime_power(n: int) -> tuple[int, int] | None:
    """(p, k) con n = p^k, o None si n no es potencia de un primo."""
    if n < 2:
        return None
    p = next(d for d in range(2, n + 1) if n % d == 0)
    k, rest = 0, n
    while rest % p == 0:
        rest //= p
        k += 1
    return (p, k) if rest == 1 else None


def _solve_mod_prime(a: np.ndarray, b: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray] | None:
    """Resuelve a·y ≡ b (mod p) por eliminación de Gauss-Jordan.

    Devuelve (particular, base del núcleo) o None si el sistema es inconsistente.
    """
    rows, cols = a.shape
    aug = np.concatenate([a % p, (b % p)[:, None]], axis=1).astype(np.int64)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nonzero = np.flatnonzero(aug[r:, c])
        if nonzero.size == 0:
            continue
        i = r + int(nonzero[0])
        aug[[r, i]] = aug[[i, r]]
        aug[r] = aug[r] * pow(int(aug[r, c]), -1, p) % p
        factor = aug[:, c].copy()
        factor[r] = 0
        aug = (aug - factor[:, None] * aug[r]) % p
        pivots.append(c)
        r += 1
    if np.any(aug[r:, -1]):
        return None

    particular = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        particular[c] = aug[i, -1]
    free_cols = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free_cols), cols), dtype=np.int64)
    for j, f in enumerate(free_cols):
        basis[j, f] = 1
        for i, c in enumerate(pivots):
            basis[j, c] = (-aug[i, f]) % p
    return particular, basis


def _kernel_mod_prime_power(matrix: np.ndarray, p: int, k: int, limit: int) -> list[np.ndarray]:
    """Todas las x en [0, p^k)^F con matrix·x ≡ 0 (mod p^k), levantando de p^j a p^(j+1)."""
    cols = matrix.shape[1]
    solutions = [np.zeros(cols, dtype=np.int64)]
    q = 1
    for _ in range(k):
        lifted: list[np.ndarray] = []
        for x0 in solutions:
            # matrix·x0 ≡ 0 (mod q): basta resolver matrix·y ≡ -(matrix·x0)/q (mod p)
            solved = _solve_mod_prime(matrix, -((matrix @ x0) // q), p)
            if solved is None:
                continue
            particular, basis = solved
            for coeffs in itertools.product(range(p), repeat=len(basis)):
                y = (particular + np.asarray(coeffs, dtype=np.int64) @ basis) % p
                lifted.append(x0 + q * y)
                if len(lifted) > limit:
                    raise PreconditionError(
                        f"Más de {limit} soluciones módulo {q * p}: el núcleo es demasiado grande"
                    )
        solutions = lifted
        q *= p
    return solutions


def _symmetry_system(
    lattice: LatticeSpec,
    ops: Sequence[SymmetryOp],
    tree: tuple[TreeEdge, ...],
    free: list[tuple[int, int]],
) -> tuple[np.ndarray, np.ndarray]:
    """Matrices enteras (embed, restricciones) sobre los enlaces libres.

    embed lleva las fases libres al array aplanado m[s·6+d] (dirección negativa
    incluida). Las restricciones son las holonomías rectas y, por generador,
    canon(S·m) - m; el fijado maximal y la transformación son lineales en m.
    """
    nbr = lattice.neighbor_table
    n_sites = lattice.n_sites
    size = n_sites * 6

    embed = np.zeros((size, len(free)), dtype=np.int64)
    for f, (s, d) in enumerate(free):
        embed[s * 6 + d, f] += 1
        embed[nbr[s, d] * 6 + OPPOSITE[d], f] -= 1

    holonomy_rows = []
    for axis in range(3):
        length = lattice.dims[axis]
        starts = lattice.coords[lattice.coords[:, axis] == 0]
        step = np.zeros(3, dtype=np.int64)
        step[axis] = 1
        rows = lattice.indices(starts[:, None, :] + np.arange(length)[None, :, None] * step)
        for row in rows:
            line = np.zeros(size, dtype=np.int64)
            line[row * 6 + 2 * axis] = 1
            holonomy_rows.append(line)

    theta = np.zeros((n_sites, size), dtype=np.int64)
    for parent, d, child in tree:
        theta[child] = theta[parent]
        theta[child, parent * 6 + d] -= 1
    eye = np.eye(size, dtype=np.int64)
    canon = eye + (theta[nbr] - theta[:, None, :]).reshape(size, size)

    blocks = [np.array(holonomy_rows) @ embed]
    for op in ops:
        inv = op.inverse()
        src = inv.site_permutation(lattice)
        dmap = inv.direction_permutation()
        transform = eye[(src[:, None] * 6 + dmap[None, :]).ravel()]
        blocks.append((canon @ transform - eye) @ embed)
    return embed, np.vstack(blocks)


def generic_symmetric_search(
    lattice: LatticeSpec,
    n_phases: int = 8,
    generators: Sequence[SymmetryOp] | None = None,
    max_candidates: int = 1 << 16,
) -> GenericSearchResult:
    """Oráculo sin ansatz: todos los campos Z_n en gauge maximal con holonomías rectas triviales.

    Un candidato sobrevive si, para cada generador, el campo transformado vuelve a
    fijarse exactamente sobre sí mismo. Esa condición es lineal módulo n, así que
    en vez de recorrer las n^F asignaciones se resuelve el núcleo del sistema
    (n = p^k) y solo se enumeran sus elementos; max_candidates acota ese recuento.
    """
    lattice.require_even("generic_symmetric_search")
    factored = _prime_power(n_phases)
    if factored is None:
        raise PreconditionError(f"Z_{n_phases}: n debe ser potencia de un primo")
    p, k = factored
    ops = list(generators or default_generators())
    tree = _fixing_tree(lattice)
    n_sites = lattice.n_sites

    on_tree = {(parent, d) for parent, d, _ in tree}
    free = [(s, d) for s in range(n_sites) for d in (0, 2, 4) if (s, d) not in on_tree]
    embed, constraints = _symmetry_system(lattice, ops, tree, free)
    logger.debug(
        "Oráculo genérico %s: %d enlaces libres, %d restricciones, Z_%d",
        lattice.dims, len(free), len(constraints), n_phases,
    )

    solutions = _kernel_mod_prime_power(constraints % n_phases, p, k, max_candidates)
    solutions.sort(key=lambda x: tuple(x.tolist()))
    survivors = [
        HoppingField(
            lattice,
            np.exp(2j * np.pi * ((embed @ x) % n_phases).reshape(n_sites, 6) / n_phases),
            np.zeros(n_sites),
            "generic",
        )
        for x in solutions
    ]
    logger.info(
        "Oráculo genérico %s sobre Z_%d: %d clases", lattice.dims, n_phases, len(survivors)
    )
    return GenericSearchResult(n_phases, n_phases ** len(free), len(free), survivors)


# ──────────────────────────────────────────────
# Término on-site
# ──────────────────────────────────────────────


@dataclass
class OnsiteReport:
    symmetric: bool
    constant: float | None
    links_symmetric: dict[str, bool]
    witnesses: list[tuple[str, Site]] = field(default_factory=list)

    @property
    def removable(self) -> bool:
        return self.symmetric and self.constant is not None

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "symmetric": self.symmetric,
            "constant": self.constant,
            "removable": self.removable,
            "links_symmetric": self.links_symmetric,
            "witnesses": [{"generator": g, "site": list(s)} for g, s in self.witnesses],
        }


def classify_onsite(
    field_: HoppingField,
    generators: Sequence[SymmetryOp] | None = None,
    tol: float = EQUIVALENCE_TOL,
    max_witnesses: int = 5,
) -> OnsiteReport:
    """En el toro el término lineal s·c no es periódico: lo permitido es onsite estrictamente invariante."""
    lattice = field_.lattice
    ops = list(generators or default_generators())
    witnesses: list[tuple[str, Site]] = []
    links_symmetric: dict[str, bool] = {}
    for op in ops:
        links_symmetric[op.label()] = verify_symmetry_mod_gauge(
            field_, op, tol, compare_onsite=False
        ).equivalent
        src = op.inverse().site_permutation(lattice)
        diff = np.abs(field_.onsite[src] - field_.onsite)
        for i in np.flatnonzero(diff > tol)[: max_witnesses - len(witnesses)]:
            witnesses.append((op.label(), lattice.site(int(i))))

    symmetric = not witnesses
    spread = float(np.max(np.abs(field_.onsite - field_.onsite[0])))
    constant = float(field_.onsite[0].real) if symmetric and spread <= tol else None
    return OnsiteReport(symmetric, constant, links_symmetric, witnesses)


@dataclass(frozen=True)
class GlobalPhasePrescription:
    """g(t) = exp(-i·c·t), que satisface ġ = -i·c·g y anula un on-site constante c."""

    c: float

    def phase(self, t: float) -> complex:
        return complex(np.exp(-1j * self.c * t))

    def generator_residual(self, t: float, h: float = 1e-6) -> float:
        """|κ(s,0) - i ġ g⁻¹| con derivada por diferencia central; debe anularse."""
        g_dot = (self.phase(t + h) - self.phase(t - h)) / (2 * h)
        return abs(self.c - 1j * g_dot / self.phase(t))

    def describe(self) -> str:
        return "identity" if self.c == 0 else f"g(t) = exp(-i*{self.c!r}*t)"


def gauge_away_onsite(
    field_: HoppingField, tol: float = EQUIVALENCE_TOL
) -> tuple[HoppingField, GlobalPhasePrescription]:
    onsite = field_.onsite
    if float(np.max(np.abs(onsite - onsite[0]))) > tol or abs(onsite[0].imag) > tol:
        raise PreconditionError("Solo un on-site constante y real puede eliminarse con un gauge global")
    c = float(onsite[0].real)
    cleaned = field_.replace(onsite=np.zeros(field_.lattice.n_sites))
    return cleaned, GlobalPhasePrescription(c)
