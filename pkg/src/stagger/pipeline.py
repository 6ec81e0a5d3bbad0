"""
pipeline.py – Orquestación de experimentos.

Construye la red y el campo de saltos a partir de la configuración y despacha
al experimento pedido. Cada experimento devuelve un ExperimentResult; los
chequeos numéricos que fallan levantan NumericalError con el invariante.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable

import numpy as np

from .config import RunConfig
from .errors import NumericalError, PreconditionError
from .gauge_solver import (
    classify_onsite,
    classify_symmetric_configs,
    find_gauge_equivalence,
    gauge_away_onsite,
    maximal_gauge_fix,
    residual_gauge_stabilizer,
    verify_symmetry_mod_gauge,
)
from .hopping import (
    HoppingField,
    add_alternating_mass,
    add_susskind_mass,
    holonomy_signature,
    make_dirac_gauge,
    make_scalar,
    make_staggered,
)
from .lattice import LatticeSpec, generator
from .results import ExperimentResult
from .spectral import (
    DENSE_LIMIT,
    WaveFunction,
    bloch_bands,
    build_hamiltonian,
    chiral_residual,
    gaussian_packet,
    is_chirally_paired,
    spectrum_dense,
    staticity_experiment,
    trajectory,
)
from .spinor import (
    doubling_report,
    infer_dirac_operator,
    parity_check,
    project_components,
    verify_equivalence,
)

logger = logging.getLogger(__name__)

EQUIVALENCE_TOL = 1e-10
SPECTRUM_TOL = 1e-9
PARITY_TOL = 1e-12

MODEL_BUILDERS: dict[str, Callable[[LatticeSpec], HoppingField]] = {
    "scalar": make_scalar,
    "staggered": make_staggered,
    "dirac-gauge": make_dirac_gauge,
}


class ExperimentPipeline:
    """Pipeline de una corrida: load() arma el campo, run() ejecuta el experimento."""

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.lattice: LatticeSpec | None = None
        self.field: HoppingField | None = None

    # ──────────────────────────────────────────
    # Carga
    # ──────────────────────────────────────────

    def load(self) -> None:
        logger.info("═══ Preparando corrida %s ═══", self.config.experiment.name)
        self.lattice = LatticeSpec(tuple(self.config.lattice.dims))

        model = self.config.model
        field_ = MODEL_BUILDERS[model.kind](self.lattice)
        if model.mass == "susskind":
            field_ = add_susskind_mass(field_, model.mu)
        elif model.mass == "alternating":
            field_ = add_alternating_mass(field_, model.mu)
        self.field = field_
        logger.info(
            "Campo %s sobre %s (N=%d) ✓", field_.label, self.lattice.dims, self.lattice.n_sites
        )

    # ──────────────────────────────────────────
    # Run
    # ──────────────────────────────────────────

    def run(self) -> ExperimentResult:
        if self.field is None:
            self.load()
        name = self.config.experiment.name
        handler = getattr(self, "_run_" + name.replace("-", "_"))
        t0 = time.perf_counter()
        result = handler()
        logger.info("═══ %s terminado en %.2f s ═══", name, time.perf_counter() - t0)
        return result

    def _run_spectrum(self) -> ExperimentResult:
        ham = build_hamiltonian(self.field)
        evals = spectrum_dense(ham)
        rows = [{"index": i, "energy": e} for i, e in enumerate(evals)]
        summary = {
            "n_eigenvalues": len(evals),
            "min": evals[0],
            "max": evals[-1],
            "gershgorin_bound": ham.gershgorin_bound(),
            "chiral_residual": chiral_residual(ham),
            "chirally_paired": is_chirally_paired(evals),
        }
        return ExperimentResult("spectrum", rows, summary)

    def _run_bands(self) -> ExperimentResult:
        bloch = bloch_bands(self.field)
        summary = {"n_k_points": len(bloch.k_points), "min_abs_energy": bloch.min_abs_energy()}
        if self.lattice.n_sites <= DENSE_LIMIT:
            dense = spectrum_dense(build_hamiltonian(self.field))
            mismatch = float(np.max(np.abs(dense - bloch.union())))
            if mismatch > SPECTRUM_TOL:
                raise NumericalError("bloch-union", f"Bandas vs espectro denso difieren en {mismatch:.3e}")
            summary["dense_mismatch"] = mismatch
        return ExperimentResult("bands", list(bloch.rows()), summary)

    def _run_evolve(self) -> ExperimentResult:
        exp = self.config.experiment
        dims = self.lattice.dims
        axes = tuple(i for i, length in enumerate(dims) if length >= 4 * exp.width)
        if not axes:
            raise PreconditionError(f"Ningún eje admite un paquete de ancho {exp.width} en {dims}")
        center = exp.center or [d // 2 for d in dims]
        psi0 = gaussian_packet(self.lattice, center, exp.width, exp.k0, axes=axes)
        ham = build_hamiltonian(self.field)
        times = np.linspace(0.0, exp.t, exp.steps + 1)
        points = trajectory(ham, psi0, times, exp.method)

        energies = np.array([p.energy for p in points])
        drift = float(np.max(energies) - np.min(energies))
        if drift > SPECTRUM_TOL * max(1.0, float(np.max(np.abs(energies)))):
            raise NumericalError("energy-conservation", f"⟨H⟩ varía {drift:.3e} durante la evolución")
        summary = {"localized_axes": list(axes), "energy": energies[0], "energy_drift": drift}
        return ExperimentResult("evolve", [p.to_row() for p in points], summary)

    def _run_verify_symmetry(self) -> ExperimentResult:
        op = generator(self.config.experiment.symmetry)
        result = verify_symmetry_mod_gauge(self.field, op)
        summary = {"symmetry": op.label(), **result.to_json_dict()}
        return ExperimentResult("verify-symmetry", [], summary)

    def _run_classify(self) -> ExperimentResult:
        exp = self.config.experiment
        ops = [generator(name) for name in exp.generators]
        classes = classify_symmetric_configs(self.lattice, ops, self.config.runtime.threads)
        references = {"scalar": make_scalar(self.lattice), "staggered": make_staggered(self.lattice)}
        described = []
        for cls in classes:
            entry = cls.to_json_dict()
            for ref_name, ref in references.items():
                check = find_gauge_equivalence(cls.representative, ref)
                if check.equivalent:
                    entry["equivalent_to"] = ref_name
                    entry["residual"] = check.max_residual
            described.append(entry)
        summary = {"n_classes": len(classes), "classes": described}
        return ExperimentResult("classify", [], summary)

    def _run_gauge_fix(self) -> ExperimentResult:
        fixed, _ = maximal_gauge_fix(self.field)
        stabilizer = residual_gauge_stabilizer(fixed)
        holonomy_shift = float(
            np.max(np.abs(holonomy_signature(fixed) - holonomy_signature(self.field)))
        )
        if holonomy_shift > EQUIVALENCE_TOL:
            raise NumericalError("holonomy-invariance", f"Holonomías cambian {holonomy_shift:.3e}")
        ops = [generator(name) for name in self.config.experiment.generators]
        onsite = classify_onsite(self.field, ops)
        summary = {
            "stabilizer": stabilizer.to_json_dict(),
            "holonomy_shift": holonomy_shift,
            "onsite": onsite.to_json_dict(),
            "fixed_field": fixed.to_json_dict(),
        }
        if onsite.removable:
            _, prescription = gauge_away_onsite(self.field)
            summary["onsite_gauge"] = prescription.describe()
        return ExperimentResult("gauge-fix", [], summary)

    def _run_staticity(self) -> ExperimentResult:
        exp = self.config.experiment
        result = staticity_experiment(self.lattice, exp.width, exp.k0[0], exp.method)
        return ExperimentResult("staticity", [], result.to_json_dict())

    def _run_spinor_check(self) -> ExperimentResult:
        exp = self.config.experiment
        operator = infer_dirac_operator(self.field)
        if exp.sectors is not None and exp.sectors != operator.n_sectors:
            raise PreconditionError(
                f"El campo {self.field.label} requiere {operator.n_sectors} sectores, no {exp.sectors}"
            )
        algebra = operator.dirac_algebra_residual()
        if algebra > 0:
            raise NumericalError("dirac-algebra", f"Residuo del álgebra {algebra:.3e}")

        rng = np.random.default_rng(exp.seed)
        rows = []
        for sample in range(exp.samples):
            psi = WaveFunction.random(self.lattice, rng)
            components = project_components(psi, operator.n_sectors)
            rows.append({
                "sample": sample,
                "residual": verify_equivalence(self.field, psi, operator),
                "parseval_error": abs(components.total_norm_squared() - psi.norm() ** 2),
            })
        worst = max(row["residual"] for row in rows)
        if worst > EQUIVALENCE_TOL:
            raise NumericalError("operator-equivalence", f"Residuo máximo {worst:.3e}")

        summary = {
            "sectors": operator.n_sectors,
            "mass": operator.mass,
            "mu": operator.mu,
            "max_residual": worst,
            "dirac_algebra_residual": algebra,
        }
        if self.lattice.n_sites <= DENSE_LIMIT:
            zone = operator.reduced_zone_spectrum(self.lattice)
            summary["zone_vs_bloch"] = float(np.max(np.abs(zone - bloch_bands(self.field).union())))
        if operator.mass == "alternating":
            summary["doubling"] = doubling_report(operator.mu, self.lattice).to_json_dict()
        return ExperimentResult("spinor-check", rows, summary)

    def _run_parity(self) -> ExperimentResult:
        residual = parity_check(self.field)
        if residual > PARITY_TOL:
            raise NumericalError("parity-commutation", f"‖PHP⁻¹ - H‖ = {residual:.3e}")
        return ExperimentResult("parity", [], {"residual": residual})

