"""
Per-mode orchestration: thermal transient, thermoelastic stress at every
snapshot, stress birefringence along the light path, and one electrostatic
solve for the field angle and half-wave voltage. Modes are compared and the
electrode ratio searched on top of that.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, HalfWaveVoltageError, OVSError, SweepError
from .mesh.voxel_mesh import PathSamples, VoxelMesh, build_mesh, optical_path_samples
from .optics.birefringence import SectionBirefringence, make_section
from .optics.jones import birefringence_error, chain_matrix, chain_retardance
from .optics.transforms import build_transforms, delta_b_from_stress
from .scene.models import ElectrodeMode, Scene
from .scene.presets import family_mode
from .signal_analysis.bias import bias_correct
from .solvers.electrostatic_solver import (
    ElectrostaticSolver,
    FieldSummary,
    PotentialField,
    field_summary,
    half_wave_voltage,
)
from .solvers.mechanics_solver import MechanicsSolver, StressField, stress_along_path, von_mises_summary
from .solvers.thermal_solver import TemperatureHistory, ThermalSolver
from .utils.parallel import ParallelExecutor

logger = logging.getLogger("OVSPipeline")


@dataclass(frozen=True)
class CurvePoint:
    time: float
    crystal_t: float
    error: float


@dataclass(frozen=True)
class ModeResult:
    mode: ElectrodeMode
    mean_angle: float
    hwv: float
    curve: Tuple[CurvePoint, ...]
    total_error: float
    corrected_total: float

    @property
    def name(self) -> str:
        return self.mode.name

    @property
    def errors(self) -> np.ndarray:
        return np.array([point.error for point in self.curve])


@dataclass(eq=False)
class ModeArtifacts:
    """Intermediate fields of one mode run, kept for the CLI dumps"""

    scene: Scene
    mesh: VoxelMesh
    samples: PathSamples
    history: TemperatureHistory
    potential: PotentialField
    field_summary: FieldSummary
    path_stress: List[np.ndarray] = field(default_factory=list)
    sections: List[List[SectionBirefringence]] = field(default_factory=list)
    retardance: List[float] = field(default_factory=list)
    von_mises: List[Dict[str, Dict[str, float]]] = field(default_factory=list)
    stresses: List[StressField] = field(default_factory=list)


@dataclass(frozen=True)
class TracePoint:
    s: float
    name: str
    ratio_x: float
    ratio_y: float
    corrected_total: float


@dataclass(eq=False)
class SweepReport:
    results: Tuple[ModeResult, ...]
    ranking: Tuple[str, ...]
    trace: Tuple[TracePoint, ...] = ()
    failures: Dict[str, str] = field(default_factory=dict)

    @property
    def partial(self) -> bool:
        return bool(self.failures)

    def result(self, name: str) -> ModeResult:
        for result in self.results:
            if result.name == name:
                return result
        raise KeyError(name)

    @property
    def best(self) -> ModeResult:
        if not self.ranking:
            raise SweepError("no mode was evaluated", self)
        return self.result(self.ranking[0])


def total_error(errors: Sequence[float]) -> float:
    """Range of the error curve"""
    values = np.asarray(errors, dtype=float)
    return float(values.max() - values.min()) if values.size else 0.0


def _annotate(exc: Exception, name: str) -> Exception:
    if exc.args and str(exc.args[0]).startswith(f"{name}: "):
        return exc
    exc.args = (f"{name}: {exc}",)
    return exc


def _propagation_axis(scene: Scene) -> str:
    axis = scene.geometry.path.axis
    if axis is None:
        raise ConfigError("optical path must follow a coordinate axis", field="path.direction")
    return axis


class OVSPipeline:
    """Run thermal, mechanical, electrostatic and optical stages for electrode modes"""

    def __init__(
        self,
        threads: int = 1,
        constraint: str = "heater_base",
        exact_index: bool = False,
        keep_stress: bool = False,
    ):
        self.threads = max(1, int(threads))
        self.constraint = constraint
        self.exact_index = exact_index
        self.keep_stress = keep_stress

    def run_mode(
        self,
        scene: Scene,
        mode: Optional[ElectrodeMode] = None,
        stage_workers: Optional[int] = None,
    ) -> Tuple[ModeResult, ModeArtifacts]:
        """
        Evaluate one electrode mode and keep the intermediate fields

        Args:
            scene: base scene
            mode: electrode mode replacing the scene's own; None keeps it
            stage_workers: threads for the independent field and thermal stages (defaults to self.threads)

        Returns:
            (ModeResult, ModeArtifacts)
        """
        mode = mode or scene.electrode
        workers = self.threads if stage_workers is None else max(1, int(stage_workers))
        try:
            return self._run(scene.with_mode(mode), mode, workers)
        except OVSError as e:
            raise _annotate(e, mode.name)

    def evaluate_mode(
        self,
        scene: Scene,
        mode: Optional[ElectrodeMode] = None,
        stage_workers: Optional[int] = None,
    ) -> ModeResult:
        return self.run_mode(scene, mode, stage_workers)[0]

    def _electrostatics(
        self, mesh: VoxelMesh, samples: PathSamples, mode: ElectrodeMode, scene: Scene, axis: str
    ) -> Tuple[PotentialField, FieldSummary, float]:
        sim, optics = scene.sim, scene.optics
        potential = ElectrostaticSolver(mesh, optics, sim).solve(mode.applied_voltage)
        summary = field_summary(potential, samples)
        try:
            hwv = half_wave_voltage(mesh, mode, optics, samples, wavelength=scene.geometry.optical_wavelength,
                                    axis=axis, field=potential, params=sim)
        except HalfWaveVoltageError as e:
            logger.warning(f"{e}")
            hwv = math.inf
        logger.info(f"{mode.name}: field angle {summary.mean_angle:.2f} deg, HWV {hwv:.4g} V")
        return potential, summary, hwv

    def _run(self, scene: Scene, mode: ElectrodeMode, stage_workers: int = 1) -> Tuple[ModeResult, ModeArtifacts]:
        axis = _propagation_axis(scene)
        sim, optics = scene.sim, scene.optics
        wavelength = scene.geometry.optical_wavelength
        logger.info(f"Evaluating mode {mode.name}")

        mesh = build_mesh(scene)
        samples = optical_path_samples(mesh, scene)
        logger.info(f"{mode.name}: {mesh.n_elements} elements, {len(samples)} path sections")

        # The field and the transient only share the mesh.
        stages = ParallelExecutor(max_workers=min(2, stage_workers))
        stages.add_task("electrostatics", self._electrostatics, mesh, samples, mode, scene, axis)
        stages.add_task("thermal", ThermalSolver(mesh, scene.materials, sim).run)
        outcomes = stages.execute_parallel()
        failure = stages.first_failure()
        if failure is not None:
            raise failure
        potential, summary, hwv = outcomes["electrostatics"]
        history = outcomes["thermal"]
        crystal_t = history.region_mean(mesh.crystal_mask())

        mechanics = MechanicsSolver(mesh, scene.materials, sim, constraint=self.constraint)
        transforms = build_transforms(optics)
        artifacts = ModeArtifacts(scene=scene, mesh=mesh, samples=samples, history=history,
                                  potential=potential, field_summary=summary)
        curve = []
        for index, time in enumerate(history.times):
            temperatures = history.snapshot(index)
            displacement = mechanics.solve(temperatures, sim.reference_t)
            stress = mechanics.recover(displacement, temperatures, sim.reference_t)
            path_stress = np.array([values for _, values in stress_along_path(stress, samples)])
            delta_b = delta_b_from_stress(path_stress, transforms)
            sections = [
                make_section(db, float(length), wavelength, optics.base_index, axis=axis, exact=self.exact_index)
                for db, length in zip(delta_b, samples.lengths)
            ]
            error = birefringence_error(sections)
            curve.append(CurvePoint(time=float(time), crystal_t=float(crystal_t[index]), error=error))

            summary_vm = von_mises_summary(stress, mesh)
            artifacts.path_stress.append(path_stress)
            artifacts.sections.append(sections)
            artifacts.retardance.append(chain_retardance(chain_matrix(sections)))
            artifacts.von_mises.append(summary_vm)
            if self.keep_stress:
                artifacts.stresses.append(stress)
            crystal_vm = summary_vm.get(scene.crystal_material, {}).get("max", 0.0)
            logger.debug(f"{mode.name} t={time:g} s: error {error:.4e}, crystal Von Mises max {crystal_vm:.4g} Pa")

        total = total_error([point.error for point in curve])
        corrected = bias_correct(total, sim.t_total, scene.tau_ref)
        logger.info(f"{mode.name}: total error {total:.4e}, corrected {corrected:.4e}")
        result = ModeResult(
            mode=mode,
            mean_angle=summary.mean_angle,
            hwv=hwv,
            curve=tuple(curve),
            total_error=total,
            corrected_total=corrected,
        )
        return result, artifacts

    def compare_modes(self, scene: Scene, modes: Sequence[ElectrodeMode]) -> SweepReport:
        """
        Evaluate modes concurrently and rank them by corrected total error

        Raises:
            SweepError: carrying the partial report when any mode fails
        """
        if not modes:
            raise ConfigError("at least one mode is required", field="modes")
        names = [mode.name for mode in modes]
        if len(set(names)) != len(names):
            raise ConfigError("mode names must be unique", field="modes")

        executor = ParallelExecutor(max_workers=min(self.threads, len(modes)))
        stage_workers = max(1, self.threads // executor.max_workers)
        for mode in modes:
            executor.add_task(mode.name, self.evaluate_mode, scene, mode, stage_workers)
        logger.info(f"Started comparison of {len(modes)} modes on {executor.max_workers} thread(s)")
        outcomes = executor.execute_parallel()

        results = tuple(outcome for outcome in outcomes.values() if isinstance(outcome, ModeResult))
        failures = {name: outcome["error"] for name, outcome in outcomes.items() if not isinstance(outcome, ModeResult)}
        report = SweepReport(results=results, ranking=rank(results), failures=failures)
        if failures:
            first = sorted(failures)[0]
            raise SweepError(f"{len(failures)} of {len(modes)} modes failed; first: {failures[first]}", report)
        return report

    def optimize_ratio(
        self,
        scene: Scene,
        family: str,
        grid: Union[int, Sequence[float]] = 7,
    ) -> Tuple[ModeResult, SweepReport]:
        """
        Grid search along a family's built-in path for the smallest corrected total

        Args:
            scene: base scene
            family: "cu" or "ito"
            grid: number of evenly spaced positions on [0, 1], or explicit positions

        Returns:
            (best ModeResult, SweepReport with the optimizer trace)
        """
        positions = grid_positions(grid)
        candidates: Dict[str, Tuple[float, ElectrodeMode]] = {}
        for s in positions:
            mode = family_mode(family, s)
            candidates.setdefault(mode.name, (s, mode))
        report = self.compare_modes(scene, [mode for _, mode in candidates.values()])
        trace = tuple(
            TracePoint(s=s, name=name, ratio_x=mode.ratio_x, ratio_y=mode.ratio_y,
                       corrected_total=report.result(name).corrected_total)
            for name, (s, mode) in sorted(candidates.items(), key=lambda item: (item[1][0], item[0]))
        )
        report.trace = trace
        best = report.best
        logger.info(f"Best {family} mode over {len(trace)} positions: {best.name} ({best.corrected_total:.4e})")
        return best, report


def grid_positions(grid: Union[int, Sequence[float]]) -> List[float]:
    if isinstance(grid, (int, np.integer)):
        if grid < 1:
            raise ConfigError("grid must hold at least one point", field="grid")
        return [float(s) for s in np.linspace(0.0, 1.0, int(grid))]
    positions = [float(s) for s in grid]
    if not positions:
        raise ConfigError("grid must hold at least one point", field="grid")
    return positions


def rank(results: Sequence[ModeResult]) -> Tuple[str, ...]:
    """Names ordered by corrected total, ties broken by name"""
    return tuple(result.name for result in sorted(results, key=lambda r: (r.corrected_total, r.name)))


def evaluate_mode(scene: Scene, mode: Optional[ElectrodeMode] = None) -> ModeResult:
    return OVSPipeline().evaluate_mode(scene, mode)


def compare_modes(scene: Scene, modes: Sequence[ElectrodeMode], threads: int = 1) -> SweepReport:
    return OVSPipeline(threads=threads).compare_modes(scene, modes)


def optimize_ratio(scene: Scene, family: str, grid: Union[int, Sequence[float]] = 7,
                   threads: int = 1) -> Tuple[ModeResult, SweepReport]:
    return OVSPipeline(threads=threads).optimize_ratio(scene, family, grid)
