import argparse
import logging
import math
import sys
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, HalfWaveVoltageError, OVSError, SweepError
from .mesh.voxel_mesh import build_mesh, optical_path_samples
from .optics.birefringence import SectionBirefringence
from .pipeline import ModeArtifacts, ModeResult, OVSPipeline, SweepReport
from .scene.models import ElectrodeMode, Scene
from .scene.parser import config_hash
from .scene.presets import BUILTIN_MODES, builtin_mode
from .signal_analysis.waveform import fit_drift
from .solvers.electrostatic_solver import ElectrostaticSolver, field_summary, half_wave_voltage
from .solvers.mechanics_solver import VOIGT_LABELS
from .tools.file_tools import FileTools, read_trace
from .utils.config import config
from .utils.run_manifest import RunManifest
from .validators.scene_validator import validate

logger = logging.getLogger("OVSBirefringence")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Configure the root logger once; progress goes to stderr"""
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    else:
        level = getattr(logging, config.log_level, logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=[logging.StreamHandler(sys.stderr)], force=True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scene document; the built-in preset is used when omitted")
    common.add_argument("--out", default=None, help=f"output directory (default {config.out_dir})")
    common.add_argument("--threads", type=int, default=None, help=f"threads shared by mode workers and the field and thermal stages (default {config.threads})")
    common.add_argument("--resolution", type=float, default=None, help="mesh resolution in mm")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")

    parser = argparse.ArgumentParser(
        prog="ovs-birefringence",
        description="Thermal-stress birefringence simulation for optical voltage sensors",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", parents=[common], help="error-vs-temperature curve of one mode")
    simulate.add_argument("--mode", default=None, help="built-in mode, e.g. cu_10_0 or 'Cu 5:4'")
    simulate.add_argument("--dump-stress", action="store_true", help="crystal stress CSV per snapshot")
    simulate.add_argument("--dump-temps", action="store_true", help="nodal temperature CSV per snapshot plus a summary")
    simulate.add_argument("--dump-field", action="store_true", help="element field CSV plus the field along the path")
    simulate.add_argument("--dump-sections", action="store_true", help="path sections per snapshot")

    sweep = commands.add_parser("sweep", parents=[common], help="compare modes or search an electrode family")
    sweep.add_argument("--modes", default="all", help="comma-separated built-in modes, or 'all'")
    sweep.add_argument("--optimize", choices=("cu", "ito"), default=None, help="search a family's ratio path")
    sweep.add_argument("--grid", type=int, default=7, help="grid points for --optimize")

    field = commands.add_parser("field", parents=[common], help="electric field angle and half-wave voltage")
    field.add_argument("--mode", default=None)

    fit = commands.add_parser("fit", parents=[common], help="drift fit of a measured or synthetic trace")
    fit.add_argument("trace", help="CSV of time, intensity")
    fit.add_argument("--freq", type=float, default=None, help="drive frequency in Hz (default from [signal])")

    export = commands.add_parser("export-mesh", parents=[common], help="write the voxel mesh as legacy VTK")
    export.add_argument("--mode", default=None)
    export.add_argument("--electrodes", action="store_true", help="add the electrode terminal cell scalar")
    return parser


class CommandRunner:
    """Executes one subcommand and records it in the run manifest"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.files = FileTools(args.out or config.out_dir)
        self.threads = args.threads or config.threads
        flags = {key: value for key, value in sorted(vars(args).items()) if key != "command"}
        self.manifest = RunManifest(args.command, flags, __version__)

    def load_scene(self, mode: Optional[str] = None) -> Scene:
        resolution = None if self.args.resolution is None else self.args.resolution * 1e-3
        with self.manifest.stage("load"):
            scene = config.load_scene(self.args.config, mode=mode, resolution=resolution)
            self.check(scene)
            self.manifest.config_hash = config_hash(scene)
        return scene

    def check(self, scene: Scene) -> None:
        diagnostics = validate(scene)
        if diagnostics:
            for message in diagnostics:
                logger.error(f"{scene.electrode.name}: {message}")
            raise ConfigError(f"scene is not valid: {diagnostics[0]}")

    def csv(self, filename: str, header: Sequence[str], rows) -> None:
        self.manifest.add_output(self.files.write_csv(filename, header, rows, self.manifest.config_hash))

    def run(self) -> int:
        handlers: Dict[str, Callable[[], None]] = {
            "simulate": self.cmd_simulate,
            "sweep": self.cmd_sweep,
            "field": self.cmd_field,
            "fit": self.cmd_fit,
            "export-mesh": self.cmd_export_mesh,
        }
        status = EXIT_OK
        try:
            handlers[self.args.command]()
            self.manifest.finish()
        except (ConfigError, FileNotFoundError) as e:
            logger.error(f"Configuration error: {e}")
            self.manifest.finish(str(e))
            status = EXIT_CONFIG
        except OVSError as e:
            logger.error(f"Simulation failed: {e}")
            self.manifest.finish(str(e))
            status = EXIT_SOLVER
        try:
            self.files.save_manifest(self.manifest.to_dict())
        except OSError as e:
            logger.error(f"Could not write manifest: {e}")
        return status

    # simulate

    def cmd_simulate(self) -> None:
        scene = self.load_scene(self.args.mode)
        pipeline = OVSPipeline(threads=self.threads, keep_stress=self.args.dump_stress)
        with self.manifest.stage("evaluate"):
            result, artifacts = pipeline.run_mode(scene)
        with self.manifest.stage("write"):
            slug = result.mode.slug
            self.write_curve(result)
            if self.args.dump_temps:
                self.write_temps(slug, artifacts)
            if self.args.dump_field:
                self.write_field(slug, artifacts)
            if self.args.dump_sections:
                self.write_sections(slug, artifacts)
            if self.args.dump_stress:
                self.write_stress(slug, artifacts)
        logger.info(f"{result.name}: total error {result.total_error:.4e}, HWV {result.hwv:.4g} V")

    def write_curve(self, result: ModeResult) -> None:
        rows = [(p.time, p.crystal_t, p.error) for p in result.curve]
        self.csv(f"curve_{result.mode.slug}.csv", ("time", "crystal_t", "error"), rows)

    def write_temps(self, slug: str, artifacts: ModeArtifacts) -> None:
        history = artifacts.history
        coords = artifacts.mesh.node_coords
        for index in range(len(history)):
            nodal = history.snapshot(index)
            rows = [(node, *map(float, coords[node]), float(nodal[node])) for node in range(coords.shape[0])]
            self.csv(f"temps_{slug}_{index:03d}.csv", ("node", "x", "y", "z", "t"), rows)
        crystal = history.region_mean(artifacts.mesh.crystal_mask())
        rows = [
            (float(t), float(crystal[i]), float(history.snapshot(i).min()), float(history.snapshot(i).max()))
            for i, t in enumerate(history.times)
        ]
        self.csv(f"temps_summary_{slug}.csv", ("time", "crystal_mean_t", "min_t", "max_t"), rows)

    def write_field(self, slug: str, artifacts: ModeArtifacts) -> None:
        field = artifacts.potential.field
        magnitude = np.linalg.norm(field, axis=1)
        centroids = artifacts.mesh.element_centroids
        rows = [(e, *map(float, centroids[e]), *map(float, field[e]), float(magnitude[e]))
                for e in range(field.shape[0])]
        self.csv(f"field_{slug}.csv", ("element", "x", "y", "z", "ex", "ey", "ez", "magnitude"), rows)
        summary = artifacts.field_summary
        rows = [(i, float(length), *map(float, e)) for i, (e, length) in
                enumerate(zip(summary.section_fields, summary.lengths))]
        self.csv(f"field_sections_{slug}.csv", ("section", "length", "ex", "ey", "ez"), rows)

    def write_sections(self, slug: str, artifacts: ModeArtifacts) -> None:
        rows = []
        for time, sections, retardance in zip(artifacts.history.times, artifacts.sections, artifacts.retardance):
            for index, section in enumerate(sections):
                rows.append(section_row(float(time), index, section, retardance))
        header = ("time", "section", "length", "delta_n", "theta", "slow_axis", "delta_m", "chain_retardance")
        self.csv(f"sections_{slug}.csv", header, rows)

    def write_stress(self, slug: str, artifacts: ModeArtifacts) -> None:
        mesh = artifacts.mesh
        crystal = np.nonzero(mesh.crystal_mask())[0]
        centroids = mesh.element_centroids
        for index, stress in enumerate(artifacts.stresses):
            vm = stress.von_mises
            rows = [(int(e), *map(float, centroids[e]), *map(float, stress.stress[e]), float(vm[e])) for e in crystal]
            header = ("element", "x", "y", "z") + VOIGT_LABELS + ("von_mises",)
            self.csv(f"stress_{slug}_{index:03d}.csv", header, rows)

    # sweep

    def selected_modes(self) -> List[ElectrodeMode]:
        selection = self.args.modes.strip()
        if selection.lower() == "all":
            return list(BUILTIN_MODES.values())
        return [builtin_mode(name) for name in selection.split(",") if name.strip()]

    def cmd_sweep(self) -> None:
        scene = self.load_scene()
        pipeline = OVSPipeline(threads=self.threads)
        if not self.args.optimize:
            modes = self.selected_modes()
            for mode in modes:
                self.check(scene.with_mode(mode))
        try:
            with self.manifest.stage("evaluate"):
                if self.args.optimize:
                    _, report = pipeline.optimize_ratio(scene, self.args.optimize, self.args.grid)
                else:
                    report = pipeline.compare_modes(scene, modes)
        except SweepError as e:
            if e.report is not None and e.report.results:
                self.write_report(e.report)
            raise
        with self.manifest.stage("write"):
            self.write_report(report)

    def write_report(self, report: SweepReport) -> None:
        positions = {name: index + 1 for index, name in enumerate(report.ranking)}
        rows = [
            (r.name, r.mean_angle, r.hwv, r.total_error, r.corrected_total, positions[r.name])
            for r in sorted(report.results, key=lambda r: r.name)
        ]
        self.csv("report.csv", ("mode", "angle", "hwv", "total", "corrected_total", "rank"), rows)
        for result in report.results:
            self.write_curve(result)
        if report.trace:
            rows = [(p.s, p.name, p.ratio_x, p.ratio_y, p.corrected_total) for p in report.trace]
            self.csv("optimize_trace.csv", ("s", "mode", "ratio_x", "ratio_y", "corrected_total"), rows)

    # field

    def cmd_field(self) -> None:
        scene = self.load_scene(self.args.mode)
        mode = scene.electrode
        with self.manifest.stage("electrostatics"):
            mesh = build_mesh(scene)
            samples = optical_path_samples(mesh, scene)
            potential = ElectrostaticSolver(mesh, scene.optics, scene.sim).solve(mode.applied_voltage)
            summary = field_summary(potential, samples)
            try:
                hwv = half_wave_voltage(mesh, mode, scene.optics, samples,
                                        wavelength=scene.geometry.optical_wavelength,
                                        axis=scene.geometry.path.axis, field=potential, params=scene.sim)
            except HalfWaveVoltageError as e:
                logger.warning(f"{e}")
                hwv = math.inf
        with self.manifest.stage("write"):
            row = (mode.name, summary.mean_angle, *map(float, summary.mean_field), summary.mean_magnitude, hwv)
            self.csv("field_summary.csv", ("mode", "mean_angle", "ex", "ey", "ez", "mean_magnitude", "hwv"), [row])
        logger.info(f"{mode.name}: mean field angle {summary.mean_angle:.2f} deg")

    # fit

    def cmd_fit(self) -> None:
        scene = self.load_scene()
        frequency = self.args.freq or scene.signal.drive_frequency
        with self.manifest.stage("fit"):
            waveform = read_trace(self.args.trace)
            fit = fit_drift(waveform, frequency)
        with self.manifest.stage("write"):
            header = ("i_ac", "phi", "a", "b", "c", "residual_rms", "mean_dc", "birefringence_error")
            row = (fit.amplitude, fit.phase, fit.a, fit.b, fit.c, fit.residual_rms, fit.mean_dc,
                   fit.birefringence_error)
            self.csv("fit_report.csv", header, [row])
        logger.info(f"Fit: I_AC={fit.amplitude:.4g}, phi={fit.phase:.4g}, DC error {fit.birefringence_error:.4e}")

    # export-mesh

    def cmd_export_mesh(self) -> None:
        scene = self.load_scene(self.args.mode)
        with self.manifest.stage("mesh"):
            mesh = build_mesh(scene)
            path = self.files.write_vtk(mesh, f"mesh_{scene.electrode.slug}.vtk", self.manifest.config_hash,
                                        include_electrode=self.args.electrodes)
            self.manifest.add_output(path)
        logger.info(f"Mesh with {mesh.n_elements} elements written to {path}")


def section_row(time: float, index: int, section: SectionBirefringence, retardance: float) -> tuple:
    return (time, index, section.length, section.delta_n, section.theta, section.slow_axis, section.delta_m,
            retardance)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for ovs-birefringence"""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose, args.quiet)
    return CommandRunner(args).run()


if __name__ == "__main__":
    sys.exit(main())
