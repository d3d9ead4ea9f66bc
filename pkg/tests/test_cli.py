import json
import math
import os
import tempfile
import unittest
from unittest.mock import patch

import numpy as np

from ovs_birefringence.errors import ConvergenceError
from ovs_birefringence.main import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, build_parser, main
from ovs_birefringence.tools.file_tools import HASH_PREFIX, read_csv_rows
from ovs_birefringence.utils.config import Config
from tests.helpers import COMPACT_DOCUMENT


class CliTestCase(unittest.TestCase):

    def setUp(self):
        """Set up a scratch directory holding the compact scene document"""
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name
        self.config_path = os.path.join(self.tmp, "compact.ini")
        with open(self.config_path, "w", encoding="utf-8") as f:
            f.write(COMPACT_DOCUMENT)
        self.out = os.path.join(self.tmp, "out")

    def tearDown(self):
        """Clean up test fixtures"""
        self._tmp.cleanup()

    def run_cli(self, *args, out=None):
        return main(list(args) + ["--out", out or self.out, "-q"])

    def read(self, filename, out=None):
        with open(os.path.join(out or self.out, filename), "r", encoding="utf-8") as f:
            return f.read()

    def manifest(self):
        return json.loads(self.read("manifest.json"))


class TestSimulateCommand(CliTestCase):

    def test_curve_file(self):
        """Test simulate writes the hash line, header and a zero first error"""
        status = self.run_cli("simulate", "--config", self.config_path)
        self.assertEqual(status, EXIT_OK)
        lines = self.read("curve_cu_10_0.csv").splitlines()
        self.assertTrue(lines[0].startswith(HASH_PREFIX))
        self.assertEqual(len(lines[0]) - len(HASH_PREFIX), 64)
        self.assertEqual(lines[1], "time,crystal_t,error")
        self.assertEqual(lines[2], "0.0,300.0,0.0")
        self.assertEqual(len(lines), 5)

        manifest = self.manifest()
        self.assertEqual(manifest["status"], "completed")
        self.assertEqual(manifest["config_sha256"], lines[0][len(HASH_PREFIX):])
        self.assertEqual([stage["name"] for stage in manifest["stages"]], ["load", "evaluate", "write"])

    def test_dumps(self):
        """Test each dump flag writes its files with the documented columns"""
        status = self.run_cli("simulate", "--config", self.config_path, "--dump-stress", "--dump-temps",
                              "--dump-field", "--dump-sections")
        self.assertEqual(status, EXIT_OK)
        files = sorted(os.listdir(self.out))
        self.assertEqual([f for f in files if f.startswith("stress_")],
                         ["stress_cu_10_0_000.csv", "stress_cu_10_0_001.csv", "stress_cu_10_0_002.csv"])
        stress_rows = read_csv_rows(os.path.join(self.out, "stress_cu_10_0_002.csv"))
        self.assertEqual(stress_rows[0][-1], "von_mises")
        self.assertEqual(len(stress_rows), 1001)
        self.assertEqual(len(read_csv_rows(os.path.join(self.out, "temps_summary_cu_10_0.csv"))), 4)
        self.assertEqual(len(read_csv_rows(os.path.join(self.out, "field_sections_cu_10_0.csv"))), 11)
        self.assertEqual(len(read_csv_rows(os.path.join(self.out, "sections_cu_10_0.csv"))), 31)

    def test_temperature_dump_per_snapshot(self):
        """Test --dump-temps writes node id, coordinates and T for every node of every snapshot"""
        self.assertEqual(self.run_cli("simulate", "--config", self.config_path, "--dump-temps"), EXIT_OK)
        files = sorted(f for f in os.listdir(self.out) if f.startswith("temps_cu_10_0_"))
        self.assertEqual(files, ["temps_cu_10_0_000.csv", "temps_cu_10_0_001.csv", "temps_cu_10_0_002.csv"])
        first = read_csv_rows(os.path.join(self.out, files[0]))
        last = read_csv_rows(os.path.join(self.out, files[-1]))
        self.assertEqual(first[0], ["node", "x", "y", "z", "t"])
        self.assertEqual(len(first), len(last))
        self.assertEqual([row[0] for row in first[1:4]], ["0", "1", "2"])
        self.assertTrue(all(float(row[4]) == 300.0 for row in first[1:]))
        self.assertGreater(max(float(row[4]) for row in last[1:]), 300.0)

    def test_field_dump_per_element(self):
        """Test --dump-field covers every element with NaN outside the crystal"""
        self.assertEqual(self.run_cli("simulate", "--config", self.config_path, "--dump-field"), EXIT_OK)
        rows = read_csv_rows(os.path.join(self.out, "field_cu_10_0.csv"))
        self.assertEqual(rows[0], ["element", "x", "y", "z", "ex", "ey", "ez", "magnitude"])
        finite = [row for row in rows[1:] if math.isfinite(float(row[7]))]
        self.assertEqual(len(finite), 1000)
        self.assertGreater(len(rows) - 1, len(finite))
        for row in finite[:50]:
            e = np.array([float(v) for v in row[4:7]])
            self.assertAlmostEqual(float(row[7]), float(np.linalg.norm(e)), delta=1e-9 * float(row[7]) + 1e-12)

    def test_reproducible_output(self):
        """Test two runs write byte-identical data files"""
        second = os.path.join(self.tmp, "second")
        self.assertEqual(self.run_cli("simulate", "--config", self.config_path), EXIT_OK)
        self.assertEqual(self.run_cli("simulate", "--config", self.config_path, out=second), EXIT_OK)
        self.assertEqual(self.read("curve_cu_10_0.csv"), self.read("curve_cu_10_0.csv", out=second))

    def test_missing_config(self):
        """Test a missing scene file exits with the configuration code"""
        status = self.run_cli("simulate", "--config", os.path.join(self.tmp, "absent.ini"))
        self.assertEqual(status, EXIT_CONFIG)
        manifest = self.manifest()
        self.assertEqual(manifest["status"], "failed")
        self.assertIn("config not found", manifest["error"])

    def test_invalid_scene(self):
        """Test a scene failing validation exits with the configuration code"""
        status = self.run_cli("simulate", "--config", self.config_path, "--resolution", "3")
        self.assertEqual(status, EXIT_CONFIG)
        self.assertFalse(os.path.exists(os.path.join(self.out, "curve_cu_10_0.csv")))

    def test_solver_failure(self):
        """Test a solver error exits with code 2 and a failed manifest"""
        failure = ConvergenceError("thermal step", 1e-3, 20000)
        with patch("ovs_birefringence.main.OVSPipeline.run_mode", side_effect=failure):
            status = self.run_cli("simulate", "--config", self.config_path)
        self.assertEqual(status, EXIT_SOLVER)
        self.assertIn("no convergence", self.manifest()["error"])


class TestOtherCommands(CliTestCase):

    def test_field_of_ito_plates(self):
        """Test ITO 0:10 reports a longitudinal field and an infinite HWV"""
        status = self.run_cli("field", "--config", self.config_path, "--mode", "ito_0_10")
        self.assertEqual(status, EXIT_OK)
        header, row = read_csv_rows(os.path.join(self.out, "field_summary.csv"))
        record = dict(zip(header, row))
        self.assertEqual(record["mode"], "ITO 0:10")
        self.assertAlmostEqual(float(record["mean_angle"]), 0.0, places=6)
        self.assertEqual(record["hwv"], "inf")
        self.assertTrue(math.isinf(float(record["hwv"])))

    def test_fit_trace(self):
        """Test fit recovers amplitude and drift from a CSV trace"""
        t = np.arange(1000) / 10_000.0
        intensity = 0.5 + 0.1 * np.cos(2.0 * math.pi * 50.0 * t) + 0.01 * t
        trace = os.path.join(self.tmp, "trace.csv")
        with open(trace, "w", encoding="utf-8") as f:
            f.write("time,intensity\n")
            f.writelines(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(t, intensity))
        status = self.run_cli("fit", trace, "--config", self.config_path)
        self.assertEqual(status, EXIT_OK)
        header, row = read_csv_rows(os.path.join(self.out, "fit_report.csv"))
        record = dict(zip(header, map(float, row)))
        self.assertAlmostEqual(record["i_ac"], 0.1, places=9)
        self.assertAlmostEqual(record["b"], 0.01, places=6)
        self.assertAlmostEqual(record["birefringence_error"], 0.01 * float(np.mean(t)), places=9)

    def test_fit_missing_trace(self):
        """Test fit on a missing trace file is a configuration error"""
        status = self.run_cli("fit", os.path.join(self.tmp, "none.csv"), "--config", self.config_path)
        self.assertEqual(status, EXIT_CONFIG)

    def test_export_mesh(self):
        """Test export-mesh writes a legacy VTK grid with the electrode scalar"""
        status = self.run_cli("export-mesh", "--config", self.config_path)
        self.assertEqual(status, EXIT_OK)
        text = self.read("mesh_cu_10_0.vtk")
        self.assertTrue(text.startswith("# vtk DataFile Version 3.0\n"))
        self.assertIn("SCALARS material int 1", text)
        self.assertNotIn("SCALARS electrode int 1", text)

        status = self.run_cli("export-mesh", "--config", self.config_path, "--mode", "ITO 0:5", "--electrodes")
        self.assertEqual(status, EXIT_OK)
        self.assertIn("SCALARS electrode int 1", self.read("mesh_ito_0_5.vtk"))

    def test_sweep_two_modes(self):
        """Test sweep writes a ranked report and one curve per mode"""
        status = self.run_cli("sweep", "--config", self.config_path, "--modes", "cu_10_0,ITO 0:10",
                              "--threads", "2")
        self.assertEqual(status, EXIT_OK)
        rows = read_csv_rows(os.path.join(self.out, "report.csv"))
        self.assertEqual(rows[0], ["mode", "angle", "hwv", "total", "corrected_total", "rank"])
        self.assertEqual([row[0] for row in rows[1:]], ["Cu 10:0", "ITO 0:10"])
        self.assertEqual(sorted(row[5] for row in rows[1:]), ["1", "2"])
        self.assertTrue(os.path.exists(os.path.join(self.out, "curve_ito_0_10.csv")))

    def test_unknown_mode(self):
        """Test an unknown mode name is a configuration error"""
        status = self.run_cli("sweep", "--config", self.config_path, "--modes", "Cu 9:9")
        self.assertEqual(status, EXIT_CONFIG)

    def test_parser(self):
        """Test subcommand flags and mutually exclusive verbosity"""
        args = build_parser().parse_args(["sweep", "--optimize", "cu", "--grid", "5"])
        self.assertEqual(args.command, "sweep")
        self.assertEqual(args.optimize, "cu")
        self.assertEqual(args.grid, 5)
        self.assertEqual(args.modes, "all")
        with self.assertRaises(SystemExit):
            build_parser().parse_args(["simulate", "-v", "-q"])


class TestEnvironmentConfig(CliTestCase):

    def test_thread_count(self):
        """Test OVS_THREADS parsing and its fallback"""
        self.assertEqual(Config({"OVS_THREADS": "3"}).threads, 3)
        self.assertEqual(Config({"OVS_THREADS": "many"}).threads, 1)
        self.assertEqual(Config({}).out_dir, "results")

    def test_scene_override(self):
        """Test an OVS_SIM__ variable overrides the scene and foreign prefixes are ignored"""
        config = Config({"OVS_SIM__CONVECTION_H": "12.5", "OVS_PLOT__COLOR": "red"})
        scene = config.load_scene(self.config_path)
        self.assertEqual(scene.sim.convection_h, 12.5)

    def test_material_override_needs_declared_section(self):
        """Test material overrides only reach sections the document declares"""
        config = Config({"OVS_MATERIALS_BGO__POISSON": "0.5"})
        scene = config.load_scene(self.config_path)
        self.assertEqual(scene.materials["bgo"].poisson, 0.20)

    def test_preset_and_resolution(self):
        """Test a preset slug and a resolution override"""
        scene = Config({}).load_scene(mode="ito_0_7", resolution=0.5e-3)
        self.assertEqual(scene.name, "ito_0_7")
        self.assertEqual(scene.electrode.name, "ITO 0:7")
        self.assertEqual(scene.sim.mesh_resolution, 0.0005)

    def test_ambient_override_moves_reference(self):
        """Test the stress-free temperature follows an ambient override on a preset"""
        scene = Config({"OVS_SIM__AMBIENT_T": "295"}).load_scene(mode="cu_10_0")
        self.assertEqual(scene.sim.ambient_t, 295.0)
        self.assertEqual(scene.sim.reference_t, 295.0)

    def test_explicit_reference_kept(self):
        """Test an explicit reference_t is not replaced by the ambient override"""
        config = Config({"OVS_SIM__AMBIENT_T": "295", "OVS_SIM__REFERENCE_T": "310"})
        self.assertEqual(config.load_scene(mode="cu_10_0").sim.reference_t, 310.0)


if __name__ == '__main__':
    unittest.main()
