import math
import unittest
from dataclasses import replace

import numpy as np

from ovs_birefringence.errors import ProbeError, ThermalError
from ovs_birefringence.mesh.voxel_mesh import build_mesh, classify_faces, voxelize_primitives
from ovs_birefringence.scene.models import BoxPrimitive, SimParams
from ovs_birefringence.scene.presets import AL, DEFAULT_MATERIALS
from ovs_birefringence.solvers.thermal_solver import ThermalSolver, probe, run_transient
from tests.helpers import MM, compact_scene


def column_series(z: float, t: float, length: float, diffusivity: float, terms: int = 200) -> float:
    """Unit step at z = 0 into an insulated column, as a fraction of the step"""
    total = 0.0
    for n in range(terms):
        k = (2 * n + 1) * math.pi / (2.0 * length)
        total += 4.0 / ((2 * n + 1) * math.pi) * math.sin(k * z) * math.exp(-diffusivity * k * k * t)
    return 1.0 - total


class TestThermalTransient(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.scene = compact_scene()
        cls.mesh = build_mesh(cls.scene)
        cls.solver = ThermalSolver(cls.mesh, cls.scene.materials, cls.scene.sim)
        cls.history = cls.solver.run()

    def test_snapshot_times(self):
        """Test snapshots at every step"""
        np.testing.assert_allclose(self.history.times, [0.0, 5.0, 10.0])
        self.assertEqual(len(self.history), 3)

    def test_first_snapshot_is_ambient(self):
        """Test the run starts at ambient"""
        np.testing.assert_array_equal(self.history.snapshot(0), self.scene.sim.ambient_t)

    def test_maximum_principle(self):
        """Test every temperature stays between ambient and heater"""
        sim = self.scene.sim
        self.assertGreaterEqual(self.history.temperatures.min(), sim.ambient_t - 1e-9)
        self.assertLessEqual(self.history.temperatures.max(), sim.heater_t + 1e-9)

    def test_base_held_at_heater_temperature(self):
        """Test the base nodes stay at the heater temperature"""
        for index in (1, 2):
            np.testing.assert_allclose(self.history.snapshot(index)[self.solver.base_nodes], self.scene.sim.heater_t)

    def test_crystal_warms_monotonically(self):
        """Test the crystal mean rises every step"""
        crystal_t = self.history.region_mean(self.mesh.crystal_mask())
        self.assertGreater(crystal_t[1], crystal_t[0])
        self.assertGreater(crystal_t[2], crystal_t[1])
        crystal = self.mesh.crystal_mask()
        self.assertAlmostEqual(float(self.history.element_temperatures(2)[crystal].mean()), crystal_t[2], places=9)

    def test_energy_balance(self):
        """Test stored heat matches what enters through the base minus convective loss"""
        for step in (1, 2):
            balance = self.solver.heat_balance(self.history, step)
            self.assertGreater(balance["stored"], 0.0)
            self.assertAlmostEqual(balance["inflow"] / balance["stored"], 1.0, places=6)

    def test_heat_balance_step_range(self):
        """Test the audit refuses step 0"""
        with self.assertRaises(ThermalError):
            self.solver.heat_balance(self.history, 0)

    def test_probe_at_node_and_between_snapshots(self):
        """Test probing at a node and interpolating in time"""
        node = int(np.argmin(np.linalg.norm(self.mesh.node_coords - [0.0, 0.0, 13 * MM], axis=1)))
        point = self.mesh.node_coords[node]
        self.assertAlmostEqual(probe(self.history, point, 5.0), self.history.snapshot(1)[node], places=9)
        expected = 0.5 * (self.history.snapshot(0)[node] + self.history.snapshot(1)[node])
        self.assertAlmostEqual(self.history.probe(point, 2.5), expected, places=9)

    def test_probe_outside(self):
        """Test probing outside the mesh or the run raises"""
        with self.assertRaises(ProbeError):
            probe(self.history, (1.0, 1.0, 1.0), 5.0)
        with self.assertRaises(ProbeError):
            probe(self.history, (0.0, 0.0, 13 * MM), 11.0)

    def test_region_mean_of_empty_region(self):
        """Test an empty region has no mean"""
        with self.assertRaises(ProbeError):
            self.history.region_mean(np.zeros(self.mesh.n_elements, dtype=bool))

    def test_step_refinement(self):
        """Test one-second steps move the crystal mean by under 0.5 K against five-second steps"""
        fine_scene = compact_scene(t_step=1.0)
        fine = ThermalSolver(self.mesh, fine_scene.materials, fine_scene.sim).run()
        crystal = self.mesh.crystal_mask()
        coarse_mean = self.history.region_mean(crystal)
        fine_mean = fine.region_mean(crystal)
        np.testing.assert_allclose(fine.times[::5], self.history.times)
        for coarse_t, fine_t in zip(coarse_mean, fine_mean[::5]):
            self.assertLess(abs(coarse_t - fine_t), 0.5)

    def test_node_numbering_does_not_matter(self):
        """Test renumbering the nodes gives the same temperature at every point"""
        rng = np.random.default_rng(29)
        order = rng.permutation(self.mesh.n_nodes)
        new_id = np.empty_like(order)
        new_id[order] = np.arange(order.size)
        renumbered = replace(
            self.mesh,
            node_coords=self.mesh.node_coords[order],
            connectivity=new_id[self.mesh.connectivity],
            electrode_contacts=tuple(new_id[nodes] for nodes in self.mesh.electrode_contacts),
        )
        history = ThermalSolver(renumbered, self.scene.materials, self.scene.sim).run()
        for index in range(len(history)):
            np.testing.assert_allclose(history.snapshot(index)[new_id], self.history.snapshot(index),
                                       rtol=0, atol=1e-9)


class TestThermalSchedule(unittest.TestCase):

    def test_uneven_step(self):
        """Test a run that is not a whole number of steps is refused"""
        scene = compact_scene(t_step=3.0)
        with self.assertRaises(ThermalError):
            run_transient(build_mesh(scene), scene.sim, scene.materials)

    def test_unclassified_mesh(self):
        """Test an unclassified mesh is refused"""
        box = BoxPrimitive(name="plate", material="al", origin=(0.0, 0.0, 0.0), extents=(MM, MM, MM))
        with self.assertRaises(ThermalError):
            ThermalSolver(voxelize_primitives([box], MM), DEFAULT_MATERIALS, SimParams())


class TestConductionColumn(unittest.TestCase):

    def test_matches_series_solution(self):
        """Test an insulated aluminium column against the one-dimensional series solution"""
        length = 20 * MM
        column = BoxPrimitive(name="column", material="al", origin=(0.0, 0.0, 0.0), extents=(MM, MM, length))
        mesh = classify_faces(voxelize_primitives([column], MM), "al")
        params = SimParams(t_total=1.0, t_step=0.002, convection_h=0.0, linear_solver="direct")
        history = ThermalSolver(mesh, {"al": AL}, params).run()

        diffusivity = AL.conductivity / (AL.density * AL.specific_heat)
        rise = params.heater_t - params.ambient_t
        z = mesh.node_coords[:, 2]
        for index in (250, 500):
            t = history.times[index]
            expected = params.ambient_t + rise * np.array([column_series(v, t, length, diffusivity) for v in z])
            np.testing.assert_allclose(history.snapshot(index), expected, atol=0.01 * rise)


if __name__ == '__main__':
    unittest.main()
