import math
import unittest

import numpy as np

from ovs_birefringence.optics.birefringence import (
    SectionBirefringence,
    make_section,
    principal_birefringence,
    transverse_components,
)
from ovs_birefringence.optics.jones import (
    birefringence_error,
    chain_matrix,
    chain_retardance,
    output_field,
    propagate,
    section_jones,
)
from ovs_birefringence.optics.transforms import (
    CRYSTAL_ROTATION,
    STRESS_TRANSFORM,
    build_transforms,
    delta_b_from_stress,
    from_voigt,
    to_voigt,
)
from ovs_birefringence.scene.presets import BGO_OPTICS

N0 = 2.07
WAVELENGTH = 976e-9


def _axis_distance(a: float, b: float) -> float:
    """Distance between two axis directions (angles modulo pi)"""
    return abs(math.sin(a - b))


class TestPrincipalBirefringence(unittest.TestCase):

    def test_matches_eigen_decomposition(self):
        """Test the closed form against a numerical eigen solve of the transverse block"""
        rng = np.random.default_rng(7)
        for _ in range(1000):
            bjj, bkk, bjk = rng.normal(scale=1e-6, size=3)
            delta_b = np.array([0.0, bjj, bkk, 0.0, bjk, 0.0])
            section = principal_birefringence(delta_b, axis="x", n0=N0)

            values, vectors = np.linalg.eigh(np.array([[bjj, bjk], [bjk, bkk]]))
            self.assertAlmostEqual(section.delta_n / (0.5 * N0 ** 3 * (values[1] - values[0])), 1.0, places=9)
            slow = math.atan2(vectors[1, 0], vectors[0, 0])
            self.assertLess(_axis_distance(section.slow_axis, slow), 1e-9)
            folded = abs(slow) % (math.pi / 2)
            self.assertAlmostEqual(section.theta, min(folded, math.pi / 2 - folded), places=9)
            self.assertGreater(section.slow_axis, -math.pi / 2)
            self.assertLessEqual(section.slow_axis, math.pi / 2)

    def test_exact_index_difference(self):
        """Test the exact index split against the eigenvalues"""
        rng = np.random.default_rng(11)
        for _ in range(100):
            bjj, bkk, bjk = rng.normal(scale=1e-5, size=3)
            section = principal_birefringence(np.array([0.0, bjj, bkk, 0.0, bjk, 0.0]), n0=N0, exact=True)
            values = np.linalg.eigvalsh(np.array([[bjj, bjk], [bjk, bkk]])) + 1.0 / N0 ** 2
            self.assertAlmostEqual(section.delta_n / abs(values[0] ** -0.5 - values[1] ** -0.5), 1.0, places=9)

    def test_explicit_values(self):
        """Test a hand-computed section"""
        delta_b = np.array([0.0, 3e-6, 0.0, 0.0, 2e-6, 0.0])
        section = make_section(delta_b, length=1e-3, wavelength=WAVELENGTH, n0=N0)
        self.assertAlmostEqual(section.delta_n, 0.5 * N0 ** 3 * 5e-6, delta=1e-18)
        self.assertAlmostEqual(section.theta, 0.5 * math.atan2(4.0, 3.0), places=12)
        self.assertAlmostEqual(section.delta_m, 2.0 * math.pi * 1e-3 * section.delta_n / WAVELENGTH, places=12)

    def test_transverse_components_per_axis(self):
        """Test the transverse triple picked for each propagation axis"""
        delta_b = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        self.assertEqual(transverse_components(delta_b, "x"), (2.0, 3.0, 5.0))
        self.assertEqual(transverse_components(delta_b, "y"), (1.0, 3.0, 6.0))
        self.assertEqual(transverse_components(delta_b, "z"), (1.0, 2.0, 4.0))
        with self.assertRaises(ValueError):
            transverse_components(delta_b, "w")

    def test_isotropic_perturbation(self):
        """Test an isotropic transverse perturbation has no retardance"""
        section = principal_birefringence(np.array([0.0, 1e-6, 1e-6, 0.0, 0.0, 0.0]), n0=N0, length=1e-3)
        self.assertEqual(section.delta_n, 0.0)
        self.assertEqual(section.delta_m, 0.0)


class TestStressTransforms(unittest.TestCase):

    def setUp(self):
        """Set up test fixtures"""
        self.transforms = build_transforms(BGO_OPTICS)

    def test_rotation_is_orthogonal(self):
        """Test the crystal rotation is orthogonal"""
        np.testing.assert_allclose(CRYSTAL_ROTATION @ CRYSTAL_ROTATION.T, np.eye(3), atol=1e-15)

    def test_hydrostatic_stress_is_isotropic(self):
        """Test hydrostatic pressure shifts the index without splitting it"""
        pressure = principal_birefringence(delta_b_from_stress(np.array([-1e6] * 3 + [0.0] * 3), self.transforms))
        uniaxial = principal_birefringence(delta_b_from_stress(np.array([0.0, -1e6, 0.0, 0.0, 0.0, 0.0]),
                                                               self.transforms))
        self.assertGreater(uniaxial.delta_n, 0.0)
        self.assertLess(pressure.delta_n, 1e-9 * uniaxial.delta_n)

    def test_crystal_matrix_structure(self):
        """Test the cubic photoelastic matrix layout"""
        crystal = self.transforms.crystal_matrix
        self.assertEqual(crystal[0, 0], BGO_OPTICS.q11)
        self.assertEqual(crystal[0, 1], BGO_OPTICS.q12)
        self.assertEqual(crystal[3, 3], BGO_OPTICS.q44)
        self.assertEqual(crystal[0, 3], 0.0)

    def test_batched_stress(self):
        """Test batched stress matches row by row"""
        stress = np.random.default_rng(3).normal(scale=1e5, size=(5, 6))
        batched = delta_b_from_stress(stress, self.transforms)
        self.assertEqual(batched.shape, (5, 6))
        np.testing.assert_allclose(batched[2], delta_b_from_stress(stress[2], self.transforms))

    def test_voigt_round_trip(self):
        """Test the Voigt packing of a symmetric tensor"""
        vector = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        tensor = from_voigt(vector)
        np.testing.assert_array_equal(tensor, tensor.T)
        np.testing.assert_array_equal(to_voigt(tensor), vector)

    def test_stress_transform_entries(self):
        """Test the signs of the stress transform's shear coupling"""
        self.assertEqual(STRESS_TRANSFORM[0][5], -0.5)
        self.assertEqual(STRESS_TRANSFORM[5][0], -0.5)
        self.assertEqual(STRESS_TRANSFORM[1][5], 0.5)

    def test_transverse_difference_closed_form(self):
        """Test the matrix route against the closed forms for B22 - B33 and B23"""
        q11, q12, q44 = BGO_OPTICS.q11, BGO_OPTICS.q12, BGO_OPTICS.q44
        rng = np.random.default_rng(13)
        for stress in rng.normal(scale=1e6, size=(200, 6)):
            s11, s22, s33, _, s23, _ = stress
            delta_b = delta_b_from_stress(stress, self.transforms)
            scale = float(np.max(np.abs(delta_b)))
            expected = 0.5 * (q11 - q12) * (s11 + s22 - 2.0 * s33) - 0.5 * q44 * (s11 - s22)
            self.assertAlmostEqual(delta_b[1] - delta_b[2], expected, delta=1e-12 * scale)
            self.assertAlmostEqual(delta_b[4], q44 * s23, delta=1e-12 * scale)

    def test_pure_shear_drives_b23_only_in_plane(self):
        """Test pure sigma23 gives B23 = q44 * sigma23 and no transverse split"""
        delta_b = delta_b_from_stress(np.array([0.0, 0.0, 0.0, 0.0, 2e6, 0.0]), self.transforms)
        self.assertAlmostEqual(delta_b[4], BGO_OPTICS.q44 * 2e6, delta=1e-12 * abs(delta_b[4]))
        self.assertAlmostEqual(delta_b[1] - delta_b[2], 0.0, delta=1e-12 * abs(delta_b[4]))

    def test_hydrostatic_gauge_invariance(self):
        """Test adding the same constant to q11 and q12 leaves the transverse split and the error alone"""
        shift = 3e-13
        shifted = build_transforms(BGO_OPTICS.model_copy(update={"q11": BGO_OPTICS.q11 + shift,
                                                                 "q12": BGO_OPTICS.q12 + shift}))
        stress = np.random.default_rng(17).normal(scale=1e6, size=(10, 6))
        plain = delta_b_from_stress(stress, self.transforms)
        gauged = delta_b_from_stress(stress, shifted)
        scale = float(np.max(np.abs(plain)))
        np.testing.assert_allclose(gauged[:, 1] - gauged[:, 2], plain[:, 1] - plain[:, 2], rtol=0, atol=1e-12 * scale)
        np.testing.assert_allclose(gauged[:, 4], plain[:, 4], rtol=0, atol=1e-12 * scale)
        sections = [make_section(db, 1e-3, WAVELENGTH, N0) for db in plain]
        gauge_sections = [make_section(db, 1e-3, WAVELENGTH, N0) for db in gauged]
        self.assertAlmostEqual(birefringence_error(gauge_sections), birefringence_error(sections), delta=1e-12)


class TestJonesChain(unittest.TestCase):

    def test_unperturbed_chain_sits_at_work_point(self):
        """Test zero stress gives exactly 0.5 and zero error"""
        sections = [principal_birefringence(np.zeros(6), length=1e-3) for _ in range(10)]
        self.assertEqual(propagate(sections), 0.5)
        self.assertEqual(birefringence_error(sections), 0.0)
        self.assertEqual(birefringence_error([]), 0.0)

    def test_forty_five_degree_retarder(self):
        """Test a retarder at +/-45 degrees swings the output as sin(delta)"""
        for delta in np.linspace(-math.pi, math.pi, 13):
            slow = SectionBirefringence.retarder(float(delta), slow_axis=math.pi / 4)
            fast = SectionBirefringence.retarder(float(delta), slow_axis=-math.pi / 4)
            self.assertAlmostEqual(propagate([slow]), 0.5 * (1.0 + math.sin(delta)), places=12)
            self.assertAlmostEqual(propagate([fast]), 0.5 * (1.0 - math.sin(delta)), places=12)

    def test_axis_aligned_retarder_does_nothing(self):
        """Test a retarder aligned with the input polarization leaves the work point"""
        section = SectionBirefringence.retarder(1.2, slow_axis=0.0)
        self.assertAlmostEqual(propagate([section]), 0.5, places=12)

    def test_splitting_sections(self):
        """Test halving every section leaves the output unchanged"""
        delta_b = np.array([0.0, 2e-6, -1e-6, 0.0, 7e-7, 0.0])
        whole = [make_section(delta_b, 1e-3, WAVELENGTH, N0)]
        halves = [make_section(delta_b, 0.5e-3, WAVELENGTH, N0) for _ in range(2)]
        self.assertAlmostEqual(propagate(whole), propagate(halves), places=12)

    def test_section_jones_is_unitary(self):
        """Test a section matrix is unitary"""
        section = SectionBirefringence.retarder(0.7, slow_axis=0.3)
        jones = section_jones(section)
        np.testing.assert_allclose(jones @ jones.conj().T, np.eye(2), atol=1e-12)
        self.assertAlmostEqual(abs(np.linalg.det(jones)), 1.0, places=12)

    def test_output_field_intensity(self):
        """Test the output field's power equals the propagated intensity"""
        sections = [SectionBirefringence.retarder(0.4, slow_axis=0.2)]
        field = output_field(sections)
        self.assertAlmostEqual(float(np.vdot(field, field).real), propagate(sections), places=12)

    def test_chain_retardance(self):
        """Test retardances of parallel sections add"""
        self.assertAlmostEqual(chain_retardance(chain_matrix([SectionBirefringence.retarder(1.1)])), 1.1, places=12)
        pair = [SectionBirefringence.retarder(0.4, 0.3), SectionBirefringence.retarder(0.5, 0.3)]
        self.assertAlmostEqual(chain_retardance(chain_matrix(pair)), 0.9, places=12)
        self.assertEqual(chain_retardance(np.eye(2)), 0.0)


if __name__ == '__main__':
    unittest.main()
