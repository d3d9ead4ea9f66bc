from .electrostatic_solver import (
    ElectrostaticSolver,
    PotentialField,
    electrooptic_delta_b,
    half_wave_voltage,
    mean_field_angle,
    solve_potential,
)
from .mechanics_solver import (
    DisplacementField,
    MechanicsSolver,
    StressField,
    recover_stress,
    solve_thermoelastic,
    stress_along_path,
    von_mises,
)
from .thermal_solver import TemperatureHistory, ThermalSolver, probe, run_transient

__all__ = [
    "ThermalSolver", "TemperatureHistory", "run_transient", "probe",
    "MechanicsSolver", "DisplacementField", "StressField",
    "solve_thermoelastic", "recover_stress", "von_mises", "stress_along_path",
    "ElectrostaticSolver", "PotentialField",
    "solve_potential", "mean_field_angle", "electrooptic_delta_b", "half_wave_voltage",
]
