from .birefringence import SectionBirefringence, principal_birefringence
from .jones import birefringence_error, propagate, section_jones
from .transforms import TransformSet, build_transforms, delta_b_from_stress

__all__ = [
    "TransformSet", "build_transforms", "delta_b_from_stress",
    "SectionBirefringence", "principal_birefringence",
    "section_jones", "propagate", "birefringence_error",
]
