from .scene_validator import SceneValidator, validate

__all__ = ["SceneValidator", "validate"]
