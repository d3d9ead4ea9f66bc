from .linalg import SPDSolver
from .parallel import ParallelExecutor
from .run_manifest import RunManifest

__all__ = ["SPDSolver", "ParallelExecutor", "RunManifest"]
