from .voxel_mesh import (
    PathSamples,
    VoxelMesh,
    build_mesh,
    classify_boundaries,
    optical_path_samples,
    voxelize,
)

__all__ = ["VoxelMesh", "PathSamples", "voxelize", "classify_boundaries", "build_mesh", "optical_path_samples"]
