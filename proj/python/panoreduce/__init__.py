"""Search-space reduction for privacy blurring in RGB-D panoramas.

Thin wrapper over the C++ core; see the project README for the pipeline
description, file formats and the external detector protocol.
"""

from ._core import (
    __version__,
    blur_regions,
    compute_mask,
    extract_planes,
    merge_detections,
    pixel_to_ray,
    ray_to_pixel,
    render_fixture,
    run_pipeline,
    scene_catalog,
    static_band_mask,
    unproject,
    PanoreduceError,
)

__all__ = [
    "__version__",
    "blur_regions",
    "compute_mask",
    "extract_planes",
    "merge_detections",
    "pixel_to_ray",
    "ray_to_pixel",
    "render_fixture",
    "run_pipeline",
    "scene_catalog",
    "static_band_mask",
    "unproject",
    "PanoreduceError",
]
