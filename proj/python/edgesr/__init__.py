"""Edge informed single image super resolution.

Thin wrapper over the compiled core. Images are float32 numpy arrays shaped
(H, W, C) with values in [0, 1]; edge maps are (H, W).
"""

from edgesr._core import (
    SuperResolver,
    canny,
    center_crop,
    degrade,
    edge_precision_recall,
    edge_reference_table,
    grayscale,
    interpolate,
    interpolate_edges,
    offset_kernel,
    offset_upsample,
    psnr,
    read_png,
    read_png_edges,
    reference_provenance,
    reference_table,
    ssim,
    write_png,
    write_png_edges,
)

__all__ = [
    "SuperResolver",
    "canny",
    "center_crop",
    "degrade",
    "edge_precision_recall",
    "edge_reference_table",
    "grayscale",
    "interpolate",
    "interpolate_edges",
    "offset_kernel",
    "offset_upsample",
    "psnr",
    "read_png",
    "read_png_edges",
    "reference_provenance",
    "reference_table",
    "ssim",
    "write_png",
    "write_png_edges",
]
