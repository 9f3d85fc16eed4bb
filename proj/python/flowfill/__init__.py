"""Flow-based video completion."""

from flowfill._core import (
    DataError,
    NumericalError,
    DegenerateAlignment,
    canny,
    complete,
    complete_flow,
    estimate_flow,
    flow_epe,
    psnr,
    read_flo,
    ssim,
    synth_scene,
    write_flo,
)

__all__ = [
    "DataError",
    "NumericalError",
    "DegenerateAlignment",
    "canny",
    "complete",
    "complete_flow",
    "estimate_flow",
    "flow_epe",
    "psnr",
    "read_flo",
    "ssim",
    "synth_scene",
    "write_flo",
]
