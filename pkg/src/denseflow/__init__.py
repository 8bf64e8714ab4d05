"""Classical optical flow: Lucas-Kanade, Horn-Schunck and coarse-to-fine
Horn-Schunck, with ``.flo`` I/O and AAE/EPE evaluation."""

__version__ = "0.1.0"

from .errors import DenseFlowError
from .flow_core import FlowField, flow_delta, upsample_flow, zero_flow
from .horn_schunck import HsParams, HsTrace, hs_energy, hs_solve, hs_update_step
from .lucas_kanade import LkParams, SparseFlow, lk_solve_grid, lk_solve_point
from .metrics import (FlowErrorReport, average_angular_error, endpoint_error,
                      evaluate_pair)
from .multiresolution import MrParams, MrTrace, mrhs_solve
from .pyramid import GaussianPyramid, build_pyramid

__all__ = [
    "DenseFlowError", "FlowField", "flow_delta", "upsample_flow", "zero_flow",
    "HsParams", "HsTrace", "hs_energy", "hs_solve", "hs_update_step",
    "LkParams", "SparseFlow", "lk_solve_grid", "lk_solve_point",
    "FlowErrorReport", "average_angular_error", "endpoint_error", "evaluate_pair",
    "MrParams", "MrTrace", "mrhs_solve", "GaussianPyramid", "build_pyramid",
]
