"""Horn-Schunck global flow with Gaussian-averaged smoothness.

Each iteration replaces ``u`` and ``v`` by their 5x5 binomial local
averages, then pulls them toward the brightness-constancy line::

    u <- u_avg - I_x (I_x u_avg + I_y v_avg + I_t) / (alpha^2 + I_x^2 + I_y^2 + eps)
    v <- v_avg - I_y (I_x u_avg + I_y v_avg + I_t) / (alpha^2 + I_x^2 + I_y^2 + eps)

The whole field is smoothed first and then updated simultaneously. The
loop stops once the L2 norm of the change drops below
``convergence_threshold`` or after ``max_iterations`` sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalInstabilityError, ParameterError, ShapeError
from .flow_core import FlowField, zero_flow
from .imagery import (_smooth_axis, as_image, gaussian_smooth, spatial_gradients,
                      temporal_gradient)

__all__ = ["HsParams", "HsTrace", "image_gradients", "hs_update_step",
           "hs_solve", "hs_energy"]


@dataclass(frozen=True)
class HsParams:
    alpha: float = 1.0
    epsilon: float = 1e-8
    max_iterations: int = 5000
    convergence_threshold: float = 1e-5

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iterations < 1:
            raise ParameterError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.convergence_threshold > 0:
            raise ParameterError(
                f"convergence_threshold must be > 0, got {self.convergence_threshold}"
            )


@dataclass(frozen=True)
class HsTrace:
    iterations_run: int
    final_delta: float
    converged: bool
    energy_initial: float
    energy_final: float


def _smooth(channel):
    # gaussian_smooth without re-validating finiteness every sweep
    return _smooth_axis(_smooth_axis(channel, 1), 0)


def image_gradients(frame1, frame2):
    """``(I_x, I_y, I_t)``: Sobel derivatives of ``frame1`` and ``frame2 - frame1``."""
    it = temporal_gradient(frame1, frame2)
    ix, iy = spatial_gradients(frame1)
    return ix, iy, it


def _check_gradients(flow: FlowField, gradients) -> None:
    for g in gradients:
        if g.shape != flow.shape:
            raise ShapeError(
                f"gradient grid {g.shape[1]}x{g.shape[0]} does not match "
                f"flow {flow.width}x{flow.height}"
            )


def hs_update_step(flow: FlowField, gradients, params: HsParams) -> FlowField:
    """One simultaneous Horn-Schunck sweep over the whole field."""
    _check_gradients(flow, gradients)
    ix, iy, it = gradients
    u_avg = gaussian_smooth(flow.u)
    v_avg = gaussian_smooth(flow.v)
    common = ((ix * u_avg + iy * v_avg + it)
              / (params.alpha ** 2 + ix * ix + iy * iy + params.epsilon))
    return FlowField(u_avg - ix * common, v_avg - iy * common)


def _forward_diffs(channel: np.ndarray):
    dx = np.zeros_like(channel)
    dy = np.zeros_like(channel)
    dx[:, :-1] = channel[:, 1:] - channel[:, :-1]
    dy[:-1, :] = channel[1:, :] - channel[:-1, :]
    return dx, dy


def hs_energy(flow: FlowField, gradients, alpha: float) -> float:
    """Discrete Horn-Schunck energy of ``flow``.

    Sum over pixels of the squared OFCE residual plus ``alpha`` times the
    squared forward differences of ``u`` and ``v`` (zero past the last
    row and column). This is a diagnostic: the iteration itself uses
    Gaussian averaging and an ``alpha**2`` denominator.
    """
    _check_gradients(flow, gradients)
    ix, iy, it = gradients
    with np.errstate(over="ignore", invalid="ignore"):
        residual = ix * flow.u + iy * flow.v + it
        ux, uy = _forward_diffs(flow.u)
        vx, vy = _forward_diffs(flow.v)
        smooth = ux * ux + uy * uy + vx * vx + vy * vy
        return float(np.sum(residual * residual) + alpha * np.sum(smooth))


def hs_solve(frame1, frame2, initial_flow: FlowField | None = None,
             params: HsParams = HsParams()) -> tuple[FlowField, HsTrace]:
    """Iterate :func:`hs_update_step` from ``initial_flow`` (zero by default).

    Raises
    ------
    ShapeError
        If the frames or the initial flow disagree in size.
    NumericalInstabilityError
        If an iterate becomes non-finite; ``exc.iteration`` records when.
    """
    frame1 = as_image(frame1, "frame1")
    frame2 = as_image(frame2, "frame2")
    gradients = image_gradients(frame1, frame2)
    h, w = frame1.shape
    flow = zero_flow(w, h) if initial_flow is None else initial_flow
    _check_gradients(flow, gradients)

    energy_initial = hs_energy(flow, gradients, params.alpha)
    delta = float("inf")
    iterations = 0
    converged = False
    ix, iy, it = gradients
    denom = params.alpha ** 2 + ix * ix + iy * iy + params.epsilon
    u, v = flow.u, flow.v
    with np.errstate(over="ignore", invalid="ignore"):
        while iterations < params.max_iterations:
            iterations += 1
            u_avg = _smooth(u)
            v_avg = _smooth(v)
            common = (ix * u_avg + iy * v_avg + it) / denom
            u_new = u_avg - ix * common
            v_new = v_avg - iy * common
            du = u_new - u
            dv = v_new - v
            delta = float(np.sqrt(np.sum(du * du) + np.sum(dv * dv)))
            if not np.isfinite(delta):
                raise NumericalInstabilityError(
                    f"Horn-Schunck iterate became non-finite at iteration {iterations}",
                    iteration=iterations,
                )
            u, v = u_new, v_new
            if delta < params.convergence_threshold:
                converged = True
                break

    flow = FlowField(u, v)
    trace = HsTrace(
        iterations_run=iterations,
        final_delta=delta,
        converged=converged,
        energy_initial=energy_initial,
        energy_final=hs_energy(flow, gradients, params.alpha),
    )
    return flow, trace
