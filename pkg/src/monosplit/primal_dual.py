"""Primal-dual specializations of the accelerated splitting iteration.

Three blockwise steppers over a primal/dual pair (x, lam): ``saddle_step``
(nonsmooth f and g evaluated via proximal maps around a smooth coupling),
``composite_step`` (the dual update goes through prox of the conjugate g*),
and ``cone_step`` (the dual update is a cone projection shifted by the
constraint right-hand side). All three are instances of the generic packed
iteration on (x, lam); the packing order is always x-block first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .numkit import DimensionError, SparseMatrix, as_vector
from .operators import (ConeKind, ForwardOp, MonotoneOp, Problem,
                        _make_resolvent, project_cone)
from .splitters import (ParameterError, ResolvedParams, SolverConfig,
                        run_solver, validate_params)

__all__ = [
    "SaddleProblem",
    "PDState",
    "PDCertificates",
    "pack",
    "unpack",
    "as_inclusion",
    "pd_init",
    "saddle_step",
    "composite_step",
    "cone_step",
    "pd_certificates",
    "pd_diagnostics",
    "run_pd",
    "objective_value",
    "lagrangian",
    "compute_reference",
]


@dataclass
class SaddleProblem:
    """min f(x) + 0.5<x,Hx> - <x,h> subject to Ax - b in -K, in saddle form.

    ``f`` is the nonsmooth x-block operator (its resolvent is the prox),
    the smooth part has gradient Hx - h, and the dual block is governed by
    the cone K (ZERO_CONE encodes equality constraints). ``lipschitz`` is
    the step-rule bound sqrt((||H|| + ||A||)^2 + ||A||^2).
    """

    f: MonotoneOp
    H: Optional[SparseMatrix]
    h: Optional[np.ndarray]
    A: SparseMatrix
    b: np.ndarray
    cone: ConeKind
    lipschitz: float
    solution: Optional[Tuple[np.ndarray, np.ndarray]] = None
    gamma_default: Optional[float] = None
    prox_x: Callable = field(init=False, repr=False)

    def __post_init__(self):
        self.b = as_vector(self.b, "b")
        ny, nx = self.A.shape
        if self.b.shape[0] != ny:
            raise DimensionError("b must match the row count of A")
        if self.H is not None and self.H.shape != (nx, nx):
            raise DimensionError("H must be square and match the column count of A")
        if self.h is not None:
            self.h = as_vector(self.h, "h")
            if self.h.shape[0] != nx:
                raise DimensionError("h must match the column count of A")
        self.nx = nx
        self.ny = ny
        self.prox_x = _make_resolvent(self.f, nx)

    def grad_h(self, x: np.ndarray) -> np.ndarray:
        g = self.H.matvec(x) if self.H is not None else np.zeros_like(x)
        if self.h is not None:
            g = g - self.h
        return g


def pack(x, lam) -> np.ndarray:
    return np.concatenate([np.asarray(x, dtype=np.float64),
                           np.asarray(lam, dtype=np.float64)])


def unpack(z: np.ndarray, nx: int) -> Tuple[np.ndarray, np.ndarray]:
    return z[:nx], z[nx:]


def as_inclusion(sp: SaddleProblem) -> Problem:
    """The packed monotone inclusion equivalent to the saddle problem."""
    nx, ny = sp.nx, sp.ny
    H = sp.H if sp.H is not None else SparseMatrix(nx, nx, [])
    h = sp.h if sp.h is not None else np.zeros(nx)
    forward = ForwardOp.pd_qp(H, h, sp.A, sp.b, lipschitz=sp.lipschitz)
    monotone = MonotoneOp.product(
        [sp.f, MonotoneOp.normal_cone(sp.cone)], [nx, ny])
    solution = pack(*sp.solution) if sp.solution is not None else None
    return Problem(monotone=monotone, forward=forward, dim=nx + ny,
                   lipschitz=sp.lipschitz, solution=solution)


class PDState:
    """Rolling primal-dual state; ``k`` counts completed (x, lam) updates."""

    __slots__ = ("k", "x", "x_prev", "lam", "lam_prev", "y1_prev", "y2_prev",
                 "u", "v")

    def __init__(self):
        self.k = 0


def _dual_update(variant: str, sp: SaddleProblem, y2, aw, gamma):
    """The lambda update and its certificate for each variant.

    Certificates are formed as (projector input - output)/gamma so the
    membership they encode holds exactly (e.g. componentwise v <= 0 for the
    orthant), not just up to reassociation noise.
    """
    if variant == "saddle":
        # prox of g = indicator of the dual cone, coupling carries -b
        arg = y2 + gamma * (aw - sp.b)
        lam_new = project_cone(arg, sp.cone)
        v = (arg - lam_new) / gamma
    elif variant == "composite":
        # prox of g* with g* = <b, .> + indicator of the dual cone
        arg = y2 + gamma * aw - gamma * sp.b
        lam_new = project_cone(arg, sp.cone)
        v = (arg - lam_new) / gamma + sp.b
    elif variant == "cone":
        arg = y2 + gamma * (aw - sp.b)
        lam_new = project_cone(arg, sp.cone)
        v = (arg - lam_new) / gamma
    else:
        raise ParameterError(f"unknown primal-dual variant {variant!r}")
    return lam_new, v


def pd_init(sp: SaddleProblem, params: ResolvedParams,
            x0, lam0, y10=None, y20=None, w10=None, w20=None,
            variant: str = "cone") -> PDState:
    x0 = as_vector(x0, "x0")
    lam0 = as_vector(lam0, "lam0")
    y10 = x0.copy() if y10 is None else as_vector(y10, "y10")
    y20 = lam0.copy() if y20 is None else as_vector(y20, "y20")
    w10 = x0.copy() if w10 is None else as_vector(w10, "w10")
    w20 = lam0.copy() if w20 is None else as_vector(w20, "w20")
    gamma = params.gamma
    state = PDState()
    gx = sp.grad_h(w10) + sp.A.rmatvec(w20)
    aw = sp.A.matvec(w10)
    xarg = y10 - gamma * gx
    x1 = sp.prox_x(xarg, gamma)
    lam1, v1 = _dual_update(variant, sp, y20, aw, gamma)
    state.k = 1
    state.x = x1
    state.x_prev = x0.copy()
    state.lam = lam1
    state.lam_prev = lam0.copy()
    state.y1_prev = y10.copy()
    state.y2_prev = y20.copy()
    state.u = (xarg - x1) / gamma
    state.v = v1
    return state


def _pd_step(state: PDState, params: ResolvedParams, sp: SaddleProblem,
             variant: str) -> None:
    alpha, c, gamma = params.alpha, params.c, params.gamma
    k = float(state.k)
    t = 1.0 / (k + alpha)
    x, lam = state.x, state.lam
    y1 = x + (1.0 - alpha * t) * (x - state.x_prev) + (1.0 - c * t) * (state.y1_prev - x)
    y2 = lam + (1.0 - alpha * t) * (lam - state.lam_prev) + (1.0 - c * t) * (state.y2_prev - lam)
    w1 = y1 - (state.y1_prev - x)
    w2 = y2 - (state.y2_prev - lam)
    gx = sp.grad_h(w1) + sp.A.rmatvec(w2)
    aw = sp.A.matvec(w1)
    xarg = y1 - gamma * gx
    x_new = sp.prox_x(xarg, gamma)
    lam_new, v_new = _dual_update(variant, sp, y2, aw, gamma)
    state.u = (xarg - x_new) / gamma
    state.v = v_new
    state.x_prev = x
    state.lam_prev = lam
    state.y1_prev = y1
    state.y2_prev = y2
    state.x = x_new
    state.lam = lam_new
    state.k += 1


def saddle_step(state: PDState, params: ResolvedParams, sp: SaddleProblem) -> None:
    _pd_step(state, params, sp, "saddle")


def composite_step(state: PDState, params: ResolvedParams, sp: SaddleProblem) -> None:
    _pd_step(state, params, sp, "composite")


def cone_step(state: PDState, params: ResolvedParams, sp: SaddleProblem) -> None:
    _pd_step(state, params, sp, "cone")


@dataclass(frozen=True)
class PDCertificates:
    u: np.ndarray   # element of the f-subdifferential at x_k
    v: np.ndarray   # element of the dual-block operator at lam_k


def pd_certificates(state: PDState) -> PDCertificates:
    return PDCertificates(u=state.u.copy(), v=state.v.copy())


def objective_value(sp: SaddleProblem, x: np.ndarray) -> float:
    """(f + h)(x) with f the weighted l1 part (0 for the zero operator)."""
    if sp.f.kind == "l1":
        fval = sp.f.weight * float(np.sum(np.abs(x)))
    elif sp.f.kind == "zero":
        fval = 0.0
    else:
        raise ParameterError(f"objective not available for f of kind {sp.f.kind!r}")
    smooth = 0.0
    if sp.H is not None:
        smooth += 0.5 * float(np.dot(x, sp.H.matvec(x)))
    if sp.h is not None:
        smooth -= float(np.dot(sp.h, x))
    return fval + smooth


def lagrangian(sp: SaddleProblem, x: np.ndarray, lam: np.ndarray) -> float:
    """f(x) + h(x) + <lam, Ax - b>; the dual-cone indicator is kept implicit."""
    return objective_value(sp, x) + float(np.dot(lam, sp.A.matvec(x) - sp.b))


def pd_diagnostics(state_or_pair, certs: PDCertificates, sp: SaddleProblem,
                   reference: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> dict:
    """Velocities, stationarity, feasibility, complementarity and gaps.

    ``state_or_pair`` is either a PDState or an (x, lam) pair (velocities
    are then reported as nan). Gap fields are nan without a reference.
    """
    if isinstance(state_or_pair, PDState):
        x, lam = state_or_pair.x, state_or_pair.lam
        vel_x = float(np.linalg.norm(x - state_or_pair.x_prev))
        vel_lam = float(np.linalg.norm(lam - state_or_pair.lam_prev))
    else:
        x, lam = state_or_pair
        vel_x = vel_lam = float("nan")
    u, v = certs.u, certs.v
    ax = sp.A.matvec(x)
    rec = {
        "vel_x": vel_x,
        "vel_lam": vel_lam,
        "tangent": float(np.linalg.norm(u + sp.grad_h(x) + sp.A.rmatvec(lam))),
        "feasibility": float(np.linalg.norm(v - ax + sp.b)),
        "complementarity": float(abs(np.dot(lam, ax - sp.b))),
        "lagrangian_gap": float("nan"),
        "obj_gap": float("nan"),
    }
    if reference is not None:
        x_star, lam_star = reference
        rec["lagrangian_gap"] = lagrangian(sp, x, lam_star) - lagrangian(sp, x_star, lam)
        rec["obj_gap"] = abs(objective_value(sp, x) - objective_value(sp, x_star))
    return rec


_STEPPERS = {"saddle": saddle_step, "composite": composite_step, "cone": cone_step}


def run_pd(sp: SaddleProblem, config: SolverConfig, variant: str = "cone",
           x0=None, lam0=None, y10=None, y20=None, w10=None, w20=None,
           max_iter: Optional[int] = None,
           observer: Optional[Callable[[PDState], None]] = None) -> PDState:
    """Drive one primal-dual variant for a fixed number of iterations."""
    if variant not in _STEPPERS:
        raise ParameterError(f"unknown primal-dual variant {variant!r}")
    if config.method != "fast_rfb":
        raise ParameterError("primal-dual steppers implement the fast_rfb iteration")
    params = validate_params(config, sp.lipschitz)
    x0 = np.zeros(sp.nx) if x0 is None else as_vector(x0, "x0")
    lam0 = np.zeros(sp.ny) if lam0 is None else as_vector(lam0, "lam0")
    state = pd_init(sp, params, x0, lam0, y10, y20, w10, w20, variant=variant)
    if observer is not None:
        observer(state)
    step = _STEPPERS[variant]
    limit = config.max_iter if max_iter is None else max_iter
    while state.k < limit:
        step(state, params, sp)
        if observer is not None:
            observer(state)
    return state


def compute_reference(sp: SaddleProblem, alpha: float = 10.0, tol: float = 1e-9,
                      max_iter: int = 2_000_000) -> Tuple[np.ndarray, np.ndarray]:
    """High-accuracy primal-dual solution from a long fast_rfb run.

    Runs the packed iteration until the stationarity residual drops below
    ``tol`` (or the cap is hit), then freezes the iterate as (x*, lam*).
    """
    problem = as_inclusion(sp)
    config = SolverConfig(method="fast_rfb", alpha=alpha, max_iter=max_iter)

    class _Stop:
        kind = "kkt_norm"
        epsilon = tol

    trace = run_solver(problem, config, stop=_Stop(), record_every=0)
    x_star, lam_star = unpack(trace.final_z, sp.nx)
    return x_star.copy(), lam_star.copy()
