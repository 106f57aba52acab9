"""Splitting methods for 0 in M(z) + F(z) behind one stepping interface.

The accelerated reflected forward-backward iteration is implemented in its
two equivalent forms (the three-line extrapolation form and the certificate
form that carries an explicit element ``xi_k in M(z_k)``), together with the
baseline methods it is benchmarked against: eg, ogda, fbf, pfbf, frb, rfb,
arg, aeg and apeg. Every step performs its published number of forward
evaluations; diagnostics requested by the driver may add one more.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .numkit import as_vector
from .operators import Problem

__all__ = [
    "ParameterError",
    "SolverConfig",
    "SolverState",
    "IterateTrace",
    "StateSnapshot",
    "METHODS",
    "gamma_cap",
    "default_c",
    "validate_params",
    "fast_rfb_init",
    "iterate",
    "run_solver",
    "collect_snapshots",
    "residual_upper",
]

METHODS = ("fast_rfb", "eg", "ogda", "fbf", "pfbf", "frb", "rfb", "arg", "aeg", "apeg")

_SQRT2 = math.sqrt(2.0)


class ParameterError(ValueError):
    """A solver parameter violates its published constraint."""


def gamma_cap(method: str, L: float) -> float:
    """Largest admissible step size for the method at Lipschitz bound L."""
    if L <= 0:
        raise ParameterError("Lipschitz bound L must be positive")
    caps = {
        "fast_rfb": 0.5 / L,
        "eg": 1.0 / L,
        "ogda": 0.5 / L,
        "fbf": 1.0 / L,
        "pfbf": 0.5 / L,
        "frb": 0.5 / L,
        "rfb": (_SQRT2 - 1.0) / L,
        "arg": 1.0 / (2.0 * math.sqrt(6.0) * L),
        "aeg": 1.0 / L,
        "apeg": 3.0 / (2.0 * math.sqrt(29.0) * L),
    }
    if method not in caps:
        raise ParameterError(f"unknown method {method!r}")
    return caps[method]


# arg and apeg admit gamma equal to the cap; the others are strict
_CLOSED_CAP = frozenset({"arg", "apeg"})


def default_c(alpha: float) -> float:
    """Benchmark default for the correction parameter, (alpha + 0.1(alpha-2))/2."""
    return (alpha + 0.1 * (alpha - 2.0)) / 2.0


@dataclass
class SolverConfig:
    method: str = "fast_rfb"
    alpha: float = 5.0
    c: Optional[float] = None          # None -> default_c(alpha)
    gamma: Optional[float] = None      # None -> safety * gamma_cap(method, L)
    eta: float = 1.0                   # eg/ogda resolvent scaling
    safety: float = 0.99
    max_iter: int = 10000
    form: str = "certificate"          # fast_rfb: primal | certificate | both


@dataclass(frozen=True)
class ResolvedParams:
    method: str
    alpha: float
    c: float
    gamma: float
    eta: float
    form: str


def validate_params(config: SolverConfig, L: float) -> ResolvedParams:
    """Check the method's published constraints; resolve defaulted values.

    Raises :class:`ParameterError` naming the failing inequality.
    """
    method = config.method
    cap = gamma_cap(method, L)
    gamma = config.gamma if config.gamma is not None else config.safety * cap
    if not (0.0 < config.safety < 1.0):
        raise ParameterError(f"safety must lie in (0, 1), got {config.safety}")
    if gamma <= 0.0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if method in _CLOSED_CAP:
        if gamma > cap:
            raise ParameterError(
                f"{method} requires gamma <= {cap:.6g} (= its step cap at L={L:.6g}), got {gamma:.6g}")
    elif gamma >= cap:
        raise ParameterError(
            f"{method} requires gamma < {cap:.6g} (= its step cap at L={L:.6g}), got {gamma:.6g}")
    alpha = float(config.alpha)
    c = float(config.c) if config.c is not None else default_c(alpha)
    if method == "fast_rfb":
        if not alpha > 2.0:
            raise ParameterError(f"fast_rfb requires alpha > 2, got alpha={alpha}")
        if not c > alpha / 2.0:
            raise ParameterError(f"fast_rfb requires c > alpha/2 = {alpha / 2.0}, got c={c}")
        if not c < alpha - 1.0:
            raise ParameterError(f"fast_rfb requires c < alpha - 1 = {alpha - 1.0}, got c={c}")
        if config.form not in ("primal", "certificate", "both"):
            raise ParameterError(f"unknown fast_rfb form {config.form!r}")
    if method in ("eg", "ogda") and not config.eta > 0.0:
        raise ParameterError(f"{method} requires eta > 0, got eta={config.eta}")
    if config.max_iter < 1:
        raise ParameterError("max_iter must be at least 1")
    return ResolvedParams(method, alpha, c, gamma, float(config.eta), config.form)


class SolverState:
    """Rolling state of one run; owned exclusively by that run.

    ``k`` counts completed iterate updates, ``z`` is the current iterate,
    ``cert`` the point carrying the certificate ``xi in M(cert)`` (the last
    resolvent output; equals ``z`` except for fbf/pfbf/aeg/apeg), ``F_cert``
    the forward value at ``cert`` when the step computed it anyway.
    """

    __slots__ = ("method", "k", "z", "z_prev", "cert", "xi", "F_cert",
                 "v", "Fw_prev", "y_prev", "Fz", "Fz_prev", "anchor",
                 "x_prev", "w_aux", "j", "s_z", "s_z_prev", "s_y_prev",
                 "form_dev")

    def __init__(self, method: str):
        self.method = method
        self.k = 0
        self.z = None
        self.z_prev = None
        self.cert = None
        self.xi = None
        self.F_cert = None
        self.v = None
        self.Fw_prev = None
        self.y_prev = None
        self.Fz = None
        self.Fz_prev = None
        self.anchor = None
        self.x_prev = None
        self.w_aux = None
        self.j = 1
        self.s_z = None
        self.s_z_prev = None
        self.s_y_prev = None
        self.form_dev = 0.0


# ---------------------------------------------------------------------------
# fast reflected forward-backward


def fast_rfb_init(problem: Problem, params: ResolvedParams,
                  z0: np.ndarray, y0: np.ndarray, w0: np.ndarray) -> SolverState:
    """Compute z_1 = J(y_0 - gamma F(w_0)) and its certificate."""
    gamma = params.gamma
    state = SolverState("fast_rfb")
    Fw0 = problem.apply_forward(w0)
    z1 = problem.apply_resolvent(y0 - gamma * Fw0, gamma)
    v1 = (y0 - z1) / gamma            # v_1 = xi_1 + F(w_0)
    state.k = 1
    state.z = z1
    state.z_prev = z0.copy()
    state.v = v1
    state.Fw_prev = Fw0
    state.xi = v1 - Fw0
    state.cert = z1
    if params.form in ("primal", "both"):
        state.y_prev = y0.copy()
    if params.form == "both":
        state.s_z = z1.copy()
        state.s_z_prev = z0.copy()
        state.s_y_prev = y0.copy()
    return state


def _fast_rfb_primal_lines(z, z_prev, y_prev, k, alpha, c, gamma, problem):
    t = 1.0 / (k + alpha)
    y = z + (1.0 - alpha * t) * (z - z_prev) + (1.0 - c * t) * (y_prev - z)
    w = z + (y - y_prev)
    Fw = problem.apply_forward(w)
    z_new = problem.apply_resolvent(y - gamma * Fw, gamma)
    return y, Fw, z_new


def fast_rfb_step(state: SolverState, params: ResolvedParams, problem: Problem) -> None:
    alpha, c, gamma = params.alpha, params.c, params.gamma
    k = state.k
    if params.form == "primal":
        y, Fw, z_new = _fast_rfb_primal_lines(
            state.z, state.z_prev, state.y_prev, k, alpha, c, gamma, problem)
        v_new = (y - z_new) / gamma
        state.y_prev = y
    else:
        t = 1.0 / (k + alpha)
        z, v = state.z, state.v
        w = z + (k * t) * (z - state.z_prev) - (c * gamma * t) * v
        Fw = problem.apply_forward(w)
        z_new = problem.apply_resolvent(w - gamma * (Fw - v), gamma)
        v_new = v + (w - z_new) / gamma
        if params.form == "both":
            sy, _, sz_new = _fast_rfb_primal_lines(
                state.s_z, state.s_z_prev, state.s_y_prev, k, alpha, c, gamma, problem)
            state.s_y_prev = sy
            state.s_z_prev = state.s_z
            state.s_z = sz_new
            state.form_dev = float(np.linalg.norm(z_new - sz_new)) / (
                1.0 + float(np.linalg.norm(z_new)))
    state.z_prev = state.z
    state.z = z_new
    state.v = v_new
    state.Fw_prev = Fw
    state.xi = v_new - Fw
    state.cert = z_new
    state.F_cert = None
    state.k = k + 1


# ---------------------------------------------------------------------------
# baseline methods


def _eg_init(problem, params, z0, y0, w0):
    state = SolverState("eg")
    state.z = z0.copy()
    state.Fz = problem.apply_forward(z0)
    return state


def eg_step(state, params, problem):
    gamma, eta = params.gamma, params.eta
    z = state.z
    g1 = gamma / eta
    w = problem.apply_resolvent(z - g1 * state.Fz, g1)
    Fw = problem.apply_forward(w)
    arg = z - gamma * Fw
    z_new = problem.apply_resolvent(arg, gamma)
    state.xi = (arg - z_new) / gamma
    Fz_new = problem.apply_forward(z_new)
    state.z = z_new
    state.Fz = Fz_new
    state.cert = z_new
    state.F_cert = Fz_new
    state.k += 1


def _ogda_init(problem, params, z0, y0, w0):
    # w_0 = z_0, so the first step degenerates toward an eg-like step
    state = SolverState("ogda")
    state.z = z0.copy()
    state.Fw_prev = problem.apply_forward(z0)
    return state


def ogda_step(state, params, problem):
    gamma, eta = params.gamma, params.eta
    z = state.z
    g1 = gamma / eta
    w = problem.apply_resolvent(z - g1 * state.Fw_prev, g1)
    Fw = problem.apply_forward(w)
    arg = z - gamma * Fw
    z_new = problem.apply_resolvent(arg, gamma)
    state.xi = (arg - z_new) / gamma
    state.Fw_prev = Fw
    state.z = z_new
    state.cert = z_new
    state.F_cert = None
    state.k += 1


def _fbf_init(problem, params, z0, y0, w0):
    state = SolverState("fbf")
    state.z = z0.copy()
    return state


def fbf_step(state, params, problem):
    gamma = params.gamma
    z = state.z
    Fz = problem.apply_forward(z)
    argw = z - gamma * Fz
    w = problem.apply_resolvent(argw, gamma)
    Fw = problem.apply_forward(w)
    state.z = w - gamma * Fw + gamma * Fz
    state.cert = w
    state.xi = (argw - w) / gamma
    state.F_cert = Fw
    state.k += 1


def _pfbf_init(problem, params, z0, y0, w0):
    state = SolverState("pfbf")
    state.z = z0.copy()
    state.Fw_prev = problem.apply_forward(z0)
    return state


def pfbf_step(state, params, problem):
    gamma = params.gamma
    z = state.z
    argw = z - gamma * state.Fw_prev
    w = problem.apply_resolvent(argw, gamma)
    Fw = problem.apply_forward(w)
    state.z = w - gamma * Fw + gamma * state.Fw_prev
    state.Fw_prev = Fw
    state.cert = w
    state.xi = (argw - w) / gamma
    state.F_cert = Fw
    state.k += 1


def _frb_init(problem, params, z0, y0, w0):
    # z_1 = z_0, so F(z_1) and F(z_0) coincide at the start
    state = SolverState("frb")
    state.z = z0.copy()
    state.Fz = problem.apply_forward(z0)
    state.Fz_prev = state.Fz
    return state


def frb_step(state, params, problem):
    gamma = params.gamma
    z = state.z
    arg = z - gamma * (2.0 * state.Fz - state.Fz_prev)
    z_new = problem.apply_resolvent(arg, gamma)
    state.xi = (arg - z_new) / gamma
    Fz_new = problem.apply_forward(z_new)
    state.Fz_prev = state.Fz
    state.Fz = Fz_new
    state.z = z_new
    state.cert = z_new
    state.F_cert = Fz_new
    state.k += 1


def _rfb_init(problem, params, z0, y0, w0):
    state = SolverState("rfb")
    state.z = z0.copy()
    state.z_prev = z0.copy()
    return state


def rfb_step(state, params, problem):
    gamma = params.gamma
    z = state.z
    w = 2.0 * z - state.z_prev
    Fw = problem.apply_forward(w)
    arg = z - gamma * Fw
    z_new = problem.apply_resolvent(arg, gamma)
    state.xi = (arg - z_new) / gamma
    state.z_prev = z
    state.z = z_new
    state.cert = z_new
    state.F_cert = None
    state.k += 1


def _arg_init(problem, params, z0, y0, w0):
    state = SolverState("arg")
    state.z = z0.copy()
    state.z_prev = z0.copy()
    state.anchor = z0.copy()
    state.j = 1
    return state


def arg_step(state, params, problem):
    gamma = params.gamma
    j = float(state.j)
    z, z_prev, anchor = state.z, state.z_prev, state.anchor
    x = 2.0 * z - z_prev + (anchor - z) / (j + 1.0) - (anchor - z_prev) / j
    Fx = problem.apply_forward(x)
    arg = z - gamma * Fx + (anchor - z) / (j + 1.0)
    z_new = problem.apply_resolvent(arg, gamma)
    state.xi = (arg - z_new) / gamma
    state.z_prev = z
    state.z = z_new
    state.cert = z_new
    state.F_cert = None
    state.j += 1
    state.k += 1


def _aeg_init(problem, params, z0, y0, w0):
    # x_0 = z_1 = z_0 and w_0 = 0; the recursion computes x_1 itself
    state = SolverState("aeg")
    state.z = z0.copy()
    state.x_prev = z0.copy()
    state.w_aux = np.zeros_like(z0)
    state.j = 1
    return state


def aeg_step(state, params, problem):
    gamma = params.gamma
    j = float(state.j)
    z = state.z
    Fz = problem.apply_forward(z)
    m = (j + 1.0) / (j + 2.0)
    arg = z - gamma * Fz + (m * gamma) * state.w_aux
    x = problem.apply_resolvent(arg, gamma)
    Fx = problem.apply_forward(x)
    w_new = (z - x + (m * gamma) * state.w_aux) / gamma + Fx - Fz
    z_new = (x + ((j + 1.0) / (j + 3.0)) * (x - state.x_prev)
             - ((j + 2.0) / (j + 3.0)) * gamma * (Fx - Fz))
    state.xi = (arg - x) / gamma
    state.cert = x
    state.F_cert = Fx
    state.x_prev = x
    state.w_aux = w_new
    state.z = z_new
    state.j += 1
    state.k += 1


def _apeg_init(problem, params, z0, y0, w0):
    state = SolverState("apeg")
    state.z = z0.copy()
    state.x_prev = z0.copy()
    state.w_aux = np.zeros_like(z0)
    state.j = 1
    return state


def apeg_step(state, params, problem):
    gamma = params.gamma
    j = float(state.j)
    z = state.z
    Fz = problem.apply_forward(z)
    m = (j + 1.0) / (j + 2.0)
    arg = z - gamma * Fz + (m * gamma) * state.w_aux
    x = problem.apply_resolvent(arg, gamma)
    w_new = (z - x + (m * gamma) * state.w_aux) / gamma
    z_new = (x + ((j + 1.0) / (j + 3.0)) * (x - state.x_prev)
             + (5.0 * (j + 2.0) / (6.0 * (j + 3.0))) * gamma * w_new
             - (5.0 * (j + 1.0) / (6.0 * (j + 3.0))) * gamma * state.w_aux)
    state.xi = (arg - x) / gamma
    state.cert = x
    state.F_cert = None
    state.x_prev = x
    state.w_aux = w_new
    state.z = z_new
    state.j += 1
    state.k += 1


_INIT = {
    "eg": _eg_init, "ogda": _ogda_init, "fbf": _fbf_init, "pfbf": _pfbf_init,
    "frb": _frb_init, "rfb": _rfb_init, "arg": _arg_init, "aeg": _aeg_init,
    "apeg": _apeg_init,
}
_STEP = {
    "fast_rfb": fast_rfb_step, "eg": eg_step, "ogda": ogda_step, "fbf": fbf_step,
    "pfbf": pfbf_step, "frb": frb_step, "rfb": rfb_step, "arg": arg_step,
    "aeg": aeg_step, "apeg": apeg_step,
}


def residual_upper(state: SolverState, problem: Problem) -> float:
    """||xi + F(p)|| at the certified point p; evaluates F(p) if not cached."""
    Fc = state.F_cert
    if Fc is None:
        Fc = problem.apply_forward(state.cert)
        state.F_cert = Fc
    return float(np.linalg.norm(state.xi + Fc))


def _prepare_initial_points(problem, z0, y0, w0):
    z0 = np.zeros(problem.dim) if z0 is None else as_vector(z0, "z0").copy()
    if z0.shape[0] != problem.dim:
        raise ParameterError(f"z0 has length {z0.shape[0]}, problem dimension is {problem.dim}")
    y0 = z0.copy() if y0 is None else as_vector(y0, "y0").copy()
    w0 = z0.copy() if w0 is None else as_vector(w0, "w0").copy()
    if y0.shape[0] != problem.dim or w0.shape[0] != problem.dim:
        raise ParameterError("y0/w0 length does not match the problem dimension")
    return z0, y0, w0


def iterate(problem: Problem, config: SolverConfig,
            z0=None, y0=None, w0=None,
            max_iter: Optional[int] = None) -> Iterator[SolverState]:
    """Yield the solver state after every iterate update.

    Iteration k=1 is the first computed iterate; for fast_rfb that is the
    explicit z_1 initialization, which costs the same one forward evaluation
    and one resolvent as a regular step. The yielded state is mutated in
    place between yields; consumers keeping history must copy.
    """
    params = validate_params(config, problem.lipschitz)
    z0, y0, w0 = _prepare_initial_points(problem, z0, y0, w0)
    limit = config.max_iter if max_iter is None else max_iter
    if params.method == "fast_rfb":
        state = fast_rfb_init(problem, params, z0, y0, w0)
        yield state
    else:
        state = _INIT[params.method](problem, params, z0, y0, w0)
    step = _STEP[params.method]
    while state.k < limit:
        step(state, params, problem)
        yield state


@dataclass
class IterateTrace:
    """Per-iteration diagnostics of one completed run."""

    method: str
    k: np.ndarray
    velocity: np.ndarray
    resid_upper: np.ndarray
    v_norm: np.ndarray
    time_s: np.ndarray
    fix_residual: Optional[np.ndarray] = None
    form_deviation: Optional[np.ndarray] = None
    iterations: int = 0
    success: bool = False
    hit_k: Optional[int] = None
    wall_time: float = 0.0
    final_z: Optional[np.ndarray] = None
    final_xi: Optional[np.ndarray] = None


def run_solver(problem: Problem, config: SolverConfig, stop=None,
               z0=None, y0=None, w0=None, *, record_every: int = 1,
               fix_residual: bool = False,
               observer: Optional[Callable[[SolverState], None]] = None) -> IterateTrace:
    """Drive a method until the stopping rule fires or max_iter is reached.

    ``stop`` is anything with attributes ``kind`` ("kkt_norm" or "none") and
    ``epsilon``; the kkt_norm rule fires when ||xi_k + F(z_k)|| <= epsilon at
    the certified iterate and is evaluated on every iteration. Hitting
    max_iter is not an error: the trace reports success=False.
    ``record_every=0`` disables per-iteration records (counters still kept).
    """
    eps = None
    if stop is not None and getattr(stop, "kind", "none") == "kkt_norm":
        eps = float(stop.epsilon)
        if eps <= 0:
            raise ParameterError("stopping epsilon must be positive")
    gamma = validate_params(config, problem.lipschitz).gamma
    z0, y0, w0 = _prepare_initial_points(problem, z0, y0, w0)
    need_resid = eps is not None or record_every > 0
    track_prev = record_every > 0
    ks, vels, resids, vnorms, times = [], [], [], [], []
    fixes = [] if fix_residual else None
    fdevs = [] if (config.method == "fast_rfb" and config.form == "both") else None
    success = False
    hit_k = None
    prev_z = z0.copy() if track_prev else None
    t0 = time.perf_counter()
    state = None
    for state in iterate(problem, config, z0, y0, w0):
        resid = residual_upper(state, problem) if need_resid else None
        if record_every > 0 and (state.k % record_every == 0 or state.k == 1):
            ks.append(state.k)
            if state.z_prev is not None:
                vels.append(float(np.linalg.norm(state.z - state.z_prev)))
            else:
                vels.append(float(np.linalg.norm(state.z - prev_z)))
            resids.append(resid)
            vnorms.append(float(np.linalg.norm(state.v)) if state.v is not None else float("nan"))
            times.append(time.perf_counter() - t0)
            if fixes is not None:
                Fc = state.F_cert
                if Fc is None:
                    Fc = problem.apply_forward(state.cert)
                    state.F_cert = Fc
                jj = problem.apply_resolvent(state.cert - gamma * Fc, gamma)
                fixes.append(float(np.linalg.norm(state.cert - jj)))
            if fdevs is not None:
                fdevs.append(state.form_dev)
        if track_prev and state.z_prev is None:
            prev_z = state.z.copy()
        if observer is not None:
            observer(state)
        if eps is not None and resid <= eps:
            success = True
            hit_k = state.k
            break
    wall = time.perf_counter() - t0
    trace = IterateTrace(
        method=config.method,
        k=np.asarray(ks, dtype=np.int64),
        velocity=np.asarray(vels, dtype=np.float64),
        resid_upper=np.asarray(resids, dtype=np.float64),
        v_norm=np.asarray(vnorms, dtype=np.float64),
        time_s=np.asarray(times, dtype=np.float64),
        fix_residual=None if fixes is None else np.asarray(fixes, dtype=np.float64),
        form_deviation=None if fdevs is None else np.asarray(fdevs, dtype=np.float64),
        iterations=0 if state is None else state.k,
        success=success,
        hit_k=hit_k,
        wall_time=wall,
        final_z=None if state is None else state.z.copy(),
        final_xi=None if state is None or state.xi is None else state.xi.copy(),
    )
    return trace


@dataclass(frozen=True)
class StateSnapshot:
    """Frozen per-iteration quantities of a fast_rfb run, for energy checks."""

    k: int
    z: np.ndarray
    z_prev: np.ndarray
    v: np.ndarray
    xi: np.ndarray
    F_w_prev: np.ndarray
    F_z: np.ndarray


def snapshot(state: SolverState, problem: Problem) -> StateSnapshot:
    if state.v is None:
        raise ParameterError("snapshots require a fast_rfb state (v_k is method-specific)")
    Fz = state.F_cert
    if Fz is None:
        Fz = problem.apply_forward(state.z)
        state.F_cert = Fz
    return StateSnapshot(
        k=state.k, z=state.z.copy(), z_prev=state.z_prev.copy(), v=state.v.copy(),
        xi=state.xi.copy(), F_w_prev=state.Fw_prev.copy(), F_z=Fz.copy())


def collect_snapshots(problem: Problem, config: SolverConfig,
                      z0=None, y0=None, w0=None, k_max: int = 1000):
    """Run fast_rfb for k_max iterations and return one snapshot per k."""
    snaps = []
    for state in iterate(problem, config, z0, y0, w0, max_iter=k_max):
        snaps.append(snapshot(state, problem))
    return snaps
