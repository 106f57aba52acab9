"""Benchmark problems, stopping rules, and experiment drivers.

The chain-structured quadratic program behind all experiments: A is the
(1/4)-scaled anti-diagonal first-difference pattern, H = 2 A^T A, the
objective is ||x||_1 + 0.5<x,Hx> - <x,h> with constraint Ax - b in -K
(K the nonnegative orthant, or {0} for the equality-constrained variant).
Iteration counts are aggregated the way the comparison tables report them:
statistics over successful runs only, NaN rows when every seed fails.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse.linalg as _spla

from .numkit import SparseMatrix, as_vector, operator_norm
from .operators import ConeKind, ForwardOp, MonotoneOp, Problem, prox_l1
from .primal_dual import SaddleProblem, as_inclusion, compute_reference
from .splitters import (ParameterError, SolverConfig, iterate, residual_upper,
                        run_solver)

__all__ = [
    "StoppingRule",
    "MethodStats",
    "ExperimentReport",
    "build_chain_matrix",
    "build_qp_problem",
    "build_known_solution_problem",
    "chain_eq_solution",
    "reference_solution",
    "kkt_residual",
    "table_method_configs",
    "TABLE_METHOD_ORDER",
    "draw_initial_points",
    "hitting_times",
    "run_table_experiment",
    "run_parameter_study",
    "chain_norms",
]

NORM_TOL = 1e-12
NORM_MAX_ITER = 5_000_000

_NORM_CACHE: Dict[int, Tuple[float, float]] = {}


@dataclass(frozen=True)
class StoppingRule:
    """kkt_norm stops when ||V(x_k, lam_k)|| <= epsilon; 'none' never fires."""

    kind: str = "kkt_norm"
    epsilon: float = 1e-1

    def __post_init__(self):
        if self.kind not in ("kkt_norm", "none"):
            raise ParameterError(f"unknown stopping rule {self.kind!r}")
        if self.kind == "kkt_norm" and self.epsilon <= 0:
            raise ParameterError("epsilon must be positive")


def build_chain_matrix(n: int) -> SparseMatrix:
    """The (1/4)-scaled anti-diagonal difference matrix.

    Rows i = 1..n-1 carry -1/4 at column n-i and +1/4 at column n-i+1
    (1-based); row n carries +1/4 at column 1. 2n-1 stored entries.
    """
    if n < 2:
        raise ParameterError("chain matrix needs n >= 2")
    triples = []
    for i in range(n - 1):          # 0-based row i, columns n-i-2 and n-i-1
        triples.append((i, n - i - 2, -0.25))
        triples.append((i, n - i - 1, 0.25))
    triples.append((n - 1, 0, 0.25))
    return SparseMatrix(n, n, triples)


def chain_norms(n: int) -> Tuple[float, float]:
    """Cached spectral norms (||A||, ||H||) of the chain data at size n."""
    if n not in _NORM_CACHE:
        A = build_chain_matrix(n)
        H = SparseMatrix.from_scipy(2.0 * (A.tocsr().T @ A.tocsr()))
        na = operator_norm(A, tol=NORM_TOL, max_iter=NORM_MAX_ITER)
        nh = operator_norm(H, tol=NORM_TOL, max_iter=NORM_MAX_ITER)
        _NORM_CACHE[n] = (na, nh)
    return _NORM_CACHE[n]


def build_qp_problem(n: int, cone: ConeKind = ConeKind.ZERO_CONE) -> SaddleProblem:
    """Assemble the chain QP: H = 2 A^T A, b = (1/4)(1,..,1,-4), h = (1/4)e_n."""
    if n < 2:
        raise ParameterError("chain QP needs n >= 2")
    A = build_chain_matrix(n)
    H = SparseMatrix.from_scipy(2.0 * (A.tocsr().T @ A.tocsr()))
    b = np.full(n, 0.25)
    b[-1] = -1.0
    h = np.zeros(n)
    h[-1] = 0.25
    na, nh = chain_norms(n)
    lipschitz = math.sqrt((nh + na) ** 2 + na ** 2)
    return SaddleProblem(
        f=MonotoneOp.l1(1.0), H=H, h=h, A=A, b=b, cone=cone,
        lipschitz=lipschitz, gamma_default=0.99 / (2.0 * lipschitz))


_REF_CACHE: Dict[Tuple[int, ConeKind], Tuple[np.ndarray, np.ndarray]] = {}


def chain_eq_solution(n: int) -> np.ndarray:
    """Closed-form primal solution of the equality-constrained chain QP.

    A is invertible, so Ax = b pins the unique feasible (hence optimal)
    point: x*_j = j - 5.
    """
    return np.arange(1, n + 1, dtype=np.float64) - 5.0


def reference_solution(sp: SaddleProblem) -> Tuple[np.ndarray, np.ndarray]:
    """Cached high-accuracy (x*, lam*) pair for a chain QP.

    The equality variant has an exact pair: x* is closed form and lam*
    solves A^T lam = h - H x* - u with the subgradient choice u = sign(x*).
    The orthant variant falls back to a long accelerated self-run.
    """
    key = (sp.nx, sp.cone)
    if key not in _REF_CACHE:
        if sp.cone is ConeKind.ZERO_CONE:
            x_star = chain_eq_solution(sp.nx)
            u = np.sign(x_star)
            rhs = sp.h - sp.H.matvec(x_star) - u
            lam_star = _spla.spsolve(sp.A.tocsr().T.tocsr(), rhs)
            _REF_CACHE[key] = (x_star, np.asarray(lam_star, dtype=np.float64))
        else:
            _REF_CACHE[key] = compute_reference(sp, alpha=10.0, tol=1e-9,
                                                max_iter=2_000_000)
    return _REF_CACHE[key]


def build_known_solution_problem(a) -> Problem:
    """l1 + shifted identity: M = d||.||_1, F(z) = z - a, zero at soft(a, 1)."""
    a = as_vector(a, "a")
    return Problem(
        monotone=MonotoneOp.l1(1.0),
        forward=ForwardOp.shift_identity(a),
        dim=a.shape[0],
        lipschitz=1.0,
        solution=prox_l1(a, 1.0),
    )


def kkt_residual(x, lam, u, sp: SaddleProblem) -> np.ndarray:
    """Stacked optimality residual (u + Hx - h + A^T lam; b - Ax)."""
    x = as_vector(x, "x")
    lam = as_vector(lam, "lam")
    u = as_vector(u, "u")
    if x.shape[0] != sp.nx or lam.shape[0] != sp.ny or u.shape[0] != sp.nx:
        raise ParameterError("kkt_residual block dimensions do not match the problem")
    top = u + sp.grad_h(x) + sp.A.rmatvec(lam)
    bottom = sp.b - sp.A.matvec(x)
    return np.concatenate([top, bottom])


TABLE_METHOD_ORDER = ("eg", "ogda", "frb", "rfb", "arg",
                      "fast_rfb_a5", "fast_rfb_a10")


def table_method_configs(max_iter: int = 1_000_000) -> Dict[str, SolverConfig]:
    """Per-method configurations of the comparison experiments.

    Step sizes are 0.99 times each method's cap; the accelerated method uses
    c = (alpha + 0.1(alpha - 2))/2 with alpha in {5, 10}.
    """
    return {
        "eg": SolverConfig(method="eg", eta=1.0, max_iter=max_iter),
        "ogda": SolverConfig(method="ogda", eta=1.0, max_iter=max_iter),
        "fbf": SolverConfig(method="fbf", max_iter=max_iter),
        "pfbf": SolverConfig(method="pfbf", max_iter=max_iter),
        "frb": SolverConfig(method="frb", max_iter=max_iter),
        "rfb": SolverConfig(method="rfb", max_iter=max_iter),
        "arg": SolverConfig(method="arg", max_iter=max_iter),
        "fast_rfb_a5": SolverConfig(method="fast_rfb", alpha=5.0, max_iter=max_iter),
        "fast_rfb_a10": SolverConfig(method="fast_rfb", alpha=10.0, max_iter=max_iter),
    }


def draw_initial_points(seed: int, dim: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded standard-normal (z0, y0, w0); z0 is shared across methods."""
    rng = np.random.default_rng(seed)
    z0 = rng.standard_normal(dim)
    y0 = rng.standard_normal(dim)
    w0 = rng.standard_normal(dim)
    return z0, y0, w0


def hitting_times(problem: Problem, config: SolverConfig, epsilons: Sequence[float],
                  z0=None, y0=None, w0=None,
                  max_iter: Optional[int] = None) -> Dict[float, Optional[Tuple[int, float]]]:
    """First iteration (and elapsed seconds) at which the residual reaches
    each threshold, from a single run stopped at the smallest one.

    The iterates do not depend on the stopping threshold, so one run yields
    the hitting time for every epsilon simultaneously. Unreached thresholds
    map to None.
    """
    eps_sorted = sorted(set(float(e) for e in epsilons), reverse=True)
    if not eps_sorted or eps_sorted[-1] <= 0:
        raise ParameterError("epsilons must be positive")
    hits: Dict[float, Optional[Tuple[int, float]]] = {e: None for e in eps_sorted}
    idx = 0
    limit = config.max_iter if max_iter is None else max_iter
    t0 = time.perf_counter()
    for state in iterate(problem, config, z0, y0, w0, max_iter=limit):
        resid = residual_upper(state, problem)
        while idx < len(eps_sorted) and resid <= eps_sorted[idx]:
            hits[eps_sorted[idx]] = (state.k, time.perf_counter() - t0)
            idx += 1
        if idx == len(eps_sorted):
            break
    return hits


@dataclass
class MethodStats:
    success_rate: float
    mean_iters: float
    std_iters: float
    mean_time: float
    std_time: float
    iters: List[Optional[int]] = field(default_factory=list)
    times: List[Optional[float]] = field(default_factory=list)


@dataclass
class ExperimentReport:
    epsilon: float
    n: int
    seeds: Tuple[int, ...]
    methods: Dict[str, MethodStats] = field(default_factory=dict)


def _aggregate(per_seed: List[Optional[Tuple[int, float]]]) -> MethodStats:
    iters = [hit[0] if hit is not None else None for hit in per_seed]
    times = [hit[1] if hit is not None else None for hit in per_seed]
    succ = [i for i in iters if i is not None]
    rate = len(succ) / len(iters) if iters else 0.0
    if succ:
        st = [t for t in times if t is not None]
        mean_i = float(np.mean(succ))
        std_i = float(np.std(succ, ddof=1)) if len(succ) > 1 else 0.0
        mean_t = float(np.mean(st))
        std_t = float(np.std(st, ddof=1)) if len(st) > 1 else 0.0
    else:
        mean_i = std_i = mean_t = std_t = float("nan")
    return MethodStats(success_rate=rate, mean_iters=mean_i, std_iters=std_i,
                       mean_time=mean_t, std_time=std_t, iters=iters, times=times)


def run_table_experiment(methods: Sequence[str], epsilons, n: int,
                         seeds: Sequence[int], max_iter: int = 1_000_000,
                         cone: ConeKind = ConeKind.ZERO_CONE,
                         progress=None) -> Dict[float, ExperimentReport]:
    """Method x seed comparison runs at one or more accuracy thresholds.

    Per (method, seed): run until the smallest threshold or the iteration
    cap, recording the first-hit iteration and elapsed time per threshold.
    Exhausting the cap is data, not an error. Returns one report per epsilon.
    """
    if not methods:
        raise ParameterError("method list must not be empty")
    if np.isscalar(epsilons):
        epsilons = [float(epsilons)]
    epsilons = sorted(set(float(e) for e in epsilons), reverse=True)
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ParameterError("need at least one seed")
    configs = table_method_configs(max_iter)
    unknown = [m for m in methods if m not in configs]
    if unknown:
        raise ParameterError(f"unknown table methods {unknown}")
    sp = build_qp_problem(n, cone)
    problem = as_inclusion(sp)
    raw: Dict[str, Dict[float, List[Optional[Tuple[int, float]]]]] = {
        m: {e: [] for e in epsilons} for m in methods}
    for name in methods:
        for seed in seeds:
            z0, y0, w0 = draw_initial_points(seed, problem.dim)
            hits = hitting_times(problem, configs[name], epsilons, z0, y0, w0,
                                 max_iter=max_iter)
            for e in epsilons:
                raw[name][e].append(hits[e])
            if progress is not None:
                progress(name, seed, hits)
    reports = {}
    for e in epsilons:
        rep = ExperimentReport(epsilon=e, n=n, seeds=seeds)
        for name in methods:
            rep.methods[name] = _aggregate(raw[name][e])
        reports[e] = rep
    return reports


def c_grid(alpha: float, positions=(0.05, 0.275, 0.5, 0.725, 0.95)) -> List[float]:
    """Interior points of (alpha/2, alpha-1) at the given relative positions."""
    lo, hi = alpha / 2.0, alpha - 1.0
    return [lo + p * (hi - lo) for p in positions]


def run_parameter_study(alphas: Sequence[float], n: int, iters: int = 10000,
                        positions=(0.05, 0.275, 0.5, 0.725, 0.95),
                        cone: ConeKind = ConeKind.NONNEG_ORTHANT):
    """One fast_rfb trace per (alpha, c) pair on the chain QP, zero init."""
    sp = build_qp_problem(n, cone)
    problem = as_inclusion(sp)
    out = {}
    for alpha in alphas:
        for c in c_grid(alpha, positions):
            config = SolverConfig(method="fast_rfb", alpha=alpha, c=c, max_iter=iters)
            out[(alpha, c)] = run_solver(problem, config, record_every=1)
    return out
