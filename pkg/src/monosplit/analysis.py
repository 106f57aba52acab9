"""Residuals, rate fitting, and numerical verification of the energy algebra.

The quantities here anchor a run at a zero ``z*`` of M + F and evaluate the
discrete energies

    u_k = 2*lam*(z_k - z*) + 2k*(z_k - z_{k-1}) + s*gamma*k*v_k
    E_k = 0.5*||u_k||^2 + 2*lam*(alpha-1-lam)*||z_k - z*||^2
          + 2*lam*gamma*((2-s)k + 2(alpha-c)) <z_k - z*, v_k>
          + 0.5*gamma^2*((2-s)k + 2(alpha-c))*(s*k + 2c)*||v_k||^2

together with the corrected energy G_k, the exact difference identity for
E_{k+1} - E_k, the lower bound for G_k, the sign-constant set omega_0..7 with
the associated mu_k sequence, and the admissible lambda window. These are
algebraic consequences of the stepping recursion; evaluating them on real
runs is the strongest end-to-end correctness check in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .numkit import as_vector
from .operators import Problem
from .splitters import ParameterError

__all__ = [
    "LyapunovParams",
    "OmegaConstants",
    "RateFit",
    "tangent_residual_upper",
    "fixed_point_residual",
    "omega_constants",
    "mu_k",
    "first_nonneg_k",
    "lyapunov_E",
    "lyapunov_G",
    "energy_identity_residual",
    "g_lower_bound_gap",
    "condition_s_interval",
    "condition_delta_interval",
    "lambda_window",
    "default_window_params",
    "rate_slope",
    "LyapunovTracker",
]


@dataclass(frozen=True)
class LyapunovParams:
    """Run parameters plus the (lam, s[, delta]) pair of an energy evaluation."""

    alpha: float
    c: float
    gamma: float
    lipschitz: float
    lam: float
    s: float
    delta: Optional[float] = None

    def __post_init__(self):
        if not (0.0 <= self.lam <= self.alpha - 1.0):
            raise ParameterError(
                f"lambda must lie in [0, alpha-1] = [0, {self.alpha - 1.0}], got {self.lam}")
        if not (1.0 < self.s < 2.0):
            raise ParameterError(f"s must lie in (1, 2), got {self.s}")
        if self.gamma <= 0 or self.lipschitz <= 0:
            raise ParameterError("gamma and lipschitz must be positive")


@dataclass(frozen=True)
class OmegaConstants:
    w0: float
    w1: float
    w2: float
    w3: float
    w4: float
    w5: float
    w6: float
    w7: float


def tangent_residual_upper(xi, Fz) -> float:
    """||xi + F(z)||, an upper bound on dist(0, M(z) + F(z)) for xi in M(z)."""
    xi = as_vector(xi, "xi")
    Fz = as_vector(Fz, "Fz")
    if xi.shape[0] != Fz.shape[0]:
        raise ParameterError("xi and Fz must have equal length")
    return float(np.linalg.norm(xi + Fz))


def fixed_point_residual(z, gamma: float, problem: Problem) -> float:
    """||z - J(z - gamma F(z))||; never exceeds the tangent residual."""
    if gamma <= 0:
        raise ParameterError("gamma must be positive")
    z = as_vector(z, "z")
    Fz = problem.apply_forward(z)
    return float(np.linalg.norm(z - problem.apply_resolvent(z - gamma * Fz, gamma)))


def omega_constants(p: LyapunovParams) -> OmegaConstants:
    a, c, lam, s = p.alpha, p.c, p.lam, p.s
    w0 = 2.0 - s
    w6 = a - c
    return OmegaConstants(
        w0=w0,
        w1=w0 * lam + s * (lam + 1.0 - a) + s - 2.0 * c,
        w2=2.0 * lam * a + s - 2.0 * a * c,
        w3=2.0 * (lam + 1.0 - a),
        w4=2.0 * s * (1.0 - c),
        w5=(a - 2.0) * w0,
        w6=w6,
        w7=(a - 1.0) * (2.0 * w6 - w0),
    )


def mu_k(k, w: OmegaConstants, p: LyapunovParams):
    """The mu sequence controlling the ||v_{k+1} - v_k||^2 coefficient.

    Accepts scalar or array k (k >= 2).
    """
    k = np.asarray(k, dtype=np.float64)
    gl = p.gamma * p.lipschitz
    a, c, s = p.alpha, p.c, p.s
    val = (w.w0 * (1.0 - 2.0 * gl) * k ** 2
           + (2.0 * w.w6 + w.w0 * a) * k
           + 2.0 * w.w6 * a
           - 2.0 * gl * ((2.0 * (w.w0 + 2.0 * w.w6) - s * w.w6) * k
                         + (w.w0 + 2.0 * w.w6) * (a + 1.0 - c))
           - (k + 1.0) * np.sqrt(k + 1.0)
           - (w.w5 * (k + 1.0) + w.w7) * np.sqrt(w.w5 * (k + 1.0) + w.w7)
           - gl ** 2 * c * (w.w0 * (k + 1.0) + 2.0 * w.w6)
           * np.sqrt(w.w0 * (k + 1.0) + 2.0 * w.w6))
    return float(val) if val.ndim == 0 else val


def first_nonneg_k(w: OmegaConstants, p: LyapunovParams,
                   lookahead: int = 1000, k_max: int = 10_000_000) -> int:
    """First k >= 2 from which mu stays nonnegative over a lookahead window.

    Raises :class:`ParameterError` if no such index exists below k_max; for
    gamma*L < 1/2 the dominant quadratic term guarantees one exists.
    """
    if p.gamma * p.lipschitz >= 0.5:
        raise ParameterError("first_nonneg_k requires gamma * L < 1/2")
    block = 1 << 20
    start = 2
    carry_ok = 0  # trailing run of nonnegative mu values from the previous block
    while start <= k_max:
        stop = min(start + block, k_max + lookahead + 1)
        ks = np.arange(start, stop, dtype=np.float64)
        ok = mu_k(ks, w, p) >= 0.0
        run = carry_ok
        for idx in range(ok.size):
            if ok[idx]:
                run += 1
                if run >= lookahead + 1:
                    k_first = start + idx - run + 1
                    if k_first <= k_max:
                        return int(k_first)
            else:
                run = 0
        carry_ok = run
        start = stop
    raise ParameterError(f"mu_k never stabilized nonnegative below k_max={k_max}")


def _coef_a(k: float, p: LyapunovParams) -> float:
    return (2.0 - p.s) * k + 2.0 * (p.alpha - p.c)


def lyapunov_E(k: int, z, z_prev, v, z_star, p: LyapunovParams) -> float:
    """The anchored energy E_{lam,s,k} (valid for k >= 1)."""
    lam, s, gamma = p.lam, p.s, p.gamma
    dzs = z - z_star
    dz = z - z_prev
    u = 2.0 * lam * dzs + 2.0 * k * dz + (s * gamma * k) * v
    a_k = _coef_a(k, p)
    return (0.5 * float(np.dot(u, u))
            + 2.0 * lam * (p.alpha - 1.0 - lam) * float(np.dot(dzs, dzs))
            + 2.0 * lam * gamma * a_k * float(np.dot(dzs, v))
            + 0.5 * gamma ** 2 * a_k * (s * k + 2.0 * p.c) * float(np.dot(v, v)))


def lyapunov_G(k: int, z, z_prev, v, v_prev, F_z, F_w_prev, z_star,
               p: LyapunovParams) -> float:
    """The corrected energy G_{lam,s,k} (valid for k >= 2)."""
    if k < 2:
        raise ParameterError("G is defined for k >= 2")
    gamma, L = p.gamma, p.lipschitz
    a_k = _coef_a(k, p)
    dz = z - z_prev
    dv = v - v_prev
    e = lyapunov_E(k, z, z_prev, v, z_star, p)
    return (e
            - 2.0 * gamma * a_k * k * float(np.dot(dz, F_z - F_w_prev))
            + gamma ** 3 * L * a_k
            * (k + p.alpha - p.c + p.c * gamma * L * math.sqrt(a_k))
            * float(np.dot(dv, dv)))


def energy_identity_residual(snap_k, snap_k1, z_star, p: LyapunovParams) -> float:
    """|(E_{k+1} - E_k) - RHS| for the exact difference identity.

    ``snap_k`` and ``snap_k1`` are consecutive fast_rfb snapshots (k and
    k+1). The identity is purely algebraic, so the residual is rounding
    noise; implementations are expected to stay below 1e-8 * (1 + |dE|).
    """
    k = snap_k.k
    if snap_k1.k != k + 1:
        raise ParameterError("snapshots must be consecutive")
    lam, s, gamma = p.lam, p.s, p.gamma
    alpha, c = p.alpha, p.c
    w = omega_constants(p)
    e_k = lyapunov_E(k, snap_k.z, snap_k.z_prev, snap_k.v, z_star, p)
    e_k1 = lyapunov_E(k + 1, snap_k1.z, snap_k1.z_prev, snap_k1.v, z_star, p)
    dz = snap_k1.z - snap_k.z
    v1 = snap_k1.v
    dv = v1 - snap_k.v
    a_k = _coef_a(k, p)
    rhs = (-4.0 * (c - 1.0) * lam * gamma * float(np.dot(snap_k1.z - z_star, v1))
           + 2.0 * (lam + 1.0 - alpha) * (2.0 * k + alpha + 1.0) * float(np.dot(dz, dz))
           + 2.0 * gamma * (w.w1 * k + w.w2) * float(np.dot(dz, v1))
           - 2.0 * gamma * (k + alpha) * a_k * float(np.dot(dz, dv))
           - gamma ** 2 * (k + alpha) * a_k * float(np.dot(dv, dv))
           + gamma ** 2 * ((1.0 - c) * (2.0 * s * k + 2.0 * c + s)
                           + s * (alpha - c)) * float(np.dot(v1, v1)))
    return abs((e_k1 - e_k) - rhs)


def g_lower_bound_gap(k: int, z, z_prev, v, v_prev, F_z, F_w_prev, z_star,
                      p: LyapunovParams) -> float:
    """G_k minus its three-term lower bound; nonnegative once k is large.

    Requires lam < s*alpha/4 so the ||z_k - z*||^2 coefficient is positive.
    """
    lam, s, gamma = p.lam, p.s, p.gamma
    if not lam < s * p.alpha / 4.0:
        raise ParameterError(f"lower bound needs lambda < s*alpha/4 = {s * p.alpha / 4.0}")
    w0 = 2.0 - s
    dzs = z - z_star
    dz = z - z_prev
    g = lyapunov_G(k, z, z_prev, v, v_prev, F_z, F_w_prev, z_star, p)
    u4 = 4.0 * lam * dzs + 2.0 * k * dz + (2.0 * s * gamma * k) * v
    bound = (w0 / (4.0 * s) * float(np.dot(u4, u4))
             + w0 ** 2 / (4.0 * s) * k ** 2 * float(np.dot(dz, dz))
             + 2.0 * lam * (p.alpha - 1.0 - 4.0 * (p.alpha - 1.0) * lam / (s * p.alpha))
             * float(np.dot(dzs, dzs)))
    return g - bound


def condition_s_interval(alpha: float, c: float) -> Tuple[float, float]:
    """Admissible (s_low, 2) interval; needs alpha/2 < c < alpha - 1."""
    if not (alpha > 2.0 and alpha / 2.0 < c < alpha - 1.0):
        raise ParameterError("condition interval needs alpha > 2 and alpha/2 < c < alpha-1")
    return 1.0 + alpha / (4.0 * c - alpha), 2.0


def condition_delta_interval(alpha: float, c: float, s: float) -> Tuple[float, float]:
    """Admissible (delta_low, 1) interval for the truncation parameter."""
    s_low, s_high = condition_s_interval(alpha, c)
    if not (s_low < s < s_high):
        raise ParameterError(
            f"s={s} violates the admissible interval ({s_low:.6g}, 2) for alpha={alpha}, c={c}")
    first = (s * (alpha - 2.0) + 2.0 * (2.0 * c - s)) / (4.0 * s * (c - 1.0))
    second = (-(2.0 - s) * (alpha - 1.0) - s + 2.0 * c) / (s * (c - 1.0))
    lo = math.sqrt(max(first, second, 0.0))
    if lo >= 1.0:
        raise ParameterError("empty delta interval; s is too close to its lower limit")
    return lo, 1.0


def lambda_window(alpha: float, c: float, s: float, delta: float) -> Tuple[float, float]:
    """The (lambda_under, lambda_over) window of admissible anchors.

    Computed from the closed-form roots xi_{1,2} = (-4B -+ sqrt(D))/8 of the
    quadratic whose negativity makes the cross-term matrix of R_k negative
    semidefinite; the window is clipped to [0, s*alpha/4].
    """
    d_lo, _ = condition_delta_interval(alpha, c, s)
    if not (d_lo < delta < 1.0):
        raise ParameterError(
            f"delta={delta} violates the admissible interval ({d_lo:.6g}, 1)")
    base = (2.0 - s) * (alpha - 1.0) + s - 2.0 * c
    b = base + 2.0 * s * (c - 1.0) * delta ** 2
    disc = 64.0 * s * (c - 1.0) * delta ** 2 * (base + s * (c - 1.0) * delta ** 2)
    if disc <= 0.0:
        raise ParameterError("nonpositive discriminant; no admissible lambda window")
    root = math.sqrt(disc)
    xi1 = (-4.0 * b - root) / 8.0
    xi2 = (-4.0 * b + root) / 8.0
    lo = max(0.0, alpha - 1.0 + xi1)
    hi = min(s * alpha / 4.0, alpha - 1.0 + xi2)
    if not lo < hi:
        raise ParameterError("empty lambda window")
    return lo, hi


def default_window_params(alpha: float, c: float) -> LyapunovParams:
    """Midpoint (s, delta, lambda) choices for the inequality checks."""
    s_lo, s_hi = condition_s_interval(alpha, c)
    s = 0.5 * (s_lo + s_hi)
    d_lo, d_hi = condition_delta_interval(alpha, c, s)
    delta = 0.5 * (d_lo + d_hi)
    lam_lo, lam_hi = lambda_window(alpha, c, s, delta)
    lam = 0.5 * (lam_lo + lam_hi)
    # gamma/lipschitz are placeholders; callers replace them with run values
    return LyapunovParams(alpha=alpha, c=c, gamma=1.0, lipschitz=1.0,
                          lam=lam, s=s, delta=delta)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    n_used: int
    n_dropped: int


def rate_slope(k: Sequence[float], values: Sequence[float],
               k_range: Optional[Tuple[float, float]] = None) -> RateFit:
    """Least-squares slope of log10(values) against log10(k).

    Nonpositive values are dropped (their count is reported); an o(1/k)
    decay shows up as a slope <= -1.
    """
    k = np.asarray(k, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if k.shape != values.shape:
        raise ParameterError("k and values must have equal length")
    mask = k > 0
    if k_range is not None:
        mask &= (k >= k_range[0]) & (k <= k_range[1])
    in_range = int(mask.sum())
    mask &= values > 0
    n_used = int(mask.sum())
    if n_used < 2:
        raise ParameterError("rate_slope needs at least two positive samples in range")
    x = np.log10(k[mask])
    y = np.log10(values[mask])
    slope, intercept = np.polyfit(x, y, 1)
    return RateFit(slope=float(slope), intercept=float(intercept),
                   n_used=n_used, n_dropped=in_range - n_used)


class LyapunovTracker:
    """Streaming evaluator of E, G, the identity residual and the bound gap.

    Feed consecutive fast_rfb snapshots; each call returns a dict with the
    quantities that are defined at that index (G and the gap need k >= 2,
    the identity residual describes the transition into the current k).
    """

    def __init__(self, params: LyapunovParams, z_star, check_lower_bound: bool = True):
        self.params = params
        self.z_star = as_vector(z_star, "z_star")
        self.check_lower_bound = check_lower_bound and params.lam < params.s * params.alpha / 4.0
        self._prev = None

    def update(self, snap) -> dict:
        p = self.params
        rec = {"k": snap.k,
               "E": lyapunov_E(snap.k, snap.z, snap.z_prev, snap.v, self.z_star, p),
               "G": float("nan"), "identity_residual": float("nan"),
               "lower_bound_gap": float("nan")}
        if self._prev is not None:
            rec["identity_residual"] = energy_identity_residual(
                self._prev, snap, self.z_star, p)
            if snap.k >= 2:
                rec["G"] = lyapunov_G(snap.k, snap.z, snap.z_prev, snap.v,
                                      self._prev.v, snap.F_z, snap.F_w_prev,
                                      self.z_star, p)
                if self.check_lower_bound:
                    rec["lower_bound_gap"] = g_lower_bound_gap(
                        snap.k, snap.z, snap.z_prev, snap.v, self._prev.v,
                        snap.F_z, snap.F_w_prev, self.z_star, p)
        self._prev = snap
        return rec
