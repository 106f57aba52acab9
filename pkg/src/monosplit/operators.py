"""Resolvent and forward-operator oracles.

The set-valued side of an inclusion ``0 in M(z) + F(z)`` is described by a
:class:`MonotoneOp` (proximal maps, cone projections, block products); the
single-valued side by a :class:`ForwardOp` (affine and quadratic/bilinear
saddle couplings). A :class:`Problem` bundles the two oracles with a
Lipschitz bound and an optional known solution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.sparse as _sparse

from .numkit import DimensionError, SparseMatrix, as_vector, operator_norm

__all__ = [
    "ConeKind",
    "MonotoneOp",
    "ForwardOp",
    "Problem",
    "prox_l1",
    "project_cone",
    "resolvent",
    "forward_eval",
    "lipschitz_bound",
    "certificate_gap",
]

LIPSCHITZ_FLOOR = 1e-300  # for the zero operator, keeps step-size rules well defined


class ConeKind(enum.Enum):
    NONNEG_ORTHANT = "nonneg_orthant"
    ZERO_CONE = "zero_cone"
    FULL_SPACE = "full_space"


def prox_l1(x, gamma: float) -> np.ndarray:
    """Componentwise soft threshold ``sign(x) * max(|x| - gamma, 0)``."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    x = as_vector(x, "x")
    return np.sign(x) * np.maximum(np.abs(x) - gamma, 0.0)


def project_cone(x, cone: ConeKind) -> np.ndarray:
    """Projection used in dual-variable updates.

    The nonnegative orthant is self-dual, so this is the plain Euclidean
    projection. ``ZERO_CONE`` stands for K = {0} whose dual is the full
    space, hence the identity (dual updates are the only place these
    projections are needed). ``FULL_SPACE`` is the identity.
    """
    x = as_vector(x, "x")
    if cone is ConeKind.NONNEG_ORTHANT:
        return np.maximum(x, 0.0)
    if cone is ConeKind.ZERO_CONE or cone is ConeKind.FULL_SPACE:
        return x.copy()
    raise ValueError(f"unknown cone {cone!r}")


@dataclass(frozen=True)
class MonotoneOp:
    """Descriptor of a maximally monotone operator with a cheap resolvent.

    kinds: ``zero``, ``l1`` (scaled l1-norm subdifferential), ``normal_cone``
    (cone per the :func:`project_cone` convention), ``product`` (blockwise).
    """

    kind: str
    weight: float = 1.0
    cone: Optional[ConeKind] = None
    parts: Tuple["MonotoneOp", ...] = ()
    blocks: Tuple[int, ...] = ()

    @staticmethod
    def zero() -> "MonotoneOp":
        return MonotoneOp("zero")

    @staticmethod
    def l1(weight: float = 1.0) -> "MonotoneOp":
        if not np.isfinite(weight) or weight < 0:
            raise ValueError("l1 weight must be finite and nonnegative")
        return MonotoneOp("l1", weight=weight)

    @staticmethod
    def normal_cone(cone: ConeKind) -> "MonotoneOp":
        return MonotoneOp("normal_cone", cone=cone)

    @staticmethod
    def product(parts, blocks) -> "MonotoneOp":
        parts = tuple(parts)
        blocks = tuple(int(b) for b in blocks)
        if len(parts) != len(blocks) or any(b < 1 for b in blocks):
            raise DimensionError("product needs one positive block length per part")
        return MonotoneOp("product", parts=parts, blocks=blocks)


def resolvent(op: MonotoneOp, gamma: float, y) -> np.ndarray:
    """Evaluate ``(Id + gamma*M)^{-1} y``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    y = as_vector(y, "y")
    return _make_resolvent(op, y.shape[0])(y, gamma)


def _make_resolvent(op: MonotoneOp, dim: int) -> Callable[[np.ndarray, float], np.ndarray]:
    """Build a specialized resolvent closure for repeated application."""
    if op.kind == "zero":
        return lambda y, gamma: y.copy()
    if op.kind == "l1":
        w = op.weight
        def _prox(y, gamma, w=w):
            return np.sign(y) * np.maximum(np.abs(y) - gamma * w, 0.0)
        return _prox
    if op.kind == "normal_cone":
        cone = op.cone
        if cone is ConeKind.NONNEG_ORTHANT:
            return lambda y, gamma: np.maximum(y, 0.0)
        return lambda y, gamma: y.copy()
    if op.kind == "product":
        if sum(op.blocks) != dim:
            raise DimensionError(f"product blocks sum to {sum(op.blocks)}, ambient dim is {dim}")
        offsets = np.cumsum((0,) + op.blocks)
        subs = [_make_resolvent(p, b) for p, b in zip(op.parts, op.blocks)]
        spans = list(zip(offsets[:-1], offsets[1:], subs))
        def _blockwise(y, gamma, spans=spans):
            out = np.empty_like(y)
            for lo, hi, sub in spans:
                out[lo:hi] = sub(y[lo:hi], gamma)
            return out
        return _blockwise
    raise ValueError(f"unknown monotone operator kind {op.kind!r}")


def certificate_gap(op: MonotoneOp, z, xi) -> float:
    """Worst violation of ``xi in M(z)``, 0 when the membership is exact.

    For the l1 subdifferential the test is ``|xi_i| <= w`` everywhere and
    ``xi_i = w*sign(z_i)`` wherever ``z_i != 0``; for the zero operator
    ``xi = 0``; for normal cones the defining variational inequalities.
    """
    z = as_vector(z, "z")
    xi = as_vector(xi, "xi")
    if z.shape[0] != xi.shape[0]:
        raise DimensionError("z and xi must have equal length")
    if op.kind == "zero":
        return float(np.max(np.abs(xi), initial=0.0))
    if op.kind == "l1":
        w = op.weight
        gap = max(float(np.max(np.abs(xi), initial=0.0)) - w, 0.0)
        live = z != 0.0
        if np.any(live):
            gap = max(gap, float(np.max(np.abs(xi[live] - w * np.sign(z[live])))))
        return gap
    if op.kind == "normal_cone":
        cone = op.cone
        if cone is ConeKind.NONNEG_ORTHANT:
            # xi in N(z): z >= 0, xi <= 0, <xi, z> = 0
            gap = max(float(np.max(-z, initial=0.0)), float(np.max(xi, initial=0.0)))
            return max(gap, float(abs(np.dot(xi, z))))
        if cone is ConeKind.ZERO_CONE:
            # per the dual convention this block behaves as N of the full space
            return float(np.max(np.abs(xi), initial=0.0))
        return float(np.max(np.abs(xi), initial=0.0))
    if op.kind == "product":
        gap = 0.0
        lo = 0
        for part, b in zip(op.parts, op.blocks):
            gap = max(gap, certificate_gap(part, z[lo:lo + b], xi[lo:lo + b]))
            lo += b
        return gap
    raise ValueError(f"unknown monotone operator kind {op.kind!r}")


@dataclass(frozen=True)
class ForwardOp:
    """Single-valued monotone Lipschitz operator.

    kinds: ``zero``; ``affine`` with F(z) = P z + q; ``pd_qp`` with
    F(x, l) = (H x - h + A^T l, b - A x) on the product space; and
    ``shift_identity`` with F(z) = z - a.
    """

    kind: str
    dim: int
    lipschitz: float
    P: Optional[SparseMatrix] = None
    q: Optional[np.ndarray] = None
    H: Optional[SparseMatrix] = None
    h: Optional[np.ndarray] = None
    A: Optional[SparseMatrix] = None
    b: Optional[np.ndarray] = None
    a: Optional[np.ndarray] = None
    blocks: Tuple[int, int] = (0, 0)

    @staticmethod
    def zero(dim: int) -> "ForwardOp":
        return ForwardOp("zero", dim=dim, lipschitz=LIPSCHITZ_FLOOR)

    @staticmethod
    def shift_identity(a) -> "ForwardOp":
        a = as_vector(a, "a")
        return ForwardOp("shift_identity", dim=a.shape[0], lipschitz=1.0, a=a)

    @staticmethod
    def affine(P: SparseMatrix, q, lipschitz: Optional[float] = None) -> "ForwardOp":
        q = as_vector(q, "q")
        if P.shape != (q.shape[0], q.shape[0]):
            raise DimensionError("affine operator needs a square P matching q")
        if lipschitz is None:
            lipschitz = operator_norm(P, tol=1e-12, max_iter=2_000_000)
        return ForwardOp("affine", dim=q.shape[0], lipschitz=float(lipschitz), P=P, q=q)

    @staticmethod
    def pd_qp(H: SparseMatrix, h, A: SparseMatrix, b, lipschitz: float) -> "ForwardOp":
        h = as_vector(h, "h")
        b = as_vector(b, "b")
        nx = h.shape[0]
        ny = b.shape[0]
        if H.shape != (nx, nx) or A.shape != (ny, nx):
            raise DimensionError("pd_qp block dimensions are inconsistent")
        return ForwardOp("pd_qp", dim=nx + ny, lipschitz=float(lipschitz),
                         H=H, h=h, A=A, b=b, blocks=(nx, ny))


def _make_forward(op: ForwardOp) -> Callable[[np.ndarray], np.ndarray]:
    if op.kind == "zero":
        return lambda z: np.zeros_like(z)
    if op.kind == "shift_identity":
        a = op.a
        return lambda z: z - a
    if op.kind == "affine":
        mat = op.P.tocsr()
        q = op.q
        return lambda z: mat @ z + q
    if op.kind == "pd_qp":
        nx, ny = op.blocks
        stacked = _sparse.bmat(
            [[op.H.tocsr(), op.A.tocsr().T], [-op.A.tocsr(), None]], format="csr"
        )
        offset = np.concatenate([-op.h, op.b])
        return lambda z: stacked @ z + offset
    raise ValueError(f"unknown forward operator kind {op.kind!r}")


def forward_eval(op: ForwardOp, z) -> np.ndarray:
    z = as_vector(z, "z")
    if z.shape[0] != op.dim:
        raise DimensionError(f"forward_eval: expected length {op.dim}, got {z.shape[0]}")
    return _make_forward(op)(z)


def lipschitz_bound(op: ForwardOp, tol: float = 1e-12, max_iter: int = 5_000_000) -> float:
    """Conservative closed-form Lipschitz bound for the operator.

    pd_qp uses sqrt((||H|| + ||A||)^2 + ||A||^2); affine uses ||P||;
    shift_identity is 1; the zero operator gets a tiny positive floor.
    """
    if op.kind == "zero":
        return LIPSCHITZ_FLOOR
    if op.kind == "shift_identity":
        return 1.0
    if op.kind == "affine":
        return operator_norm(op.P, tol=tol, max_iter=max_iter)
    if op.kind == "pd_qp":
        na = operator_norm(op.A, tol=tol, max_iter=max_iter)
        nh = operator_norm(op.H, tol=tol, max_iter=max_iter)
        return float(np.sqrt((nh + na) ** 2 + na ** 2))
    raise ValueError(f"unknown forward operator kind {op.kind!r}")


@dataclass
class Problem:
    """A monotone inclusion 0 in M(z) + F(z) with ready-to-call oracles."""

    monotone: MonotoneOp
    forward: ForwardOp
    dim: int
    lipschitz: float
    solution: Optional[np.ndarray] = None
    apply_resolvent: Callable = field(init=False, repr=False)
    apply_forward: Callable = field(init=False, repr=False)

    def __post_init__(self):
        if self.forward.dim != self.dim:
            raise DimensionError("forward operator dimension does not match the problem")
        if self.solution is not None:
            self.solution = as_vector(self.solution, "solution")
        self.apply_resolvent = _make_resolvent(self.monotone, self.dim)
        self.apply_forward = _make_forward(self.forward)
