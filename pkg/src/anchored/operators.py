"""Operator and resolvent abstractions plus the concrete operator catalog.

An :class:`OperatorSpec` is a single-valued map ``y -> Gy`` with declared
regularity metadata (Lipschitz constant, co-coercivity modulus,
co-monotonicity modulus). Metadata is declarative: nothing is inferred
at construction, and the sampled inequality checks live in a separate
verification call so that schemes never pay the sampling cost.

Specs are immutable after construction and safe for concurrent
read-only evaluation.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InputError, NumericError
from .rng import SplitMix64


@dataclass(frozen=True)
class OperatorSpec:
    dim: Optional[int]
    eval: Callable[[np.ndarray], np.ndarray]
    lipschitz: Optional[float] = None
    cocoercivity_modulus: Optional[float] = None
    comonotonicity_rho: Optional[float] = None
    monotone: bool = False
    # optional exposure of composition intermediates, set by residual builders
    parts: Optional[Callable] = None

    def __call__(self, y):
        return self.eval(np.asarray(y, dtype=np.float64))


@dataclass(frozen=True)
class ResolventSpec:
    """Resolvent (I + lam*A)^-1 of a maximally monotone A.

    ``kind`` selects A: "zero", "l1" (weight * subdifferential of the l1
    norm), "box" (normal cone of [lo, hi]), or "affine" (A = My + c).
    """

    kind: str
    lam: float = 1.0
    weight: float = 1.0
    lo: float = 0.0
    hi: float = 1.0
    matrix: Optional[np.ndarray] = None
    shift: Optional[np.ndarray] = None

    def with_lambda(self, lam):
        if lam <= 0:
            raise InputError("resolvent index lam must be positive")
        return replace(self, lam=float(lam))


def zero_kind():
    return ResolventSpec("zero")


def l1_kind(weight=1.0):
    return ResolventSpec("l1", weight=float(weight))


def box_kind(lo, hi):
    return ResolventSpec("box", lo=float(lo), hi=float(hi))


def affine_kind(matrix, shift=None):
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InputError("affine resolvent needs a square matrix")
    if shift is None:
        shift = np.zeros(matrix.shape[0])
    return ResolventSpec("affine", matrix=matrix, shift=np.asarray(shift, dtype=np.float64))


def resolvent_apply(res: ResolventSpec, y):
    """Evaluate J_{lam A} y for the resolvent kinds of the catalog."""
    y = np.asarray(y, dtype=np.float64)
    if res.kind == "zero":
        return y.copy()
    if res.kind == "l1":
        t = res.lam * res.weight
        return np.sign(y) * np.maximum(np.abs(y) - t, 0.0)
    if res.kind == "box":
        return np.clip(y, res.lo, res.hi)
    if res.kind == "affine":
        m = res.matrix
        if m.shape[0] != y.shape[0]:
            raise InputError("dimension mismatch in affine resolvent")
        a = np.eye(m.shape[0]) + res.lam * m
        try:
            return np.linalg.solve(a, y - res.lam * res.shift)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"singular resolvent system: {exc}") from exc
    raise InputError(f"unknown resolvent kind {res.kind!r}")


@dataclass(frozen=True)
class ProblemInstance:
    operator: OperatorSpec
    solution: Optional[np.ndarray]
    l_estimate: float
    meta: dict = field(default_factory=dict)


def spectral_norm(m, tol=1e-10, max_iter=10_000, seed=0):
    """Largest singular value of ``m`` by power iteration on M^T M.

    The start vector is a deterministic unit Gaussian drawn from
    ``seed``. Raises :class:`NumericError` carrying the last estimate if
    the Rayleigh quotient has not stabilized within ``max_iter`` sweeps.
    """
    m = np.asarray(m, dtype=np.float64)
    if tol <= 0:
        raise InputError("tol must be positive")
    if not np.any(m):
        raise InputError("matrix must be nonzero")
    v = SplitMix64(seed).normal(m.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    stable = 0
    for _ in range(max_iter):
        w = m.T @ (m @ v)
        lam_new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector fell in the null space; restart deterministically
            v = SplitMix64(seed + 1).normal(m.shape[1])
            v /= np.linalg.norm(v)
            continue
        v = w / nw
        if abs(lam_new - lam) <= tol * max(lam_new, np.finfo(float).tiny):
            stable += 1
            if stable >= 2:
                return float(np.sqrt(lam_new))
        else:
            stable = 0
        lam = lam_new
    raise NumericError("power iteration did not converge",
                       estimate=float(np.sqrt(max(lam, 0.0))))


def least_squares_operator(p_mat, b, seed=0):
    """Normal-equation residual map G(y) = P^T (P y - b).

    G is co-coercive with constant ``norm(P^T P)`` estimated by
    :func:`spectral_norm`.
    """
    p_mat = np.asarray(p_mat, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if p_mat.ndim != 2:
        raise InputError("P must be a matrix")
    if b.shape != (p_mat.shape[0],):
        raise InputError("P and b have mismatched dimensions")
    lip = spectral_norm(p_mat.T @ p_mat, seed=seed)

    def apply(y):
        return p_mat.T @ (p_mat @ y - b)

    return OperatorSpec(dim=p_mat.shape[1], eval=apply, lipschitz=lip,
                        cocoercivity_modulus=1.0 / lip, monotone=True)


def huber_gradient(t, eps):
    """Derivative of the Huber loss: t inside (-eps, eps), else eps*sign(t)."""
    return np.clip(t, -eps, eps)


def huber_saddle_operator(k_mat, lam, rho_w, eps, k_norm=None, seed=0):
    """Saddle operator of the smoothed bilinear game with Huber penalties.

    For K of shape (m, n) the variable is y = (u, v) with u in R^n and
    v in R^m, and

        G(u, v) = (lam * h(u) + K^T v,  rho_w * h(v) - K u)

    where h clips componentwise to [-eps, eps]. G is monotone and
    Lipschitz with constant sqrt(2) * sqrt(max(lam^2, rho_w^2) + |K|^2);
    it is not co-coercive.
    """
    k_mat = np.asarray(k_mat, dtype=np.float64)
    if eps <= 0 or lam <= 0 or rho_w <= 0:
        raise InputError("lam, rho_w and eps must be positive")
    m, n = k_mat.shape
    if k_norm is None:
        k_norm = spectral_norm(k_mat, seed=seed)
    lip = np.sqrt(2.0) * np.sqrt(max(lam * lam, rho_w * rho_w) + k_norm * k_norm)

    def apply(y):
        u, v = y[:n], y[n:]
        gu = lam * huber_gradient(u, eps) + k_mat.T @ v
        gv = rho_w * huber_gradient(v, eps) - k_mat @ u
        return np.concatenate([gu, gv])

    return OperatorSpec(dim=n + m, eval=apply, lipschitz=lip, monotone=True)


def bilinear_saddle_operator(k_mat, k_norm=None, seed=0):
    """Skew saddle operator G(u, v) = (K^T v, -K u).

    Monotone with zero co-monotonicity modulus, hence rho-co-monotone
    for every rho <= 0; Lipschitz with constant |K|.
    """
    k_mat = np.asarray(k_mat, dtype=np.float64)
    m, n = k_mat.shape
    if k_norm is None:
        k_norm = spectral_norm(k_mat, seed=seed)

    def apply(y):
        u, v = y[:n], y[n:]
        return np.concatenate([k_mat.T @ v, -(k_mat @ u)])

    return OperatorSpec(dim=n + m, eval=apply, lipschitz=k_norm,
                        monotone=True, comonotonicity_rho=0.0)


def from_nonexpansive(t_map, dim):
    """Wrap a nonexpansive map T as the residual G = I - T.

    G is 1/2-co-coercive and 2-Lipschitz whenever T is nonexpansive;
    violations surface in the sampled checks, not here.
    """
    def apply(y):
        return y - np.asarray(t_map(y), dtype=np.float64)

    return OperatorSpec(dim=dim, eval=apply, lipschitz=2.0,
                        cocoercivity_modulus=0.5, monotone=True)


def identity_operator(dim=1):
    """G(y) = y; 1-co-coercive with L = 1. The smallest test fixture."""
    return OperatorSpec(dim=dim, eval=lambda y: y.copy(), lipschitz=1.0,
                        cocoercivity_modulus=1.0, monotone=True)


def check_regularity(op: OperatorSpec, n_pairs=1000, seed=0, scale=1.0):
    """Sample pairs and count violations of the declared inequalities.

    Pairs are componentwise uniform on [-scale, scale]^dim. Returns a
    dict with a violation count per declared property; the slack terms
    match the declared tolerances (1e-12 relative for Lipschitz, 1e-10
    absolute-relative for the inner-product inequalities).
    """
    rng = SplitMix64(seed)
    out = {}
    lip_bad = coco_bad = comono_bad = mono_bad = 0
    for _ in range(n_pairs):
        x = rng.uniform_symmetric(op.dim, scale)
        y = rng.uniform_symmetric(op.dim, scale)
        gx, gy = op(x), op(y)
        dg, dx = gx - gy, x - y
        ip = float(dg @ dx)
        ng2 = float(dg @ dg)
        if op.lipschitz is not None:
            if np.sqrt(ng2) > op.lipschitz * (1.0 + 1e-12) * np.linalg.norm(dx):
                lip_bad += 1
        if op.cocoercivity_modulus is not None:
            if ip < op.cocoercivity_modulus * ng2 - 1e-10 * (1.0 + ng2):
                coco_bad += 1
        if op.comonotonicity_rho is not None:
            if ip < op.comonotonicity_rho * ng2 - 1e-10 * (1.0 + ng2):
                comono_bad += 1
        if op.monotone and ip < -1e-10 * (1.0 + ng2):
            mono_bad += 1
    if op.lipschitz is not None:
        out["lipschitz"] = lip_bad
    if op.cocoercivity_modulus is not None:
        out["cocoercive"] = coco_bad
    if op.comonotonicity_rho is not None:
        out["comonotone"] = comono_bad
    if op.monotone:
        out["monotone"] = mono_bad
    return out


def counted(op: OperatorSpec):
    """Wrap ``op`` so every evaluation bumps a counter.

    Returns ``(wrapped, counter)`` where ``counter.count`` is the number
    of evaluations so far. Used to assert per-step evaluation budgets.
    """
    class _Counter:
        count = 0

    counter = _Counter()

    def apply(y):
        counter.count += 1
        return op.eval(y)

    parts = None
    if op.parts is not None:
        def parts(y):
            counter.count += 1
            return op.parts(y)

    return replace(op, eval=apply, parts=parts), counter
