"""Canonical coordinates for a quadratic inequality.

A quadratic constraint q(s) = sᵀQs + bᵀs + c ≤ 0 is homogenized to the
lifted matrix Q̃ = [[Q, b/2], [bᵀ/2, c]], diagonalized, and rewritten in
coordinates w = M(s, 1) where it reads ‖x‖² ≤ ‖y‖² together with the
affine slice aᵀx + dᵀy + hᵀz = -1.  The case tag records which free-set
construction applies downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateQuadraticError,
    NoConvergenceError,
    NonSymmetricError,
    NotSeparableError,
)

# Case tags, one per downstream free-set construction.
CASE_EMPTY_S = "EMPTY_S"
CASE_HOMOG_H_NONZERO = "HOMOG_H_NONZERO"
CASE_CASE1_CGLAMBDA = "CASE1_CGLAMBDA"
CASE_CONVEX_M1 = "CONVEX_M1"
CASE_CASE2_CR = "CASE2_CR"
CASE_CASE2_CR_LAMBDA_NEG_A = "CASE2_CR_LAMBDA_NEG_A"

ALL_CASES = (
    CASE_EMPTY_S,
    CASE_HOMOG_H_NONZERO,
    CASE_CASE1_CGLAMBDA,
    CASE_CONVEX_M1,
    CASE_CASE2_CR,
    CASE_CASE2_CR_LAMBDA_NEG_A,
)

_MAX_JACOBI_DIM = 64
_MAX_SWEEPS = 100


def _as_symmetric(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NonSymmetricError(f"expected a square matrix, got shape {A.shape}")
    scale = 1.0 + (np.max(np.abs(A)) if A.size else 0.0)
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * scale:
        raise NonSymmetricError("matrix is not symmetric within tolerance")
    return 0.5 * (A + A.T)


@dataclass(frozen=True)
class QuadraticConstraint:
    """A constraint q(s) = sᵀQs + bᵀs + c ≤ 0 plus the point to separate."""

    Q: np.ndarray
    b: np.ndarray
    c: float
    point: np.ndarray

    def __post_init__(self):
        Q = _as_symmetric(self.Q)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        point = np.asarray(self.point, dtype=float).reshape(-1)
        p = Q.shape[0]
        if p < 1:
            raise ValueError("dimension must be positive")
        if b.shape != (p,) or point.shape != (p,):
            raise ValueError("Q, b and point have inconsistent dimensions")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "point", point)

    @property
    def dim(self) -> int:
        return self.Q.shape[0]

    def __call__(self, s: np.ndarray) -> float:
        s = np.asarray(s, dtype=float)
        return float(s @ self.Q @ s + self.b @ s + self.c)


@dataclass(frozen=True)
class EigenDecomposition:
    """Orthonormal columns V and eigenvalues sorted descending."""

    V: np.ndarray
    eig: np.ndarray


def jacobi_eigen(A: np.ndarray) -> EigenDecomposition:
    """Diagonalize a symmetric matrix by cyclic Jacobi rotations.

    Deterministic for a fixed input (fixed sweep order).  Intended for
    the small dense matrices arising from lifted quadratics.
    """
    B = _as_symmetric(A)
    p = B.shape[0]
    if p > _MAX_JACOBI_DIM:
        raise ValueError(f"dimension {p} exceeds supported size {_MAX_JACOBI_DIM}")
    V = np.eye(p)
    norm_a = np.linalg.norm(B)
    if norm_a == 0.0:
        return EigenDecomposition(V=V, eig=np.zeros(p))

    def off_norm(M):
        off = M - np.diag(np.diag(M))
        return np.linalg.norm(off)

    converged = False
    for _ in range(_MAX_SWEEPS):
        if off_norm(B) <= 1e-12 * norm_a:
            converged = True
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                if abs(B[i, j]) <= 1e-300:
                    continue
                tau = (B[j, j] - B[i, i]) / (2.0 * B[i, j])
                t = np.sign(tau) if tau != 0 else 1.0
                t /= abs(tau) + np.hypot(1.0, tau)
                cs = 1.0 / np.hypot(1.0, t)
                sn = t * cs
                rot = np.array([[cs, -sn], [sn, cs]])
                B[[i, j], :] = rot @ B[[i, j], :]
                B[:, [i, j]] = B[:, [i, j]] @ rot.T
                V[:, [i, j]] = V[:, [i, j]] @ rot.T
    else:
        converged = off_norm(B) <= 1e-12 * norm_a
    if not converged:
        raise NoConvergenceError("Jacobi sweeps did not converge")

    eig = np.diag(B).copy()
    order = np.argsort(-eig, kind="stable")
    return EigenDecomposition(V=V[:, order], eig=eig[order])


def lift(Q: np.ndarray, b: np.ndarray, c: float) -> np.ndarray:
    """Homogenize (Q, b, c) so (s,1)ᵀ Q̃ (s,1) = q(s)."""
    Q = np.asarray(Q, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1, 1)
    p = Q.shape[0]
    if b.shape[0] != p:
        raise ValueError("Q and b have inconsistent dimensions")
    top = np.hstack([Q, b / 2.0])
    bottom = np.hstack([b.T / 2.0, np.array([[float(c)]])])
    return np.vstack([top, bottom])


@dataclass(frozen=True)
class CanonicalForm:
    """Result of canonicalize: coordinates w = M(s,1), a case tag and
    the hyperplane data (a, d, h) with right-hand side -1."""

    n: int
    m: int
    l: int
    M: np.ndarray
    Minv: np.ndarray
    a: np.ndarray
    d: np.ndarray
    h: np.ndarray
    mapped_point: np.ndarray
    lam: np.ndarray
    case: str
    scale: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        """Dimension of the original variable space."""
        return self.M.shape[0] - 1

    @property
    def quad_scale(self) -> float:
        """Factor with ‖x‖² − ‖y‖² = quad_scale · q(s)."""
        return float(self.scale.get("quad_scale", 1.0))

    def map_point(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float).reshape(-1)
        return self.M @ np.concatenate([s, [1.0]])

    def map_direction(self, r: np.ndarray) -> np.ndarray:
        """Image of an s-space direction under the linear part of M."""
        r = np.asarray(r, dtype=float).reshape(-1)
        return self.M[:, :-1] @ r

    def blocks(self, w: np.ndarray):
        """Split a w-point (or batch of rows) into (x, y, z)."""
        w = np.asarray(w, dtype=float)
        n, m = self.n, self.m
        return w[..., :n], w[..., n : n + m], w[..., n + m :]

    def hyperplane_value(self, w: np.ndarray) -> np.ndarray:
        x, y, z = self.blocks(w)
        return x @ self.a + y @ self.d + z @ self.h


def canonicalize(qc: QuadraticConstraint, zero_tol: float = 1e-9) -> CanonicalForm:
    """Diagonalize the lifted quadratic and dispatch the case tag.

    Raises NotSeparable when q(point) is not strictly positive (nothing
    to separate) or when the lifted form has no positive directions.
    """
    q_bar = qc(qc.point)
    if q_bar <= zero_tol:
        raise NotSeparableError(f"q(point) = {q_bar} is not positive")

    Qt = lift(qc.Q, qc.b, qc.c)
    dec = jacobi_eigen(Qt)
    max_abs = float(np.max(np.abs(dec.eig)))
    if max_abs <= zero_tol:
        raise DegenerateQuadraticError("all lifted eigenvalues vanish")

    thresh = zero_tol * max_abs
    pos = np.flatnonzero(dec.eig > thresh)
    neg = np.flatnonzero(dec.eig < -thresh)
    zer = np.flatnonzero(np.abs(dec.eig) <= thresh)
    n, m, l = len(pos), len(neg), len(zer)
    if n == 0:
        raise NotSeparableError("quadratic has no positive directions; q ≤ 0 cannot be violated")

    # Rows of M: scaled eigenvector rows permuted to (x, y, z) order.
    sigma = np.where(np.abs(dec.eig) <= thresh, 1.0, np.sqrt(np.abs(dec.eig)))
    perm = np.concatenate([pos, neg, zer]).astype(int)
    M = (sigma[:, None] * dec.V.T)[perm]
    Minv = dec.V @ np.diag(1.0 / sigma) @ _perm_matrix(perm).T

    # The lifted slice e_{p+1}ᵀ(s,1) = 1 becomes gᵀw = 1; negate for rhs -1.
    e_last = np.zeros(Qt.shape[0])
    e_last[-1] = 1.0
    g = ((dec.V.T @ e_last) / sigma)[perm]
    g = -g

    scale: dict = {
        "eigenvalues": dec.eig.copy(),
        "signature": (n, m, l),
        "quad_scale": 1.0,
    }

    wbar = M @ np.concatenate([qc.point, [1.0]])
    a, d, h = g[:n], g[n : n + m], g[n + m :]

    xbar = wbar[:n]
    lam = xbar / np.linalg.norm(xbar)

    def build(case):
        return CanonicalForm(
            n=n, m=m, l=l, M=M, Minv=Minv, a=a, d=d, h=h,
            mapped_point=wbar, lam=lam, case=case, scale=scale,
        )

    if m == 0:
        return build(CASE_EMPTY_S)
    g_scale = 1.0 + float(np.linalg.norm(g))
    if np.linalg.norm(h) > zero_tol * g_scale:
        return build(CASE_HOMOG_H_NONZERO)

    norm_a, norm_d = np.linalg.norm(a), np.linalg.norm(d)
    if norm_a <= norm_d:
        return build(CASE_CASE1_CGLAMBDA if m > 1 else CASE_CONVEX_M1)

    # ‖a‖ > ‖d‖: rescale variables so ‖a‖ = 1 (then ‖d‖ < 1).
    mu = norm_a
    M = mu * M
    Minv = Minv / mu
    wbar = mu * wbar
    a, d, h = a / mu, d / mu, h / mu
    scale = dict(scale, case2_rescale=mu, quad_scale=mu * mu)
    case = (
        CASE_CASE2_CR_LAMBDA_NEG_A
        if np.linalg.norm(lam + a) <= zero_tol
        else CASE_CASE2_CR
    )
    return build(case)


def _perm_matrix(perm: np.ndarray) -> np.ndarray:
    P = np.zeros((len(perm), len(perm)))
    P[np.arange(len(perm)), perm] = 1.0
    return P


def pullback_linear(cf: CanonicalForm, alpha: np.ndarray, beta: float):
    """Map a w-space inequality αᵀw ≤ β back to s-space via w = M(s,1)."""
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    lifted = cf.M.T @ alpha
    return lifted[:-1], float(beta) - float(lifted[-1])
