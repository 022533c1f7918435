"""Lyapunov-Schmidt reduction onto the free mode pair ``{e^{inx}, e^{-inx}}``.

For ``lambda = n^2 + z`` the eigenvalue problem of the truncated periodic
matrix is equivalent to ``z`` being an eigenvalue of the Schur complement

    S(z) = V_PP + V_PQ ((n^2 + z) - A_QQ)^{-1} V_QP,

with ``P = (n, -n)`` and ``Q`` the remaining indices.  ``S`` has the form
``[[alpha, beta_plus], [beta_minus, alpha]]``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .opmatrix import TruncatedOperator


class ReductionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ReducedMatrix:
    n: int
    z: complex
    alpha: complex
    beta_plus: complex
    beta_minus: complex
    diag_discrepancy: float
    rcond: float = field(default=float("nan"))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.alpha, self.beta_plus], [self.beta_minus, self.alpha]])

    @property
    def beta_sum(self) -> float:
        return abs(self.beta_plus) + abs(self.beta_minus)

    def residual(self, z: complex | None = None) -> float:
        z = self.z if z is None else z
        return abs((self.alpha - z) ** 2 - self.beta_plus * self.beta_minus)


def _pq_split(op: TruncatedOperator, n: int):
    if not op.bc.is_periodic:
        raise ReductionError("the reduction needs a periodic or antiperiodic operator")
    if not op.bc.contains(n) or n <= 0:
        raise ReductionError(f"n={n} is not a positive index of {op.bc.value}")
    try:
        p = [op.position(n), op.position(-n)]
    except KeyError:
        raise ReductionError(f"+-{n} lies outside the truncated index set") from None
    q = np.setdiff1d(np.arange(len(op)), p)
    return np.array(p), q


def schur_reduce(op: TruncatedOperator, n: int, z: complex, check_disk: bool = True) -> ReducedMatrix:
    if check_disk and abs(z) >= n / 4:
        raise ReductionError(f"|z|={abs(z):.3g} is outside D_{n} - n^2 (radius {n / 4})")
    p, q = _pq_split(op, n)
    A = op.matrix
    lam = n * n + z
    M = -A[np.ix_(q, q)]
    M[np.diag_indices_from(M)] += lam
    lu, piv = sla.lu_factor(M, check_finite=False)
    anorm = float(np.max(np.sum(np.abs(M), axis=0)))
    rcond, _ = sla.lapack.zgecon(lu, anorm)
    if not np.isfinite(rcond) or rcond < 1e-14:
        raise ReductionError(f"Q-block singular at z={z}: condition number {1 / max(rcond, 1e-300):.3e}")
    X = sla.lu_solve((lu, piv), A[np.ix_(q, p)], check_finite=False)
    S = A[np.ix_(p, p)] - np.diag([float(n * n)] * 2) + A[np.ix_(p, q)] @ X
    disc = abs(S[0, 0] - S[1, 1])
    return ReducedMatrix(
        n=n,
        z=complex(z),
        alpha=complex(0.5 * (S[0, 0] + S[1, 1])),
        beta_plus=complex(S[0, 1]),
        beta_minus=complex(S[1, 0]),
        diag_discrepancy=float(disc),
        rcond=float(rcond),
    )


def reduced_eigen_residual(red: ReducedMatrix, z: complex | None = None) -> float:
    """``|(alpha - z)^2 - beta_plus beta_minus|``."""
    return red.residual(z)


def _fixed_point(op, n, z0, sign, tol, maxiter):
    z = complex(z0)
    trail = [z]
    for _ in range(maxiter):
        red = schur_reduce(op, n, z, check_disk=False)
        root = cmath.sqrt(red.beta_plus * red.beta_minus)
        z_new = red.alpha + sign * root
        trail.append(z_new)
        if abs(z_new - z) <= tol:
            return z_new
        z = z_new
    raise ReductionError(f"fixed point for n={n} did not converge in {maxiter} iterations; trail tail {trail[-4:]}")


def solve_reduced(op: TruncatedOperator, n: int, z_init: complex = 0.0, tol: float = 1e-10, maxiter: int = 100):
    """Both roots of ``z = alpha(z) +- sqrt(beta_plus(z) beta_minus(z))``.

    Returned as ``(z_plus, z_minus)`` using the same (Re, Im) ordering as
    :func:`hillspec.spectra.pair_periodic`.
    """
    roots = [_fixed_point(op, n, z_init, s, tol, maxiter) for s in (1, -1)]
    a, b = sorted(roots, key=lambda z: (z.real, z.imag))
    return b, a


def beta_at_zstar(op: TruncatedOperator, n: int, z_star: complex) -> tuple[complex, complex, complex]:
    red = schur_reduce(op, n, z_star)
    return red.beta_plus, red.beta_minus, red.alpha


# --- invariant block near n^2 ---------------------------------------------


@dataclass(frozen=True)
class LocalBlock:
    """Invariant subspace of the truncated matrix attached to the free modes
    ``P`` (``(n, -n)`` periodic, ``(n,)`` otherwise), written as the graph
    ``x_Q = W x_P``.  ``B_hat = A_PP - n^2 + A_PQ W`` is the restriction of
    ``A - n^2`` in the graph basis; its entries carry absolute accuracy of
    order ``eps * |V|`` rather than ``eps * ||A||``."""

    n: int
    p: np.ndarray
    q: np.ndarray
    W: np.ndarray = field(repr=False)
    B_hat: np.ndarray
    iterations: int
    scale: float = 0.0

    @property
    def roundoff(self) -> float:
        """Absolute roundoff level of ``B_hat`` and quantities derived from it."""
        return 4 * np.finfo(float).eps * self.scale

    def basis(self, size: int) -> np.ndarray:
        C = np.zeros((size, len(self.p)), dtype=complex)
        C[self.p] = np.eye(len(self.p))
        C[self.q] = self.W
        return C


def invariant_block(op: TruncatedOperator, n: int, maxiter: int = 60) -> LocalBlock:
    """Solve ``A_QP + (A_QQ - n^2) W = W B_hat`` by the contraction
    ``W <- (A_QQ - n^2)^{-1} (W B_hat - A_QP)``."""
    if op.bc.is_periodic:
        p, q = _pq_split(op, n)
    else:
        if not op.bc.contains(n):
            raise ReductionError(f"n={n} is not an index of {op.bc.value}")
        p = np.array([op.position(n)])
        q = np.setdiff1d(np.arange(len(op)), p)
    A = op.matrix
    Aqq = A[np.ix_(q, q)].astype(complex)
    Aqq[np.diag_indices_from(Aqq)] -= n * n
    lu = sla.lu_factor(Aqq, check_finite=False)
    Aqp, Apq = A[np.ix_(q, p)], A[np.ix_(p, q)]
    Vpp = A[np.ix_(p, p)] - n * n * np.eye(len(p))
    W = -sla.lu_solve(lu, Aqp, check_finite=False)
    prev = np.inf
    for it in range(1, maxiter + 1):
        B = Vpp + Apq @ W
        W_new = sla.lu_solve(lu, W @ B - Aqp, check_finite=False)
        step = float(np.linalg.norm(W_new - W))
        W = W_new
        if step <= 4 * np.finfo(float).eps * max(float(np.linalg.norm(W)), 1e-300) or step >= prev:
            break
        prev = step
    else:
        raise ReductionError(f"invariant block for n={n} did not converge in {maxiter} iterations")
    if not np.all(np.isfinite(W)):
        raise ReductionError(f"invariant block for n={n} diverged")
    scale = float(np.linalg.norm(Vpp) + np.linalg.norm(Apq) * np.linalg.norm(W))
    return LocalBlock(n, p, q, W, Vpp + Apq @ W, it, scale)
