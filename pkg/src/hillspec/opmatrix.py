"""Truncated matrices of ``L = -d^2/dx^2 + v`` in the canonical free bases.

Coefficient vectors are indexed by the labels of ``Gamma_bc``:

=========  ===============  =========================
bc         index set        basis function ``b_k``
=========  ===============  =========================
PerPlus    even integers    ``e^{ikx}``
PerMinus   odd integers     ``e^{ikx}``
Dir        1, 2, ...        ``sqrt(2) sin kx``
Neu        0, 1, ...        ``1`` (k=0), ``sqrt(2) cos kx``
=========  ===============  =========================

``A[i, j]`` maps the coefficient of ``b_{indices[j]}`` to that of
``b_{indices[i]}``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .potential import SQRT2, FourierTables, PotentialSpec, fourier_tables


class ConfigurationError(ValueError):
    pass


class BoundaryCondition(str, enum.Enum):
    PER_PLUS = "PerPlus"
    PER_MINUS = "PerMinus"
    DIR = "Dir"
    NEU = "Neu"

    @property
    def is_periodic(self) -> bool:
        return self in (BoundaryCondition.PER_PLUS, BoundaryCondition.PER_MINUS)

    @classmethod
    def for_parity(cls, n: int) -> "BoundaryCondition":
        return cls.PER_PLUS if n % 2 == 0 else cls.PER_MINUS

    def contains(self, n: int) -> bool:
        if self is BoundaryCondition.PER_PLUS:
            return n % 2 == 0
        if self is BoundaryCondition.PER_MINUS:
            return n % 2 == 1
        if self is BoundaryCondition.DIR:
            return n >= 1
        return n >= 0

    def free_count_in_rectangle(self, N: int) -> int:
        """Number of free eigenvalues ``k^2`` (with multiplicity) in ``R_N``."""
        return int(sum(1 for k in index_set(self, max(N, 8)) if k * k <= N * N + N))


BC = BoundaryCondition
ALL_BCS = (BC.PER_PLUS, BC.PER_MINUS, BC.DIR, BC.NEU)


def index_set(bc: BoundaryCondition, K: int) -> np.ndarray:
    """Ascending truncated slice of ``Gamma_bc`` at cutoff ``K``."""
    bc = BC(bc)
    if K < 1:
        raise ConfigurationError(f"cutoff K={K} must be positive")
    if bc is BC.PER_PLUS:
        return np.arange(-2 * K, 2 * K + 1, 2)
    if bc is BC.PER_MINUS:
        return np.arange(-2 * K - 1, 2 * K + 2, 2)
    if bc is BC.DIR:
        return np.arange(1, K + 1)
    return np.arange(0, K + 1)


def required_window(bc: BoundaryCondition, K: int) -> int:
    idx = index_set(bc, K)
    return int(2 * np.max(np.abs(idx)))


@dataclass(frozen=True)
class TruncatedOperator:
    bc: BoundaryCondition
    indices: np.ndarray
    matrix: np.ndarray
    spec: PotentialSpec
    K: int

    @property
    def free_diagonal(self) -> np.ndarray:
        return self.indices.astype(float) ** 2

    @property
    def potential_block(self) -> np.ndarray:
        return self.matrix - np.diag(self.free_diagonal)

    def position(self, k: int) -> int:
        pos = np.searchsorted(self.indices, k)
        if pos >= len(self.indices) or self.indices[pos] != k:
            raise KeyError(f"index {k} not in truncated {self.bc.value} set")
        return int(pos)

    def __len__(self) -> int:
        return len(self.indices)


def potential_matrix(tables: FourierTables, bc: BoundaryCondition, indices: np.ndarray) -> np.ndarray:
    bc = BC(bc)
    k = indices[:, None]
    j = indices[None, :]
    if bc.is_periodic:
        diff = k - j
        V = np.zeros(diff.shape, dtype=complex)
        for freq, c in tables.v_plus.items():
            V[diff == freq] = c
        return V
    vc = tables.v_cos
    # (1/pi) int v b_j b_k = (V_c(|j-k|) -+ V_c(j+k)) / sqrt(2) for k, j >= 1
    sign = -1.0 if bc is BC.DIR else 1.0
    V = (vc[np.abs(j - k)] + sign * vc[j + k]) / SQRT2
    if bc is BC.NEU:
        # c_0 = 1 rather than sqrt(2): rescale row/column of index 0
        scale = np.where(indices == 0, 1.0 / SQRT2, 1.0)
        V = V * scale[:, None] * scale[None, :]
    return V


def build_operator(spec: PotentialSpec, bc: BoundaryCondition, K: int, tables: FourierTables | None = None) -> TruncatedOperator:
    """Dense matrix ``diag(k^2) + V`` of ``L_bc(v)`` on the truncated basis."""
    bc = BC(bc)
    if K < 8:
        raise ConfigurationError(f"cutoff K={K} too small (need K >= 8)")
    indices = index_set(bc, K)
    need = required_window(bc, K)
    if tables is None:
        tables = fourier_tables(spec, need)
    elif tables.window < need:
        raise ConfigurationError(f"Fourier tables cover window {tables.window}, need {need}")
    A = potential_matrix(tables, bc, indices)
    A[np.diag_indices_from(A)] += indices.astype(float) ** 2
    A.setflags(write=False)
    return TruncatedOperator(bc=bc, indices=indices, matrix=A, spec=spec, K=K)


def adjoint_check(spec: PotentialSpec, bc: BoundaryCondition, K: int) -> float:
    """``max |A(conj v) - A(v)^H|``; zero in exact arithmetic."""
    A = build_operator(spec, bc, K).matrix
    B = build_operator(spec.conj(), bc, K).matrix
    return float(np.max(np.abs(B - A.conj().T)))


# --- derivative ---------------------------------------------------------


@dataclass(frozen=True)
class DerivativeMatrix:
    """``d/dx`` from the ``source`` basis into the ``target`` basis.

    For the periodic bases it is ``diag(ik)``; sines go to cosines
    (``D s_k = k c_k``) and cosines to sines (``D c_k = -k s_k``, ``D c_0 = 0``).
    """

    source: BoundaryCondition
    target: BoundaryCondition
    source_indices: np.ndarray
    target_indices: np.ndarray
    matrix: np.ndarray

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        return self.matrix @ coeffs


def build_derivative(bc: BoundaryCondition, K: int) -> DerivativeMatrix:
    bc = BC(bc)
    src = index_set(bc, K)
    if bc.is_periodic:
        return DerivativeMatrix(bc, bc, src, src, np.diag(1j * src.astype(float)))
    if bc is BC.DIR:
        tgt = index_set(BC.NEU, K)
        D = np.zeros((len(tgt), len(src)), dtype=complex)
        D[src, np.arange(len(src))] = src  # tgt index k sits at position k
        return DerivativeMatrix(bc, BC.NEU, src, tgt, D)
    tgt = index_set(BC.DIR, K)
    D = np.zeros((len(tgt), len(src)), dtype=complex)
    for pos, k in enumerate(src):
        if k >= 1:
            D[k - 1, pos] = -k
    return DerivativeMatrix(bc, BC.DIR, src, tgt, D)


# --- basis evaluation ---------------------------------------------------


def basis_values(bc: BoundaryCondition, indices: np.ndarray, x) -> np.ndarray:
    """Matrix ``B[p, q] = b_{indices[q]}(x[p])``."""
    bc = BC(bc)
    x = np.atleast_1d(np.asarray(x, dtype=float))[:, None]
    k = np.asarray(indices)[None, :]
    if bc.is_periodic:
        return np.exp(1j * k * x)
    if bc is BC.DIR:
        return SQRT2 * np.sin(k * x) + 0j
    return np.where(k == 0, 1.0, SQRT2 * np.cos(k * x)) + 0j


def evaluate_vector(coeffs, bc: BoundaryCondition, x, indices: np.ndarray | None = None):
    """Evaluate ``sum_k coeffs_k b_k(x)``; ``x`` scalar or array in ``[0, pi]``."""
    coeffs = np.asarray(coeffs)
    if indices is None:
        indices = _default_indices(bc, len(coeffs))
    vals = basis_values(bc, indices, x) @ coeffs
    return vals[0] if np.ndim(x) == 0 else vals


def _default_indices(bc: BoundaryCondition, size: int) -> np.ndarray:
    bc = BC(bc)
    if bc is BC.DIR:
        return np.arange(1, size + 1)
    if bc is BC.NEU:
        return np.arange(size)
    if size % 2 == 0 and bc is BC.PER_MINUS:
        K = (size - 2) // 2
        return index_set(bc, K)
    if bc is BC.PER_PLUS and size % 2 == 1:
        return index_set(bc, (size - 1) // 2)
    raise ConfigurationError(f"cannot infer {bc.value} indices for a vector of length {size}")


def cross_gram(per_indices: np.ndarray, neu_indices: np.ndarray) -> np.ndarray:
    """``X[k, m] = (1/pi) int_0^pi e^{ikx} c_m(x) dx`` in closed form."""
    k = np.asarray(per_indices)[:, None]
    m = np.asarray(neu_indices)[None, :]

    def int_exp(a):
        out = np.where(a == 0, 1.0 + 0j, 0j)
        odd = a % 2 != 0
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(odd, 2j / (a * math.pi), out)
        return out

    X = (int_exp(k + m) + int_exp(k - m)) / SQRT2
    return np.where(m == 0, int_exp(k + 0 * m), X)


def dump_csv(op: TruncatedOperator, path: str | Path, tol: float = 0.0) -> None:
    """Write nonzero entries as ``row_index, col_index, re, im`` (index labels)."""
    A = op.matrix
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row_index", "col_index", "re", "im"])
        for p, q in zip(*np.nonzero(np.abs(A) > tol)):
            z = A[p, q]
            w.writerow([int(op.indices[p]), int(op.indices[q]), repr(z.real), repr(z.imag)])
