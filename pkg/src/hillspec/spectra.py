"""Eigenvalues of truncated operators, localisation into ``R_N`` and the
disks ``D_n = {|lambda - n^2| < n/4}``, and spectral triangles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .opmatrix import ALL_BCS, BC, BoundaryCondition, TruncatedOperator


class EigenError(RuntimeError):
    """Eigensolver failed to meet its residual contract."""


class StructureError(RuntimeError):
    """A disk does not hold the expected number of eigenvalues."""

    def __init__(self, msg, contents=()):
        super().__init__(msg)
        self.contents = list(contents)


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    norm: float = 0.0
    triangular: bool = False
    condition: np.ndarray = field(default=None, repr=False)

    def error_estimate(self) -> np.ndarray:
        """First-order roundoff bound ``eps * ||A|| * kappa`` per eigenvalue."""
        if self.triangular:
            return np.zeros(len(self.values))
        return np.finfo(float).eps * self.norm * self.condition

    @property
    def max_relative_residual(self) -> float:
        return float(np.max(self.residuals) / self.norm) if self.norm else 0.0


def _triangular_kind(A: np.ndarray) -> str | None:
    if not np.any(np.tril(A, -1)):
        return "upper"
    if not np.any(np.triu(A, 1)):
        return "lower"
    return None


def _triangular_eigvecs(A: np.ndarray, kind: str, values: np.ndarray) -> np.ndarray:
    # inverse iteration with a tiny shift; exact-triangular solves are O(n^2)
    n = len(values)
    scale = max(1.0, float(np.max(np.abs(np.diag(A)))))
    vecs = np.empty((n, n), dtype=complex)
    lower = kind == "lower"
    rng = np.random.default_rng(12345)
    start = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    for i, lam in enumerate(values):
        shifted = A - (lam + 1e-12 * scale) * np.eye(n)
        x = start / np.linalg.norm(start)
        for _ in range(3):
            x = sla.solve_triangular(shifted, x, lower=lower, check_finite=False)
            x /= np.linalg.norm(x)
        vecs[:, i] = x
    return vecs


def eigenvalues(op: TruncatedOperator | np.ndarray, tol: float = 1e-10) -> EigenResult:
    """All eigenvalues of the dense matrix with unit right eigenvectors.

    Exactly triangular matrices (one-sided potentials in a periodic basis)
    return their diagonal, so algebraically double eigenvalues stay exactly
    double instead of splitting by ``sqrt(eps)``.  Every pair must satisfy
    ``||A v - lambda v|| <= tol * ||A||``.
    """
    A = op.matrix if isinstance(op, TruncatedOperator) else np.asarray(op)
    if not np.all(np.isfinite(A)):
        raise EigenError("matrix has non-finite entries")
    norm = float(np.linalg.norm(A, 2))
    kind = _triangular_kind(A)
    if kind is not None:
        w = np.diag(A).astype(complex).copy()
        vecs = _triangular_eigvecs(A, kind, w)
        cond = np.ones(len(w))
    else:
        try:
            w, left, vecs = sla.eig(A, left=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            name = getattr(op, "bc", "matrix")
            raise EigenError(f"eigensolver did not converge on {name} ({A.shape[0]}x{A.shape[0]}): {exc}") from None
        vecs = vecs / np.linalg.norm(vecs, axis=0)
        left = left / np.linalg.norm(left, axis=0)
        with np.errstate(divide="ignore"):
            cond = 1.0 / np.abs(np.sum(left.conj() * vecs, axis=0))
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    vecs = vecs[:, order]
    cond = cond[order]
    res = np.linalg.norm(A @ vecs - vecs * w, axis=0)
    if norm and np.max(res) > tol * norm:
        raise EigenError(f"residual {np.max(res) / norm:.2e} exceeds contract {tol:.1e}")
    return EigenResult(w, vecs, res, norm, kind is not None, cond)


# --- localisation -------------------------------------------------------


def in_rectangle(lam: complex, N: int) -> bool:
    return -N <= lam.real <= N * N + N and abs(lam.imag) < N


def disk_index(lam: complex, bc: BoundaryCondition, N: int = 0) -> int | None:
    """The unique ``n > N`` in ``Gamma_bc`` with ``lam`` in ``D_n``, if any."""
    bc = BC(bc)
    if lam.real <= 0:
        return None
    n0 = int(round(math.sqrt(max(lam.real, 0.0))))
    for n in (n0 - 1, n0, n0 + 1):
        if n > max(N, 0) and bc.contains(n) and abs(lam - n * n) < n / 4:
            return n
    return None


@dataclass
class LocalizedSpectrum:
    bc: BoundaryCondition
    N: int
    in_rectangle: list[complex]
    per_disk: dict[int, list[complex]]
    unassigned: list[complex]

    def disk(self, n: int) -> list[complex]:
        return self.per_disk.get(n, [])

    def expected_disk_count(self) -> int:
        return 2 if self.bc.is_periodic else 1

    def counting_failures(self, n_max: int) -> list[int]:
        want = self.expected_disk_count()
        return [n for n in range(self.N + 1, n_max + 1) if self.bc.contains(n) and len(self.disk(n)) != want]

    def unassigned_within(self, n_max: int) -> list[complex]:
        bound = n_max * n_max + n_max
        return [lam for lam in self.unassigned if lam.real <= bound]


def localize(eigs, bc: BoundaryCondition, N: int) -> LocalizedSpectrum:
    bc = BC(bc)
    rect, disks, rest = [], {}, []
    for lam in np.asarray(eigs, dtype=complex):
        lam = complex(lam)
        if in_rectangle(lam, N):
            rect.append(lam)
            continue
        n = disk_index(lam, bc, N)
        if n is None:
            rest.append(lam)
        else:
            disks.setdefault(n, []).append(lam)
    return LocalizedSpectrum(bc, N, rect, dict(sorted(disks.items())), rest)


def counting_law_holds(loc: LocalizedSpectrum, n_max: int) -> bool:
    return (
        not loc.counting_failures(n_max)
        and not loc.unassigned_within(n_max)
        and len(loc.in_rectangle) == loc.bc.free_count_in_rectangle(loc.N)
    )


def choose_N(eigs_by_bc: dict, n_max: int) -> int:
    """Smallest even ``N`` for which the counting law holds on ``(N, n_max]``
    simultaneously for every supplied boundary condition."""
    for N in range(2, n_max // 2 + 1, 2):
        if all(counting_law_holds(localize(e, bc, N), n_max) for bc, e in eigs_by_bc.items()):
            return N
    raise StructureError(f"no admissible N <= {n_max // 2}; increase the truncation K or lower n_max")


def pair_periodic(loc: LocalizedSpectrum, n: int) -> tuple[complex, complex]:
    """``(lambda_plus, lambda_minus)`` in ``D_n``: larger by (Re, Im) first."""
    disk = loc.disk(n)
    if len(disk) != 2:
        raise StructureError(f"D_{n} of {loc.bc.value} holds {len(disk)} eigenvalues, expected 2", disk)
    a, b = sorted(disk, key=lambda z: (z.real, z.imag))
    return b, a


def single_in_disk(loc: LocalizedSpectrum, n: int) -> complex:
    disk = loc.disk(n)
    if len(disk) != 1:
        raise StructureError(f"D_{n} of {loc.bc.value} holds {len(disk)} eigenvalues, expected 1", disk)
    return disk[0]


@dataclass(frozen=True)
class SpectralTriangle:
    n: int
    lambda_plus: complex
    lambda_minus: complex
    nu: complex
    mu: complex

    @property
    def gamma(self) -> complex:
        return self.lambda_plus - self.lambda_minus

    @property
    def delta_dir(self) -> complex:
        return self.lambda_plus - self.mu

    @property
    def delta_neu(self) -> complex:
        return self.lambda_plus - self.nu

    @property
    def delta_neu_minus(self) -> complex:
        """``lambda_minus - nu``, kept for labeling-sensitivity reports."""
        return self.lambda_minus - self.nu

    @property
    def z_star(self) -> complex:
        return 0.5 * (self.lambda_plus + self.lambda_minus) - self.n**2

    @property
    def size(self) -> float:
        return abs(self.gamma) + abs(self.delta_neu)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda_plus": self.lambda_plus,
            "lambda_minus": self.lambda_minus,
            "nu": self.nu,
            "mu": self.mu,
            "gamma": self.gamma,
            "delta_dir": self.delta_dir,
            "delta_neu": self.delta_neu,
            "delta_neu_minus": self.delta_neu_minus,
            "z_star": self.z_star,
            "size": self.size,
        }


def triangle(n: int, per_pair: tuple[complex, complex], nu: complex, mu: complex) -> SpectralTriangle:
    lp, lm = per_pair
    return SpectralTriangle(n, complex(lp), complex(lm), complex(nu), complex(mu))


def all_spectra(ops: dict, tol: float = 1e-10) -> dict:
    return {bc: eigenvalues(op, tol) for bc, op in ops.items()}


__all__ = [
    "ALL_BCS",
    "EigenError",
    "EigenResult",
    "LocalizedSpectrum",
    "SpectralTriangle",
    "StructureError",
    "choose_N",
    "counting_law_holds",
    "disk_index",
    "eigenvalues",
    "localize",
    "pair_periodic",
    "single_in_disk",
    "triangle",
]
