"""Riesz projections onto the disks ``D_n``, 2->inf operator norms, the
``K_lambda V K_lambda`` Hilbert-Schmidt map, and the two-dimensional
invariant-subspace constructions ``{f, phi, xi}``, ``G = a f + b phi`` and the
Neumann vector ``g`` that enter the identity

    <G, conj g> delta_neu = b <phi, conj g> gamma - b <f, conj g> xi.

Coefficient vectors live in the bases of :mod:`hillspec.opmatrix`.
"""

from __future__ import annotations

import logging
import math
import weakref
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .opmatrix import BC, BoundaryCondition, TruncatedOperator, basis_values, build_derivative, build_operator, cross_gram
from .potential import PotentialSpec
from .reduction import invariant_block
from .spectra import EigenResult, StructureError, eigenvalues

log = logging.getLogger(__name__)


class ProjectionError(RuntimeError):
    pass


class PoleError(ValueError):
    """``lambda`` coincides with a free eigenvalue ``k^2``."""


# --- Schur forms ----------------------------------------------------------

_SCHUR_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def schur_form(op: TruncatedOperator) -> tuple[np.ndarray, np.ndarray]:
    """Complex Schur form ``A = Z T Z^H``, cached for the lifetime of ``op``."""
    key = id(op)
    hit = _SCHUR_CACHE.get(key)
    if hit is None:
        T, Z = sla.schur(op.matrix.astype(complex), output="complex", check_finite=False)
        hit = (T, Z)
        _SCHUR_CACHE[key] = hit
        weakref.finalize(op, _SCHUR_CACHE.pop, key, None)
    return hit


def _reorder(op: TruncatedOperator, select: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    T, Z = schur_form(op)
    Ts, Zs, _, m, _, _, info = sla.lapack.ztrsen(select.astype(np.int32), T, Z, job="N")
    if info != 0:
        raise ProjectionError(f"Schur reordering failed (info={info})")
    return Ts, Zs, int(m)


def _key(z: complex):
    return (z.real, z.imag)


# --- Riesz projections ----------------------------------------------------


def expected_rank(bc: BoundaryCondition, n: int) -> int:
    bc = BC(bc)
    if not bc.contains(n):
        return 0
    return 2 if bc.is_periodic and n > 0 else 1


def free_modes(op: TruncatedOperator, n: int) -> np.ndarray:
    """Unit coefficient vectors of the free eigenfunctions with eigenvalue ``n^2``."""
    labels = (n, -n) if op.bc.is_periodic and n > 0 else (n,)
    E = np.zeros((len(op), len(labels)), dtype=complex)
    for col, k in enumerate(labels):
        E[op.position(k), col] = 1.0
    return E


@dataclass(frozen=True)
class RieszProjection:
    bc: BoundaryCondition
    n: int
    P_matrix: np.ndarray = field(repr=False)
    quadrature_nodes: int
    route: str
    radius: float
    rank: int
    left: np.ndarray = field(default=None, repr=False)
    right: np.ndarray = field(default=None, repr=False)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.P_matrix))

    def idempotency_defect(self) -> float:
        P = self.P_matrix
        return float(np.linalg.norm(P @ P - P, 2))


def _contour_radius(values: np.ndarray, n: int) -> float:
    r = n / 4
    margin = 1e-6 * n
    dist = np.abs(np.abs(values - n * n) - r)
    if np.min(dist, initial=np.inf) > margin:
        return r
    best = max((r * (1 + 1e-3), r * (1 - 1e-3)), key=lambda s: np.min(np.abs(np.abs(values - n * n) - s)))
    if np.min(np.abs(np.abs(values - n * n) - best)) <= margin:
        raise ProjectionError(f"eigenvalue within {margin:.1e} of C_{n} even after perturbing the radius")
    log.warning("C_%d: eigenvalue within %.1e of the contour; radius perturbed to %.6g", n, margin, best)
    return best


def riesz_projection(
    op: TruncatedOperator,
    n: int,
    M: int = 64,
    route: str = "contour",
    eigs: EigenResult | np.ndarray | None = None,
) -> RieszProjection:
    """Projection ``(2 pi i)^{-1} oint_{C_n} (lambda - A)^{-1} d lambda``.

    ``route="contour"`` applies the M-point trapezoidal rule on
    ``|lambda - n^2| = n/4``; ``route="spectral"`` reorders a Schur form so
    the disk's eigenvalues lead and solves the Sylvester equation that splits
    the invariant subspaces.  The spectral route stays accurate for Jordan
    blocks and is the one used for long sweeps.
    """
    if M < 32:
        raise ValueError(f"need at least 32 quadrature nodes, got {M}")
    if route not in ("contour", "spectral"):
        raise ValueError(f"unknown route {route!r}")
    want = expected_rank(op.bc, n)
    if want == 0:
        raise ProjectionError(f"n={n} is not in Gamma_{op.bc.value}")
    if eigs is None:
        eigs = eigenvalues(op)
    values = np.asarray(eigs.values if isinstance(eigs, EigenResult) else eigs, dtype=complex)
    r = _contour_radius(values, n)
    inside = np.abs(values - n * n) < r
    if int(np.sum(inside)) != want:
        raise StructureError(f"D_{n} of {op.bc.value} holds {int(np.sum(inside))} eigenvalues, expected {want}", values[inside])

    if route == "contour":
        A = op.matrix
        size = len(op)
        eye = np.eye(size)
        P = np.zeros((size, size), dtype=complex)
        for m in range(M):
            w = r * np.exp(2j * math.pi * (m + 0.5) / M)
            P += w * np.linalg.solve((n * n + w) * eye - A, eye)
        P /= M
        return RieszProjection(op.bc, n, P, M, route, r, want)

    left, right = _spectral_factors(op, n, r, want)
    return RieszProjection(op.bc, n, left @ right, 0, route, r, want, left, right)


def _spectral_factors(op: TruncatedOperator, n: int, r: float, want: int):
    """``P = left @ right`` with ``left`` orthonormal of width ``want``."""
    T, _ = schur_form(op)
    select = np.abs(np.diag(T) - n * n) < r
    if int(select.sum()) != want:
        raise StructureError(f"Schur form puts {int(select.sum())} eigenvalues in D_{n}, expected {want}")
    Ts, Zs, m = _reorder(op, select)
    T11, T12, T22 = Ts[:m, :m], Ts[:m, m:], Ts[m:, m:]
    Y, scale, info = sla.lapack.ztrsyl(T11, T22, T12, isgn=-1)
    if info < 0:
        raise ProjectionError(f"Sylvester solve failed (info={info})")
    Y = Y / scale
    Z1, Z2 = Zs[:, :m], Zs[:, m:]
    right = Z1.conj().T + Y @ Z2.conj().T
    return Z1, right


# --- norms ---------------------------------------------------------------


def default_grid(points: int = 4096) -> np.ndarray:
    return np.linspace(0.0, math.pi, points)


def two_inf_norm(kernel_coeffs: np.ndarray, bc_out: BoundaryCondition, x_grid=None, indices=None) -> float:
    """``sup_x || (sum_k A_kj b_k(x))_j ||_2`` over the grid.

    Rows of ``kernel_coeffs`` are indexed by ``indices`` of the ``bc_out``
    basis (defaults to the truncated set whose size matches).
    """
    A = np.asarray(kernel_coeffs)
    x = default_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    if len(x) < 1024:
        raise ValueError(f"grid needs at least 1024 points, got {len(x)}")
    if indices is None:
        from .opmatrix import _default_indices

        indices = _default_indices(bc_out, A.shape[0])
    W = basis_values(bc_out, indices, x) @ A
    return float(np.sqrt(np.max(np.sum(np.abs(W) ** 2, axis=1))))


def low_rank_two_inf(B: np.ndarray, left: np.ndarray, right: np.ndarray) -> float:
    """2->inf norm of ``left @ right`` given sampled basis values ``B``."""
    BL = B @ left
    gram = right @ right.conj().T
    sq = np.real(np.sum((BL @ gram) * BL.conj(), axis=1))
    return float(np.sqrt(max(float(np.max(sq)), 0.0)))


def kvk_hs_norm(spec: PotentialSpec, bc: BoundaryCondition, lam: complex, K: int, op: TruncatedOperator | None = None) -> float:
    """``(sum_{k,j} |V_kj|^2 / (|lambda - k^2| |lambda - j^2|))^{1/2}``."""
    op = build_operator(spec, bc, K) if op is None else op
    dist = np.abs(lam - op.free_diagonal)
    if np.min(dist) == 0.0:
        raise PoleError(f"lambda={lam} is a free eigenvalue of {op.bc.value}")
    w = 1.0 / np.sqrt(dist)
    V = op.potential_block
    return float(np.linalg.norm(w[:, None] * V * w[None, :]))


@dataclass(frozen=True)
class ProjectionDiffRow:
    n: int
    diff_norm: float
    deriv_diff_norm: float
    trace_defect: float

    @property
    def scaled(self) -> float:
        return self.n * self.diff_norm


def projection_diff_audit(
    spec: PotentialSpec,
    bc: BoundaryCondition,
    n_range,
    K: int,
    x_grid=None,
    op: TruncatedOperator | None = None,
) -> list[ProjectionDiffRow]:
    """``||P_n - P_n^0||_{2->inf}`` and ``||D(P_n - P_n^0)||_{2->inf}`` per n."""
    bc = BC(bc)
    op = build_operator(spec, bc, K) if op is None else op
    eigs = eigenvalues(op)
    x = default_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    D = build_derivative(bc, K)
    B = basis_values(bc, op.indices, x)
    BD = basis_values(D.target, D.target_indices, x) @ D.matrix
    rows = []
    for n in n_range:
        if not bc.contains(n) or n <= 0:
            continue
        proj = riesz_projection(op, n, route="spectral", eigs=eigs)
        E = free_modes(op, n)
        left = np.hstack([proj.left, -E])
        right = np.vstack([proj.right, E.conj().T])
        rows.append(
            ProjectionDiffRow(
                n=n,
                diff_norm=low_rank_two_inf(B, left, right),
                deriv_diff_norm=low_rank_two_inf(BD, left, right),
                trace_defect=abs(proj.trace - proj.rank),
            )
        )
    return rows


# --- invariant pair, G and g -----------------------------------------------


@dataclass(frozen=True)
class InvariantPair:
    n: int
    f: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    xi: complex
    lambda_plus: complex
    gamma: complex
    bc: BoundaryCondition = BC.PER_PLUS
    indices: np.ndarray = field(default=None, repr=False)
    residual_f: float = 0.0
    residual_phi: float = 0.0
    z_plus: complex = None
    roundoff: float = 0.0

    def __post_init__(self):
        if self.z_plus is None:
            object.__setattr__(self, "z_plus", complex(self.lambda_plus - self.n**2))

    @property
    def lambda_minus(self) -> complex:
        return self.lambda_plus - self.gamma

    @property
    def z_minus(self) -> complex:
        return self.z_plus - self.gamma

    def restricted_matrix(self) -> np.ndarray:
        return np.array([[self.lambda_plus, self.xi], [0.0, self.lambda_minus]])


def _triangularize(M: np.ndarray):
    """Unitary ``E`` with ``E^H M E = [[mu_plus, xi], [0, mu_minus]]`` for a
    2x2 ``M``; ``mu_plus`` is the larger eigenvalue by (Re, Im)."""
    m11, m12, m21, m22 = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    half = 0.5 * (m11 + m22)
    s = np.sqrt(complex((0.5 * (m11 - m22)) ** 2 + m12 * m21))
    mu_plus, mu_minus = sorted((half + s, half - s), key=_key, reverse=True)
    v1 = np.array([m12, mu_plus - m11])
    v2 = np.array([mu_plus - m22, m21])
    e = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
    if np.linalg.norm(e) == 0.0:
        e = np.array([1.0 + 0j, 0j])
    e = e / np.linalg.norm(e)
    E = np.array([[e[0], -np.conj(e[1])], [e[1], np.conj(e[0])]])
    T = E.conj().T @ M @ E
    return complex(mu_plus), complex(mu_minus), complex(T[0, 1]), E


def invariant_pair(op: TruncatedOperator, n: int, tol: float = 1e-8, method: str = "reduced") -> InvariantPair:
    """Orthonormal ``{f, phi}`` spanning ``Ran P_n`` with ``L f = lambda+ f`` and
    ``L phi = (lambda+ - gamma) phi + xi f``.

    ``method="reduced"`` builds the subspace from :func:`invariant_block`, so
    ``gamma`` and ``xi`` keep absolute accuracy of order ``eps * |V|``;
    ``method="schur"`` reads them off a reordered Schur form.
    """
    if not op.bc.is_periodic or expected_rank(op.bc, n) != 2:
        raise ProjectionError(f"invariant pair needs a periodic disk with two eigenvalues (bc={op.bc.value}, n={n})")
    A = op.matrix
    if method == "reduced":
        blk = invariant_block(op, n)
        U, R = np.linalg.qr(blk.basis(len(op)))
        M = R @ blk.B_hat @ np.linalg.inv(R)
        mu_plus, mu_minus, xi, E = _triangularize(M)
        if abs(mu_plus) >= n / 4 or abs(mu_minus) >= n / 4:
            raise StructureError(f"invariant block for n={n} has eigenvalues outside D_{n}", [n * n + mu_plus, n * n + mu_minus])
        f, phi = U @ E[:, 0], U @ E[:, 1]
        lam_plus = n * n + mu_plus
        z_plus = mu_plus
        roundoff = blk.roundoff * float(np.linalg.cond(R))
        gamma = mu_plus - mu_minus
    elif method == "schur":
        T, _ = schur_form(op)
        select = np.abs(np.diag(T) - n * n) < n / 4
        if int(select.sum()) != 2:
            raise StructureError(f"Ran P_{n} has dimension {int(select.sum())}, expected 2", np.diag(T)[select])
        Ts, Zs, _ = _reorder(op, select)
        if _key(Ts[1, 1]) > _key(Ts[0, 0]):
            Ts, Zs, info = sla.lapack.ztrexc(Ts, Zs, 2, 1)
            if info != 0:
                raise ProjectionError(f"Schur swap failed (info={info})")
        f, phi = Zs[:, 0], Zs[:, 1]
        lam_plus = complex(Ts[0, 0])
        z_plus = lam_plus - n * n
        roundoff = 32 * np.finfo(float).eps * float(np.linalg.norm(A, 1))
        gamma = lam_plus - complex(Ts[1, 1])
        xi = complex(Ts[0, 1])
    else:
        raise ValueError(f"unknown method {method!r}")
    # fix phases for reproducibility; xi rotates accordingly
    uf, up = _phase(f), _phase(phi)
    f, phi = f * uf, phi * up
    xi = xi * np.conj(uf) * up
    lam_minus = lam_plus - gamma
    res_f = float(np.linalg.norm(A @ f - lam_plus * f))
    res_phi = float(np.linalg.norm(A @ phi - lam_minus * phi - xi * f))
    if max(res_f, res_phi) > tol:
        raise ProjectionError(f"invariant pair residuals {res_f:.2e}, {res_phi:.2e} exceed {tol:.1e}")
    return InvariantPair(n, f, phi, complex(xi), complex(lam_plus), complex(gamma), op.bc, op.indices, res_f, res_phi, complex(z_plus), roundoff)


def _phase(v: np.ndarray) -> complex:
    j = int(np.argmax(np.abs(v)))
    return abs(v[j]) / v[j]


def _derivative_weights(bc: BoundaryCondition, indices: np.ndarray, x0: float) -> np.ndarray:
    k = np.asarray(indices, dtype=float)
    bc = BC(bc)
    if bc.is_periodic:
        return 1j * k * np.exp(1j * k * x0)
    if bc is BC.DIR:
        return math.sqrt(2) * k * np.cos(k * x0) + 0j
    return -math.sqrt(2) * k * np.sin(k * x0) + 0j


def d0(coeffs, bc: BoundaryCondition, indices=None) -> complex:
    """Derivative at ``x = 0`` of the expansion."""
    coeffs = np.asarray(coeffs)
    if BC(bc) is BC.NEU:
        return 0j
    if indices is None:
        from .opmatrix import _default_indices

        indices = _default_indices(bc, len(coeffs))
    return complex(_derivative_weights(bc, indices, 0.0) @ coeffs)


def d_pi(coeffs, bc: BoundaryCondition, indices=None) -> complex:
    """Derivative at ``x = pi`` of the expansion."""
    coeffs = np.asarray(coeffs)
    if BC(bc) is BC.NEU:
        return 0j
    if indices is None:
        from .opmatrix import _default_indices

        indices = _default_indices(bc, len(coeffs))
    k = np.asarray(indices)
    w = _derivative_weights(bc, indices, 0.0) * np.where(k % 2 == 0, 1.0, -1.0)
    return complex(w @ coeffs)


@dataclass(frozen=True)
class GVector:
    a: complex
    b: complex
    G: np.ndarray = field(repr=False)
    d0_f: complex
    d0_phi: complex
    d0_G: complex
    dpi_G: complex


def build_G(pair: InvariantPair, tol: float = 1e-10) -> GVector:
    """Unit ``G = a f + b phi`` with ``G'(0) = G'(pi) = 0``."""
    df = d0(pair.f, pair.bc, pair.indices)
    dphi = d0(pair.phi, pair.bc, pair.indices)
    n = pair.n
    if abs(df) <= tol * n:
        a, b = 1.0 + 0j, 0j
    else:
        norm = math.hypot(abs(df), abs(dphi))
        if norm <= 1e-12:
            raise ProjectionError(f"degenerate G for n={n}: |d0(f)|, |d0(phi)| both vanish")
        a, b = dphi / norm, -df / norm
    G = a * pair.f + b * pair.phi
    dG = d0(G, pair.bc, pair.indices)
    dpiG = d_pi(G, pair.bc, pair.indices)
    limit = 1e-7 * n
    if abs(dG) > limit or abs(dpiG) > limit:
        raise ProjectionError(f"G for n={n} misses the Neumann conditions: |G'(0)|={abs(dG):.2e}, |G'(pi)|={abs(dpiG):.2e}")
    return GVector(complex(a), complex(b), G, df, dphi, dG, dpiG)


@dataclass(frozen=True)
class NeumannVector:
    n: int
    g: np.ndarray = field(repr=False)
    nu: complex
    pairing: float
    xg: np.ndarray = field(repr=False)
    indices: np.ndarray = field(default=None, repr=False)
    z: complex = None

    def __post_init__(self):
        if self.z is None:
            object.__setattr__(self, "z", complex(self.nu - self.n**2))

    def pair_with(self, u: np.ndarray) -> complex:
        """Bilinear ``(1/pi) int_0^pi u(x) g(x) dx`` for a periodic-basis vector ``u``."""
        return complex(u @ self.xg)

    @property
    def distance(self) -> float:
        """``||conj(g) - G||`` for unit ``G`` and the rotated ``g``."""
        return math.sqrt(max(2.0 - 2.0 * self.pairing, 0.0))


def neumann_vector(
    op_neu: TruncatedOperator,
    n: int,
    G: np.ndarray | GVector,
    per_indices: np.ndarray,
    eigs: EigenResult | None = None,
) -> NeumannVector:
    """Unit Neumann eigenvector ``g`` for the eigenvalue in ``D_n`` with phase
    chosen so that ``(1/pi) int G g`` is real and non-negative.

    Without ``eigs`` the eigenpair comes from :func:`invariant_block`, which
    resolves ``nu - n^2`` to absolute accuracy ``eps * |V|``.
    """
    if op_neu.bc is not BC.NEU:
        raise ProjectionError("neumann_vector needs a Neumann operator")
    if eigs is None:
        blk = invariant_block(op_neu, n)
        z = complex(blk.B_hat[0, 0])
        if abs(z) >= n / 4:
            raise StructureError(f"Neumann eigenvalue near {n}^2 lies outside D_{n}", [n * n + z])
        nu = n * n + z
        g = blk.basis(len(op_neu))[:, 0]
    else:
        inside = np.flatnonzero(np.abs(eigs.values - n * n) < n / 4)
        if len(inside) != 1:
            raise StructureError(f"Neumann D_{n} holds {len(inside)} eigenvalues, expected 1", eigs.values[inside])
        j = int(inside[0])
        nu = complex(eigs.values[j])
        z = nu - n * n
        g = eigs.vectors[:, j]
    g = g / np.linalg.norm(g)
    Gv = G.G if isinstance(G, GVector) else np.asarray(G)
    xg = cross_gram(per_indices, op_neu.indices) @ g
    p = complex(Gv @ xg)
    if abs(p) < 1e-12:
        raise ProjectionError(f"<G, conj g> = {abs(p):.2e} for n={n}; phase undefined")
    rot = abs(p) / p
    return NeumannVector(n, g * rot, nu, abs(p), xg * rot, op_neu.indices, complex(z))


def dere_residual(pair: InvariantPair, Gv: GVector, gv: NeumannVector) -> float:
    """``|<G,g> delta_neu - b <phi,g> gamma + b <f,g> xi|`` with bilinear pairings."""
    delta = pair.z_plus - gv.z
    return abs(gv.pairing * delta - Gv.b * gv.pair_with(pair.phi) * pair.gamma + Gv.b * gv.pair_with(pair.f) * pair.xi)


# --- case classification --------------------------------------------------


@dataclass(frozen=True)
class CaseResult:
    label: str
    beta_plus: complex
    beta_minus: complex
    d0_ratio: float | None = None

    @property
    def d0_ratio_ok(self) -> bool | None:
        if self.label == "Case1" or self.d0_ratio is None:
            return None
        return 0.25 <= self.d0_ratio <= 4.0


def case_classify(beta_plus: complex, beta_minus: complex, d0_f: complex | None = None, d0_phi: complex | None = None) -> CaseResult:
    """Case1 when ``|beta-|/4 <= |beta+| <= 4|beta-|``; Case2a when
    ``4|beta+| < |beta-|``; Case2b when ``4|beta-| < |beta+|``."""
    bp, bm = abs(beta_plus), abs(beta_minus)
    if 4 * bp < bm:
        label = "Case2a"
    elif 4 * bm < bp:
        label = "Case2b"
    else:
        label = "Case1"
    ratio = None
    if d0_f is not None and d0_phi is not None and abs(d0_phi) > 0:
        ratio = abs(d0_f) / abs(d0_phi)
    return CaseResult(label, complex(beta_plus), complex(beta_minus), ratio)


__all__ = [
    "CaseResult",
    "GVector",
    "InvariantPair",
    "NeumannVector",
    "PoleError",
    "ProjectionDiffRow",
    "ProjectionError",
    "RieszProjection",
    "build_G",
    "case_classify",
    "d0",
    "d_pi",
    "dere_residual",
    "free_modes",
    "invariant_pair",
    "kvk_hs_norm",
    "low_rank_two_inf",
    "neumann_vector",
    "projection_diff_audit",
    "riesz_projection",
    "schur_form",
    "two_inf_norm",
]
