"""Sequences of spectral triangles over n, two-sided bound audits, decay-model
fits, weighted-space membership and the three Riesz-basis criteria.

Every scalar of a :class:`TriangleRecord` is computed twice, at cutoff ``K``
and at ``3K/2``.  The change plus a roundoff floor is its noise estimate; a
quantity is *resolved* when its magnitude is at least ``resolution`` times
its noise.  Audits only judge inequalities between resolved quantities.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special, stats

from .opmatrix import BC, BoundaryCondition, TruncatedOperator, build_operator
from .potential import PotentialSpec, WeightSpec, fourier_tables, lp_norm, weighted_l2_norm
from .projections import (
    ProjectionDiffRow,
    build_G,
    case_classify,
    dere_residual,
    invariant_pair,
    kvk_hs_norm,
    neumann_vector,
)
from .reduction import invariant_block, schur_reduce
from .spectra import StructureError, choose_N, eigenvalues, localize, pair_periodic, single_in_disk

RESOLUTION = 100.0
NEUMANN_BOUND = (1 / 80, 19.0)
DIRICHLET_BOUND = (1 / 72, 58.0)
XI_BOUND = (1 / 5, 9.0)
PAIRING_MIN = 71 / 72
DISTANCE_MAX = 1 / 6
AB_MIN = 4 / 17
XI_FACTOR = 15.0
DERE_REL = 1e-7


def _parity_bcs(parity) -> tuple[BoundaryCondition, ...]:
    if parity in ("both", None):
        return (BC.PER_PLUS, BC.PER_MINUS)
    if parity in (0, "even", BC.PER_PLUS, "PerPlus"):
        return (BC.PER_PLUS,)
    if parity in (1, "odd", BC.PER_MINUS, "PerMinus"):
        return (BC.PER_MINUS,)
    raise ValueError(f"parity must be even, odd or both, got {parity!r}")


# --- records --------------------------------------------------------------


@dataclass
class TriangleRecord:
    n: int
    bc: BoundaryCondition
    K: int
    z_plus: complex = 0j
    gamma: complex = 0j
    z_nu: complex = 0j
    z_mu: complex = 0j
    alpha: complex = 0j
    beta_plus: complex = 0j
    beta_minus: complex = 0j
    beta_plus_zp: complex = 0j
    beta_minus_zp: complex = 0j
    xi: complex = 0j
    a: complex = 0j
    b: complex = 0j
    d0_f: complex = 0j
    d0_phi: complex = 0j
    pairing: float = 0.0
    pair_f: complex = 0j
    pair_phi: complex = 0j
    dere: float = 0.0
    case: str = ""
    d0_ratio: float | None = None
    roundoff: float = 0.0
    in_disk_regime: bool = True
    eig_lambda_plus: complex | None = None
    eig_lambda_minus: complex | None = None
    eig_nu: complex | None = None
    eig_mu: complex | None = None
    noise: dict = field(default_factory=dict)
    refine_delta: dict = field(default_factory=dict)
    error: str | None = None

    # derived values
    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def z_minus(self) -> complex:
        return self.z_plus - self.gamma

    @property
    def lambda_plus(self) -> complex:
        return self.n**2 + self.z_plus

    @property
    def lambda_minus(self) -> complex:
        return self.n**2 + self.z_minus

    @property
    def nu(self) -> complex:
        return self.n**2 + self.z_nu

    @property
    def mu(self) -> complex:
        return self.n**2 + self.z_mu

    @property
    def delta_neu(self) -> complex:
        return self.z_plus - self.z_nu

    @property
    def delta_dir(self) -> complex:
        return self.z_plus - self.z_mu

    @property
    def z_star(self) -> complex:
        return self.z_plus - 0.5 * self.gamma

    @property
    def distance(self) -> float:
        return math.sqrt(max(2.0 - 2.0 * self.pairing, 0.0))

    def value(self, name: str) -> float:
        """Magnitude of a named audited quantity."""
        g = abs(self.gamma)
        table = {
            "gamma": g,
            "delta_neu": abs(self.delta_neu),
            "delta_dir": abs(self.delta_dir),
            "xi": abs(self.xi),
            "beta_plus": abs(self.beta_plus),
            "beta_minus": abs(self.beta_minus),
            "beta_sum": abs(self.beta_plus) + abs(self.beta_minus),
            "size": g + abs(self.delta_neu),
            "size_dir": g + abs(self.delta_dir),
            "size_xi": g + abs(self.xi),
        }
        return table[name]

    def noise_of(self, name: str) -> float:
        composite = {
            "size": ("gamma", "delta_neu"),
            "size_dir": ("gamma", "delta_dir"),
            "size_xi": ("gamma", "xi"),
            "beta_sum": ("beta_plus", "beta_minus"),
        }
        if name in composite:
            return sum(self.noise.get(k, 0.0) for k in composite[name])
        return self.noise.get(name, 0.0)

    def resolved(self, name: str, factor: float = RESOLUTION) -> bool:
        return self.ok and self.value(name) >= factor * self.noise_of(name)

    def as_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[k] = _jsonable(v)
        for k in ("lambda_plus", "lambda_minus", "nu", "mu", "delta_neu", "delta_dir", "z_star", "distance"):
            out[k] = _jsonable(getattr(self, k))
        return out


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, BoundaryCondition):
        return v.value
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


@dataclass
class TriangleSequence:
    label: str
    K: int
    K_refined: int | None
    N: int | None
    records: list[TriangleRecord]
    resolution: float = RESOLUTION
    counting_ok: bool = True

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def usable(self, parity=None) -> list[TriangleRecord]:
        bcs = _parity_bcs(parity)
        return [r for r in self.records if r.ok and r.in_disk_regime and r.bc in bcs]

    def by_n(self) -> dict[int, TriangleRecord]:
        return {r.n: r for r in self.records}


# --- pipeline -------------------------------------------------------------


@dataclass
class _Ops:
    per: dict
    neu: TruncatedOperator
    dir: TruncatedOperator


def _build_ops(spec: PotentialSpec, bcs, K: int, wall_factor: int) -> _Ops:
    Kw = wall_factor * K
    tables = fourier_tables(spec, 4 * max(K, Kw) + 2)
    per = {bc: build_operator(spec, bc, K, tables) for bc in bcs}
    return _Ops(per, build_operator(spec, BC.NEU, Kw, tables), build_operator(spec, BC.DIR, Kw, tables))


def _local(ops: _Ops, bc: BoundaryCondition, n: int) -> dict:
    per = ops.per[bc]
    pair = invariant_pair(per, n)
    bn = invariant_block(ops.neu, n)
    bd = invariant_block(ops.dir, n)
    z_nu, z_mu = complex(bn.B_hat[0, 0]), complex(bd.B_hat[0, 0])
    for z, name in ((z_nu, "Neu"), (z_mu, "Dir")):
        if abs(z) >= n / 4:
            raise StructureError(f"{name} eigenvalue near {n}^2 lies outside D_{n}")
    z_star = pair.z_plus - 0.5 * pair.gamma
    red = schur_reduce(per, n, z_star)
    red_p = schur_reduce(per, n, pair.z_plus)
    Gv = build_G(pair)
    gv = neumann_vector(ops.neu, n, Gv, per.indices)
    case = case_classify(red_p.beta_plus, red_p.beta_minus, Gv.d0_f, Gv.d0_phi)
    return dict(
        z_plus=pair.z_plus,
        gamma=pair.gamma,
        z_nu=z_nu,
        z_mu=z_mu,
        alpha=red.alpha,
        beta_plus=red.beta_plus,
        beta_minus=red.beta_minus,
        beta_plus_zp=red_p.beta_plus,
        beta_minus_zp=red_p.beta_minus,
        xi=pair.xi,
        a=Gv.a,
        b=Gv.b,
        d0_f=Gv.d0_f,
        d0_phi=Gv.d0_phi,
        pairing=gv.pairing,
        pair_f=gv.pair_with(pair.f),
        pair_phi=gv.pair_with(pair.phi),
        dere=dere_residual(pair, Gv, gv),
        case=case.label,
        d0_ratio=case.d0_ratio,
        roundoff=max(pair.roundoff, bn.roundoff, bd.roundoff),
    )


_NOISE_KEYS = {
    "gamma": lambda d: abs(d["gamma"]),
    "delta_neu": lambda d: abs(d["z_plus"] - d["z_nu"]),
    "delta_dir": lambda d: abs(d["z_plus"] - d["z_mu"]),
    "xi": lambda d: abs(d["xi"]),
    "beta_plus": lambda d: abs(d["beta_plus"]),
    "beta_minus": lambda d: abs(d["beta_minus"]),
}

_REFINE_KEYS = ("z_plus", "gamma", "z_nu", "z_mu", "beta_plus", "beta_minus", "alpha")


def _record(n, bc, K, base: dict, fine: dict | None) -> TriangleRecord:
    rec = TriangleRecord(n=n, bc=bc, K=K, **base)
    floor = 2 * base["roundoff"]
    for key, fn in _NOISE_KEYS.items():
        diff = abs(fn(base) - fn(fine)) if fine is not None else 0.0
        rec.noise[key] = diff + floor
    if fine is not None:
        for key in _REFINE_KEYS:
            rec.refine_delta[key] = abs(base[key] - fine[key])
        rec.refine_delta["xi_abs"] = abs(abs(base["xi"]) - abs(fine["xi"]))
        rec.refine_delta["pairing"] = abs(base["pairing"] - fine["pairing"])
        rec.refine_delta["dere"] = abs(base["dere"] - fine["dere"])
    return rec


def triangle_sequence(
    spec: PotentialSpec,
    parity,
    n_range,
    K: int,
    refine: bool = True,
    wall_factor: int = 2,
    workers: int = 1,
    resolution: float = RESOLUTION,
    check_eigen: bool = True,
    tol_eigen: float = 1e-10,
) -> TriangleSequence:
    """Spectral triangles, ``beta+-(z*)``, ``xi`` and the ``G``/``g`` data for
    every ``n`` of the requested parity.

    Dirichlet and Neumann matrices use cutoff ``wall_factor * K`` so their
    highest frequency matches the periodic ones.  With ``check_eigen`` the
    dense spectra are localised, ``N`` is chosen by the counting law and the
    disk eigenvalues are stored next to the reduced values.
    """
    bcs = _parity_bcs(parity)
    ns = sorted({int(n) for n in n_range if int(n) >= 1})
    ns = [n for n in ns if any(bc.contains(n) for bc in bcs)]
    if ns and K < 4 * max(ns):
        raise ValueError(f"K={K} must be at least 4 * max(n) = {4 * max(ns)}")
    ops = _build_ops(spec, bcs, K, wall_factor)
    K2 = int(round(1.5 * K)) if refine else None
    fine_ops = _build_ops(spec, bcs, K2, wall_factor) if refine else None

    N, counting_ok, eig_disks = None, True, {}
    if check_eigen and ns:
        spectra = {bc: eigenvalues(op, tol_eigen).values for bc, op in ops.per.items()}
        spectra[BC.NEU] = eigenvalues(ops.neu, tol_eigen).values
        spectra[BC.DIR] = eigenvalues(ops.dir, tol_eigen).values
        try:
            N = choose_N(spectra, max(ns))
        except StructureError:
            counting_ok = False
            N = 0
        eig_disks = {bc: localize(vals, bc, N) for bc, vals in spectra.items()}

    def work(n):
        bc = BC.for_parity(n)
        rec_kw = {}
        try:
            base = _local(ops, bc, n)
            fine = _local(fine_ops, bc, n) if refine else None
            rec = _record(n, bc, K, base, fine)
        except Exception as exc:  # per-n failure marker, sequence continues
            rec = TriangleRecord(n=n, bc=bc, K=K, error=f"{type(exc).__name__}: {exc}")
        if eig_disks:
            rec.in_disk_regime = n > N
            try:
                lp, lm = pair_periodic(eig_disks[bc], n)
                rec_kw = dict(
                    eig_lambda_plus=lp,
                    eig_lambda_minus=lm,
                    eig_nu=single_in_disk(eig_disks[BC.NEU], n),
                    eig_mu=single_in_disk(eig_disks[BC.DIR], n),
                )
            except StructureError as exc:
                if rec.in_disk_regime and rec.error is None:
                    rec.error = f"StructureError: {exc}"
            for k, v in rec_kw.items():
                setattr(rec, k, v)
        return rec

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(work, ns))
    else:
        records = [work(n) for n in ns]
    return TriangleSequence(spec.label, K, K2, N, records, resolution, counting_ok)


# --- bound audit ----------------------------------------------------------


@dataclass
class BoundCheck:
    n: int
    name: str
    value: float
    beta_sum: float
    lower_ok: bool
    upper_ok: bool

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok

    @property
    def ratio(self) -> float:
        return self.value / self.beta_sum if self.beta_sum > 0 else float("nan")


@dataclass
class BoundAudit:
    checks: list[BoundCheck]
    N0: int | None
    evaluated: list[int]
    skipped: list[int]
    tightest: dict
    equivalence: dict
    verdict: str

    def as_dict(self) -> dict:
        return {
            "N0": self.N0,
            "evaluated": self.evaluated,
            "skipped": self.skipped,
            "tightest": self.tightest,
            "equivalence": self.equivalence,
            "verdict": self.verdict,
            "checks": [asdict(c) | {"ratio": c.ratio} for c in self.checks],
        }


def threshold(results: dict[int, bool]) -> int | None:
    """Smallest evaluated ``n`` from which every evaluated check passes."""
    if not results:
        return None
    ns = sorted(results)
    failing = [n for n in ns if not results[n]]
    if not failing:
        return ns[0]
    after = [n for n in ns if n > failing[-1]]
    return after[0] if after else None


BOUNDS = {
    "neumann": ("size", NEUMANN_BOUND),
    "dirichlet": ("size_dir", DIRICHLET_BOUND),
    "xi": ("size_xi", XI_BOUND),
}


def bound_audit(seq: TriangleSequence, bounds: dict | None = None, min_points: int = 3) -> BoundAudit:
    """Check ``lo * (|beta+|+|beta-|) <= quantity <= hi * (|beta+|+|beta-|)``
    for the three two-sided bounds at every resolved ``n``."""
    bounds = BOUNDS if bounds is None else bounds
    checks, per_n, skipped = [], {}, []
    for rec in seq.usable():
        row = []
        if not rec.resolved("beta_sum", seq.resolution):
            skipped.append(rec.n)
            continue
        beta = rec.value("beta_sum")
        for name, (qty, (lo, hi)) in bounds.items():
            if not rec.resolved(qty, seq.resolution):
                continue
            val = rec.value(qty)
            row.append(BoundCheck(rec.n, name, val, beta, val >= lo * beta, val <= hi * beta))
        if row:
            checks.extend(row)
            per_n[rec.n] = all(c.ok for c in row)
        else:
            skipped.append(rec.n)
    N0 = threshold(per_n)
    tight = {}
    for name, (_, (lo, hi)) in bounds.items():
        ratios = [c.ratio for c in checks if c.name == name and N0 is not None and c.n >= N0 and c.beta_sum > 0]
        tight[name] = {
            "allowed": [lo, hi],
            "empirical": [min(ratios), max(ratios)] if ratios else None,
        }
    eq = _equivalence(seq)
    past = [n for n in per_n if N0 is not None and n >= N0]
    if not per_n:
        verdict = "insufficient-data"
    elif N0 is None:
        verdict = "fail"
    elif len(past) < min_points:
        verdict = "insufficient-data"
    else:
        verdict = "pass"
    return BoundAudit(checks, N0, sorted(per_n), sorted(skipped), tight, eq, verdict)


def _equivalence(seq: TriangleSequence) -> dict:
    forward, backward = [], []
    for rec in seq.usable():
        if rec.resolved("size", seq.resolution) and rec.resolved("size_dir", seq.resolution):
            s, sd = rec.value("size"), rec.value("size_dir")
            if s > 0 and sd > 0:
                forward.append(sd / s)
                backward.append(s / sd)
    cap_f, cap_b = 80 * 58, 72 * 19
    return {
        "max_dir_over_neu": max(forward) if forward else None,
        "max_neu_over_dir": max(backward) if backward else None,
        "caps": [cap_f, cap_b],
        "within_caps": bool((not forward) or (max(forward) <= cap_f and max(backward) <= cap_b)),
    }


# --- identity audit -------------------------------------------------------


@dataclass
class IdentityRow:
    n: int
    pairing: float
    distance: float
    dere: float
    dere_bound: float
    dere_testable: bool
    case: str
    ab: float
    xi_ratio: float | None
    d0_ratio: float | None

    @property
    def pairing_ok(self) -> bool:
        return self.pairing >= PAIRING_MIN and self.distance <= DISTANCE_MAX

    @property
    def dere_ok(self) -> bool:
        return self.dere <= self.dere_bound

    @property
    def case2_ok(self) -> bool | None:
        if self.case == "Case1":
            return None
        ok = self.ab >= AB_MIN
        if self.xi_ratio is not None:
            ok = ok and self.xi_ratio <= XI_FACTOR
        if self.d0_ratio is not None:
            ok = ok and 0.25 <= self.d0_ratio <= 4.0
        return ok


@dataclass
class IdentityAudit:
    rows: list[IdentityRow]
    N0: int | None
    N0_case2: int | None
    dere_window: list[int]
    dere_failures: list[int]
    verdict: str

    def as_dict(self) -> dict:
        return {
            "N0": self.N0,
            "N0_case2": self.N0_case2,
            "dere_window": self.dere_window,
            "dere_failures": self.dere_failures,
            "verdict": self.verdict,
            "rows": [asdict(r) | {"pairing_ok": r.pairing_ok, "dere_ok": r.dere_ok, "case2_ok": r.case2_ok} for r in self.rows],
        }


def identity_audit(seq: TriangleSequence, margin: float = 10.0, min_points: int = 3, rel: float = DERE_REL) -> IdentityAudit:
    """The pairing bounds ``<G, conj g> >= 71/72`` and ``||conj g - G|| <= 1/6``
    from ``N0`` on; the delta_neu identity at every ``n`` where its relative
    contract exceeds ``margin`` times the propagated noise; and the Case 2
    consequences ``|a||b| >= 4/17``, ``|xi| <= 15(|delta_neu| + |gamma|)``."""
    rows, pair_n, case2_n, window, failures = [], {}, {}, [], []
    for rec in seq.usable():
        scale = abs(rec.gamma) + abs(rec.delta_neu) + abs(rec.xi)
        bound = rel * (scale + 1e-12)
        noise = (
            rec.pairing * rec.noise_of("delta_neu")
            + abs(rec.b) * (rec.noise_of("gamma") * abs(rec.pair_phi) + rec.noise_of("xi") * abs(rec.pair_f))
            + rec.roundoff
        )
        testable = bound >= margin * noise
        xi_ratio = None
        if rec.resolved("xi", seq.resolution) and rec.resolved("size", seq.resolution) and rec.value("size") > 0:
            xi_ratio = rec.value("xi") / rec.value("size")
        row = IdentityRow(
            rec.n, rec.pairing, rec.distance, rec.dere, bound, testable, rec.case, abs(rec.a) * abs(rec.b), xi_ratio, rec.d0_ratio
        )
        rows.append(row)
        pair_n[rec.n] = row.pairing_ok
        if testable:
            window.append(rec.n)
            if not row.dere_ok:
                failures.append(rec.n)
        if row.case2_ok is not None:
            case2_n[rec.n] = row.case2_ok
    N0 = threshold(pair_n)
    past = [n for n in pair_n if N0 is not None and n >= N0]
    if N0 is None or failures:
        verdict = "fail"
    elif len(past) < min_points or not window:
        verdict = "insufficient-data"
    else:
        verdict = "pass"
    return IdentityAudit(rows, N0, threshold(case2_n), window, failures, verdict)


# --- regression helpers ---------------------------------------------------


@dataclass(frozen=True)
class Slope:
    slope: float
    intercept: float
    r_squared: float
    points: int


def loglog_slope(ns, ys, log1p: bool = False) -> Slope:
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(ys, dtype=float)
    y = np.log1p(ys) if log1p else np.log(ys)
    if len(ns) < 2 or np.ptp(ns) == 0:
        return Slope(float("nan"), float("nan"), float("nan"), len(ns))
    if np.ptp(y) == 0:
        return Slope(0.0, float(y[0]), 1.0, len(ns))
    fit = stats.linregress(np.log(ns), y)
    return Slope(float(fit.slope), float(fit.intercept), float(fit.rvalue**2), len(ns))


def growth_verdict(s: Slope, bounded_max: float = 0.05, unbounded_min: float = 0.5, r2_min: float = 0.8, min_points: int = 3) -> str:
    if s.points < min_points or not math.isfinite(s.slope):
        return "insufficient-data"
    if s.slope <= bounded_max:
        return "bounded"
    if s.slope >= unbounded_min and s.r_squared >= r2_min:
        return "unbounded-trend"
    return "insufficient-data"


def envelope_slope(ns, ratios, min_points: int = 3) -> Slope:
    """Slope of ``log(1 + max_{m <= n} r_m)`` against ``log n`` over the later
    half of the window (at least ``min_points`` values)."""
    order = np.argsort(ns)
    ns = np.asarray(ns, dtype=float)[order]
    env = np.maximum.accumulate(np.asarray(ratios, dtype=float)[order])
    tail = max(min_points, math.ceil(len(ns) / 2))
    return loglog_slope(ns[-tail:], env[-tail:], log1p=True)


# --- decay fits -----------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    model: str
    exponent: float
    prefactor: float
    r_squared: float
    window: tuple[int, int] | None
    alternative_r_squared: float = float("nan")
    points: int = 0

    @property
    def exponential_or_faster(self) -> bool:
        return self.model in ("exponential", "superexponential")

    def as_dict(self) -> dict:
        return asdict(self)


def decay_fit(ns, ts, resolved=None, min_points: int = 6) -> DecayFit:
    """Fit ``log t`` against ``log n`` (polynomial) and against ``n``
    (exponential); keep the better r^2.  Fewer than ``min_points`` usable
    values means the sequence fell below the noise floor too fast to fit."""
    ns = np.asarray(ns, dtype=float)
    ts = np.abs(np.asarray(ts, dtype=float))
    keep = ts > 0
    if resolved is not None:
        keep &= np.asarray(resolved, dtype=bool)
    n, t = ns[keep], ts[keep]
    if len(n) < min_points:
        window = (int(n.min()), int(n.max())) if len(n) else None
        return DecayFit("superexponential", float("nan"), float("nan"), float("nan"), window, points=len(n))
    y = np.log(t)
    poly = stats.linregress(np.log(n), y)
    expo = stats.linregress(n, y)
    r2p, r2e = float(poly.rvalue**2), float(expo.rvalue**2)
    window = (int(n.min()), int(n.max()))
    if r2p >= r2e:
        return DecayFit("polynomial", float(poly.slope), float(math.exp(poly.intercept)), r2p, window, r2e, len(n))
    return DecayFit("exponential", float(expo.slope), float(math.exp(expo.intercept)), r2e, window, r2p, len(n))


def sizes(seq: TriangleSequence) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(n, |gamma_n| + |delta_neu_n|, resolved)`` over usable records."""
    recs = sorted(seq.usable(), key=lambda r: r.n)
    ns = np.array([r.n for r in recs], dtype=int)
    ts = np.array([r.value("size") for r in recs])
    ok = np.array([r.resolved("size", seq.resolution) for r in recs], dtype=bool)
    return ns, ts, ok


# --- weighted membership --------------------------------------------------


@dataclass
class MembershipReport:
    weighted_norm: float
    partial_sums: list
    indices: list
    tail_fit: DecayFit | None
    verdict: str
    log_ratio_condition: bool | None

    def as_dict(self) -> dict:
        return {
            "weighted_norm": self.weighted_norm,
            "partial_sums": list(map(float, self.partial_sums)),
            "indices": list(map(int, self.indices)),
            "tail_fit": self.tail_fit.as_dict() if self.tail_fit else None,
            "verdict": self.verdict,
            "log_ratio_condition": self.log_ratio_condition,
        }


def weighted_membership(ns, ts, weight, resolved=None, min_points: int = 6) -> MembershipReport:
    """Partial sums of ``sum t_n^2 Omega(n)^2`` and a verdict on the trend of
    the increments: summable power law (exponent < -1), or geometric decay of
    at least a factor 10 across the window, counts as convergent."""
    ns = np.asarray(ns, dtype=int)
    ts = np.abs(np.asarray(ts, dtype=float))
    mask = np.ones(len(ns), bool) if resolved is None else np.asarray(resolved, bool)
    ns, ts = ns[mask], ts[mask]
    wn = weighted_l2_norm(dict(zip(ns.tolist(), ts.tolist())), weight)
    cond = None
    if isinstance(weight, WeightSpec) and weight.kind == "gevrey" and len(ns):
        cond = weight.log_ratio_decreasing(int(ns.max()))
    if len(ns) == 0 or not np.any(ts > 0):
        return MembershipReport(wn.value, wn.partial_sums, wn.indices, None, "convergent-trend", cond)
    inc = (ts * np.asarray(weight(ns), dtype=float)) ** 2
    fit = decay_fit(ns, inc, min_points=min_points)
    span = float(ns.max() - ns.min())
    if fit.model == "superexponential":
        verdict = "convergent-trend"
    elif fit.model == "polynomial":
        verdict = "convergent-trend" if fit.exponent < -1.05 else "divergent-trend"
    else:
        verdict = "convergent-trend" if fit.r_squared >= 0.9 and fit.exponent * span <= -math.log(10) else "divergent-trend"
        if verdict == "divergent-trend" and fit.alternative_r_squared >= 0.9:
            poly = stats.linregress(np.log(ns[inc > 0]), np.log(inc[inc > 0]))
            verdict = "convergent-trend" if poly.slope < -1.05 else "divergent-trend"
    return MembershipReport(wn.value, wn.partial_sums, wn.indices, fit, verdict, cond)


# --- Riesz criteria -------------------------------------------------------


@dataclass
class CriterionStats:
    name: str
    ns: list
    ratios: list
    slope: Slope | None
    verdict: str

    @property
    def max_ratio(self) -> float | None:
        return max(self.ratios) if self.ratios else None


@dataclass
class CriteriaReport:
    max_ratio_neu: float | None
    max_ratio_dir: float | None
    beta_ratio_range: tuple | None
    growth_slopes: dict
    verdicts: dict
    per_parity: dict
    agreement: bool | None
    degenerate: bool
    summary: str

    def as_dict(self) -> dict:
        return {
            "max_ratio_neu": self.max_ratio_neu,
            "max_ratio_dir": self.max_ratio_dir,
            "beta_ratio_range": self.beta_ratio_range,
            "growth_slopes": self.growth_slopes,
            "verdicts": self.verdicts,
            "agreement": self.agreement,
            "degenerate": self.degenerate,
            "summary": self.summary,
            "per_parity": {
                bc: {name: {"n": s.ns, "ratios": s.ratios, "slope": asdict(s.slope) if s.slope else None, "verdict": s.verdict} for name, s in d.items()}
                for bc, d in self.per_parity.items()
            },
        }


def _ratio_known(rec: TriangleRecord, num: str, den: str, factor: float) -> bool:
    # ratio known to absolute accuracy < 1 once the denominator is resolved
    if not rec.resolved(den, factor) or rec.value(den) == 0:
        return False
    return rec.resolved(num, factor) or factor * rec.noise_of(num) <= rec.value(den)


CRITERIA = ("neumann", "dirichlet", "beta")


def riesz_criteria(seq: TriangleSequence, **thresholds) -> CriteriaReport:
    """Finite-window evidence for ``sup |delta_neu|/|gamma|``,
    ``sup |delta_dir|/|gamma|`` and ``0 < inf |beta-/beta+| <= sup < inf``
    over ``gamma_n != 0`` (per parity)."""
    factor = seq.resolution
    per_parity, any_gap = {}, False
    all_neu, all_dir, all_beta = [], [], []
    for bc in (BC.PER_PLUS, BC.PER_MINUS):
        recs = sorted((r for r in seq.usable(bc)), key=lambda r: r.n)
        gaps = [r for r in recs if r.resolved("gamma", factor) and r.value("gamma") > 0]
        if not recs:
            continue
        any_gap |= bool(gaps)
        d = {}
        for name, num in (("neumann", "delta_neu"), ("dirichlet", "delta_dir")):
            pts = [(r.n, r.value(num) / r.value("gamma")) for r in gaps if _ratio_known(r, num, "gamma", factor)]
            d[name] = _criterion(name, pts, thresholds)
        beta_pts = []
        for r in gaps:
            bp, bm = r.value("beta_plus"), r.value("beta_minus")
            if bp > 0 and bm > 0 and r.resolved("beta_plus", factor) and r.resolved("beta_minus", factor):
                beta_pts.append((r.n, bm / bp))
        stats_dm = _criterion("beta", [(n, max(q, 1 / q)) for n, q in beta_pts], thresholds)
        stats_dm.ratios = [q for _, q in beta_pts]
        d["beta"] = stats_dm
        per_parity[bc.value] = d
        all_neu += d["neumann"].ratios
        all_dir += d["dirichlet"].ratios
        all_beta += d["beta"].ratios
    if not any_gap:
        return CriteriaReport(None, None, None, {}, {c: "degenerate" for c in CRITERIA}, per_parity, None, True, "degenerate: all gaps closed")
    verdicts, slopes = {}, {}
    for name in CRITERIA:
        vs = [d[name].verdict for d in per_parity.values()]
        if "unbounded-trend" in vs:
            verdicts[name] = "unbounded-trend"
        elif vs and all(v == "bounded" for v in vs):
            verdicts[name] = "bounded"
        else:
            verdicts[name] = "insufficient-data"
        slopes[name] = {bc: (d[name].slope.slope if d[name].slope else None) for bc, d in per_parity.items()}
    agree = len(set(verdicts.values())) == 1
    summary = verdicts["neumann"] if agree else "criteria disagree"
    return CriteriaReport(
        max(all_neu) if all_neu else None,
        max(all_dir) if all_dir else None,
        (min(all_beta), max(all_beta)) if all_beta else None,
        slopes,
        verdicts,
        per_parity,
        agree,
        False,
        summary,
    )


def _criterion(name, pts, thresholds) -> CriterionStats:
    if not pts:
        return CriterionStats(name, [], [], None, "insufficient-data")
    ns, rs = zip(*pts)
    s = envelope_slope(ns, rs)
    return CriterionStats(name, list(ns), list(rs), s, growth_verdict(s, **thresholds))


# --- lemma audit ----------------------------------------------------------


def tp_power(p: float) -> float:
    """``T_p^p = 2 (4^p + 2^{p+1} zeta(p))``."""
    return 2.0 * (4.0**p + 2.0 ** (p + 1) * float(special.zeta(p)))


def _index_sum(bc: BoundaryCondition, lam: np.ndarray, p: float, eps: int, cutoff: int) -> np.ndarray:
    """``sum_{k in Gamma_bc} |k|^{p eps} / |lambda - k^2|^p`` with a rigorous
    upper bound for the tail ``|k| > cutoff``."""
    bc = BC(bc)
    if bc is BC.PER_PLUS:
        ks = np.arange(-cutoff - (cutoff % 2), cutoff + 1, 2)
    elif bc is BC.PER_MINUS:
        ks = np.arange(-cutoff - 1 + (cutoff % 2), cutoff + 1, 2)
    elif bc is BC.DIR:
        ks = np.arange(1, cutoff + 1)
    else:
        ks = np.arange(0, cutoff + 1)
    ks = ks[np.abs(ks) <= cutoff]
    kf = np.abs(ks).astype(float)
    head = np.sum(kf[None, :] ** (p * eps) / np.abs(lam[:, None] - kf[None, :] ** 2) ** p, axis=1)
    a = p * (2 - eps)
    first = cutoff + 1
    if bc.is_periodic:
        if (first % 2 == 0) != (bc is BC.PER_PLUS):
            first += 1
        tail = 2 * 2.0 ** (-a) * special.zeta(a, first / 2.0)
    else:
        tail = special.zeta(a, float(first))
    factor = (1.0 - np.abs(lam) / cutoff**2) ** (-p)
    return head + tail * factor


@dataclass
class LemmaRow:
    n: int
    tp_ratio: dict
    kvk: float
    kvk_ratio: float


@dataclass
class LemmaAudit:
    bc: BoundaryCondition
    p: float
    Tp_p: float
    lp_norm: float
    column_max: float
    column_bound: float
    rows: list[LemmaRow]
    kvk_slope: Slope | None

    @property
    def tp_ok(self) -> bool:
        return all(r <= 1.0 for row in self.rows for r in row.tp_ratio.values())

    @property
    def column_ok(self) -> bool:
        return self.column_max <= self.column_bound

    @property
    def kvk_ok(self) -> bool:
        return self.kvk_slope is None or not math.isfinite(self.kvk_slope.slope) or self.kvk_slope.slope <= 0.1

    def as_dict(self) -> dict:
        return {
            "bc": self.bc.value,
            "p": self.p,
            "Tp_p": self.Tp_p,
            "lp_norm": self.lp_norm,
            "column_max": self.column_max,
            "column_bound": self.column_bound,
            "tp_ok": self.tp_ok,
            "column_ok": self.column_ok,
            "kvk_ok": self.kvk_ok,
            "kvk_slope": asdict(self.kvk_slope) if self.kvk_slope else None,
            "rows": [asdict(r) for r in self.rows],
        }


def column_norms(spec: PotentialSpec, bc: BoundaryCondition, p: float, j_max: int = 64, cutoff: int = 4096) -> np.ndarray:
    """``(sum_k |V_kj|^q)^{1/q}`` with ``q = p/(p-1)`` for ``j in Gamma_bc``,
    ``|j| <= j_max``; rows run over ``|k| <= cutoff``."""
    bc = BC(bc)
    q = p / (p - 1.0)
    if bc.is_periodic:
        coeffs = np.array([c for _, c in spec.terms], dtype=complex)
        val = float(np.sum(np.abs(coeffs) ** q) ** (1 / q)) if len(coeffs) else 0.0
        js = [j for j in range(-j_max, j_max + 1) if bc.contains(j)]
        return np.full(len(js), val)
    tables = fourier_tables(spec, 2 * (cutoff + j_max) + 2)
    vc = tables.v_cos
    start = 1 if bc is BC.DIR else 0
    ks = np.arange(start, cutoff + 1)
    js = np.arange(start, j_max + 1)
    sign = -1.0 if bc is BC.DIR else 1.0
    V = (vc[np.abs(js[None, :] - ks[:, None])] + sign * vc[js[None, :] + ks[:, None]]) / math.sqrt(2)
    if bc is BC.NEU:
        V = V * np.where(ks == 0, 1 / math.sqrt(2), 1.0)[:, None] * np.where(js == 0, 1 / math.sqrt(2), 1.0)[None, :]
    return np.sum(np.abs(V) ** q, axis=0) ** (1 / q)


def lemma_audit(spec: PotentialSpec, bc: BoundaryCondition, n_range, p: float, K: int | None = None, samples: int = 16, j_max: int = 64) -> LemmaAudit:
    """Resolvent sums against ``T_p``, potential-matrix column norms against
    ``5 ||v||_p`` and the ``K_lambda V K_lambda`` Hilbert-Schmidt trend."""
    if not 1 < p <= 2:
        raise ValueError(f"p must lie in (1, 2], got {p}")
    bc = BC(bc)
    ns = [n for n in sorted(set(n_range)) if n >= 1 and bc.contains(n)]
    K = 4 * max(ns) if K is None else K
    op = build_operator(spec, bc, max(K, 8))
    Tpp = tp_power(p)
    theta = 2 * math.pi * (np.arange(samples) + 0.5) / samples
    rows = []
    for n in ns:
        lam = n * n + (n / 4) * np.exp(1j * theta)
        cutoff = max(64 * n, 4096)
        tp = {}
        for eps in (0, 1):
            s = _index_sum(bc, lam, p, eps, cutoff)
            tp[f"eps{eps}"] = float(np.max(s) * n ** ((1 - eps) * p) / Tpp)
        kvk = max(kvk_hs_norm(spec, bc, complex(l), K, op) for l in lam)
        rows.append(LemmaRow(n, tp, kvk, kvk * n / math.log(n) if n > 1 else float("nan")))
    norm = lp_norm(spec, p)
    cols = column_norms(spec, bc, p, j_max)
    kv = [(r.n, r.kvk_ratio) for r in rows if r.n > 1 and r.kvk_ratio > 0]
    slope = loglog_slope(*zip(*kv)) if len(kv) >= 2 else None
    return LemmaAudit(bc, p, Tpp, norm, float(np.max(cols)) if len(cols) else 0.0, 5 * norm, rows, slope)


def kvk_far_field(spec: PotentialSpec, bc: BoundaryCondition, Ns, K: int, samples: int = 64) -> dict:
    """Largest ``||K_lambda V K_lambda||_HS`` on the boundary of ``R_N``
    (``Im lambda = +-N`` and ``Re lambda = -N``) divided by ``log N / sqrt N``."""
    op = build_operator(spec, bc, K)
    rows = []
    for N in sorted(set(Ns)):
        if N < 2:
            continue
        x = np.linspace(-N, N * N + N, samples)
        t = np.linspace(-N, N, samples // 4 + 1)
        lam = np.concatenate([x + 1j * N, x - 1j * N, -N + 1j * t])
        val = max(kvk_hs_norm(spec, bc, complex(l), K, op) for l in lam)
        rows.append({"N": N, "kvk": val, "ratio": val * math.sqrt(N) / math.log(N)})
    pts = [(r["N"], r["ratio"]) for r in rows if r["ratio"] > 0]
    slope = loglog_slope(*zip(*pts)) if len(pts) >= 2 else None
    return {
        "bc": BC(bc).value,
        "rows": rows,
        "slope": asdict(slope) if slope else None,
        "bounded": slope is None or not math.isfinite(slope.slope) or slope.slope <= 0.1,
    }


# --- projection trend -----------------------------------------------------


def projection_verdict(rows: list[ProjectionDiffRow], tol: float = 0.1) -> dict:
    """Log-log growth slopes of ``n ||P_n - P_n^0||`` and ``||D(P_n - P_n^0)||``."""
    ns = [r.n for r in rows if r.diff_norm > 0]
    out = {}
    for key, vals in (
        ("scaled_diff", [r.scaled for r in rows if r.diff_norm > 0]),
        ("deriv_diff", [r.deriv_diff_norm for r in rows if r.diff_norm > 0]),
    ):
        if len(ns) < 2:
            out[key] = {"slope": 0.0, "max": max(vals, default=0.0), "bounded": True}
            continue
        s = loglog_slope(ns, vals)
        out[key] = {"slope": s.slope, "r_squared": s.r_squared, "max": max(vals), "bounded": s.slope <= tol}
    return out
