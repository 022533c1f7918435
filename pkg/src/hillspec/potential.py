"""Complex pi-periodic potentials given as finite exponential series.

A potential is ``v(x) = sum_k c_k exp(2ikx)``.  All Fourier data needed by the
matrix builders is evaluated in closed form from the term list, so nothing in
this module samples ``v`` except :func:`lp_norm`.

Inner products on ``L^2([0, pi])`` carry the ``1/pi`` normalisation, which
makes ``{e^{ikx}}``, ``{sqrt(2) sin kx}`` and ``{1, sqrt(2) cos kx}``
orthonormal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

SQRT2 = math.sqrt(2.0)


class PotentialError(ValueError):
    """Malformed potential or weight description."""


@dataclass(frozen=True)
class PotentialSpec:
    """Trigonometric polynomial ``v(x) = sum c_k e^{2ikx}``.

    ``terms`` is a tuple of ``(k, c_k)`` pairs sorted by frequency; zero
    coefficients are dropped.  ``shift`` records a constant removed by
    :func:`normalize_mean`.
    """

    terms: tuple[tuple[int, complex], ...] = ()
    label: str = ""
    shift: complex = 0j

    def __post_init__(self):
        merged: dict[int, complex] = {}
        for k, c in self.terms:
            if int(k) != k:
                raise PotentialError(f"frequency {k!r} is not an integer")
            k = int(k)
            if k in merged:
                raise PotentialError(f"duplicate frequency {k}")
            merged[k] = complex(c)
        terms = tuple(sorted((k, c) for k, c in merged.items() if c != 0))
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "shift", complex(self.shift))
        object.__setattr__(self, "_coeffs", dict(terms))

    @classmethod
    def from_coefficients(cls, coeffs: Mapping[int, complex], label: str = "") -> "PotentialSpec":
        return cls(tuple(coeffs.items()), label=label)

    def coefficient(self, k: int) -> complex:
        return self._coeffs.get(k, 0j)

    @property
    def frequencies(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.terms)

    @property
    def max_frequency(self) -> int:
        return max((abs(k) for k in self.frequencies), default=0)

    def conj(self) -> "PotentialSpec":
        """The potential ``conj(v(x))``; its coefficients are ``conj(c_{-k})``."""
        return PotentialSpec(
            tuple((-k, c.conjugate()) for k, c in self.terms),
            label=f"conj({self.label})" if self.label else "",
            shift=self.shift.conjugate(),
        )

    def __add__(self, other: "PotentialSpec") -> "PotentialSpec":
        coeffs = dict(self._coeffs)
        for k, c in other.terms:
            coeffs[k] = coeffs.get(k, 0j) + c
        label = " + ".join(s for s in (self.label, other.label) if s)
        return PotentialSpec(tuple(coeffs.items()), label=label)

    def add_constant(self, c: complex) -> "PotentialSpec":
        return self + PotentialSpec(((0, c),))

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(c - self.coefficient(-k).conjugate()) <= tol for k, c in self.terms)

    def is_even(self, tol: float = 0.0) -> bool:
        return all(abs(c - self.coefficient(-k)) <= tol for k, c in self.terms)

    def is_one_sided(self) -> bool:
        """True when every nonzero frequency is positive (Gasymov type)."""
        return bool(self.terms) and all(k > 0 for k in self.frequencies)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for k, c in self.terms:
            out += c * np.exp(2j * k * x)
        return out

    # --- serialisation -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "terms": [[k, c.real, c.imag] for k, c in self.terms],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PotentialSpec":
        if not isinstance(data, Mapping) or "terms" not in data:
            raise PotentialError("potential JSON must be an object with a 'terms' list")
        terms = []
        for i, row in enumerate(data["terms"]):
            if not isinstance(row, (list, tuple)) or len(row) != 3:
                raise PotentialError(f"terms[{i}] must be [k, re, im], got {row!r}")
            k, re, im = row
            if not isinstance(k, int) or isinstance(k, bool):
                raise PotentialError(f"terms[{i}]: frequency must be an integer, got {k!r}")
            try:
                terms.append((k, complex(float(re), float(im))))
            except (TypeError, ValueError) as exc:
                raise PotentialError(f"terms[{i}]: {exc}") from None
        return cls(tuple(terms), label=str(data.get("label", "")))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> "PotentialSpec":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise PotentialError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
        return cls.from_dict(data)

    def content_hash(self) -> str:
        import hashlib

        return hashlib.sha256(self.to_json().encode()).hexdigest()


def _int_exp(a: int) -> complex:
    """``(1/pi) * integral_0^pi e^{iax} dx`` for integer ``a``."""
    if a == 0:
        return 1.0 + 0j
    if a % 2 == 0:
        return 0j
    # e^{i a pi} = -1 for odd a
    return 2j / (a * math.pi)


def fourier_plus(spec: PotentialSpec, k: int) -> complex:
    """``V_+(k) = (1/pi) int_0^pi v(x) e^{-ikx} dx``.

    Only even ``k`` belong to the periodic index set; odd ``k`` return 0.
    For even ``k`` the integral reduces to the coefficient ``c_{k/2}``.
    """
    if k % 2:
        return 0j
    return spec.coefficient(k // 2)


def fourier_cos(spec: PotentialSpec, k: int) -> complex:
    """``V_c(k) = (1/pi) int_0^pi v(x) sqrt(2) cos(kx) dx`` for ``k >= 0``."""
    if k < 0:
        raise ValueError("fourier_cos needs k >= 0")
    total = 0j
    for m, c in spec.terms:
        total += c * (_int_exp(2 * m + k) + _int_exp(2 * m - k))
    return total * (SQRT2 / 2.0)


@dataclass(frozen=True)
class FourierTables:
    """``V_+`` on even ``|k| <= window`` and ``V_c`` on ``0 <= k <= window``."""

    v_plus: dict[int, complex]
    v_cos: np.ndarray
    window: int

    def plus(self, k: int) -> complex:
        if abs(k) > self.window:
            raise KeyError(k)
        return self.v_plus.get(k, 0j)

    def cos(self, k: int) -> complex:
        return self.v_cos[k]


def fourier_tables(spec: PotentialSpec, window: int) -> FourierTables:
    v_plus = {2 * m: c for m, c in spec.terms if abs(2 * m) <= window}
    v_cos = _fourier_cos_vector(spec, window)
    return FourierTables(v_plus=v_plus, v_cos=v_cos, window=window)


def _fourier_cos_vector(spec: PotentialSpec, window: int) -> np.ndarray:
    k = np.arange(window + 1)
    out = np.zeros(window + 1, dtype=complex)
    odd = k % 2 == 1
    for m, c in spec.terms:
        # even k: only 2m = +-k survives; odd k: closed-form antiderivative
        even_part = np.where(~odd & (k == 2 * m), 1.0, 0.0) + np.where(~odd & (k == -2 * m), 1.0, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            odd_part = np.where(odd, 2j / ((2 * m + k) * math.pi) + 2j / ((2 * m - k) * math.pi), 0.0)
        out += c * (even_part + odd_part)
    return out * (SQRT2 / 2.0)


def normalize_mean(spec: PotentialSpec) -> PotentialSpec:
    """Drop the constant term; the removed value is kept in ``shift``."""
    c0 = spec.coefficient(0)
    terms = tuple((k, c) for k, c in spec.terms if k != 0)
    return PotentialSpec(terms, label=spec.label, shift=spec.shift + c0)


def lp_norm(spec: PotentialSpec, p: float, grid_size: int = 4096) -> float:
    """``(int_0^pi |v|^p dx)^{1/p}`` by the periodic trapezoidal rule.

    The rule is spectrally accurate for smooth periodic integrands, which
    ``|v|^p`` is away from zeros of ``v``.
    """
    if grid_size < 256:
        raise ValueError("grid_size must be at least 256")
    if p < 1:
        raise ValueError("p must be >= 1")
    x = np.arange(grid_size) * (math.pi / grid_size)
    vals = np.abs(spec(x)) ** p
    return float((vals.sum() * (math.pi / grid_size)) ** (1.0 / p))


# --- weights ------------------------------------------------------------


@dataclass(frozen=True)
class WeightSpec:
    """A weight ``omega`` on the integers, optionally in quotient form.

    ``kind`` is ``"sobolev"`` (``(1 + k^2)^{a/2}``), ``"gevrey"``
    (``exp(c |k|^s)``) or ``"table"``.  With ``quotient=True`` the weight
    used for sequences is ``Omega(m) = omega(m) / |m|`` (``m != 0``).
    """

    kind: str
    a: float = 0.0
    c: float = 1.0
    exponent: float = 1.0
    table: tuple[float, ...] = ()
    quotient: bool = False

    def __post_init__(self):
        if self.kind == "sobolev":
            if self.a < 0:
                raise PotentialError("sobolev weight needs a >= 0")
        elif self.kind == "gevrey":
            if self.c <= 0 or not (0 < self.exponent <= 1):
                raise PotentialError("gevrey weight needs c > 0 and exponent in (0, 1]")
        elif self.kind == "table":
            if not self.table:
                raise PotentialError("table weight needs a non-empty table")
        else:
            raise PotentialError(f"unknown weight kind {self.kind!r}")

    def omega(self, k) -> np.ndarray:
        k = np.abs(np.asarray(k))
        if self.kind == "sobolev":
            return (1.0 + k.astype(float) ** 2) ** (self.a / 2.0)
        if self.kind == "gevrey":
            return np.exp(self.c * k.astype(float) ** self.exponent)
        table = np.asarray(self.table, dtype=float)
        if np.any(k >= len(table)):
            raise PotentialError(f"table weight defined only for |k| < {len(table)}")
        return table[k]

    def __call__(self, k) -> np.ndarray:
        w = self.omega(k)
        if self.quotient:
            k = np.abs(np.asarray(k)).astype(float)
            if np.any(k == 0):
                raise PotentialError("quotient weight undefined at m = 0")
            w = w / k
        return w

    def is_submultiplicative(self, window: int, rtol: float = 1e-12) -> bool:
        k = np.arange(window + 1)
        w = self.omega(k)
        ks, ms = np.meshgrid(k, k, indexing="ij")
        keep = ks + ms <= window
        lhs = self.omega((ks + ms)[keep])
        rhs = (w[:, None] * w[None, :])[keep]
        return bool(np.all(lhs <= rhs * (1 + rtol)))

    def log_ratio_decreasing(self, window: int) -> bool:
        """Whether ``log(omega(n)) / n`` is non-increasing on ``1..window``."""
        n = np.arange(1, window + 1)
        r = np.log(self.omega(n)) / n
        return bool(np.all(np.diff(r) <= 1e-14 * (1 + np.abs(r[1:]))))

    @classmethod
    def from_dict(cls, data: Mapping) -> "WeightSpec":
        data = dict(data)
        kind = data.pop("kind", None)
        if "table" in data:
            data["table"] = tuple(float(t) for t in data["table"])
        try:
            return cls(kind=kind, **data)
        except TypeError as exc:
            raise PotentialError(str(exc)) from None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "quotient": self.quotient}
        if self.kind == "sobolev":
            d["a"] = self.a
        elif self.kind == "gevrey":
            d.update(c=self.c, exponent=self.exponent)
        else:
            d["table"] = list(self.table)
        return d


@dataclass
class WeightedNorm:
    value: float
    partial_sums: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)


def weighted_l2_norm(seq: Mapping[int, complex] | Iterable[tuple[int, complex]], weight) -> WeightedNorm:
    """``(sum |seq(n)|^2 Omega(n)^2)^{1/2}`` with the cumulative profile.

    ``weight`` is a :class:`WeightSpec` or any callable on index arrays.
    """
    items = sorted(dict(seq).items())
    if not items:
        return WeightedNorm(0.0, np.zeros(0), np.zeros(0, dtype=int))
    idx = np.array([n for n, _ in items])
    vals = np.abs(np.array([s for _, s in items], dtype=complex))
    w = np.asarray(weight(idx), dtype=float)
    terms = (vals * w) ** 2
    partial = np.sqrt(np.cumsum(terms))
    return WeightedNorm(float(partial[-1]), partial, idx)
