"""Named reference potentials ``v(x) = sum c_k e^{2ikx}``."""

from __future__ import annotations

from .potential import PotentialSpec


def free() -> PotentialSpec:
    return PotentialSpec((), label="0")


def mathieu(q: float = 1.0) -> PotentialSpec:
    """``2 q cos 2x``; Neumann and Dirichlet eigenvalues are the Mathieu
    characteristic values ``a_n(q)`` and ``b_n(q)``."""
    return PotentialSpec(((-1, q), (1, q)), label=f"{2 * q:g}cos2x")


def mathieu_plus_one_sided() -> PotentialSpec:
    """``2 cos 2x + i e^{4ix}``: non-self-adjoint with unequal ``beta+-``."""
    return PotentialSpec(((-1, 1), (1, 1), (2, 1j)), label="2cos2x+ie^{4ix}")


def mathieu_plus_i_cos4() -> PotentialSpec:
    """``2 cos 2x + 2i cos 4x``."""
    return PotentialSpec(((-2, 1j), (-1, 1), (1, 1), (2, 1j)), label="2cos2x+2icos4x")


def asymmetric_pair() -> PotentialSpec:
    """``e^{2ix} + 4 e^{-2ix}``: periodic spectrum equals that of ``4 cos 2x``
    while ``|beta-/beta+|`` grows geometrically."""
    return PotentialSpec(((-1, 4), (1, 1)), label="e^{2ix}+4e^{-2ix}")


def gasymov() -> PotentialSpec:
    """``e^{2ix}``: one-sided, all periodic/antiperiodic gaps closed."""
    return PotentialSpec(((1, 1),), label="e^{2ix}")


def algebraic(power: float = 4.0, cutoff: int = 32) -> PotentialSpec:
    """``c_k = (1 + |k|)^{-power}`` for ``0 < |k| <= cutoff``."""
    terms = tuple((k, (1.0 + abs(k)) ** -power) for k in range(-cutoff, cutoff + 1) if k != 0)
    return PotentialSpec(terms, label=f"(1+|k|)^-{power:g}")


FIXTURES = {
    "free": free,
    "mathieu": mathieu,
    "mathieu_plus_one_sided": mathieu_plus_one_sided,
    "mathieu_plus_i_cos4": mathieu_plus_i_cos4,
    "asymmetric_pair": asymmetric_pair,
    "gasymov": gasymov,
    "algebraic": algebraic,
}


def get(name: str) -> PotentialSpec:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
