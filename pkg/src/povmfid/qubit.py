"""Closed-form fidelities for two-outcome qubit POVMs and the entropic link."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import entr

from .builders import qubit_binary_povm
from .config import TOL
from .errors import BiasedInput, DomainError
from .povm import Povm

__all__ = [
    "QubitBinaryPovm",
    "EntropicCurvePoint",
    "fid1",
    "fid2_iid",
    "fid2_pair",
    "fab",
    "commutator_trace_norm",
    "qubit_compatible",
    "h_bin",
    "h_mes",
    "fidelity_vs_entropy_curve",
]


@dataclass(frozen=True, eq=False)
class QubitBinaryPovm:
    alpha: float
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(3)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        if not (0.0 <= self.alpha < 1.0):
            raise DomainError(f"bias alpha={self.alpha} outside [0, 1)")
        if self.sharpness > 1.0 - self.alpha + TOL.psd_margin:
            raise DomainError(f"|a|={self.sharpness} exceeds 1 - alpha")

    @property
    def sharpness(self) -> float:
        return float(np.linalg.norm(self.a))

    def to_povm(self) -> Povm:
        return qubit_binary_povm(self.alpha, self.a)


def fid1(p: QubitBinaryPovm) -> float:
    return (3.0 + p.sharpness) / 6.0


def fid2_iid(p: QubitBinaryPovm) -> float:
    """Two identical copies; equals :func:`fid1` iff the POVM is unbiased or trivial."""
    s = p.sharpness
    return (3.0 + s + p.alpha * s) / 6.0


def fid2_pair(p: QubitBinaryPovm, q: QubitBinaryPovm) -> float:
    a, b = p.a, q.a
    al, be = p.alpha, q.alpha
    n = np.linalg.norm
    total = (
        n((1 + be) * a + (1 + al) * b)
        + n((1 - be) * a - (1 + al) * b)
        + n((1 + be) * a - (1 - al) * b)
        + n((1 - be) * a + (1 - al) * b)
    )
    return 0.5 + float(total) / 24.0


def fab(phi) -> np.ndarray | float:
    """Two-copy fidelity of rank-1 projective qubit measurements at Bloch angle ``phi``."""
    return (3.0 + np.sqrt(1.0 + np.abs(np.sin(phi)))) / 6.0


def commutator_trace_norm(phi) -> np.ndarray | float:
    """``||[A_+, B_+]||_1`` for rank-1 projectors at Bloch angle ``phi``."""
    return np.abs(np.sin(phi))


def qubit_compatible(p: QubitBinaryPovm, q: QubitBinaryPovm) -> bool:
    if p.alpha != 0.0 or q.alpha != 0.0:
        raise BiasedInput("the compatibility criterion applies to unbiased POVMs only")
    s = np.linalg.norm(p.a + q.a) + np.linalg.norm(p.a - q.a)
    return bool(s <= 2.0 + 1e-12)


def h_bin(p):
    """Binary Shannon entropy in bits, zero at the endpoints."""
    p = np.clip(p, 0.0, 1.0)
    return (entr(p) + entr(1.0 - p)) / math.log(2.0)


@dataclass(frozen=True)
class EntropicCurvePoint:
    phi: float
    h_mes: float
    theta_argmin: float


def _entropy_sum(theta, phi):
    return h_bin((1 + np.cos(theta)) / 2) + h_bin((1 + np.cos(theta - phi)) / 2)


_GRID = 10_000


def _reduce(theta: float) -> float:
    return (theta + np.pi / 2) % np.pi - np.pi / 2


def h_mes(phi: float) -> EntropicCurvePoint:
    """Minimum entropy sum of two qubit projective measurements at Bloch angle ``phi``.

    Dense grid over ``[0, 2 pi)`` then golden-section refinement around
    the best grid point.  The argmin is reported modulo ``pi`` (``theta`` and
    ``theta + pi`` give the same value).
    """
    grid = np.linspace(0.0, 2 * np.pi, _GRID, endpoint=False)
    vals = _entropy_sum(grid, phi)
    k = int(np.argmin(vals))
    step = grid[1] - grid[0]
    bracket = (grid[k] - step, grid[k], grid[k] + step)
    try:
        res = minimize_scalar(
            lambda th: float(_entropy_sum(th, phi)),
            bracket=bracket,
            method="golden",
            options={"xtol": 1e-12},
        )
    except ValueError:  # flat bracket, grid point already optimal
        return EntropicCurvePoint(phi=float(phi), h_mes=max(float(vals[k]), 0.0), theta_argmin=_reduce(float(grid[k])))
    theta, value = float(res.x), float(res.fun)
    if vals[k] < value:
        theta, value = float(grid[k]), float(vals[k])
    return EntropicCurvePoint(phi=float(phi), h_mes=max(value, 0.0), theta_argmin=_reduce(theta))


def fidelity_vs_entropy_curve(n_points: int) -> list[tuple[float, float, float]]:
    """Samples ``(phi, F, H_mes)`` for ``phi`` evenly spaced on ``[0, pi/2]``."""
    if n_points < 2:
        raise DomainError("need at least two sample points")
    phis = np.linspace(0.0, np.pi / 2, n_points)
    return [(float(ph), float(fab(ph)), h_mes(ph).h_mes) for ph in phis]
