"""Weighted state sets, frame potentials and the 1/2-moment machinery.

A weighted set ``{|psi_j>, w_j}`` with ``sum_j w_j = d`` is a 1-design when
``sum_j w_j |psi_j><psi_j| = 1``; rank-1 POVMs and 1-designs are two views
of the same object (:func:`povm_to_design`, :func:`design_to_povm`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .config import TOL
from .errors import BadCount, DegenerateMoments, DimMismatch, DomainError, NotOneDesign, NotRank1
from .numkernel import inv_sqrt_psd, sym_dim
from .povm import Povm, is_projective, is_rank1, is_sic, simplify

__all__ = [
    "WeightedStateSet",
    "MomentEnsemble",
    "HalfMomentBounds",
    "PhiHalfReport",
    "frame_potential",
    "cross_frame_potential",
    "is_t_design",
    "haar_frame_potential",
    "phi_half_bounds_check",
    "phi_half_upper",
    "phi_half_cmub",
    "equiangular_bound",
    "zeta",
    "half_moment_bounds",
    "lower_saturating_ensemble",
    "upper_saturating_ensemble",
    "povm_frame_potential",
    "povm_cross_frame_potential",
    "povm_to_design",
    "design_to_povm",
    "random_one_design",
]


@dataclass(frozen=True, eq=False)
class WeightedStateSet:
    """Unit kets (rows of ``states``) with positive weights summing to ``d``."""

    states: np.ndarray
    weights: np.ndarray

    def __init__(self, states, weights=None, *, check: bool = True):
        S = np.array(states, dtype=complex, copy=True)
        if S.ndim != 2:
            raise DimMismatch("states must be an (m, d) array of kets")
        m, d = S.shape
        if weights is None:
            weights = np.full(m, d / m)
        w = np.array(weights, dtype=float, copy=True).reshape(-1)
        if w.shape[0] != m:
            raise DimMismatch(f"{w.shape[0]} weights for {m} states")
        if check:
            norms = np.linalg.norm(S, axis=1)
            if np.max(np.abs(norms - 1.0)) > TOL.ket_norm:
                raise ValueError(f"kets are not normalized (max deviation {np.max(np.abs(norms - 1.0)):.3e})")
            if np.any(w < 0):
                raise ValueError("weights must be nonnegative")
            if abs(w.sum() - d) > TOL.weight_sum:
                raise ValueError(f"weights sum to {w.sum()!r}, expected {d}")
        S.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "states", S)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.states.shape[0]

    def frame_operator(self) -> np.ndarray:
        """``sum_j w_j |psi_j><psi_j|``, equal to the identity for a 1-design."""
        return np.einsum("j,ja,jb->ab", self.weights, self.states, self.states.conj())

    def one_design_residual(self) -> float:
        return float(np.max(np.abs(self.frame_operator() - np.eye(self.dim))))


def _real_power(x: np.ndarray, t: float, floor: float = 0.0) -> np.ndarray:
    # 0^t := 0 for t > 0; values at or below ``floor`` count as zero
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    out = np.zeros_like(x)
    pos = x > floor
    out[pos] = x[pos] ** t
    return out


def cross_frame_potential(s: WeightedStateSet, u: WeightedStateSet, t: float) -> float:
    """``sum_jk w_j w'_k |<psi_j|phi_k>|^{2t}``."""
    if s.dim != u.dim:
        raise DimMismatch("weighted sets live in spaces of different dimension")
    if t <= 0:
        raise DomainError("t must be positive")
    overlaps = np.abs(s.states.conj() @ u.states.T) ** 2
    return float(s.weights @ _real_power(overlaps, t) @ u.weights)


def frame_potential(s: WeightedStateSet, t: float) -> float:
    return cross_frame_potential(s, s, t)


def is_t_design(s: WeightedStateSet, t: int) -> tuple[bool, float]:
    """Return ``(is_design, Phi_t - d^2/D_t)``."""
    if int(t) != t or t < 1:
        raise DomainError("t-design test needs a positive integer t")
    t = int(t)
    residual = frame_potential(s, t) - s.dim**2 / sym_dim(s.dim, t)
    return residual <= TOL.design, residual


def haar_frame_potential(d: int, t: float) -> float:
    """Frame potential of Haar-random pure states, ``d^2 Gamma(d) Gamma(t+1) / Gamma(d+t)``.

    For integer ``d`` the gamma ratio is the finite product
    ``(d-1)! / prod_{i=1}^{d-1} (t+i)``, exact for every real ``t > 0``.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    value = float(d * d)
    for i in range(1, d):
        value *= i / (t + i)
    return value


def phi_half_upper(d: int) -> float:
    """Maximum of ``Phi_{1/2}`` over 1-designs, ``1 + (d-1) sqrt(d+1)``."""
    return 1.0 + (d - 1) * math.sqrt(d + 1)


def phi_half_cmub(d: int) -> float:
    return (d + d**2.5) / (d + 1)


@dataclass(frozen=True)
class PhiHalfReport:
    value: float
    lower: float
    upper: float
    within_bounds: bool
    saturation: str | None
    is_basis: bool
    is_sic: bool
    iff_consistent: bool


def phi_half_bounds_check(s: WeightedStateSet) -> PhiHalfReport:
    """Check ``d <= Phi_{1/2} <= 1 + (d-1) sqrt(d+1)`` and the structural saturation conditions."""
    if s.one_design_residual() > TOL.design:
        raise NotOneDesign(f"frame operator deviates from identity by {s.one_design_residual():.3e}")
    d = s.dim
    value = frame_potential(s, 0.5)
    lo, hi = float(d), phi_half_upper(d)
    tol = TOL.saturation
    sat = None
    if abs(value - lo) <= tol:
        sat = "lower"
    elif abs(value - hi) <= tol:
        sat = "upper"
    p = simplify(design_to_povm(s))
    basis = len(p) == d and is_projective(p)
    sic = is_sic(p)
    return PhiHalfReport(
        value=value,
        lower=lo,
        upper=hi,
        within_bounds=lo - tol <= value <= hi + tol,
        saturation=sat,
        is_basis=basis,
        is_sic=sic,
        iff_consistent=((sat == "lower") == basis) and ((sat == "upper") == sic),
    )


def equiangular_bound(d: int, m: int) -> float:
    """Upper bound on ``Phi_{1/2}`` for 1-designs with ``m`` states."""
    if m < d:
        raise BadCount(f"a 1-design in dimension {d} needs at least {d} states, got {m}")
    return d * d / m + (d / m) * math.sqrt(d * (m - 1) * (m - d))


def _zeta_core(a: float, var: float, gap: float) -> float:
    # written through var = b - a^2 and gap = a - b so that callers can supply
    # both without cancellation; note 1 - 2a + b = (1 - a)^2 + var
    u = 1.0 - a
    return (var + u * math.sqrt(u * max(gap, 0.0))) / (u * u + max(var, 0.0))


def _zeta(a: float, b: float) -> float:
    return _zeta_core(a, b - a * a, a - b)


def zeta(a: float, b: float) -> float:
    """Tight upper bound on ``E[sqrt(X)]`` for ``0 <= X <= 1`` with ``E[X] = a``, ``E[X^2] = b``.

    Defined for ``0 < b <= a < 1``.
    """
    if not (0.0 < b <= a < 1.0):
        raise DomainError(f"zeta needs 0 < b <= a < 1, got a={a!r}, b={b!r}")
    return _zeta(a, b)


@dataclass(frozen=True, eq=False)
class MomentEnsemble:
    """Finite distribution with probabilities ``p_j`` on values ``x_j`` in ``[0, 1]``."""

    probabilities: np.ndarray
    values: np.ndarray

    def __init__(self, probabilities, values):
        p = np.array(probabilities, dtype=float, copy=True).reshape(-1)
        x = np.array(values, dtype=float, copy=True).reshape(-1)
        if p.shape != x.shape:
            raise DimMismatch("probabilities and values differ in length")
        if np.any(p < 0) or abs(p.sum() - 1.0) > TOL.moment_sum:
            raise DomainError("probabilities must be nonnegative and sum to 1")
        if np.any(x < 0) or np.any(x > 1):
            raise DomainError("values must lie in [0, 1]")
        p.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "values", x)

    @property
    def first_moment(self) -> float:
        return float(self.probabilities @ self.values)

    @property
    def second_moment(self) -> float:
        return float(self.probabilities @ self.values**2)


class HalfMomentBounds(NamedTuple):
    lower: float
    value: float
    upper: float

    def holds(self, tol: float = 1e-12) -> bool:
        return self.lower - tol <= self.value <= self.upper + tol


def half_moment_bounds(e: MomentEnsemble) -> HalfMomentBounds:
    """``(a sqrt(a/b), sum_j p_j sqrt(x_j), zeta(a, b))`` for the ensemble's moments."""
    a, b = e.first_moment, e.second_moment
    if b <= 0.0:
        raise DegenerateMoments("second moment vanishes")
    value = float(e.probabilities @ np.sqrt(e.values))
    lower = a * math.sqrt(a / b)
    var = float(e.probabilities @ (e.values - a) ** 2)
    gap = float(e.probabilities @ (e.values * (1.0 - e.values)))
    upper = 1.0 if a >= 1.0 else _zeta_core(a, var, gap)
    return HalfMomentBounds(lower, value, upper)


def lower_saturating_ensemble(a: float, b: float) -> MomentEnsemble:
    """Two-point ensemble on ``{0, b/a}`` attaining the lower bound."""
    q = a * a / b
    return MomentEnsemble([1.0 - q, q], [0.0, b / a])


def upper_saturating_ensemble(a: float, b: float) -> MomentEnsemble:
    """Two-point ensemble on ``{(a-b)/(1-a), 1}`` attaining ``zeta(a, b)``."""
    denom = 1.0 - 2.0 * a + b
    return MomentEnsemble([(1.0 - a) ** 2 / denom, (b - a * a) / denom], [(a - b) / (1.0 - a), 1.0])


_OVERLAP_FLOOR = 1e-15


def povm_cross_frame_potential(p: Povm, q: Povm, t: float) -> float:
    """``sum_jk tr(A_j B_k)^t / (tr A_j tr B_k)^{t-1}``."""
    if p.dim != q.dim:
        raise DimMismatch("POVMs act on spaces of different dimension")
    if t <= 0:
        raise DomainError("t must be positive")
    G = np.real(np.einsum("jab,kba->jk", p.stack(), q.stack()))
    T = np.outer(p.traces(), q.traces())
    # tr(A B) carries absolute rounding of order eps tr(A) tr(B); a fractional
    # power would inflate that noise on orthogonal pairs, so it is zeroed first
    return float(np.sum(T * _real_power(G / T, t, _OVERLAP_FLOOR)))


def povm_frame_potential(p: Povm, t: float) -> float:
    return povm_cross_frame_potential(p, p, t)


def povm_to_design(p: Povm) -> WeightedStateSet:
    """Weighted set ``{|psi_j>, tr A_j}`` of a rank-1 POVM ``A_j = w_j |psi_j><psi_j|``."""
    if not is_rank1(p):
        raise NotRank1("only rank-1 POVMs correspond to weighted state sets")
    kets = []
    weights = []
    for E in p.elements:
        w, V = np.linalg.eigh(0.5 * (E + E.conj().T))
        kets.append(V[:, -1])
        weights.append(float(np.real(np.trace(E))))
    weights = np.asarray(weights)
    # absorb rounding in the trace so that the weights sum to d exactly
    weights *= p.dim / weights.sum()
    return WeightedStateSet(np.array(kets), weights)


def design_to_povm(s: WeightedStateSet) -> Povm:
    return Povm([w * np.outer(v, v.conj()) for v, w in zip(s.states, s.weights)])


def random_one_design(d: int, m: int, rng: np.random.Generator) -> WeightedStateSet:
    """Random weighted 1-design with ``m >= d`` states.

    Random kets ``psi_j`` and positive weights ``v_j`` are conditioned by
    ``S = sum_j v_j |psi_j><psi_j|``: the kets ``S^{-1/2} psi_j`` (normalized)
    with weights ``v_j ||S^{-1/2} psi_j||^2`` resolve the identity exactly.
    """
    if m < d:
        raise BadCount(f"need at least d={d} states, got {m}")
    psi = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    v = rng.uniform(0.2, 1.0, m)
    S = np.einsum("j,ja,jb->ab", v, psi, psi.conj())
    R = inv_sqrt_psd(S)
    phi = psi @ R.T
    norms2 = np.sum(np.abs(phi) ** 2, axis=1)
    weights = v * norms2
    phi /= np.sqrt(norms2)[:, None]
    weights *= d / weights.sum()
    return WeightedStateSet(phi, weights)
