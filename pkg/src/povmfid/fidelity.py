"""N-copy estimation fidelity of quantum measurements.

For a POVM ``{A_j}`` on ``H^{\\otimes N}`` the estimation fidelity is

    F = sum_j ||Q(A_j)|| / (d (d+1) ... (d+N)),
    Q(O) = (N+1)! tr_{1..N}[P_{N+1} (O (x) 1)],

where ``P_{N+1}`` projects onto the symmetric subspace.  Closed forms of
``Q`` are used for product operators with ``N <= 3``; :func:`q_map_oracle`
evaluates the definition directly as a permutation sum and serves both as
the general engine for collective POVMs and as an independent check.
"""
from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import TOL
from .designs import povm_cross_frame_potential
from .errors import DimMismatch, TooLarge
from .numkernel import as_matrix, operator_norms
from .povm import (
    Povm,
    are_mutually_unbiased,
    commute,
    is_rank1,
    simplify,
)

__all__ = [
    "FidelityResult",
    "FidelityConstants",
    "EstimatorSet",
    "BoundCheck",
    "BoundReport",
    "FamilyReport",
    "Verdict",
    "rising_factorial",
    "q_map_1",
    "q_map_2",
    "q_map_3",
    "q_map_general",
    "q_map_oracle",
    "estimation_fidelity",
    "collective_fidelity",
    "optimal_estimators",
    "estimator_average_fidelity",
    "fidelity_bound_report",
    "incompatibility_witness",
    "family_sum_criteria",
    "classify_by_fidelity_signature",
    "swap_saturation_gap",
    "TABLE_I_LABELS",
]


def rising_factorial(d: int, copies: int) -> int:
    """``d (d+1) ... (d+N)``, the normalization of the N-copy fidelity."""
    return math.prod(range(d, d + copies + 1))


@dataclass(frozen=True)
class FidelityConstants:
    d: int
    f1: float
    f2_iid: float
    f2_sep: float
    f3_proj: float

    @classmethod
    def for_dim(cls, d: int) -> "FidelityConstants":
        return cls(
            d=d,
            f1=2.0 / (d + 1),
            f2_iid=2.0 * (d * d + d + 1 + (d - 1) * math.sqrt(d + 1)) / (d * (d + 1) * (d + 2)),
            f2_sep=2.0 * (d + 1 + math.sqrt(d)) / ((d + 1) * (d + 2)),
            f3_proj=2.0 * (d + 5) / ((d + 2) * (d + 3)),
        )

    def n_copy_ub(self, copies: int) -> float:
        """Optimal collective fidelity ``(N+1)/(N+d)``."""
        return (copies + 1) / (copies + self.d)

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "f1": self.f1,
            "f2_iid": self.f2_iid,
            "f2_sep": self.f2_sep,
            "f3_proj": self.f3_proj,
        }


@dataclass(frozen=True)
class FidelityResult:
    value: float
    per_element_norms: np.ndarray
    copies: int
    d: int

    def recomputed(self) -> float:
        return float(np.sum(self.per_element_norms)) / rising_factorial(self.d, self.copies)


# -- closed-form Q maps ---------------------------------------------------
# The helpers broadcast over leading axes so that whole families of element
# tuples are evaluated in one call.


def _tr(X: np.ndarray) -> np.ndarray:
    return np.einsum("...ii->...", X)


def _scalar(c: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(c)[..., None, None] * np.eye(d)


def _q1(A: np.ndarray) -> np.ndarray:
    d = A.shape[-1]
    return _scalar(_tr(A), d) + A


def _q2(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    d = A.shape[-1]
    AB = A @ B
    BA = B @ A
    tA, tB = _tr(A), _tr(B)
    return _scalar(tA * tB + _tr(AB), d) + tB[..., None, None] * A + tA[..., None, None] * B + AB + BA


def _q3(A: np.ndarray, B: np.ndarray, C: np.ndarray) -> np.ndarray:
    d = A.shape[-1]
    AB, BA = A @ B, B @ A
    AC, CA = A @ C, C @ A
    BC, CB = B @ C, C @ B
    ABC, ACB = AB @ C, AC @ B
    BCA, BAC = BC @ A, BA @ C
    CAB, CBA = CA @ B, CB @ A
    tA, tB, tC = _tr(A), _tr(B), _tr(C)
    tAB, tBC, tCA = _tr(AB), _tr(BC), _tr(CA)
    scalar = tA * tB * tC + tAB * tC + tBC * tA + tCA * tB + _tr(ABC) + _tr(ACB)
    s = lambda c: np.asarray(c)[..., None, None]  # noqa: E731
    return (
        _scalar(scalar, d)
        + s(tB * tC + tBC) * A
        + s(tC * tA + tCA) * B
        + s(tA * tB + tAB) * C
        + s(tC) * (AB + BA)
        + s(tB) * (AC + CA)
        + s(tA) * (BC + CB)
        + ABC + ACB + BCA + BAC + CAB + CBA
    )


def q_map_1(A) -> np.ndarray:
    """``Q(A) = tr(A) + A``."""
    return _q1(as_matrix(A))


def q_map_2(A, B) -> np.ndarray:
    """``Q(A (x) B)``: six-term closed form."""
    return _q2(as_matrix(A), as_matrix(B))


def q_map_3(A, B, C) -> np.ndarray:
    """``Q(A (x) B (x) C)``: closed form with all 3! orderings of the products."""
    return _q3(as_matrix(A), as_matrix(B), as_matrix(C))


# -- permutation-sum oracle ---------------------------------------------


def q_map_oracle(O, d: int, copies: int) -> np.ndarray:
    """``(N+1)! tr_{1..N}[P_{N+1}(O (x) 1)]`` for any operator ``O`` on ``H^{\\otimes N}``.

    Evaluated as ``sum_pi tr_{1..N}[U_pi (O (x) 1)]`` over all ``(N+1)!``
    permutations, contracting tensor indices instead of materializing the
    ``d^{N+1}``-dimensional matrices.
    """
    N = copies
    if d ** (N + 1) > TOL.max_tensor_dim:
        raise TooLarge(f"d^(N+1) = {d ** (N + 1)} exceeds the resource guard {TOL.max_tensor_dim}")
    O = as_matrix(O)
    if O.shape[0] != d**N:
        raise DimMismatch(f"operator has dimension {O.shape[0]}, expected d^N = {d**N}")
    T = O.reshape((d,) * (2 * N))
    cols = string.ascii_letters[: N + 1]
    row_out = string.ascii_letters[N + 1]
    # output slot s < N is traced against column s; slot N is the free row
    slot_label = list(cols[:N]) + [row_out]
    eye = np.eye(d)
    out = np.zeros((d, d), dtype=complex)
    for perm in itertools.permutations(range(N + 1)):
        # U_pi routes input factor k to output slot perm[k]
        labels = [slot_label[perm[k]] for k in range(N + 1)]
        spec = f"{''.join(labels[:N])}{cols[:N]},{labels[N]}{cols[N]}->{row_out}{cols[N]}"
        out += np.einsum(spec, T, eye)
    return out


def q_map_general(ops: Sequence) -> np.ndarray:
    """Oracle ``Q(A_1 (x) ... (x) A_N)`` for a product of single-copy operators."""
    ops = [as_matrix(A) for A in ops]
    d = ops[0].shape[0]
    O = ops[0]
    for A in ops[1:]:
        O = np.kron(O, A)
    return q_map_oracle(O, d, len(ops))


# -- fidelities -------------------------------------------------------------


def _factor_list(povms, copies: int | None) -> list[Povm]:
    if isinstance(povms, Povm):
        povms = [povms] * (copies or 1)
    elif copies is not None:
        if len(povms) != 1:
            raise ValueError("copies= is only meaningful with a single POVM")
        povms = list(povms) * copies
    povms = list(povms)
    if not povms:
        raise ValueError("need at least one POVM")
    d = povms[0].dim
    for P in povms:
        if P.dim != d:
            raise DimMismatch("all factors must act on the same single-copy space")
    return povms


def _product_q_stack(factors: list[Povm], oracle: bool) -> np.ndarray:
    """Q of every element tuple, shape ``(m_1, ..., m_N, d, d)``."""
    N = len(factors)
    d = factors[0].dim
    stacks = [P.stack() for P in factors]
    if not oracle and N <= 3:
        shaped = []
        for k, S in enumerate(stacks):
            shape = [1] * N
            shape[k] = S.shape[0]
            shaped.append(S.reshape(tuple(shape) + (d, d)))
        return (_q1, _q2, _q3)[N - 1](*shaped)
    if d ** (N + 1) > TOL.max_tensor_dim:
        raise TooLarge(f"d^(N+1) = {d ** (N + 1)} exceeds the resource guard {TOL.max_tensor_dim}")
    out = np.empty(tuple(S.shape[0] for S in stacks) + (d, d), dtype=complex)
    for idx in itertools.product(*(range(S.shape[0]) for S in stacks)):
        out[idx] = q_map_general([S[i] for S, i in zip(stacks, idx)])
    return out


def estimation_fidelity(povms, copies: int | None = None, *, oracle: bool = False) -> FidelityResult:
    """Estimation fidelity of the product measurement ``A^(1) (x) ... (x) A^(N)``.

    ``povms`` is a single :class:`Povm` (optionally repeated ``copies`` times)
    or a sequence of factor POVMs.  With ``oracle=True`` every element's Q map
    is evaluated by the permutation-sum definition.
    """
    factors = _factor_list(povms, copies)
    N = len(factors)
    d = factors[0].dim
    Q = _product_q_stack(factors, oracle)
    norms = operator_norms(Q).reshape(-1)
    value = float(np.sum(norms)) / rising_factorial(d, N)
    return FidelityResult(value=value, per_element_norms=norms, copies=N, d=d)


def collective_fidelity(p: Povm, d: int, copies: int) -> FidelityResult:
    """Fidelity of an arbitrary (collective) POVM on ``H^{\\otimes N}`` via the oracle."""
    if p.dim != d**copies:
        raise DimMismatch(f"POVM dimension {p.dim} is not d^N = {d**copies}")
    norms = operator_norms(np.stack([q_map_oracle(E, d, copies) for E in p.elements]))
    value = float(np.sum(norms)) / rising_factorial(d, copies)
    return FidelityResult(value=value, per_element_norms=norms, copies=copies, d=d)


@dataclass(frozen=True)
class EstimatorSet:
    kets: list
    degenerate: list
    top_eigenvalues: np.ndarray

    @property
    def any_degenerate(self) -> bool:
        return any(self.degenerate)


def optimal_estimators(povms, copies: int | None = None) -> EstimatorSet:
    """Top eigenvector of ``Q(A_j)`` for every element of the product measurement.

    An estimator is flagged degenerate when the two largest eigenvalues of
    ``Q(A_j)`` agree within tolerance, in which case any state in the top
    eigenspace is optimal.
    """
    factors = _factor_list(povms, copies)
    d = factors[0].dim
    Q = _product_q_stack(factors, oracle=False).reshape(-1, d, d)
    w, V = np.linalg.eigh(0.5 * (Q + np.conj(np.swapaxes(Q, -1, -2))))
    kets = [V[k, :, -1] for k in range(Q.shape[0])]
    if d > 1:
        degenerate = [bool(w[k, -1] - w[k, -2] <= TOL.degenerate_top) for k in range(Q.shape[0])]
    else:
        degenerate = [False] * Q.shape[0]
    return EstimatorSet(kets=kets, degenerate=degenerate, top_eigenvalues=w[:, -1])


def estimator_average_fidelity(povms, kets, copies: int | None = None) -> float:
    """Average fidelity when outcome ``j`` is answered with ``kets[j]``.

    Equals ``sum_j <psi_j|Q(A_j)|psi_j> / (d (d+1) ... (d+N))``; with the
    kets from :func:`optimal_estimators` this reproduces the fidelity.
    """
    factors = _factor_list(povms, copies)
    d = factors[0].dim
    Q = _product_q_stack(factors, oracle=False).reshape(-1, d, d)
    V = np.asarray(kets, dtype=complex).reshape(Q.shape[0], d)
    vals = np.einsum("ka,kab,kb->k", V.conj(), Q, V).real
    return float(vals.sum()) / rising_factorial(d, len(factors))


def swap_saturation_gap(A) -> float:
    """``|d tr(W A) - tr(A)|`` for a two-copy operator; zero for MU product elements."""
    A = as_matrix(A)
    d = math.isqrt(A.shape[0])
    if d * d != A.shape[0]:
        raise DimMismatch("operator is not on a two-copy space")
    T = A.reshape(d, d, d, d)
    tr_swap = np.einsum("abba->", T)
    return float(abs(d * tr_swap - np.trace(A)))


# -- bound reports ------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    name: str
    value: float
    bound: float
    kind: str  # "upper" or "lower"
    holds: bool
    saturated: bool
    expected_saturation: bool | None = None

    @property
    def consistent(self) -> bool:
        if self.expected_saturation is None:
            return self.holds
        return self.holds and self.saturated == self.expected_saturation


def _check(name, value, bound, kind, expected=None, tol=TOL.saturation) -> BoundCheck:
    if kind == "upper":
        holds = value <= bound + tol
    else:
        holds = value >= bound - tol
    return BoundCheck(
        name=name,
        value=float(value),
        bound=float(bound),
        kind=kind,
        holds=bool(holds),
        saturated=bool(abs(value - bound) <= tol),
        expected_saturation=expected,
    )


@dataclass(frozen=True)
class BoundReport:
    d: int
    f_pq: float
    f_pp: float
    f_qq: float
    f_p: float
    f_q: float
    constants: FidelityConstants
    checks: list = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    @property
    def all_consistent(self) -> bool:
        return all(c.consistent for c in self.checks)

    def by_name(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _two_copy_fp_bound(p: Povm, q: Povm) -> float:
    d = p.dim
    phi = povm_cross_frame_potential(p, q, 0.5)
    return (2 * d * (d + 1) + 2 * phi) / (d * (d + 1) * (d + 2))


def fidelity_bound_report(p: Povm, q: Povm) -> BoundReport:
    """Evaluate every two-copy fidelity bound that applies to the pair ``(p, q)``."""
    if p.dim != q.dim:
        raise DimMismatch("POVMs act on spaces of different dimension")
    d = p.dim
    K = FidelityConstants.for_dim(d)
    f_p = estimation_fidelity(p).value
    f_q = estimation_fidelity(q).value
    f_pp = estimation_fidelity([p, p]).value
    f_qq = estimation_fidelity([q, q]).value
    f_pq = estimation_fidelity([p, q]).value
    p_r1, q_r1 = is_rank1(p), is_rank1(q)
    both_r1 = p_r1 and q_r1
    commuting = commute(p, q)
    mu = are_mutually_unbiased(p, q)

    checks = [
        _check("one_copy_upper[p]", f_p, K.f1, "upper", p_r1),
        _check("one_copy_lower[p]", f_p, 1.0 / d, "lower"),
        _check("two_copy_iid_upper[p]", f_pp, K.f2_iid, "upper"),
        _check("two_copy_iid_upper[q]", f_qq, K.f2_iid, "upper"),
        _check("frame_potential_bound[p,p]", f_pp, _two_copy_fp_bound(p, p), "upper", p_r1),
        _check("frame_potential_bound[q,q]", f_qq, _two_copy_fp_bound(q, q), "upper", q_r1),
        _check("frame_potential_bound[p,q]", f_pq, _two_copy_fp_bound(p, q), "upper", both_r1),
        _check("product_sep_upper[p,q]", f_pq, K.f2_sep, "upper", both_r1 and mu),
    ]
    if p_r1:
        checks.append(_check("two_copy_iid_lower[p]", f_pp, K.f1, "lower"))
    if q_r1:
        checks.append(_check("two_copy_iid_lower[q]", f_qq, K.f1, "lower"))
    if commuting:
        checks.append(_check("commuting_upper[p,q]", f_pq, K.f1, "upper"))
    if p_r1 or q_r1:
        checks.append(_check("rank1_product_lower[p,q]", f_pq, K.f1, "lower", commuting))
    return BoundReport(d=d, f_pq=f_pq, f_pp=f_pp, f_qq=f_qq, f_p=f_p, f_q=f_q, constants=K, checks=checks)


class Verdict:
    INCOMPATIBLE = "INCOMPATIBLE"
    NONCOMMUTING = "NONCOMMUTING"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class WitnessResult:
    verdict: str
    fidelity: float
    f1: float
    f2_iid: float
    saturates_iid: bool

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "fidelity": self.fidelity,
            "f1": self.f1,
            "f2_iid": self.f2_iid,
            "saturates_f2_iid": self.saturates_iid,
        }


def incompatibility_witness(p: Povm, q: Povm) -> WitnessResult:
    """Fidelity-based sufficient test for incompatibility and noncommutativity.

    ``F(p (x) q) > F_2^iid`` certifies that the pair has no common refinement;
    ``F(p (x) q) > 2/(d+1)`` certifies that the POVMs do not commute.  Neither
    test is necessary, so there is no "compatible" verdict.
    """
    if p.dim != q.dim:
        raise DimMismatch("POVMs act on spaces of different dimension")
    K = FidelityConstants.for_dim(p.dim)
    f = estimation_fidelity([p, q]).value
    if f > K.f2_iid + TOL.witness_margin:
        verdict = Verdict.INCOMPATIBLE
    elif f > K.f1 + TOL.witness_margin:
        verdict = Verdict.NONCOMMUTING
    else:
        verdict = Verdict.INCONCLUSIVE
    return WitnessResult(
        verdict=verdict,
        fidelity=f,
        f1=K.f1,
        f2_iid=K.f2_iid,
        saturates_iid=abs(f - K.f2_iid) <= TOL.saturation,
    )


@dataclass(frozen=True)
class FamilyReport:
    g: int
    total_sum: float
    offdiag_sum: float
    iid_bound: float
    sep_bound: float
    total_within: bool
    offdiag_within: bool
    total_saturated: bool
    offdiag_saturated: bool


def family_sum_criteria(family: Sequence[Povm]) -> FamilyReport:
    """Sums of pairwise two-copy fidelities against ``g^2 F_2^iid`` and ``g(g-1) F_2^sep``."""
    family = list(family)
    g = len(family)
    d = family[0].dim
    K = FidelityConstants.for_dim(d)
    F = np.empty((g, g))
    for r in range(g):
        for s in range(r, g):
            F[r, s] = F[s, r] = estimation_fidelity([family[r], family[s]]).value
    total = float(F.sum())
    off = float(total - np.trace(F))
    iid_bound = g * g * K.f2_iid
    sep_bound = g * (g - 1) * K.f2_sep
    tol = TOL.saturation * max(1, g * g)
    return FamilyReport(
        g=g,
        total_sum=total,
        offdiag_sum=off,
        iid_bound=iid_bound,
        sep_bound=sep_bound,
        total_within=total <= iid_bound + tol,
        offdiag_within=off <= sep_bound + tol,
        total_saturated=abs(total - iid_bound) <= tol,
        offdiag_saturated=g > 1 and abs(off - sep_bound) <= tol,
    )


TABLE_I_LABELS = (
    "rank-1",
    "rank-1 projective",
    "identical rank-1 projective",
    "SIC",
    "identical SICs",
    "MU rank-1 projective",
)
UNCLASSIFIED = "UNCLASSIFIED"


def classify_by_fidelity_signature(p: Povm, q: Povm | None = None) -> str:
    """Identify a measurement (or pair) from at most three extremal fidelities.

    Single POVM: ``F(A) = 2/(d+1)`` marks rank-1; additionally
    ``F(A^2) = 2/(d+1)`` marks rank-1 projective and ``F(A^2) = F_2^iid`` a
    SIC.  For a pair the identical-projective, identical-SIC and
    MU-projective signatures are tested first.
    """
    d = p.dim
    K = FidelityConstants.for_dim(d)
    tol = TOL.saturation
    eq = lambda x, y: abs(x - y) <= tol  # noqa: E731
    p = simplify(p)
    f_p = estimation_fidelity(p).value
    f_pp = estimation_fidelity([p, p]).value
    if q is not None:
        if q.dim != d:
            raise DimMismatch("POVMs act on spaces of different dimension")
        q = simplify(q)
        f_q = estimation_fidelity(q).value
        f_qq = estimation_fidelity([q, q]).value
        f_pq = estimation_fidelity([p, q]).value
        if eq(f_p, K.f1) and eq(f_q, K.f1) and eq(f_pq, K.f1):
            return "identical rank-1 projective"
        if eq(f_pp, K.f2_iid) and eq(f_pq, K.f2_iid):
            return "identical SICs"
        if eq(f_pp, K.f1) and eq(f_qq, K.f1) and eq(f_pq, K.f2_sep):
            return "MU rank-1 projective"
        return UNCLASSIFIED
    if not eq(f_p, K.f1):
        return UNCLASSIFIED
    if eq(f_pp, K.f1):
        return "rank-1 projective"
    if eq(f_pp, K.f2_iid):
        return "SIC"
    return "rank-1"
