"""POVM calculus: validity, purity, coarse graining, simplification, order
and equivalence, and the projective / mutually-unbiased predicates.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .config import TOL
from .errors import DimMismatch, InvalidPovm
from .numkernel import as_matrix

__all__ = [
    "Povm",
    "ValidityReport",
    "StochasticMatrix",
    "MuFamilyReport",
    "validate",
    "check_povm",
    "purity",
    "coarse_grain",
    "simplify",
    "is_equivalent",
    "is_rank1",
    "is_projective",
    "is_unbiased",
    "is_equiangular",
    "is_sic",
    "is_trivial",
    "is_simple",
    "are_mutually_unbiased",
    "commute",
    "is_reducible",
    "mu_family_check",
]


def _freeze(M) -> np.ndarray:
    arr = np.array(as_matrix(M), dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Povm:
    """Ordered collection of positive operators on a ``d``-dimensional space.

    Zero elements are dropped on construction (with a ``UserWarning``).
    Validity (positivity and completeness) is *not* enforced here so that
    malformed inputs can still be inspected with :func:`validate`; use
    :func:`check_povm` where a valid POVM is required.
    """

    elements: tuple
    labels: tuple = field(default=())

    def __init__(self, elements: Sequence, labels: Sequence[str] | None = None, *, drop_zero: bool = True):
        mats = [_freeze(E) for E in elements]
        if not mats:
            raise InvalidPovm("a POVM needs at least one element")
        d = mats[0].shape[0]
        for k, E in enumerate(mats):
            if E.shape != (d, d):
                raise DimMismatch(f"element {k} has shape {E.shape}, expected {(d, d)}")
        if labels is None:
            labels = [str(k) for k in range(len(mats))]
        labels = [str(s) for s in labels]
        if len(labels) != len(mats):
            raise InvalidPovm(f"{len(labels)} labels for {len(mats)} elements")
        if drop_zero:
            keep = [k for k, E in enumerate(mats) if np.linalg.norm(E, 2) > TOL.zero_element]
            if len(keep) < len(mats):
                warnings.warn(f"dropped {len(mats) - len(keep)} zero POVM element(s)", stacklevel=2)
                if not keep:
                    raise InvalidPovm("all POVM elements are zero")
                mats = [mats[k] for k in keep]
                labels = [labels[k] for k in keep]
        object.__setattr__(self, "elements", tuple(mats))
        object.__setattr__(self, "labels", tuple(labels))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def stack(self) -> np.ndarray:
        """Elements as an ``(m, d, d)`` array."""
        return np.stack(self.elements)

    def traces(self) -> np.ndarray:
        return np.real(np.einsum("jii->j", self.stack()))

    def transformed(self, U) -> "Povm":
        """The POVM ``{U A_j U^dagger}``."""
        U = as_matrix(U)
        return Povm([U @ E @ U.conj().T for E in self.elements], self.labels)

    def relabeled(self, order: Sequence[int]) -> "Povm":
        return Povm([self.elements[k] for k in order], [self.labels[k] for k in order])


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    psd_margin: float
    completeness_residual: float
    zero_elements: tuple
    messages: tuple = ()


def validate(p: Povm) -> ValidityReport:
    """Report positivity margin, completeness residual and zero elements."""
    mins = []
    zeros = []
    messages = []
    for k, E in enumerate(p.elements):
        herm_dev = float(np.max(np.abs(E - E.conj().T)))
        if herm_dev > TOL.hermitian_check:
            messages.append(f"element {k} ({p.labels[k]}) is not Hermitian (deviation {herm_dev:.3e})")
        w = np.linalg.eigvalsh(0.5 * (E + E.conj().T))
        mins.append(float(w[0]))
        if float(np.max(np.abs(w))) <= TOL.zero_element:
            zeros.append(k)
    margin = min(mins)
    residual = float(np.max(np.abs(sum(p.elements) - np.eye(p.dim))))
    if margin < -TOL.psd_margin:
        messages.append(f"element {int(np.argmin(mins))} has negative eigenvalue {margin:.3e}")
    if residual > TOL.completeness:
        messages.append(f"elements sum to the identity only up to {residual:.3e}")
    if zeros:
        messages.append(f"zero elements at positions {zeros}")
    return ValidityReport(
        valid=not messages,
        psd_margin=margin,
        completeness_residual=residual,
        zero_elements=tuple(zeros),
        messages=tuple(messages),
    )


def check_povm(p) -> Povm:
    """Coerce ``p`` to a :class:`Povm` and raise :class:`InvalidPovm` if it is not valid."""
    if not isinstance(p, Povm):
        p = Povm(p)
    report = validate(p)
    if not report.valid:
        raise InvalidPovm("; ".join(report.messages))
    return p


def purity(p: Povm) -> float:
    """Purity ``sum_j tr(A_j^2) / (d tr A_j)``, which lies in ``[1/d, 1]``."""
    A = p.stack()
    tr = np.real(np.einsum("jii->j", A))
    tr2 = np.real(np.einsum("jab,jba->j", A, A))
    return float(np.sum(tr2 / tr) / p.dim)


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """Column-stochastic matrix ``Lambda`` with ``sum_j Lambda[j, k] = 1``."""

    entries: np.ndarray

    def __init__(self, entries):
        arr = np.array(entries, dtype=float, copy=True)
        if arr.ndim != 2:
            raise DimMismatch("stochastic matrix must be two-dimensional")
        if np.any(arr < 0):
            raise ValueError("stochastic matrix has negative entries")
        cols = arr.sum(axis=0)
        if np.max(np.abs(cols - 1.0)) > TOL.stochastic_column:
            raise ValueError(f"columns must sum to 1 (max deviation {np.max(np.abs(cols - 1.0)):.3e})")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def shape(self) -> tuple:
        return self.entries.shape

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator, sparsity: float = 0.0) -> "StochasticMatrix":
        L = rng.random((rows, cols))
        if sparsity > 0:
            L[rng.random((rows, cols)) < sparsity] = 0.0
            for k in range(cols):
                if L[:, k].sum() == 0:
                    L[rng.integers(rows), k] = 1.0
        return cls(L / L.sum(axis=0, keepdims=True))


def coarse_grain(p: Povm, lam: StochasticMatrix) -> Povm:
    """Data processing ``A_j = sum_k Lambda[j, k] B_k``; zero outputs are dropped."""
    if not isinstance(lam, StochasticMatrix):
        lam = StochasticMatrix(lam)
    if lam.shape[1] != len(p):
        raise DimMismatch(f"Lambda has {lam.shape[1]} columns but the POVM has {len(p)} elements")
    out = np.einsum("jk,kab->jab", lam.entries, p.stack())
    return Povm(list(out))


def _proportional(A: np.ndarray, B: np.ndarray) -> bool:
    inner = abs(np.vdot(A, B)) ** 2
    return inner >= (1.0 - TOL.proportional) * np.real(np.vdot(A, A)) * np.real(np.vdot(B, B))


def simplify(p: Povm) -> Povm:
    """Merge pairwise proportional elements into the canonical simple POVM."""
    groups: list[list[int]] = []
    for k, E in enumerate(p.elements):
        for g in groups:
            if _proportional(p.elements[g[0]], E):
                g.append(k)
                break
        else:
            groups.append([k])
    elements = [sum(p.elements[k] for k in g) for g in groups]
    labels = ["+".join(p.labels[k] for k in g) for g in groups]
    return Povm(elements, labels)


def is_simple(p: Povm) -> bool:
    return len(simplify(p)) == len(p)


def _match(p: Povm, q: Povm, tol: float) -> bool:
    if len(p) != len(q) or p.dim != q.dim:
        return False
    remaining = list(range(len(q)))
    for E in p.elements:
        dists = [float(np.max(np.abs(E - q.elements[k]))) for k in remaining]
        best = int(np.argmin(dists))
        if dists[best] > tol:
            return False
        remaining.pop(best)
    return True


def is_equivalent(p: Povm, q: Povm) -> bool:
    """True iff the simple representatives agree up to relabeling."""
    if p.dim != q.dim:
        raise DimMismatch("POVMs act on spaces of different dimension")
    return _match(simplify(p), simplify(q), TOL.matching)


def _ranks(p: Povm, tol: float = TOL.rank_eigenvalue) -> list[int]:
    return [int(np.sum(np.linalg.eigvalsh(E) > tol)) for E in p.elements]


def is_rank1(p: Povm) -> bool:
    return all(r == 1 for r in _ranks(p))


def is_trivial(p: Povm) -> bool:
    """All elements proportional to the identity."""
    d = p.dim
    return all(np.max(np.abs(E - np.trace(E) / d * np.eye(d))) <= TOL.overlap for E in p.elements)


def is_projective(p: Povm) -> bool:
    """Elements are mutually orthogonal projectors."""
    A = p.stack()
    prods = np.einsum("jab,kbc->jkac", A, A)
    m = len(p)
    for j in range(m):
        if np.max(np.abs(prods[j, j] - A[j])) > TOL.overlap:
            return False
        for k in range(j + 1, m):
            if np.max(np.abs(prods[j, k])) > TOL.overlap:
                return False
    return True


def is_unbiased(p: Povm) -> bool:
    tr = p.traces()
    return bool(np.max(tr) - np.min(tr) <= TOL.overlap)


def _overlaps(p: Povm, q: Povm) -> np.ndarray:
    return np.real(np.einsum("jab,kba->jk", p.stack(), q.stack()))


def is_equiangular(p: Povm) -> bool:
    """Unbiased rank-1 POVM whose off-diagonal overlaps ``tr(A_j A_k)`` coincide."""
    if len(p) < 2 or not is_rank1(p) or not is_unbiased(p):
        return False
    G = _overlaps(p, p)
    off = G[~np.eye(len(p), dtype=bool)]
    return bool(np.max(off) - np.min(off) <= TOL.overlap)


def is_sic(p: Povm) -> bool:
    """``d^2`` rank-1 elements of trace ``1/d`` with pairwise state fidelity ``1/(d+1)``."""
    d = p.dim
    if len(p) != d * d or not is_equiangular(p):
        return False
    if abs(p.traces()[0] - 1.0 / d) > TOL.overlap:
        return False
    G = _overlaps(p, p)
    return bool(abs(G[0, 1] - 1.0 / (d * d * (d + 1))) <= TOL.overlap)


def are_mutually_unbiased(p: Povm, q: Povm) -> bool:
    """``tr(A_j B_k) = tr(A_j) tr(B_k) / d`` for every pair."""
    if p.dim != q.dim:
        raise DimMismatch("POVMs act on spaces of different dimension")
    G = _overlaps(p, q)
    target = np.outer(p.traces(), q.traces()) / p.dim
    return bool(np.max(np.abs(G - target)) <= TOL.unbiased)


def commute(p: Povm, q: Povm) -> bool:
    if p.dim != q.dim:
        raise DimMismatch("POVMs act on spaces of different dimension")
    A, B = p.stack(), q.stack()
    AB = np.einsum("jab,kbc->jkac", A, B)
    BA = np.einsum("kab,jbc->jkac", B, A)
    return bool(np.max(np.abs(AB - BA)) <= TOL.commute)


def is_reducible(p: Povm) -> bool:
    """Elements split into two mutually orthogonal non-empty groups."""
    if len(p) < 2:
        return False
    adj = (_overlaps(p, p) > TOL.reducible_overlap).astype(int)
    n_components, _ = connected_components(adj, directed=False)
    return n_components > 1


@dataclass(frozen=True)
class MuFamilyReport:
    size: int
    max_size: int
    pairwise_mu: dict
    all_pairwise_mu: bool
    within_bound: bool
    complete: bool
    all_projective: bool | None


def mu_family_check(family: Sequence[Povm]) -> MuFamilyReport:
    """Pairwise unbiasedness of a family and its size against the ``d + 1`` bound."""
    if not family:
        raise ValueError("empty family")
    d = family[0].dim
    flags = {}
    for r in range(len(family)):
        for s in range(r + 1, len(family)):
            flags[(r, s)] = are_mutually_unbiased(family[r], family[s])
    all_mu = all(flags.values())
    complete = all_mu and len(family) == d + 1
    return MuFamilyReport(
        size=len(family),
        max_size=d + 1,
        pairwise_mu=flags,
        all_pairwise_mu=all_mu,
        within_bound=len(family) <= d + 1,
        complete=complete,
        all_projective=all(is_projective(P) for P in family) if complete else None,
    )
