"""Seeded self-check suites producing machine-readable reports."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .builders import (
    basis_povm,
    cmub,
    random_povm,
    random_rank1_povm,
    sic_d2_tetrahedron,
    sic_d3,
)
from .fidelity import (
    FidelityConstants,
    classify_by_fidelity_signature,
    collective_fidelity,
    estimation_fidelity,
    family_sum_criteria,
    fidelity_bound_report,
    q_map_1,
    q_map_2,
    q_map_3,
    q_map_general,
)
from .numkernel import random_unitary
from .povm import Povm, StochasticMatrix, coarse_grain

__all__ = ["SuiteReport", "SUITES", "run_suite", "commuting_pair", "random_psd"]

_FID_TOL = 1e-9


@dataclass
class SuiteReport:
    suite: str
    seed: int
    trials: int
    checks: dict = field(default_factory=dict)

    def record(self, name: str, ok: bool, worst: float | None = None) -> None:
        c = self.checks.setdefault(name, {"passed": 0, "failed": 0, "worst": None})
        c["passed" if ok else "failed"] += 1
        if worst is not None:
            w = float(worst)
            c["worst"] = w if c["worst"] is None else max(c["worst"], w)

    @property
    def ok(self) -> bool:
        return all(c["failed"] == 0 for c in self.checks.values())

    def as_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "trials": self.trials, "passed": self.ok, "checks": self.checks}


def random_psd(d: int, rng: np.random.Generator) -> np.ndarray:
    M = rng.uniform(-1, 1, (d, d)) + 1j * rng.uniform(-1, 1, (d, d))
    return M @ M.conj().T


def commuting_pair(d: int, rng: np.random.Generator) -> tuple[Povm, Povm]:
    """Two coarse grainings of one random basis; always commuting."""
    base = basis_povm(random_unitary(d, rng))
    p = coarse_grain(base, StochasticMatrix.random(int(rng.integers(2, d + 2)), d, rng))
    q = coarse_grain(base, StochasticMatrix.random(int(rng.integers(2, d + 2)), d, rng))
    return p, q


def _bounds(report: SuiteReport, rng: np.random.Generator) -> None:
    for trial in range(report.trials):
        d = 2 + trial % 3
        K = FidelityConstants.for_dim(d)
        m1, m2 = int(rng.integers(d, d * d + 2)), int(rng.integers(d, d * d + 2))
        seeds = rng.integers(0, 2**32, 4)
        a = random_rank1_povm(d, m1, seeds[0])
        b = random_rank1_povm(d, m2, seeds[1])
        g = random_povm(d, int(rng.integers(2, 2 * d + 1)), seeds[2])
        h = random_povm(d, int(rng.integers(2, 2 * d + 1)), seeds[3])

        f_aa = estimation_fidelity([a, a]).value
        report.record("iid_rank1_sandwich", K.f1 - _FID_TOL <= f_aa <= K.f2_iid + _FID_TOL)

        rep = fidelity_bound_report(a, b)
        gap = abs(rep.by_name("frame_potential_bound[p,q]").bound - rep.f_pq)
        report.record("frame_potential_equality_rank1", gap < _FID_TOL, gap)
        gap_aa = abs(rep.by_name("frame_potential_bound[p,p]").bound - rep.f_pp)
        report.record("frame_potential_equality_rank1_iid", gap_aa < _FID_TOL, gap_aa)
        rep_g = fidelity_bound_report(g, h)
        report.record("frame_potential_bound_general", rep_g.by_name("frame_potential_bound[p,q]").holds)
        report.record("product_sep_upper", rep.f_pq <= K.f2_sep + _FID_TOL and rep_g.f_pq <= K.f2_sep + _FID_TOL)

        p, q = commuting_pair(d, rng)
        f_pq = estimation_fidelity([p, q]).value
        report.record("commuting_upper", f_pq <= K.f1 + _FID_TOL, f_pq - K.f1)

        # rank-1 lower bound, equality iff commuting
        U = random_unitary(d, rng)
        base = basis_povm(U)
        comm = coarse_grain(base, StochasticMatrix.random(int(rng.integers(2, d + 2)), d, rng))
        f_eq = estimation_fidelity([base, comm]).value
        report.record("rank1_lower_equality_commuting", abs(f_eq - K.f1) < _FID_TOL, abs(f_eq - K.f1))
        f_nc = estimation_fidelity([a, b]).value
        report.record("rank1_lower_strict_noncommuting", f_nc > K.f1 + _FID_TOL, K.f1 - f_nc)

    for d in (2, 3):
        K = FidelityConstants.for_dim(d)
        sic = sic_d2_tetrahedron() if d == 2 else sic_d3(float(rng.uniform(0, 2 * math.pi)))
        for g in (1, 2, 3):
            fam = family_sum_criteria([sic] * g)
            report.record("identical_sic_family_saturates", fam.total_saturated, abs(fam.total_sum - fam.iid_bound))
        fam = family_sum_criteria(cmub(d))
        report.record("cmum_family_saturates", fam.offdiag_saturated, abs(fam.offdiag_sum - fam.sep_bound))


def _oracle(report: SuiteReport, rng: np.random.Generator) -> None:
    closed = {1: q_map_1, 2: q_map_2, 3: q_map_3}
    n_tuples = max(1, report.trials // 5)
    for d in (2, 3):
        for N, fn in closed.items():
            for _ in range(n_tuples):
                ops = [random_psd(d, rng) for _ in range(N)]
                A = fn(*ops)
                B = q_map_general(ops)
                dev = float(np.max(np.abs(A - B)) / max(1.0, np.max(np.abs(B))))
                report.record(f"closed_vs_oracle_N{N}_d{d}", dev < 1e-8, dev)
    d = 2
    for N in (1, 2, 3):
        lo, hi = 1.0 / d, (N + 1) / (N + d)
        for _ in range(max(1, report.trials // 2)):
            dim = d**N
            p = random_povm(dim, int(rng.integers(2, 2 * dim + 1)), int(rng.integers(0, 2**32)))
            f = collective_fidelity(p, d, N).value
            report.record(f"collective_sandwich_N{N}", lo - 1e-8 <= f <= hi + 1e-8)


def _table1_cases(rng: np.random.Generator, n: int):
    kinds = ("basis", "sic2", "sic3", "mu_pair", "identical_basis", "identical_sic")
    for k in range(n):
        kind = kinds[k % len(kinds)]
        if kind in ("basis", "identical_basis", "mu_pair"):
            d = int(rng.integers(2, 5))
            U = random_unitary(d, rng)
            b = basis_povm(U)
            if kind == "basis":
                yield kind, (b,), "rank-1 projective"
            elif kind == "identical_basis":
                perm = rng.permutation(d)
                yield kind, (b, b.relabeled(perm)), "identical rank-1 projective"
            else:
                j = np.arange(d)
                F = np.exp(2j * np.pi * np.outer(j, j) / d) / math.sqrt(d)
                yield kind, (b, basis_povm(U @ F)), "MU rank-1 projective"
        else:
            if kind == "sic2":
                s = sic_d2_tetrahedron().transformed(random_unitary(2, rng))
            else:
                s = sic_d3(float(rng.uniform(0, 2 * math.pi))).transformed(random_unitary(3, rng))
            if kind == "identical_sic":
                yield kind, (s, s), "identical SICs"
            else:
                yield kind, (s,), "SIC"


def _table1(report: SuiteReport, rng: np.random.Generator) -> None:
    for kind, povms, expected in _table1_cases(rng, report.trials):
        label = classify_by_fidelity_signature(*povms)
        report.record(f"classify_{kind}", label == expected)


SUITES = {"bounds": _bounds, "oracle": _oracle, "table1": _table1}


def run_suite(name: str, seed: int = 0, trials: int = 100) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    report = SuiteReport(suite=name, seed=seed, trials=trials)
    SUITES[name](report, np.random.default_rng(seed))
    return report
