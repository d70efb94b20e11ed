import math
import warnings

import numpy as np
import pytest

from povmfid.builders import (
    basis_povm,
    cmub,
    computational_basis,
    fourier_basis,
    mub_triple_d4,
    MubTripleParams,
    random_povm,
    random_rank1_povm,
    sic_d2_tetrahedron,
    sic_d3,
)
from povmfid.errors import DimMismatch, TooLarge
from povmfid.fidelity import (
    FidelityConstants,
    UNCLASSIFIED,
    Verdict,
    classify_by_fidelity_signature,
    collective_fidelity,
    estimation_fidelity,
    estimator_average_fidelity,
    family_sum_criteria,
    fidelity_bound_report,
    incompatibility_witness,
    optimal_estimators,
    q_map_1,
    q_map_2,
    q_map_3,
    q_map_general,
    q_map_oracle,
    rising_factorial,
    swap_saturation_gap,
)
from povmfid.numkernel import kron, random_unitary, symmetric_projector
from povmfid.povm import Povm, StochasticMatrix, coarse_grain, is_reducible, simplify
from povmfid.verify import commuting_pair, random_psd


def proj(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def e(d, j):
    v = np.zeros(d)
    v[j] = 1
    return proj(v)


def top(M):
    return np.linalg.eigvalsh(M)[-1]


class TestConstants:
    def test_d2_values(self):
        K = FidelityConstants.for_dim(2)
        assert K.f1 == pytest.approx(2 / 3)
        assert K.f2_iid == pytest.approx((7 + math.sqrt(3)) / 12)
        assert K.f2_sep == pytest.approx((3 + math.sqrt(2)) / 6)
        assert K.f3_proj == pytest.approx(2 * 7 / 20)
        assert K.n_copy_ub(2) == pytest.approx(3 / 4)

    def test_mu_beats_sic_at_d2(self):
        K = FidelityConstants.for_dim(2)
        assert K.f2_sep > K.f2_iid


class TestQMaps:
    def test_q1_examples(self):
        assert np.allclose(q_map_1(e(2, 0)), np.eye(2) + e(2, 0))
        assert top(q_map_1(e(2, 0))) == pytest.approx(2)
        assert np.allclose(q_map_1(np.eye(2)), 3 * np.eye(2))

    def test_q2_basis_norms(self):
        assert top(q_map_2(e(3, 1), e(3, 1))) == pytest.approx(6)
        assert top(q_map_2(e(3, 0), e(3, 2))) == pytest.approx(2)

    def test_q2_rank1_norm(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a, b = (rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(2))
            A, B = proj(a / np.linalg.norm(a)), proj(b / np.linalg.norm(b))
            f = np.trace(A @ B).real
            assert top(q_map_2(A, B)) == pytest.approx(2 * (1 + f + math.sqrt(f)), abs=1e-12)

    def test_q3_basis_norms(self):
        assert top(q_map_3(e(3, 0), e(3, 0), e(3, 0))) == pytest.approx(24)
        assert top(q_map_3(e(3, 0), e(3, 0), e(3, 1))) == pytest.approx(6)
        assert top(q_map_3(e(3, 0), e(3, 1), e(3, 2))) == pytest.approx(2)

    def test_q3_identity_matches_oracle(self):
        I = np.eye(2)
        assert np.allclose(q_map_3(I, I, I), q_map_general([I, I, I]))

    def test_q3_mub_triple_norms(self):
        A, B, C = mub_triple_d4(MubTripleParams(math.pi / 2, math.pi / 2, math.pi / 2))
        norms = {}
        for Aj in A.elements:
            for Bk in B.elements:
                for Cl in C.elements:
                    f = np.trace(Aj @ Bk @ Cl)
                    key = complex(round(f.real, 9), round(f.imag, 9))
                    norms.setdefault(key, set()).add(round(top(q_map_3(Aj, Bk, Cl)), 9))
        assert norms[complex(0.125, 0)] == {7.5}
        assert norms[complex(0, 0.125)] == norms[complex(0, -0.125)] == {round(4 + 5 * math.sqrt(3) / 4, 9)}
        A, B, C = mub_triple_d4(MubTripleParams(math.pi / 2, 0, 0))
        for Aj in A.elements:
            for Bk in B.elements:
                for Cl in C.elements:
                    f = np.trace(Aj @ Bk @ Cl).real
                    assert top(q_map_3(Aj, Bk, Cl)) == pytest.approx(7.5 if f > 0 else 3.75)

    @pytest.mark.parametrize("d", [2, 3])
    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_closed_forms_match_oracle(self, d, N):
        rng = np.random.default_rng(10 * d + N)
        fn = (q_map_1, q_map_2, q_map_3)[N - 1]
        for _ in range(20):
            ops = [random_psd(d, rng) for _ in range(N)]
            B = q_map_general(ops)
            assert np.max(np.abs(fn(*ops) - B)) <= 1e-8 * max(1.0, np.max(np.abs(B)))

    @pytest.mark.parametrize("d,N", [(2, 1), (2, 2), (3, 2), (2, 3)])
    def test_oracle_matches_dense_definition(self, d, N):
        rng = np.random.default_rng(d + N)
        O = random_psd(d**N, rng)
        P = symmetric_projector(d, N + 1).matrix
        dense = math.factorial(N + 1) * np.einsum("iaib->ab", (P @ kron(O, np.eye(d))).reshape(d**N, d, d**N, d))
        assert np.allclose(q_map_oracle(O, d, N), dense)

    def test_oracle_guard(self):
        with pytest.raises(TooLarge):
            q_map_general([np.eye(4)] * 6)

    def test_oracle_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            q_map_oracle(np.eye(5), 2, 2)


class TestEstimationFidelity:
    @pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
    def test_rank1_single_copy(self, d):
        for p in (computational_basis(d), random_rank1_povm(d, d + 2, d)):
            assert estimation_fidelity(p).value == pytest.approx(2 / (d + 1), abs=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_projective_copies(self, d):
        b = basis_povm(random_unitary(d, np.random.default_rng(d)))
        K = FidelityConstants.for_dim(d)
        assert estimation_fidelity(b, 2).value == pytest.approx(K.f1, abs=1e-12)
        assert estimation_fidelity(b, 3).value == pytest.approx(K.f3_proj, abs=1e-12)

    def test_oracle_mode_agrees(self):
        s = sic_d2_tetrahedron()
        for N in (1, 2, 3):
            assert estimation_fidelity(s, N, oracle=True).value == pytest.approx(estimation_fidelity(s, N).value, abs=1e-12)

    def test_four_copies_via_oracle(self):
        b = computational_basis(2)
        f4 = estimation_fidelity(b, 4).value
        assert 2 / 3 <= f4 <= 5 / 6 + 1e-12

    def test_result_recomputable(self):
        r = estimation_fidelity([sic_d3(0.3), fourier_basis(3)])
        assert r.recomputed() == pytest.approx(r.value, abs=1e-12)
        assert len(r.per_element_norms) == 27

    def test_dimension_mismatch(self):
        with pytest.raises(DimMismatch):
            estimation_fidelity([computational_basis(2), computational_basis(3)])

    def test_rising_factorial(self):
        assert rising_factorial(4, 3) == 840


class TestEstimators:
    def test_rank1_single_copy(self):
        p = random_rank1_povm(3, 5, 1)
        est = optimal_estimators(p)
        for E, k in zip(p.elements, est.kets):
            psi = np.linalg.eigh(E)[1][:, -1]
            assert abs(np.vdot(psi, k)) == pytest.approx(1, abs=1e-10)
        assert not est.any_degenerate

    def test_trivial_degenerate(self):
        assert optimal_estimators(Povm([np.eye(3)])).degenerate == [True]

    def test_sic_d2_states(self):
        s = sic_d2_tetrahedron()
        est = optimal_estimators(s)
        for E, k in zip(s.elements, est.kets):
            assert np.vdot(k, 2 * E @ k).real == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("copies", [1, 2, 3])
    def test_estimators_reproduce_fidelity(self, copies):
        for p in (random_povm(2, 3, 4), sic_d3(0.2), random_rank1_povm(3, 4, 2)):
            est = optimal_estimators(p, copies)
            f = estimator_average_fidelity(p, est.kets, copies)
            assert f == pytest.approx(estimation_fidelity(p, copies).value, abs=1e-9)


class TestStructuralProperties:
    def test_unitary_invariance(self):
        rng = np.random.default_rng(0)
        for seed in range(20):
            p, q = random_povm(3, 4, seed), random_povm(3, 3, seed + 50)
            U = random_unitary(3, rng)
            assert estimation_fidelity([p.transformed(U), q.transformed(U)]).value == pytest.approx(
                estimation_fidelity([p, q]).value, abs=1e-12
            )

    def test_coarse_graining_never_helps(self):
        rng = np.random.default_rng(1)
        for seed in range(40):
            d = 2 + seed % 3
            p = random_povm(d, 5, seed)
            lam = StochasticMatrix.random(int(rng.integers(1, 5)), 5, rng, sparsity=0.3)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                q = coarse_grain(p, lam)
            for N in (1, 2):
                assert estimation_fidelity(q, N).value <= estimation_fidelity(p, N).value + 1e-12

    def test_product_at_least_components(self):
        for seed in range(30):
            a, c = random_povm(3, 3, seed), random_povm(3, 4, seed + 99)
            f = estimation_fidelity([c, a]).value
            assert f >= max(estimation_fidelity(a).value, estimation_fidelity(c).value) - 1e-12

    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_collective_sandwich(self, N):
        d = 2
        for seed in range(50):
            p = random_povm(d**N, 2 + seed % (2 * d**N), seed)
            f = collective_fidelity(p, d, N).value
            assert 1 / d - 1e-10 <= f <= (N + 1) / (N + d) + 1e-10

    def test_collective_product_agrees(self):
        a, b = random_povm(2, 3, 1), random_povm(2, 2, 2)
        prod = Povm([np.kron(A, B) for A in a.elements for B in b.elements])
        assert collective_fidelity(prod, 2, 2).value == pytest.approx(estimation_fidelity([a, b]).value, abs=1e-12)

    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_q_norm_bounds(self, N):
        d = 2
        rng = np.random.default_rng(N)
        P = symmetric_projector(d, N).matrix
        for _ in range(30):
            A = random_psd(d**N, rng)
            qt = top(q_map_oracle(A, d, N)) / math.factorial(N + 1)
            t = np.trace(P @ A).real
            assert (N + d) / (d * (N + 1)) * t - 1e-10 <= qt <= t + 1e-10

    def test_iid_rank1_sandwich(self):
        rng = np.random.default_rng(5)
        for trial in range(100):
            d = 2 + trial % 3
            p = random_rank1_povm(d, int(rng.integers(d + 1, d * d + 4)), trial)
            K = FidelityConstants.for_dim(d)
            f = estimation_fidelity(p, 2).value
            assert K.f1 - 1e-12 <= f <= K.f2_iid + 1e-12
            # generic random POVMs are neither projective nor SIC
            assert f > K.f1 + 1e-8 and f < K.f2_iid - 1e-8

    def test_coarse_graining_partner_of_irreducible(self):
        rng = np.random.default_rng(6)
        for seed in range(30):
            d = 2 + seed % 2
            a = random_rank1_povm(d, d + 2, seed)
            assert not is_reducible(a)
            c = random_rank1_povm(d, d + 1, seed + 7)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cg = coarse_grain(c, StochasticMatrix.random(int(rng.integers(1, d + 2)), len(c), rng))
            assert estimation_fidelity([a, cg]).value <= estimation_fidelity([a, c]).value + 1e-10

    def test_swap_saturation_mu_products(self):
        for d in (2, 3):
            for A in computational_basis(d).elements:
                for B in fourier_basis(d).elements:
                    assert swap_saturation_gap(np.kron(A, B)) <= 1e-12
        assert swap_saturation_gap(np.kron(e(2, 0), e(2, 0))) > 0.5


class TestBoundReport:
    def test_mu_projective_pair(self):
        r = fidelity_bound_report(computational_basis(2), fourier_basis(2))
        assert r.f_pq == pytest.approx((3 + math.sqrt(2)) / 6, abs=1e-12)
        assert r.by_name("product_sep_upper[p,q]").saturated
        assert r.all_hold and r.all_consistent

    def test_identical_sic(self):
        s = sic_d3(0.8)
        r = fidelity_bound_report(s, s)
        assert r.f_pq == pytest.approx(r.constants.f2_iid, abs=1e-12)
        assert r.by_name("two_copy_iid_upper[p]").saturated

    def test_commuting_pair(self):
        p, q = commuting_pair(3, np.random.default_rng(2))
        r = fidelity_bound_report(p, q)
        assert r.by_name("commuting_upper[p,q]").holds and r.all_hold

    def test_random_pairs_consistent(self):
        for seed in range(30):
            d = 2 + seed % 3
            r = fidelity_bound_report(random_povm(d, 4, seed), random_rank1_povm(d, d + 1, seed))
            assert r.all_hold and r.all_consistent


class TestWitness:
    def test_mu_bases_incompatible(self):
        assert incompatibility_witness(computational_basis(2), fourier_basis(2)).verdict == Verdict.INCOMPATIBLE

    def test_identical_projective_inconclusive(self):
        b = computational_basis(3)
        assert incompatibility_witness(b, b).verdict == Verdict.INCONCLUSIVE

    def test_identical_sic_saturates_without_incompatibility(self):
        s = sic_d2_tetrahedron()
        w = incompatibility_witness(s, s)
        assert w.verdict != Verdict.INCOMPATIBLE and w.saturates_iid
        # the elements of a SIC do not commute with each other
        assert w.verdict == Verdict.NONCOMMUTING

    def test_commuting_never_flagged(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            p, q = commuting_pair(3, rng)
            assert incompatibility_witness(p, q).verdict == Verdict.INCONCLUSIVE


class TestFamilies:
    @pytest.mark.parametrize("g", [1, 2, 4])
    def test_identical_sics(self, g):
        r = family_sum_criteria([sic_d3(0.4)] * g)
        assert r.total_sum == pytest.approx(g * g * FidelityConstants.for_dim(3).f2_iid, abs=1e-10)
        assert r.total_saturated

    def test_cmum_d2(self):
        r = family_sum_criteria(cmub(2))
        assert r.offdiag_sum == pytest.approx(6 * FidelityConstants.for_dim(2).f2_sep, abs=1e-10)
        assert r.offdiag_saturated and r.total_within

    def test_single_member(self):
        r = family_sum_criteria([computational_basis(2)])
        assert r.offdiag_sum == 0.0 and not r.offdiag_saturated

    def test_random_families_within(self):
        for seed in range(10):
            fam = [random_povm(3, 4, seed * 10 + k) for k in range(3)]
            r = family_sum_criteria(fam)
            assert r.total_within and r.offdiag_within


class TestClassifier:
    def test_basis(self):
        assert classify_by_fidelity_signature(computational_basis(3)) == "rank-1 projective"

    def test_sic(self):
        assert classify_by_fidelity_signature(sic_d3(0.1)) == "SIC"
        assert classify_by_fidelity_signature(sic_d2_tetrahedron()) == "SIC"

    def test_mu_pair(self):
        assert classify_by_fidelity_signature(computational_basis(2), fourier_basis(2)) == "MU rank-1 projective"

    def test_identical(self):
        b = computational_basis(3)
        assert classify_by_fidelity_signature(b, b) == "identical rank-1 projective"
        s = sic_d3(0.2)
        assert classify_by_fidelity_signature(s, s) == "identical SICs"

    def test_generic_rank1(self):
        assert classify_by_fidelity_signature(random_rank1_povm(3, 6, 0)) == "rank-1"

    def test_unclassified(self):
        assert classify_by_fidelity_signature(random_povm(3, 3, 0)) == UNCLASSIFIED
        assert classify_by_fidelity_signature(random_povm(2, 3, 0), random_povm(2, 3, 1)) == UNCLASSIFIED

    def test_split_basis_still_projective(self):
        b = computational_basis(2)
        split = Povm([b.elements[0] / 2, b.elements[0] / 2, b.elements[1]])
        assert classify_by_fidelity_signature(split) == "rank-1 projective"
