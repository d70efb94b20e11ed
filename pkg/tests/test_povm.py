import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from povmfid.builders import (
    cmub,
    computational_basis,
    fourier_basis,
    random_povm,
    random_rank1_povm,
    sic_d3,
)
from povmfid.errors import DimMismatch, InvalidPovm
from povmfid.numkernel import PAULI
from povmfid.povm import (
    Povm,
    StochasticMatrix,
    are_mutually_unbiased,
    check_povm,
    coarse_grain,
    commute,
    is_equiangular,
    is_equivalent,
    is_projective,
    is_rank1,
    is_reducible,
    is_simple,
    is_sic,
    is_unbiased,
    mu_family_check,
    purity,
    simplify,
    validate,
)


def trivial(d):
    return Povm([np.eye(d)])


def xz_pair():
    x = Povm([0.5 * (np.eye(2) + PAULI[0]), 0.5 * (np.eye(2) - PAULI[0])])
    return x, computational_basis(2)


def split_first(p):
    E = p.elements
    return Povm([E[0] / 2, E[0] / 2, *E[1:]])


class TestValidity:
    def test_trivial_valid(self):
        assert validate(trivial(3)).valid

    def test_basis_valid(self):
        assert validate(computational_basis(2)).valid

    def test_completeness_violation_reported(self):
        r = validate(Povm([2 * np.diag([1, 0]), np.diag([0, 1])]))
        assert not r.valid and r.completeness_residual == pytest.approx(1.0)
        with pytest.raises(InvalidPovm):
            check_povm(Povm([2 * np.diag([1, 0]), np.diag([0, 1])]))

    def test_negative_element_reported(self):
        r = validate(Povm([np.diag([1.2, 0]), np.diag([-0.2, 1])]))
        assert not r.valid and r.psd_margin == pytest.approx(-0.2)

    def test_zero_elements_dropped_with_warning(self):
        with pytest.warns(UserWarning):
            p = Povm([np.eye(2), np.zeros((2, 2))])
        assert len(p) == 1

    def test_elements_read_only(self):
        p = computational_basis(2)
        with pytest.raises(ValueError):
            p.elements[0][0, 0] = 3


class TestPurity:
    def test_trivial(self):
        assert purity(trivial(3)) == pytest.approx(1 / 3)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_rank1_projective(self, d):
        assert purity(computational_basis(d)) == pytest.approx(1.0)

    def test_half_identity_pair(self):
        assert purity(Povm([np.eye(2) / 2, np.eye(2) / 2])) == pytest.approx(0.5)


class TestCoarseGraining:
    def test_identity_map(self):
        p = sic_d3(0.2)
        assert is_equivalent(coarse_grain(p, StochasticMatrix(np.eye(9))), p)

    def test_merge_all(self):
        q = coarse_grain(sic_d3(0.2), StochasticMatrix(np.ones((1, 9))))
        assert len(q) == 1 and np.allclose(q.elements[0], np.eye(3))

    def test_merging_proportional_keeps_purity(self):
        p = split_first(sic_d3(0.5))
        lam = np.zeros((9, 10))
        lam[0, 0] = lam[0, 1] = 1
        for k in range(2, 10):
            lam[k - 1, k] = 1
        assert purity(coarse_grain(p, StochasticMatrix(lam))) == pytest.approx(purity(p), abs=1e-12)

    def test_column_check(self):
        with pytest.raises(ValueError):
            StochasticMatrix([[0.5, 1.0], [0.4, 0.0]])

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            coarse_grain(computational_basis(2), StochasticMatrix(np.eye(3)))

    def test_purity_monotone_random(self):
        rng = np.random.default_rng(11)
        for trial in range(100):
            d = 2 + trial % 3
            p = random_povm(d, int(rng.integers(2, 7)), trial)
            lam = StochasticMatrix.random(int(rng.integers(1, 6)), len(p), rng, sparsity=0.3)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                q = coarse_grain(p, lam)
            assert purity(q) <= purity(p) + 1e-10


class TestSimplify:
    def test_half_identities(self):
        s = simplify(Povm([np.eye(2) / 2, np.eye(2) / 2]))
        assert len(s) == 1 and np.allclose(s.elements[0], np.eye(2))

    def test_simple_unchanged(self):
        p = computational_basis(3)
        assert is_simple(p) and is_equivalent(simplify(p), p)

    def test_split_sic(self):
        p = sic_d3(0.1)
        q = split_first(p)
        assert not is_simple(q)
        assert is_equivalent(q, p)
        assert purity(simplify(q)) == pytest.approx(purity(q), abs=1e-10)

    def test_idempotent(self):
        for seed in range(10):
            p = random_povm(3, 5, seed)
            s = simplify(p)
            assert is_equivalent(simplify(s), s) and len(simplify(s)) == len(s)


class TestEquivalence:
    def test_self(self):
        assert is_equivalent(trivial(2), trivial(2))

    def test_relabeling(self):
        p = sic_d3(0.3)
        assert is_equivalent(p, p.relabeled([8, 3, 1, 0, 2, 4, 5, 7, 6]))

    def test_rotated_projective_not_equivalent(self):
        assert not is_equivalent(computational_basis(3), fourier_basis(3))

    def test_equivalence_relation_on_pool(self):
        base = [random_povm(2, 3, s) for s in range(5)] + [random_rank1_povm(2, 3, s) for s in range(5)]
        pool = base + [split_first(p) for p in base]
        R = np.array([[is_equivalent(a, b) for b in pool] for a in pool])
        assert R.diagonal().all()
        assert (R == R.T).all()
        assert ((R.astype(int) @ R.astype(int) > 0) <= R).all()  # transitive closure adds nothing


class TestPredicates:
    def test_basis(self):
        b = computational_basis(3)
        assert is_rank1(b) and is_projective(b)

    def test_sic(self):
        s = sic_d3(0.7)
        assert is_rank1(s) and is_unbiased(s) and is_equiangular(s) and not is_projective(s)
        assert is_sic(s)

    def test_trivial_flags(self):
        t = trivial(3)
        assert not is_rank1(t) and not is_equiangular(t)
        # the identity is a (trivial) projective measurement; a single trace is vacuously unbiased
        assert is_projective(t) and is_unbiased(t)

    def test_mutually_unbiased(self):
        x, z = xz_pair()
        assert are_mutually_unbiased(x, z)
        assert not are_mutually_unbiased(z, z)
        assert are_mutually_unbiased(sic_d3(0.2), trivial(3))

    def test_commute(self):
        x, z = xz_pair()
        assert commute(z, z)
        assert not commute(x, z)

    def test_commuting_simple_rank1_are_identical_projective(self):
        rng = np.random.default_rng(2)
        for seed in range(20):
            d = 2 + seed % 3
            a = random_rank1_povm(d, int(rng.integers(d, d + 3)), seed)
            b = random_rank1_povm(d, int(rng.integers(d, d + 3)), seed + 100)
            for p, q in ((a, b), (a, a), (simplify(a), simplify(a).relabeled(range(len(simplify(a)))[::-1]))):
                p, q = simplify(p), simplify(q)
                if commute(p, q):
                    assert is_projective(p) and is_equivalent(p, q)

    def test_reducible(self):
        assert is_reducible(computational_basis(3))
        assert not is_reducible(sic_d3(0.0))
        assert not is_reducible(trivial(2))

    def test_dimension_mismatch(self):
        with pytest.raises(DimMismatch):
            commute(computational_basis(2), computational_basis(3))


class TestMuFamily:
    def test_cmub_d2(self):
        r = mu_family_check(cmub(2))
        assert r.size == 3 == r.max_size and r.complete and r.all_projective

    def test_two_bases_d3(self):
        r = mu_family_check([computational_basis(3), fourier_basis(3)])
        assert r.all_pairwise_mu and r.within_bound and not r.complete

    def test_no_oversized_family_generated(self):
        for seed in range(30):
            fam = cmub(2) + [random_rank1_povm(2, 2 + seed % 3, seed)]
            r = mu_family_check(fam)
            assert not (r.all_pairwise_mu and r.size > r.max_size)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(0, 6), st.integers(0, 10**6))
def test_rank1_has_at_least_d_elements(d, extra, seed):
    p = simplify(random_rank1_povm(d, d + extra, seed))
    assert len(p) >= d
    if len(p) == d:
        assert is_projective(p)
