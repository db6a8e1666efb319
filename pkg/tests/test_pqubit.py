"""Tests for the P-qubit coefficient matrices and their limit checks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loccverify import (
    choi_distance,
    limiting_choi_2q,
    moment_identity_check,
    multiplier_distance,
    pqubit_apply,
    pqubit_choi_formula,
    pqubit_coefficients,
    pqubit_limit_check,
    pqubit_spec,
    prelimit_coefficients,
    quadrature_coefficients,
)

from conftest import random_density


class TestSpec:
    def test_two_party_zero_counts(self):
        spec = pqubit_spec(2)
        # indices 00, 01, 10, 11; party 1 is the most significant bit
        np.testing.assert_array_equal(np.asarray(spec.zeros), [2, 1, 1, 0])

    def test_joint_zeros_symmetry(self):
        spec = pqubit_spec(3)
        jz = np.asarray(spec.joint_zeros)
        np.testing.assert_array_equal(jz, jz.T)
        assert jz[0, 0] == 3
        assert jz[0, 7] == 0
        # 010 and 011 share zeros at parties 1 and 3 vs party 1 only
        assert jz[2, 3] == 1

    def test_party_bounds(self):
        with pytest.raises(ValueError):
            pqubit_spec(1)
        with pytest.raises(ValueError):
            pqubit_spec(7)


class TestCoefficients:
    def test_two_party_closed_form(self):
        # basis pairs sharing no zero position get coefficient zero; only
        # the all-zeros row couples to the mixed patterns
        s = pqubit_coefficients(2)
        expect = np.array([
            [1.0, 2 / 3, 2 / 3, 0.0],
            [2 / 3, 1.0, 0.0, 0.0],
            [2 / 3, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
        np.testing.assert_allclose(s, expect, atol=1e-12)

    def test_entry_formula(self):
        # S_ij = 2 m_ij / (l_i + l_j) away from the all-ones corner
        for parties in (2, 3, 4):
            spec = pqubit_spec(parties)
            s = pqubit_coefficients(parties)
            d = 2 ** parties
            jz = np.asarray(spec.joint_zeros)
            for i in range(d):
                for j in range(d):
                    li, lj = spec.zeros[i], spec.zeros[j]
                    if li + lj == 0:
                        assert s[i, j] == pytest.approx(1.0)
                    else:
                        assert s[i, j] == pytest.approx(
                            2.0 * jz[i, j] / (li + lj))

    def test_unit_diagonal(self):
        for parties in (2, 3, 5):
            np.testing.assert_allclose(
                np.diagonal(pqubit_coefficients(parties)), 1.0, atol=1e-12)

    @pytest.mark.parametrize("parties", [3, 4, 5])
    def test_party_reduction(self, parties):
        # fixing the last party to |1> recovers the smaller problem
        s = pqubit_coefficients(parties)
        np.testing.assert_allclose(s[1::2, 1::2],
                                   pqubit_coefficients(parties - 1),
                                   atol=1e-12)


class TestApply:
    @pytest.mark.parametrize("parties", [2, 3, 4])
    def test_trace_preserving(self, parties, rng):
        d = 2 ** parties
        for _ in range(5):
            rho = random_density(d, rng)
            out = pqubit_apply(parties, rho)
            assert np.trace(out) == pytest.approx(1.0, abs=1e-12)

    def test_is_hadamard_multiplier(self, rng):
        rho = random_density(4, rng)
        np.testing.assert_allclose(pqubit_apply(2, rho),
                                   pqubit_coefficients(2) * rho, atol=1e-13)

    def test_diagonal_states_fixed(self, rng):
        p = rng.uniform(0.1, 1.0, size=8)
        rho = np.diag(p / p.sum()).astype(complex)
        np.testing.assert_allclose(pqubit_apply(3, rho), rho, atol=1e-13)

    def test_shape_validated(self, rng):
        with pytest.raises(ValueError):
            pqubit_apply(3, random_density(4, rng))


class TestChoiFormula:
    def test_matches_two_qubit_construction(self):
        a = pqubit_choi_formula(2)
        b = limiting_choi_2q()
        assert choi_distance(a, b) <= 1e-9

    @pytest.mark.parametrize("parties", [2, 3, 4])
    def test_psd_unit_trace(self, parties):
        c = pqubit_choi_formula(parties)
        assert np.trace(c.matrix) == pytest.approx(1.0)
        assert np.linalg.eigvalsh(c.matrix)[0] >= -1e-12


class TestQuadratureAgreement:
    def test_moment_identity(self):
        assert moment_identity_check() <= 1e-12

    @pytest.mark.parametrize("parties", [2, 3, 4])
    def test_closed_form_equals_quadrature(self, parties):
        got = quadrature_coefficients(parties)
        np.testing.assert_allclose(got, pqubit_coefficients(parties),
                                   atol=1e-10)


class TestPrelimit:
    def test_coefficients_converge(self):
        target = pqubit_coefficients(3)
        dists = [multiplier_distance(3, prelimit_coefficients(3, nu, 0.5),
                                     target)
                 for nu in (10, 100, 1000)]
        assert dists[0] > dists[1] > dists[2] > 0.0

    def test_prelimit_unit_diagonal(self):
        s = prelimit_coefficients(3, 50, 0.5)
        np.testing.assert_allclose(np.diagonal(s), 1.0, atol=1e-12)

    def test_distance_is_metric_like(self):
        a = prelimit_coefficients(2, 10, 0.5)
        b = pqubit_coefficients(2)
        assert multiplier_distance(2, a, b) == multiplier_distance(2, b, a)
        assert multiplier_distance(2, a, a) == pytest.approx(0.0)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(2, 4), st.integers(1, 40))
    def test_prelimit_entries_in_unit_interval(self, parties, rounds):
        s = prelimit_coefficients(parties, rounds, 0.5)
        assert s.min() >= -1e-12
        assert s.max() <= 1.0 + 1e-12


class TestLimitCheck:
    def test_three_party_report(self):
        rep = pqubit_limit_check(3, [100, 1000])
        assert rep.passed
        assert rep.strictly_decreasing
        assert rep.quadrature_defect <= 1e-10
        assert rep.reduction_defect <= 1e-10
        assert rep.distances[0] == pytest.approx(0.0261238845, abs=1e-9)
        assert rep.distances[1] == pytest.approx(0.0072859532, abs=1e-9)

    def test_party_guard(self):
        with pytest.raises(ValueError):
            pqubit_limit_check(5, [10])
