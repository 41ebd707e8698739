import numpy as np
import pytest

from pointint.errors import NotPositiveDefinite, SingularInput
from pointint.gaussian import (QuadraticForm, krein_identity, moment_check_mc,
                               random_quadratic_form,
                               schur_partition_identity)


class TestQuadraticForm:
    def test_kind_inferred(self):
        q = QuadraticForm(np.eye(2), np.eye(3), np.zeros((2, 3)))
        assert q.kind == "real"
        qc = QuadraticForm(np.eye(2) + 0j, np.eye(3), np.zeros((2, 3)))
        assert qc.kind == "complex"

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            QuadraticForm(np.array([[1.0, 0.3], [0.2, 1.0]]), np.eye(2),
                          np.zeros((2, 2)))

    def test_non_hermitian_complex_rejected(self):
        with pytest.raises(ValueError):
            QuadraticForm(np.array([[1.0, 1j], [1j, 1.0]]), np.eye(2),
                          np.zeros((2, 2)))

    def test_singular_block_rejected(self):
        with pytest.raises(SingularInput):
            QuadraticForm(np.zeros((2, 2)), np.eye(2), np.zeros((2, 2)))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            QuadraticForm(np.eye(2), np.eye(2), np.zeros((3, 2)))


class TestSchurIdentity:
    def test_uncoupled_case(self):
        q = QuadraticForm(2.0 * np.eye(3), 3.0 * np.eye(2), np.zeros((3, 2)))
        assert schur_partition_identity(q) < 1e-12

    def test_scalar_example(self):
        q = QuadraticForm(np.array([[2.0]]), np.array([[3.0]]), np.array([[1.0]]))
        assert np.linalg.det(q.block()) == pytest.approx(5.0)
        assert schur_partition_identity(q) < 1e-13

    @pytest.mark.parametrize("kind", ["real", "complex"])
    @pytest.mark.parametrize("definite", [True, False])
    def test_random_instances(self, kind, definite):
        rng = np.random.default_rng(hash((kind, definite)) % 2**32)
        for _ in range(25):
            q = random_quadratic_form(rng, 5, 3, kind=kind, definite=definite)
            scale = abs(np.linalg.det(q.block())) + 1.0
            assert schur_partition_identity(q) < 1e-10 * scale


class TestKreinIdentity:
    def test_scalar_example(self):
        q = QuadraticForm(np.array([[2.0]]), np.array([[3.0]]), np.array([[1.0]]))
        lhs, rhs = krein_identity(q, 0, 0)
        assert lhs == pytest.approx(0.6)
        assert rhs == pytest.approx(0.6)

    def test_uncoupled_reduces_to_inverse(self):
        a = np.array([[2.0, 0.4], [0.4, 1.5]])
        q = QuadraticForm(a, np.eye(2), np.zeros((2, 2)))
        a_inv = np.linalg.inv(a)
        for i in range(2):
            for j in range(2):
                lhs, rhs = krein_identity(q, i, j)
                assert lhs == pytest.approx(a_inv[i, j])
                assert rhs == pytest.approx(a_inv[i, j])

    @pytest.mark.parametrize("kind", ["real", "complex"])
    def test_random_instances(self, kind):
        rng = np.random.default_rng(5 if kind == "real" else 6)
        for _ in range(25):
            m, n = rng.integers(1, 9), rng.integers(1, 9)
            q = random_quadratic_form(rng, int(m), int(n), kind=kind)
            i, j = rng.integers(0, m), rng.integers(0, n) % m
            lhs, rhs = krein_identity(q, int(i), int(j))
            assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


class TestComplexReduction:
    def test_complex_identities_reduce_to_real(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            q_real = random_quadratic_form(rng, 3, 2, kind="real")
            q_complex = QuadraticForm(q_real.a.astype(complex),
                                      q_real.b.astype(complex),
                                      q_real.c.astype(complex), kind="complex")
            assert schur_partition_identity(q_complex) == pytest.approx(
                schur_partition_identity(q_real), abs=1e-12 * (1 + abs(
                    np.linalg.det(q_real.block()))))
            lr, rr = krein_identity(q_real, 0, 1)
            lc, rc = krein_identity(q_complex, 0, 1)
            assert lc == pytest.approx(lr, abs=1e-12)
            assert rc == pytest.approx(rr, abs=1e-12)


class TestMonteCarlo:
    def test_unit_gaussian_variance(self):
        q = QuadraticForm(np.array([[1.0]]), np.array([[1.0]]), np.array([[0.0]]))
        report = moment_check_mc(q, samples=400_000, seed=7)
        first = report.checks[0]
        assert first.estimate.real == pytest.approx(1.0, abs=4 * first.stderr)
        assert report.passed

    def test_coupled_real_case(self):
        rng = np.random.default_rng(40)
        q = random_quadratic_form(rng, 2, 2, kind="real", with_source=True)
        report = moment_check_mc(q, samples=300_000, seed=11)
        assert report.passed, [c.name for c in report.failures()]

    def test_coupled_complex_case(self):
        rng = np.random.default_rng(41)
        q = random_quadratic_form(rng, 2, 2, kind="complex", with_source=True)
        report = moment_check_mc(q, samples=300_000, seed=12)
        assert report.passed, [c.name for c in report.failures()]

    def test_sourced_moment_formula(self):
        # mean shift A^-1 J enters the second moment as an outer product
        a = np.array([[1.5, 0.2], [0.2, 1.0]])
        j = np.array([0.7, -0.4])
        q = QuadraticForm(a, np.eye(1), np.zeros((2, 1)), j)
        report = moment_check_mc(q, samples=400_000, seed=3)
        sourced = [c for c in report.checks if c.name.startswith("sourced")]
        shift = np.linalg.solve(a, j)
        expected = np.linalg.inv(a) + np.outer(shift, shift)
        for check, target in zip(sourced, expected.ravel()):
            assert check.exact == pytest.approx(target)
            assert check.passed

    def test_seed_reproducibility(self):
        q = QuadraticForm(np.array([[1.0]]), np.array([[1.0]]), np.array([[0.3]]))
        r1 = moment_check_mc(q, samples=50_000, seed=5)
        r2 = moment_check_mc(q, samples=50_000, seed=5)
        for c1, c2 in zip(r1.checks, r2.checks):
            assert c1.estimate == c2.estimate
        assert r1.seed == 5

    def test_not_positive_definite_rejected(self):
        a = np.array([[1.0, 0.0], [0.0, -1.0]])
        q = QuadraticForm(a, np.eye(1), np.zeros((2, 1)))
        with pytest.raises(NotPositiveDefinite):
            moment_check_mc(q, samples=1000)

    def test_dimension_cap(self):
        q = QuadraticForm(np.eye(5), np.eye(1), np.zeros((5, 1)))
        with pytest.raises(ValueError):
            moment_check_mc(q, samples=1000)
