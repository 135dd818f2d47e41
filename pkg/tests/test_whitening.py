import numpy as np
import pytest

from sopool.whitening import apply_zca, fit_zca, subsample_rows


def sample_with_exact_covariance(cov, n, dim, seed=0):
    """Zero-mean sample whose population covariance equals ``cov`` exactly."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, dim))
    x -= x.mean(axis=0)
    # whiten empirically, then color with the target covariance
    c = (x.T @ x) / n
    evals, evecs = np.linalg.eigh(c)
    x = x @ (evecs * evals**-0.5) @ evecs.T
    evals, evecs = np.linalg.eigh(cov)
    return x @ (evecs * np.sqrt(evals)) @ evecs.T


class TestFit:
    def test_identity_covariance_gives_identity(self):
        x = sample_with_exact_covariance(np.eye(3), 50, 3)
        t = fit_zca(x, eps_zca=0.0)
        assert np.allclose(t.matrix, np.eye(3), atol=1e-8)

    def test_diagonal_toy_closed_form(self):
        # C = diag(4, 1), eps 0 -> M = diag(0.5, 1)
        x = sample_with_exact_covariance(np.diag([4.0, 1.0]), 40, 2)
        t = fit_zca(x, eps_zca=0.0)
        assert np.allclose(t.matrix, np.diag([0.5, 1.0]), atol=1e-8)

    def test_regularized_spectrum(self):
        # eigenvalues of M are (lambda_i + eps)^(-1/2) of C's eigenvalues
        rng = np.random.default_rng(5)
        x = rng.normal(size=(200, 4))
        eps = 0.1
        t = fit_zca(x, eps_zca=eps)
        xc = x - x.mean(axis=0)
        cov_evals = np.linalg.eigvalsh((xc.T @ xc) / x.shape[0])
        m_evals = np.linalg.eigvalsh(t.matrix)
        assert np.allclose(np.sort(m_evals), np.sort((cov_evals + eps) ** -0.5), atol=1e-10)

    def test_symmetric_and_positive_definite(self):
        rng = np.random.default_rng(6)
        t = fit_zca(rng.normal(size=(100, 9)), eps_zca=0.1)
        assert np.max(np.abs(t.matrix - t.matrix.T)) <= 1e-10
        assert np.linalg.eigvalsh(t.matrix)[0] > 0

    def test_whitens_the_fitting_sample(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(500, 6)) @ rng.normal(size=(6, 6))
        t = fit_zca(x, eps_zca=1e-10)
        w = apply_zca(t, x)
        cov = (w.T @ w) / w.shape[0]
        rel = np.linalg.norm(cov - np.eye(6)) / np.linalg.norm(np.eye(6))
        assert rel < 1e-6

    def test_whitened_sample_mean_near_zero(self):
        rng = np.random.default_rng(8)
        x = rng.uniform(size=(300, 5)) + 3.0
        t = fit_zca(x, eps_zca=0.1)
        assert np.max(np.abs(apply_zca(t, x).mean(axis=0))) <= 1e-9

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(80, 7))
        a = fit_zca(x, 0.05)
        b = fit_zca(x, 0.05)
        assert np.array_equal(a.matrix, b.matrix)
        assert np.array_equal(a.mean, b.mean)

    def test_too_few_patches(self):
        with pytest.raises(ValueError, match="at least"):
            fit_zca(np.zeros((5, 9)), 0.1)


class TestApply:
    def test_mean_maps_to_zero(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(50, 4))
        t = fit_zca(x, 0.1)
        assert np.allclose(apply_zca(t, t.mean[None, :]), 0.0, atol=1e-12)

    def test_identity_transform_passthrough(self):
        from sopool.whitening import ZcaTransform

        t = ZcaTransform(mean=np.zeros(3), matrix=np.eye(3), eps_zca=0.0)
        x = np.arange(6.0).reshape(2, 3)
        assert np.array_equal(apply_zca(t, x), x)

    def test_toy_diagonal_application(self):
        from sopool.whitening import ZcaTransform

        t = ZcaTransform(mean=np.zeros(2), matrix=np.diag([0.5, 1.0]), eps_zca=0.0)
        assert np.allclose(apply_zca(t, np.array([[2.0, 0.0]])), [[1.0, 0.0]])

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(11)
        t = fit_zca(rng.normal(size=(20, 4)), 0.1)
        with pytest.raises(ValueError, match="dimension"):
            apply_zca(t, np.zeros((3, 5)))


class TestSubsample:
    def test_noop_when_small(self):
        x = np.arange(12.0).reshape(4, 3)
        assert subsample_rows(x, 10, seed=1) is x

    def test_deterministic_and_bounded(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(1000, 3))
        a = subsample_rows(x, 100, seed=3)
        b = subsample_rows(x, 100, seed=3)
        assert a.shape == (100, 3)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, subsample_rows(x, 100, seed=4))
