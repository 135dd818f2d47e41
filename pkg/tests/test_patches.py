import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sopool.patches import VAR_FLOOR, extract_patches, grid_dims, normalize_patch


def random_image(side, seed=0):
    return np.random.default_rng(seed).uniform(size=(side, side))


class TestExtraction:
    def test_paper_default_geometry(self):
        # 64x64 image, 6x6 patches, stride 1 -> 59x59 grid
        ps = extract_patches(random_image(64), 6, 1)
        assert ps.grid_rows == ps.grid_cols == 59
        assert ps.vectors.shape == (3481, 36)

    def test_whole_image_patch(self):
        img = random_image(6, seed=1)
        ps = extract_patches(img, 6, 1, normalize=False)
        assert ps.vectors.shape == (1, 36)
        assert np.array_equal(ps.vectors[0], img.ravel())

    def test_stride_two_corners(self):
        # d=8, r=6, s=2: four patches anchored at (0,0),(0,2),(2,0),(2,2)
        img = random_image(8, seed=2)
        ps = extract_patches(img, 6, 2, normalize=False)
        assert ps.grid_rows == ps.grid_cols == 2
        anchors = [(0, 0), (0, 2), (2, 0), (2, 2)]
        for row, (top, left) in zip(ps.vectors, anchors):
            assert np.array_equal(row.reshape(6, 6), img[top : top + 6, left : left + 6])

    def test_grid_coords_row_major(self):
        ps = extract_patches(random_image(8), 6, 2)
        assert ps.grid_coords.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]

    def test_gather_reconstruction(self):
        # pre-normalization extraction is a pure gather of original pixels
        img = random_image(10, seed=3)
        ps = extract_patches(img, 4, 2, normalize=False)
        for vec, (gi, gj) in zip(ps.vectors, ps.grid_coords):
            block = vec.reshape(4, 4)
            assert np.array_equal(block, img[gi * 2 : gi * 2 + 4, gj * 2 : gj * 2 + 4])

    def test_patch_too_large(self):
        with pytest.raises(ValueError, match="exceeds"):
            extract_patches(random_image(5), 6, 1)

    def test_bad_stride(self):
        with pytest.raises(ValueError, match="stride"):
            extract_patches(random_image(8), 4, 0)

    @given(d=st.integers(4, 40), r=st.integers(1, 12), s=st.integers(1, 5))
    @settings(max_examples=60, deadline=None)
    def test_patch_count_formula(self, d, r, s):
        if r > d:
            return
        l = (d - r) // s + 1
        ps = extract_patches(np.zeros((d, d)), r, s, normalize=False)
        assert ps.vectors.shape[0] == l * l


class TestNormalization:
    def test_two_element_example(self):
        assert np.allclose(normalize_patch(np.array([1.0, 3.0])), [-1.0, 1.0])

    def test_constant_patch_maps_to_zero(self):
        assert np.array_equal(normalize_patch(np.full(36, 0.7)), np.zeros(36))

    def test_empty_patch_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            normalize_patch(np.array([]))

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=36))
    @settings(max_examples=100, deadline=None)
    def test_zero_mean_unit_std(self, values):
        x = np.array(values)
        out = normalize_patch(x)
        assert abs(out.mean()) < 1e-10
        if x.std() > VAR_FLOOR:
            assert abs(out.std() - 1.0) < 1e-10
        else:
            assert np.array_equal(out, np.zeros_like(out))

    @given(
        st.lists(st.floats(-5, 5), min_size=2, max_size=20),
        st.floats(0.1, 50),
        st.floats(-20, 20),
    )
    @settings(max_examples=100, deadline=None)
    def test_affine_invariance(self, values, a, b):
        x = np.array(values)
        if x.std() <= 1e-4:  # keep away from the variance floor
            return
        assert np.allclose(normalize_patch(a * x + b), normalize_patch(x), atol=1e-9)

    def test_extracted_rows_are_normalized(self):
        ps = extract_patches(random_image(16, seed=4), 5, 3)
        assert np.allclose(ps.vectors.mean(axis=1), 0.0, atol=1e-12)
        stds = ps.vectors.std(axis=1)
        assert np.all((np.abs(stds - 1.0) < 1e-10) | (stds == 0.0))


def test_grid_dims_rectangular():
    assert grid_dims(10, 16, 4, 2) == (4, 7)
