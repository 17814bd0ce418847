import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchmask._kernels import COSINE_EPS
from patchmask.errors import ConfigError, DataError
from patchmask.patch_grid import Image, patchify, pixel_normalize
from patchmask.similarity import (
    FeatureGrid,
    blend,
    cosine_matrix,
    sincos_position_encoding,
    toy_patch_embedding,
)


def naive_cosine(vectors):
    """Double-loop oracle for the epsilon-guarded cosine."""
    n = vectors.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            num = float(np.dot(vectors[i], vectors[j]))
            den = float(np.linalg.norm(vectors[i]) * np.linalg.norm(vectors[j])) + COSINE_EPS
            out[i, j] = num / den
    return out


def features(vectors):
    vectors = np.asarray(vectors, dtype=np.float64)
    return FeatureGrid(rows=1, cols=vectors.shape[0], features=vectors)


class TestCosineMatrix:
    def test_identical_patches(self):
        sim = cosine_matrix(features([[1.0, 2.0], [1.0, 2.0]]))
        assert abs(sim[0, 1] - 1.0) < 1e-6

    def test_orthogonal_patches(self):
        sim = cosine_matrix(features([[1.0, 0.0], [0.0, 1.0]]))
        assert sim[0, 1] == 0.0

    def test_hand_computed_pairs(self):
        sim = cosine_matrix(features([[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]]))
        assert abs(sim[0, 1]) < 1e-6
        assert abs(sim[0, 2] + 1.0) < 1e-6

    def test_zero_vector_scores_zero_everywhere(self):
        sim = cosine_matrix(features([[0.0, 0.0], [1.0, 2.0]]))
        assert sim[0, 0] == 0.0
        assert sim[0, 1] == 0.0
        assert sim[1, 0] == 0.0

    def test_matches_naive_oracle(self, rng):
        for length in range(4, 17):
            vectors = rng.standard_normal((length, 6))
            np.testing.assert_allclose(
                cosine_matrix(features(vectors)), naive_cosine(vectors), atol=1e-9
            )

    def test_well_formed(self, rng):
        grid = pixel_normalize(patchify(Image(data=rng.random((32, 32, 3))), 8))
        sim = cosine_matrix(grid)
        assert np.abs(sim - sim.T).max() <= 1e-6
        assert sim.min() >= -1.0 - 1e-6 and sim.max() <= 1.0 + 1e-6
        np.testing.assert_allclose(np.diagonal(sim), 1.0, atol=1e-6)

    def test_scale_invariance(self, rng):
        vectors = rng.standard_normal((10, 8))
        base = cosine_matrix(features(vectors))
        scaled = cosine_matrix(features(vectors * 37.5))
        np.testing.assert_allclose(scaled, base, atol=1e-6)

    def test_requires_normalized_patch_grid(self, rng):
        grid = patchify(Image(data=rng.random((8, 8, 1))), 4)
        with pytest.raises(DataError):
            cosine_matrix(grid)


class TestBlend:
    def test_endpoints_exact(self, rng):
        rgb = rng.standard_normal((5, 5))
        emb = rng.standard_normal((5, 5))
        np.testing.assert_array_equal(blend(rgb, emb, 1.0), rgb)
        np.testing.assert_array_equal(blend(rgb, emb, 0.0), emb)

    def test_midpoint_arithmetic(self):
        rgb = np.array([[0.8]])
        emb = np.array([[0.4]])
        assert blend(rgb, emb, 0.5)[0, 0] == pytest.approx(0.6, abs=1e-12)

    def test_size_mismatch(self):
        with pytest.raises(DataError):
            blend(np.zeros((3, 3)), np.zeros((4, 4)), 0.5)

    def test_alpha_out_of_range(self):
        with pytest.raises(ConfigError):
            blend(np.zeros((2, 2)), np.zeros((2, 2)), 1.5)

    @given(
        a1=st.floats(min_value=0.0, max_value=1.0),
        a2=st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_alpha(self, a1, a2):
        # moving alpha toward 1 moves each entry linearly toward the rgb value
        rgb = np.array([[0.9, -0.2], [-0.2, 0.9]])
        emb = np.array([[0.1, 0.4], [0.4, 0.1]])
        lo, hi = min(a1, a2), max(a1, a2)
        gap_lo = np.abs(blend(rgb, emb, lo) - rgb)
        gap_hi = np.abs(blend(rgb, emb, hi) - rgb)
        assert (gap_hi <= gap_lo + 1e-12).all()


class TestToyPatchEmbedding:
    def test_deterministic(self, rng):
        grid = patchify(Image(data=rng.random((16, 16, 3))), 8)
        first = toy_patch_embedding(grid, projection_seed=9, dim=16)
        second = toy_patch_embedding(grid, projection_seed=9, dim=16)
        np.testing.assert_array_equal(first.features, second.features)

    def test_zero_grid_gives_position_codes(self):
        grid = patchify(Image(data=np.zeros((16, 16, 1))), 8)
        embedded = toy_patch_embedding(grid, projection_seed=3, dim=16)
        np.testing.assert_array_equal(
            embedded.features, sincos_position_encoding(2, 2, 16)
        )

    def test_locality_of_single_patch_change(self, rng):
        data = rng.random((16, 16, 3))
        other = data.copy()
        other[8:, 8:] = rng.random((8, 8, 3))  # patch index 3 of a 2x2 grid
        a = toy_patch_embedding(patchify(Image(data=data), 8), 4, dim=16)
        b = toy_patch_embedding(patchify(Image(data=other), 8), 4, dim=16)
        diff = np.abs(a.features - b.features).sum(axis=1)
        assert diff[3] > 0.0
        np.testing.assert_array_equal(diff[:3], 0.0)

    def test_position_dim_must_divide(self, rng):
        grid = patchify(Image(data=rng.random((8, 8, 1))), 4)
        with pytest.raises(ConfigError):
            toy_patch_embedding(grid, 0, dim=10)
