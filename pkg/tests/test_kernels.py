import os
import subprocess
import sys

import numpy as np
import pytest

from patchmask import _kernels


numba_missing = _kernels.pairwise_cosine_numba is None


@pytest.mark.skipif(numba_missing, reason="numba path not active")
class TestPathAgreement:
    def test_pairwise_cosine(self, rng):
        vectors = np.ascontiguousarray(rng.standard_normal((50, 24)))
        fast = _kernels.pairwise_cosine_numba(vectors)
        plain = _kernels.pairwise_cosine_numpy(vectors)
        np.testing.assert_allclose(fast, plain, atol=1e-12)

    def test_masked_by_anchors_is_bit_identical(self, rng):
        for _ in range(50):
            sim = _kernels.pairwise_cosine_numpy(rng.standard_normal((30, 6)))
            anchors = rng.choice(30, size=4, replace=False).astype(np.int64)
            threshold = float(rng.uniform(-1.1, 1.1))
            np.testing.assert_array_equal(
                _kernels.masked_by_anchors_numba(sim, anchors, threshold),
                _kernels.masked_by_anchors_numpy(sim, anchors, threshold),
            )

    def test_nearest_centroids(self, rng):
        points = np.ascontiguousarray(rng.standard_normal((60, 5)))
        centroids = np.ascontiguousarray(rng.standard_normal((7, 5)) * 3)
        fast_labels, fast_d = _kernels.nearest_centroids_numba(points, centroids)
        plain_labels, plain_d = _kernels.nearest_centroids_numpy(points, centroids)
        np.testing.assert_array_equal(fast_labels, plain_labels)
        np.testing.assert_allclose(fast_d, plain_d, atol=1e-12)

    def test_centroid_sums(self, rng):
        points = np.ascontiguousarray(rng.standard_normal((60, 5)))
        labels = rng.integers(0, 6, size=60).astype(np.int64)
        fast_s, fast_c = _kernels.centroid_sums_numba(points, labels, 6)
        plain_s, plain_c = _kernels.centroid_sums_numpy(points, labels, 6)
        np.testing.assert_array_equal(fast_c, plain_c)
        np.testing.assert_allclose(fast_s, plain_s, atol=1e-12)


class TestPathSelection:
    def test_env_flag_forces_numpy(self):
        env = dict(os.environ, PATCHMASK_NO_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c", "from patchmask import _kernels; print(_kernels.ACTIVE_IMPL)"],
            capture_output=True, text=True, env=env,
        )
        assert out.returncode == 0
        assert out.stdout.strip() == "numpy"

    def test_numpy_path_produces_same_masks_in_subprocess(self, tmp_path):
        # a full mask run on both paths must write identical bytes
        script = tmp_path / "gen.py"
        script.write_text(
            "import numpy as np, sys\n"
            "from patchmask.cluster_masker import cluster_mask\n"
            "from patchmask._kernels import pairwise_cosine\n"
            "vec = np.random.default_rng(0).standard_normal((40, 12))\n"
            "sim = pairwise_cosine(np.ascontiguousarray(vec))\n"
            "mask = cluster_mask(sim, 0.1, 0.2, np.random.default_rng(1))\n"
            "sys.stdout.write(mask.to_line())\n"
        )
        outputs = []
        for flag in ("0", "1"):
            env = dict(os.environ, PATCHMASK_NO_NUMBA=flag)
            proc = subprocess.run(
                [sys.executable, str(script)], capture_output=True, text=True, env=env
            )
            assert proc.returncode == 0, proc.stderr
            outputs.append(proc.stdout)
        assert outputs[0] == outputs[1]
