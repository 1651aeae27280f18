import numpy as np
import pytest

from prunekit import Rng, kernels


@pytest.mark.skipif(not kernels.USING_NUMBA, reason="numba backend not active")
def test_backends_agree():
    rng = Rng(0)
    x = rng.normal((3, 2, 7, 6))
    w = rng.normal((2, 4, 3, 2))
    fwd_np = kernels.conv2d_forward_np(x, w)
    np.testing.assert_allclose(kernels.conv2d_forward_nb(x, w), fwd_np, rtol=1e-12)
    gout = rng.normal(fwd_np.shape)
    np.testing.assert_allclose(kernels.conv2d_grad_w_nb(x, gout),
                               kernels.conv2d_grad_w_np(x, gout), rtol=1e-12)
    np.testing.assert_allclose(kernels.conv2d_grad_x_nb(gout, w),
                               kernels.conv2d_grad_x_np(gout, w), rtol=1e-12)


def test_forward_hand_value():
    x = np.arange(16, dtype=float).reshape(1, 1, 4, 4)
    w = np.zeros((1, 1, 2, 2))
    w[0, 0, 0, 0] = 1.0  # pick out the top-left of each window
    out = kernels.conv2d_forward(x, w)
    np.testing.assert_array_equal(out[0, 0], [[0, 1, 2], [4, 5, 6], [8, 9, 10]])
