"""Dense tensor primitives: masking, sparsity measurement, weight init.

Tensors are plain float64 numpy arrays of rank 1-4, row-major. Masks are
float64 arrays with values in {0, 1}, congruent in shape with the tensor
they guard.
"""

import math

import numpy as np

from .rng import Rng


def check_congruent(w: np.ndarray, m: np.ndarray) -> None:
    if w.shape != m.shape:
        raise ValueError(f"shape mismatch: {w.shape} vs {m.shape}")


def check_mask(m: np.ndarray) -> None:
    """A mask must contain only 0s and 1s."""
    bad = (m != 0) & (m != 1)
    if np.any(bad):
        raise ValueError(f"mask contains non-binary value at flat index {int(np.flatnonzero(bad)[0])}")


def apply_mask(w: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Elementwise w * m: zero where the mask is 0, keep where it is 1."""
    check_congruent(w, m)
    return w * m


def sparsity_of(m: np.ndarray) -> float:
    """Fraction of zero entries, in [0, 1]."""
    return float(np.count_nonzero(m == 0)) / m.size


def fan_in_of(shape) -> int:
    """Input fan for a weight tensor: I for dense [I, O], I*Kx*Ky for conv [I, O, Kx, Ky]."""
    shape = tuple(shape)
    if len(shape) == 4:
        return shape[0] * shape[2] * shape[3]
    return shape[0]


def init_weights(shape, scheme: str = "uniform", rng: Rng | None = None, value: float = 0.0) -> np.ndarray:
    """Build a fresh weight tensor.

    scheme "uniform" draws from +-sqrt(6 / fan_in); scheme "constant"
    fills with `value`. Deterministic given (shape, scheme, rng state).
    """
    shape = tuple(int(s) for s in shape)
    if any(s <= 0 for s in shape):
        raise ValueError(f"invalid shape {shape}: axes must be positive")
    if scheme == "constant":
        return np.full(shape, float(value))
    if scheme == "uniform":
        if rng is None:
            raise ValueError("uniform init requires an rng")
        bound = math.sqrt(6.0 / fan_in_of(shape))
        return rng.uniform(-bound, bound, shape)
    raise ValueError(f"unknown init scheme {scheme!r}")
