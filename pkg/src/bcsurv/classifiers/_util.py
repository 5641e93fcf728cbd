import numpy as np

from ..errors import DimensionMismatch


def as_rows(X, p: int) -> np.ndarray:
    """Coerce one row or a matrix to a 2-D float array with ``p`` columns."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != p:
        raise DimensionMismatch(f"expected rows of length {p}, got shape {X.shape}")
    return X
