"""Input validation helpers shared by the estimators and numeric routines."""

from __future__ import annotations

import numpy as np

from .errors import SingleClassError


def check_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array with at least two rows, all finite."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {X.shape}")
    if X.shape[0] < 2:
        raise ValueError(f"{name} needs at least two rows, got {X.shape[0]}")
    if X.shape[1] < 1:
        raise ValueError(f"{name} needs at least one column")
    if not np.isfinite(X).all():
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_vector(x, name: str = "x") -> np.ndarray:
    """Coerce to a 1-D float64 array, all finite."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be a 1-D array, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError(f"{name} contains non-finite values")
    return x


def check_signed_targets(y, n_rows: int | None = None, *, require_both: bool = True) -> np.ndarray:
    """Validate a target vector whose entries are exactly -1 or +1."""
    y = check_vector(y, "y")
    if n_rows is not None and y.shape[0] != n_rows:
        raise ValueError(f"y has {y.shape[0]} entries, expected {n_rows}")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("targets must be -1 or +1")
    if require_both and (y.min() == y.max()):
        raise SingleClassError("training targets contain a single class")
    return y


def add_bias_column(X: np.ndarray) -> np.ndarray:
    """Prepend the constant input column (all ones)."""
    X = np.asarray(X, dtype=float)
    return np.hstack([np.ones((X.shape[0], 1)), X])
