"""Input validation helpers and the error types shared across the package."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt


class DimensionMismatchError(ValueError):
    """Operands that must share a trailing dimension do not."""


class ReferencePointError(ValueError):
    """A front point fails to strictly dominate the reference point."""


class DegenerateDirectionError(ValueError):
    """An objective vector coincides with the reference point."""


class ConfigError(ValueError):
    """A run configuration file is malformed or contains unknown keys."""


class SnapshotFormatError(ValueError):
    """A model snapshot file is malformed or has an unsupported version."""


def as_vector(y, name: str = "y") -> npt.NDArray[np.float64]:
    """Coerce to a finite 1-D float64 array."""
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_matrix(Y, name: str = "Y", min_rows: int = 0) -> npt.NDArray[np.float64]:
    """Coerce to a finite 2-D float64 array with at least ``min_rows`` rows."""
    arr = np.asarray(Y, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < min_rows:
        raise ValueError(f"{name} needs >= {min_rows} rows, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_same_dim(a: np.ndarray, b: np.ndarray, names: str = "operands") -> None:
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatchError(
            f"{names} disagree on dimension: {a.shape[-1]} vs {b.shape[-1]}"
        )


def as_unit_matrix(U, name: str = "U", atol: float = 1e-6) -> npt.NDArray[np.float64]:
    """Coerce to a 2-D array of unit-norm rows."""
    arr = as_matrix(U, name=name)
    norms = np.linalg.norm(arr, axis=1)
    if not np.allclose(norms, 1.0, atol=atol):
        bad = int(np.argmax(np.abs(norms - 1.0)))
        raise ValueError(f"{name}[{bad}] has norm {norms[bad]:.6f}, expected 1")
    return arr
