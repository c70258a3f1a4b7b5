"""Dense complex linear-algebra kernels shared by all beamforming schemes.

Everything here is a pure function of its inputs. Null spaces and ranks are
SVD based with a relative singular-value threshold. Every returned basis
vector carries a fixed phase convention (first significant entry made real
and positive), so independent nodes that compute the same null space from
the same floating-point input agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "null_space_basis",
    "numeric_rank",
    "collinearity_angle",
    "project_residual",
    "fix_phase",
    "dominant_left_singular_vector",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numeric thresholds used throughout the package.

    ``rank_tol`` is relative to the largest singular value of the matrix at
    hand; ``align_tol`` bounds acceptable interference residuals and
    collinearity angles. Both are dimensionless and must lie in (0, 1).
    """

    rank_tol: float = 1e-10
    align_tol: float = 1e-8

    def __post_init__(self) -> None:
        if not 0.0 < self.rank_tol < 1.0:
            raise InvalidInputError(f"rank_tol must be in (0, 1), got {self.rank_tol}")
        if not 0.0 < self.align_tol < 1.0:
            raise InvalidInputError(f"align_tol must be in (0, 1), got {self.align_tol}")


DEFAULT_TOL = ToleranceConfig()

# Relative magnitude (w.r.t. the largest entry) above which an entry counts
# as "significant" for the phase convention.
_PHASE_FLOOR = 1e-8


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a finite 2-D complex128 array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must be 2-D with positive dimensions, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def as_complex_vector(v, name: str = "vector") -> np.ndarray:
    """Validate and convert to a finite 1-D complex128 array."""
    arr = np.asarray(v, dtype=np.complex128).ravel()
    if arr.size < 1:
        raise InvalidInputError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate a complex vector so its first significant entry is real positive.

    The result spans the same direction as the input. A zero vector is
    returned unchanged. This is the canonical representative used whenever a
    vector is only defined up to a complex scalar, which is what lets
    distributed nodes agree on null-space vectors without any extra
    coordination.
    """
    v = np.asarray(v, dtype=np.complex128)
    mags = np.abs(v)
    top = mags.max()
    if top == 0.0:
        return v.copy()
    idx = int(np.argmax(mags > _PHASE_FLOOR * top))
    pivot = v[idx]
    return v * (pivot.conjugate() / abs(pivot))


def numeric_rank(a, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Number of singular values above ``rank_tol`` times the largest one.

    The all-zero matrix has rank 0 by convention.
    """
    arr = as_complex_matrix(a)
    s = np.linalg.svd(arr, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_tol * s[0]))


def null_space_basis(a, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the (numeric) null space of ``a``.

    Parameters
    ----------
    a : array_like, shape (m, n)
        Complex matrix; must be finite.
    tol : ToleranceConfig
        Supplies the relative rank threshold.

    Returns
    -------
    ndarray, shape (n, nullity)
        Columns are orthonormal, ordered by ascending singular value (so the
        column most orthogonal to the row space comes first), each with the
        fixed phase convention applied. ``nullity = n - numeric_rank(a)``;
        a full-rank matrix yields shape ``(n, 0)``.
    """
    arr = as_complex_matrix(a)
    _, s, vh = np.linalg.svd(arr)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(s > tol.rank_tol * s[0]))
    # vh rows beyond `rank` span the null space, in descending singular-value
    # order; reverse for ascending order before transposing to columns.
    basis = vh[rank:][::-1].conj().T
    for j in range(basis.shape[1]):
        basis[:, j] = fix_phase(basis[:, j])
    return basis


def collinearity_angle(u, v) -> float:
    """Principal angle in [0, pi/2] between the lines spanned by two vectors.

    Equals ``arccos(|u^H v| / (||u|| ||v||))``: zero exactly when the vectors
    are complex scalar multiples of each other, pi/2 when orthogonal. The
    result is invariant to rescaling either argument by any nonzero complex
    scalar and symmetric in its arguments.

    Evaluated as ``atan2`` of the orthogonal and parallel components rather
    than a bare arccos, which cannot resolve angles below ~1e-8 in double
    precision; near-collinear vectors a few ulps apart report an angle at
    round-off level, as they should.
    """
    uu = as_complex_vector(u, "u")
    vv = as_complex_vector(v, "v")
    if uu.shape != vv.shape:
        raise InvalidInputError(f"shape mismatch: {uu.shape} vs {vv.shape}")
    nu = float(np.linalg.norm(uu))
    nv = float(np.linalg.norm(vv))
    if nu == 0.0 or nv == 0.0:
        raise InvalidInputError("collinearity_angle requires nonzero vectors")
    u1 = uu / nu
    v1 = vv / nv
    overlap = np.vdot(u1, v1)
    perp = float(np.linalg.norm(v1 - u1 * overlap))
    return float(np.arctan2(perp, abs(overlap)))


def project_residual(x, basis) -> float:
    """Norm of the component of ``x`` outside ``span(basis)``.

    ``basis`` must have orthonormal columns (as produced by
    :func:`null_space_basis`); a basis with zero columns is allowed and gives
    ``||x||``. Returns 0 (up to round-off) iff ``x`` lies in the span.
    """
    xx = as_complex_vector(x, "x")
    b = np.asarray(basis, dtype=np.complex128)
    if b.ndim != 2:
        raise InvalidInputError(f"basis must be 2-D, got shape {b.shape}")
    if not np.all(np.isfinite(b.real)) or not np.all(np.isfinite(b.imag)):
        raise InvalidInputError("basis contains non-finite entries")
    if b.shape[0] != xx.shape[0]:
        raise InvalidInputError(f"dimension mismatch: x has {xx.shape[0]} entries, basis rows {b.shape[0]}")
    return float(np.linalg.norm(xx - b @ (b.conj().T @ xx)))


def dominant_left_singular_vector(a) -> np.ndarray:
    """Unit-norm left singular vector of the largest singular value, phase fixed."""
    arr = as_complex_matrix(a)
    u, _, _ = np.linalg.svd(arr)
    return fix_phase(u[:, 0])
