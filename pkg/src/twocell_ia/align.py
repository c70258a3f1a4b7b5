"""The cooperative interference-alignment scheme.

Receive side: for a given interfering BS, the K cross-cell channels it
creates are collapsed onto a single direction by solving one homogeneous
block system whose unknowns are that direction together with the K receive
combiners of the victim cell. The system stacks K blocks of the form
``[I_M, ..., -H^H, ...]`` (one per victim user), is ``K*M x (M + K*N)``, and
has a nontrivial null space whenever ``(M + K*N) - K*M >= 1``.

Transmit side: with the cross-cell interference collapsed, each BS only has
to zero-force a compressed K-row constraint set per stream: the K-1 in-cell
effective rows of its other users plus the single aligned cross-cell
direction. That is enough to null all 2K-1 individual interference
constraints, because the K cross-cell rows are collinear by construction,
and it is exactly what ``M = K+1`` transmit antennas can support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateRealizationError,
    InfeasibleConfigError,
    InfeasibleRealizationError,
    InvalidInputError,
)
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    dominant_left_singular_vector,
    fix_phase,
    null_space_basis,
)
from .scenario import ChannelSet, ScenarioConfig, other_cell

__all__ = [
    "FeasibilityResult",
    "AlignmentSolution",
    "BeamformerSet",
    "check_feasibility",
    "alignment_matrix",
    "align_cross_channels",
    "solve_alignment",
    "effective_row",
    "single_user_cross_direction",
    "precoders_from_rows",
    "design_precoders",
    "run_proposed_scheme",
]

# A null-vector segment below this norm cannot be normalized meaningfully;
# such realizations have probability zero and are redrawn by the caller.
MIN_SEGMENT_NORM = 1e-12


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of the antenna-count feasibility test, with the violated bound named."""

    feasible: bool
    reason: str

    def __bool__(self) -> bool:
        return self.feasible


@dataclass(frozen=True)
class AlignmentSolution:
    """Receive-side solution for one interfering BS.

    ``h_ici`` is the unit-norm direction (in C^M) onto which all K effective
    cross-cell channels of BS ``interfering_bs`` collapse; ``combiners`` holds
    the K unit-norm receive beamformers of the *other* cell's users, one per
    row.
    """

    interfering_bs: int
    h_ici: np.ndarray
    combiners: np.ndarray


@dataclass(frozen=True)
class BeamformerSet:
    """Transmit precoders, receive combiners, and per-stream powers for both cells.

    ``v`` has shape (2, K, M) and ``w`` shape (2, K, N); rows are unit norm.
    ``stream_power`` has shape (2, K); a zero entry marks a stream that is
    simply not sent (its beamformer rows are placeholders).
    """

    v: np.ndarray
    w: np.ndarray
    stream_power: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.v, dtype=np.complex128)
        w = np.asarray(self.w, dtype=np.complex128)
        p = np.asarray(self.stream_power, dtype=np.float64)
        if v.ndim != 3 or w.ndim != 3 or v.shape[:2] != w.shape[:2] or v.shape[0] != 2:
            raise InvalidInputError(f"inconsistent beamformer shapes: v {v.shape}, w {w.shape}")
        if p.shape != v.shape[:2]:
            raise InvalidInputError(f"stream_power shape {p.shape} does not match (2, K)")
        for name, arr in (("v", v), ("w", w)):
            if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
                raise InvalidInputError(f"{name} contains non-finite entries")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidInputError("stream_power must be finite and nonnegative")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "stream_power", p)

    @property
    def K(self) -> int:
        return self.v.shape[1]

    @property
    def active(self) -> np.ndarray:
        """Boolean (2, K) mask of streams that actually carry power."""
        return self.stream_power > 0


def check_feasibility(M: int, N: int, K: int) -> FeasibilityResult:
    """Test whether (M, N, K) supports the alignment construction.

    For K >= 2 the construction needs ``M >= K+1`` (enough transmit antennas
    to escape K zero-forcing constraints per stream) and
    ``(M + K*N) - K*M >= 1`` (a nontrivial null space for the alignment
    system), i.e. ``K+1 <= M <= (K*N - 1) / (K - 1)``. For K = 1 only
    ``M >= 2`` is needed. The result depends on the three counts alone, never
    on channel values.
    """
    for name, value in (("M", M), ("N", N), ("K", K)):
        if not isinstance(value, (int, np.integer)) or value < 1:
            raise InvalidInputError(f"{name} must be a positive integer, got {value!r}")
    if M < K + 1:
        return FeasibilityResult(False, "M < K+1")
    if (M + K * N) - K * M < 1:
        return FeasibilityResult(False, "M > (KN-1)/(K-1)")
    return FeasibilityResult(True, "feasible")


def alignment_matrix(cross_channels: np.ndarray) -> np.ndarray:
    """Build the homogeneous alignment system from the (K, N, M) cross-channel stack.

    Null vectors stack the aligned direction (first M entries) with the K
    combiners (N entries each); the system enforces ``direction = H_k^H w_k``
    for every victim user k.
    """
    cross = np.asarray(cross_channels, dtype=np.complex128)
    if cross.ndim != 3:
        raise InvalidInputError(f"cross_channels must be (K, N, M), got shape {cross.shape}")
    K, N, M = cross.shape
    system = np.zeros((K * M, M + K * N), dtype=np.complex128)
    eye = np.eye(M, dtype=np.complex128)
    for k in range(K):
        rows = slice(k * M, (k + 1) * M)
        system[rows, :M] = eye
        system[rows, M + k * N : M + (k + 1) * N] = -cross[k].conj().T
    return system


def align_cross_channels(
    cross_channels: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """Solve the alignment system for one interfering BS.

    Returns ``(direction, combiners)``: the unit-norm aligned direction and the
    (K, N) array of unit-norm combiners, all with the fixed phase convention.
    When the null space has more than one dimension the vector attached to the
    smallest singular value is selected, keeping the choice deterministic
    across nodes.
    """
    system = alignment_matrix(cross_channels)
    K, N, M = np.asarray(cross_channels).shape
    basis = null_space_basis(system, tol)
    if basis.shape[1] == 0:
        raise InfeasibleRealizationError(
            f"alignment system {system.shape} has no null space at tolerance {tol.rank_tol}"
        )
    x = basis[:, 0]
    segments = [x[:M]] + [x[M + k * N : M + (k + 1) * N] for k in range(K)]
    norms = [float(np.linalg.norm(seg)) for seg in segments]
    if min(norms) < MIN_SEGMENT_NORM:
        raise DegenerateRealizationError(
            f"null-vector segment collapsed (norms {norms}); redraw the channel realization"
        )
    direction = fix_phase(segments[0] / norms[0])
    combiners = np.stack([fix_phase(seg / n) for seg, n in zip(segments[1:], norms[1:])])
    return direction, combiners


def solve_alignment(
    channels: ChannelSet, interfering_bs: int, tol: ToleranceConfig = DEFAULT_TOL
) -> AlignmentSolution:
    """Align the cross-cell interference of one BS at the other cell's users."""
    cross = channels.cross_channels(interfering_bs)
    direction, combiners = align_cross_channels(cross, tol)
    return AlignmentSolution(interfering_bs=interfering_bs, h_ici=direction, combiners=combiners)


def effective_row(combiner: np.ndarray, channel: np.ndarray) -> np.ndarray:
    """Effective 1 x M channel row after receive combining: w^H H."""
    return np.asarray(combiner).conj() @ np.asarray(channel)


def single_user_cross_direction(cross_channel: np.ndarray, combiner: np.ndarray) -> np.ndarray:
    """Unit-norm combined cross-cell direction for the K = 1 corner (no alignment needed)."""
    d = np.asarray(cross_channel).conj().T @ np.asarray(combiner)
    n = float(np.linalg.norm(d))
    if n < MIN_SEGMENT_NORM:
        raise DegenerateRealizationError("combined cross-cell channel collapsed to zero")
    return fix_phase(d / n)


def precoders_from_rows(
    serving_rows: np.ndarray, blocked_direction: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL
) -> np.ndarray:
    """Unit-norm ZF precoders from the compressed constraint set.

    ``serving_rows`` is the (K, M) stack of in-cell effective rows
    ``w_k^H H``; the precoder of stream k lives in the null space of the
    other K-1 rows stacked with ``blocked_direction^H``. This is the
    information a BS actually receives over the feedback link, so the same
    routine serves both the centralized solver and the message-level
    simulation.
    """
    rows = np.asarray(serving_rows, dtype=np.complex128)
    if rows.ndim != 2:
        raise InvalidInputError(f"serving_rows must be (K, M), got shape {rows.shape}")
    blocked = np.asarray(blocked_direction, dtype=np.complex128).ravel()
    if blocked.shape[0] != rows.shape[1]:
        raise InvalidInputError(
            f"blocked direction length {blocked.shape[0]} does not match M = {rows.shape[1]}"
        )
    K, M = rows.shape
    blocked_row = blocked.conj()[None, :]
    out = np.zeros((K, M), dtype=np.complex128)
    for k in range(K):
        stack = np.vstack([rows[:k], rows[k + 1 :], blocked_row])
        basis = null_space_basis(stack, tol)
        if basis.shape[1] == 0:
            raise DegenerateRealizationError(
                f"zero-forcing stack for stream {k} has full column rank; redraw"
            )
        out[k] = basis[:, 0]
    return out


def design_precoders(
    channels: ChannelSet,
    cell: int,
    combiners: np.ndarray,
    blocked_direction: np.ndarray,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> np.ndarray:
    """Precoders for one BS given its own users' combiners and the direction to avoid.

    ``blocked_direction`` must be the aligned direction of *this* BS's
    outgoing cross-cell interference (the solution in which this BS is the
    interferer); the other cell handles the reverse direction symmetrically.
    """
    if cell not in (0, 1):
        raise InvalidInputError(f"cell index must be 0 or 1, got {cell!r}")
    combiners = np.asarray(combiners, dtype=np.complex128)
    rows = np.vstack(
        [effective_row(combiners[k], channels.bs_to_user(cell, cell, k)) for k in range(channels.K)]
    )
    return precoders_from_rows(rows, blocked_direction, tol)


def run_proposed_scheme(
    channels: ChannelSet, cfg: ScenarioConfig, tol: ToleranceConfig = DEFAULT_TOL
) -> BeamformerSet:
    """Full transmit/receive design for one channel realization.

    Solves the alignment for both interfering directions, then zero-forces
    the compressed constraint sets at both BSs. Transmit power is split
    equally over the K streams of each cell. K = 1 degenerates to plain
    two-cell ZF with matched combining (no in-cell interference exists and
    there is nothing to align); that corner sits outside the 2K
    degrees-of-freedom construction but is accepted for completeness.
    """
    M, N, K = channels.M, channels.N, channels.K
    if (M, N, K) != (cfg.M, cfg.N, cfg.K):
        raise InvalidInputError(
            f"channel dimensions {(M, N, K)} do not match config {(cfg.M, cfg.N, cfg.K)}"
        )
    feasibility = check_feasibility(M, N, K)
    if not feasibility:
        raise InfeasibleConfigError(f"(M, N, K) = {(M, N, K)} infeasible: {feasibility.reason}")

    w = np.zeros((2, K, N), dtype=np.complex128)
    blocked: list[np.ndarray] = [np.zeros(M, dtype=np.complex128)] * 2
    if K == 1:
        for i in (0, 1):
            w[i, 0] = dominant_left_singular_vector(channels.bs_to_user(i, i, 0))
        for i in (0, 1):
            victim = other_cell(i)
            blocked[i] = single_user_cross_direction(channels.bs_to_user(i, victim, 0), w[victim, 0])
    else:
        for i in (0, 1):
            solution = solve_alignment(channels, i, tol)
            w[other_cell(i)] = solution.combiners
            blocked[i] = solution.h_ici

    v = np.zeros((2, K, M), dtype=np.complex128)
    for i in (0, 1):
        v[i] = design_precoders(channels, i, w[i], blocked[i], tol)

    stream_power = np.full((2, K), cfg.power_P / K)
    return BeamformerSet(v=v, w=w, stream_power=stream_power)
