"""Reference schemes for the sum-rate comparison.

``run_coordinated_zf`` and ``run_subspace_ia_proxy`` are documented
stand-ins that hit the DoF targets used in the comparison (K+1 and 2(K-1)
on the (K+1, K, K) setup); they are not reconstructions of any specific
published design. ``run_percell_zf`` is a control that nulls only in-cell
interference and therefore saturates at high SNR.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .align import (
    BeamformerSet,
    FeasibilityResult,
    check_feasibility,
    effective_row,
    null_space_basis,
    run_proposed_scheme,
)
from .errors import DegenerateRealizationError, InfeasibleConfigError, InvalidInputError
from .linalg import DEFAULT_TOL, ToleranceConfig, dominant_left_singular_vector, fix_phase
from .scenario import ChannelSet, ScenarioConfig

__all__ = [
    "czf_dof",
    "run_coordinated_zf",
    "run_subspace_ia_proxy",
    "run_percell_zf",
    "SCHEME_NAMES",
    "scheme_runner",
    "scheme_supported",
]


def czf_dof(M: int, N: int, K: int) -> int:
    """Degrees of freedom achieved by coordinated ZF: min(2M, 2KN, max(M, N))."""
    for name, value in (("M", M), ("N", N), ("K", K)):
        if not isinstance(value, (int, np.integer)) or value < 1:
            raise InvalidInputError(f"{name} must be a positive integer, got {value!r}")
    return min(2 * M, 2 * K * N, max(M, N))


def _svd_combiners(channels: ChannelSet) -> np.ndarray:
    """Dominant-left-singular-vector combiner for every user's serving channel."""
    K, N = channels.K, channels.N
    w = np.zeros((2, K, N), dtype=np.complex128)
    for i in (0, 1):
        for k in range(K):
            w[i, k] = dominant_left_singular_vector(channels.bs_to_user(i, i, k))
    return w


def _placeholder_precoders(K: int, M: int) -> np.ndarray:
    """Unit-norm placeholders for streams that are never sent."""
    v = np.zeros((2, K, M), dtype=np.complex128)
    v[..., 0] = 1.0
    return v


def run_coordinated_zf(
    channels: ChannelSet, cfg: ScenarioConfig, tol: ToleranceConfig = DEFAULT_TOL
) -> BeamformerSet:
    """Global-CSI transmit ZF over a fixed K+1-stream active set.

    Requires M = K+1, N = K. Cell 0 serves all K of its users and cell 1
    serves its first user only; each active precoder sits in the null space
    of the K effective rows of the other active streams, which M = K+1
    antennas support with a one-dimensional null space. Each cell splits its
    own power budget equally over its active streams.
    """
    M, N, K = channels.M, channels.N, channels.K
    if M != K + 1 or N != K:
        raise InfeasibleConfigError(f"coordinated ZF comparison requires (K+1, K, K), got {(M, N, K)}")
    active = [(0, k) for k in range(K)] + [(1, 0)]
    w = _svd_combiners(channels)
    v = _placeholder_precoders(K, M)
    for bs, k in active:
        rows = np.vstack(
            [
                effective_row(w[c, u], channels.bs_to_user(bs, c, u))
                for c, u in active
                if (c, u) != (bs, k)
            ]
        )
        basis = null_space_basis(rows, tol)
        if basis.shape[1] == 0:
            raise DegenerateRealizationError("coordinated-ZF constraint stack lost its null space")
        v[bs, k] = basis[:, 0]
    stream_power = np.zeros((2, K))
    stream_power[0, :] = cfg.power_P / K
    stream_power[1, 0] = cfg.power_P
    return BeamformerSet(v=v, w=w, stream_power=stream_power)


def run_subspace_ia_proxy(
    channels: ChannelSet, cfg: ScenarioConfig, tol: ToleranceConfig = DEFAULT_TOL
) -> BeamformerSet:
    """Alignment restricted to K-1 users per cell, serving 2(K-1) streams.

    A DoF-matched proxy: on (K+1, K, K) the reduced setup (K+1, K, K-1) is
    always feasible for the alignment construction, so the same machinery
    yields 2(K-1) interference-free streams. The last user of each cell is
    left silent with placeholder beamformers.
    """
    M, N, K = channels.M, channels.N, channels.K
    if M != K + 1 or N != K:
        raise InfeasibleConfigError(f"subspace-IA proxy requires (K+1, K, K), got {(M, N, K)}")
    if K < 2:
        raise InfeasibleConfigError("subspace-IA proxy requires K >= 2")
    reduced_channels = channels.restrict_users(K - 1)
    reduced_cfg = dataclasses.replace(cfg, K=K - 1)
    core = run_proposed_scheme(reduced_channels, reduced_cfg, tol)

    w = np.zeros((2, K, N), dtype=np.complex128)
    v = _placeholder_precoders(K, M)
    stream_power = np.zeros((2, K))
    w[:, : K - 1] = core.w
    v[:, : K - 1] = core.v
    stream_power[:, : K - 1] = core.stream_power
    for i in (0, 1):
        w[i, K - 1] = dominant_left_singular_vector(channels.bs_to_user(i, i, K - 1))
    return BeamformerSet(v=v, w=w, stream_power=stream_power)


def run_percell_zf(
    channels: ChannelSet, cfg: ScenarioConfig, tol: ToleranceConfig = DEFAULT_TOL
) -> BeamformerSet:
    """Non-cooperative control: each BS nulls only its own cell's IUI.

    Combiners are dominant left singular vectors; each precoder is the
    matched direction projected onto the null space of the other in-cell
    effective rows (requires M >= K). Cross-cell interference is left
    untreated, so the sum rate saturates once it dominates the noise.
    """
    M, N, K = channels.M, channels.N, channels.K
    if M < K:
        raise InfeasibleConfigError(f"per-cell ZF requires M >= K, got {(M, N, K)}")
    w = _svd_combiners(channels)
    v = np.zeros((2, K, M), dtype=np.complex128)
    for i in (0, 1):
        for k in range(K):
            matched = effective_row(w[i, k], channels.bs_to_user(i, i, k)).conj()
            if K == 1:
                d = matched
            else:
                rows = np.vstack(
                    [
                        effective_row(w[i, u], channels.bs_to_user(i, i, u))
                        for u in range(K)
                        if u != k
                    ]
                )
                basis = null_space_basis(rows, tol)
                if basis.shape[1] == 0:
                    raise DegenerateRealizationError("per-cell ZF stack lost its null space")
                d = basis @ (basis.conj().T @ matched)
            norm = float(np.linalg.norm(d))
            if norm < 1e-12:
                raise DegenerateRealizationError("matched direction collapsed inside the ZF null space")
            v[i, k] = fix_phase(d / norm)
    stream_power = np.full((2, K), cfg.power_P / K)
    return BeamformerSet(v=v, w=w, stream_power=stream_power)


SCHEME_NAMES = ("proposed", "czf", "subspace_proxy", "percell_zf")

_RUNNERS = {
    "proposed": run_proposed_scheme,
    "czf": run_coordinated_zf,
    "subspace_proxy": run_subspace_ia_proxy,
    "percell_zf": run_percell_zf,
}


def scheme_runner(name: str):
    """Map a scheme name to its (channels, cfg, tol) -> BeamformerSet runner."""
    try:
        return _RUNNERS[name]
    except KeyError:
        raise InvalidInputError(f"unknown scheme {name!r}; expected one of {SCHEME_NAMES}") from None


def scheme_supported(name: str, M: int, N: int, K: int) -> FeasibilityResult:
    """Whether a scheme's antenna-count preconditions hold, with the reason when not."""
    if name == "proposed":
        return check_feasibility(M, N, K)
    if name == "czf":
        if M == K + 1 and N == K:
            return FeasibilityResult(True, "feasible")
        return FeasibilityResult(False, "requires M = K+1 and N = K")
    if name == "subspace_proxy":
        if M == K + 1 and N == K and K >= 2:
            return FeasibilityResult(True, "feasible")
        return FeasibilityResult(False, "requires M = K+1, N = K, K >= 2")
    if name == "percell_zf":
        if M >= K:
            return FeasibilityResult(True, "feasible")
        return FeasibilityResult(False, "requires M >= K")
    raise InvalidInputError(f"unknown scheme {name!r}; expected one of {SCHEME_NAMES}")
