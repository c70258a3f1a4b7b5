"""Scenario configuration and random channel generation.

Two base stations with ``M`` antennas each serve ``K`` single-stream users
with ``N`` antennas per user. Every BS-to-user link is an ``N x M`` matrix
with i.i.d. circularly-symmetric complex Gaussian entries of unit variance,
redrawn independently per Monte Carlo trial (frequency-flat block fading).

Per-trial substreams are derived by seeding the generator with the full
``(seed, trial_index, attempt)`` tuple, so trials are reproducible and
independent of execution order or worker count.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "ScenarioConfig",
    "ChannelSet",
    "generate_channels",
    "snr_to_power",
    "config_at_snr",
    "other_cell",
]

_MAX_SEED = 2**64


@dataclass(frozen=True)
class ScenarioConfig:
    """Static description of one simulated setup.

    ``power_P`` is the total transmit power per BS and ``noise_var`` the noise
    variance per receive-antenna entry, both linear. ``snr_grid_db`` lists the
    SNR points (P / noise_var, in dB) swept by the harness.
    """

    M: int
    N: int
    K: int
    power_P: float = 1.0
    noise_var: float = 1.0
    snr_grid_db: tuple[float, ...] = (0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0)
    trials: int = 500
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("M", "N", "K"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise InvalidInputError(f"{name} must be a positive integer, got {value!r}")
        if not self.power_P > 0:
            raise InvalidInputError(f"power_P must be positive, got {self.power_P}")
        if not self.noise_var > 0:
            raise InvalidInputError(f"noise_var must be positive, got {self.noise_var}")
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise InvalidInputError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < _MAX_SEED:
            raise InvalidInputError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        grid = tuple(float(x) for x in self.snr_grid_db)
        if len(grid) == 0:
            raise InvalidInputError("snr_grid_db must contain at least one point")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidInputError(f"snr_grid_db must be strictly increasing, got {grid}")
        object.__setattr__(self, "snr_grid_db", grid)


@dataclass(frozen=True)
class ChannelSet:
    """All 4K channel matrices of one realization.

    ``h`` has shape ``(2, 2, K, N, M)``: ``h[j, i, k]`` is the ``N x M``
    channel from BS ``j`` to user ``k`` of cell ``i`` (all indices 0-based).
    """

    h: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.h, dtype=np.complex128)
        if arr.ndim != 5 or arr.shape[0] != 2 or arr.shape[1] != 2:
            raise InvalidInputError(f"channel array must have shape (2, 2, K, N, M), got {arr.shape}")
        if min(arr.shape[2:]) < 1:
            raise InvalidInputError(f"channel array has an empty axis: {arr.shape}")
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise InvalidInputError("channel array contains non-finite entries")
        object.__setattr__(self, "h", arr)

    @property
    def K(self) -> int:
        return self.h.shape[2]

    @property
    def N(self) -> int:
        return self.h.shape[3]

    @property
    def M(self) -> int:
        return self.h.shape[4]

    def bs_to_user(self, bs: int, cell: int, user: int) -> np.ndarray:
        """The N x M channel from BS ``bs`` to user ``user`` of cell ``cell``."""
        return self.h[bs, cell, user]

    def cross_channels(self, interfering_bs: int) -> np.ndarray:
        """The (K, N, M) stack of channels from one BS into the other cell's users."""
        return self.h[interfering_bs, other_cell(interfering_bs)]

    def restrict_users(self, count: int) -> "ChannelSet":
        """A view of the same realization keeping only the first ``count`` users per cell."""
        if not 1 <= count <= self.K:
            raise InvalidInputError(f"user count must be in [1, {self.K}], got {count}")
        return ChannelSet(self.h[:, :, :count])


def other_cell(i: int) -> int:
    """The cell index that is not ``i``."""
    if i not in (0, 1):
        raise InvalidInputError(f"cell index must be 0 or 1, got {i!r}")
    return 1 - i


def generate_channels(cfg: ScenarioConfig, trial_index: int, attempt: int = 0) -> ChannelSet:
    """Draw one channel realization, deterministically from (seed, trial_index, attempt).

    Entries are i.i.d. CN(0, 1): real and imaginary parts each Gaussian with
    variance 1/2. ``attempt`` selects a fresh substream when a degenerate
    realization has to be redrawn; plain trials use ``attempt=0``.
    """
    if not isinstance(trial_index, (int, np.integer)) or trial_index < 0:
        raise InvalidInputError(f"trial_index must be a nonnegative integer, got {trial_index!r}")
    if not isinstance(attempt, (int, np.integer)) or attempt < 0:
        raise InvalidInputError(f"attempt must be a nonnegative integer, got {attempt!r}")
    rng = np.random.default_rng([cfg.seed, int(trial_index), int(attempt)])
    z = rng.standard_normal((2, 2, cfg.K, cfg.N, cfg.M, 2))
    return ChannelSet((z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5))


def snr_to_power(snr_db: float) -> tuple[float, float]:
    """Map an SNR point to (power_P, noise_var) with noise normalized to 1."""
    return float(10.0 ** (snr_db / 10.0)), 1.0


def config_at_snr(cfg: ScenarioConfig, snr_db: float) -> ScenarioConfig:
    """Copy of ``cfg`` with power and noise set so P / noise_var hits ``snr_db``."""
    power, noise = snr_to_power(snr_db)
    return dataclasses.replace(cfg, power_P=power, noise_var=noise)
