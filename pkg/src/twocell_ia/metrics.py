"""Rates, interference residuals, and DoF slope estimation.

Rates are computed analytically from the per-user SINR with per-stream
powers folded into the beamforming gains; no symbol or noise realizations
are ever drawn. The DoF of a scheme is the least-squares slope of ergodic
sum rate against log2(SNR) over a high-SNR window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from multiprocessing import Pool

import numpy as np

from .align import BeamformerSet
from .baselines import scheme_runner, scheme_supported
from .errors import DegenerateRealizationError, InfeasibleConfigError, InvalidInputError
from .scenario import ChannelSet, ScenarioConfig, config_at_snr, generate_channels, other_cell

__all__ = [
    "RateReport",
    "SlopeEstimate",
    "MonteCarloRate",
    "compute_rates",
    "interference_leakage",
    "estimate_dof",
    "ergodic_sum_rate",
    "DOF_WINDOW_DB",
    "MAX_REDRAWS_PER_TRIAL",
]

# Combiners must be unit norm or the noise term would be silently rescaled.
_COMBINER_NORM_TOL = 1e-6

DOF_WINDOW_DB = (40.0, 60.0)
MAX_REDRAWS_PER_TRIAL = 20

_LEAKAGE_SCOPES = ("all", "iui", "ici")


@dataclass(frozen=True)
class RateReport:
    """Per-user and sum rates (bits per channel use) of one realization."""

    per_user_rate: np.ndarray
    sum_rate: float
    snr_db: float


@dataclass(frozen=True)
class SlopeEstimate:
    """High-SNR slope of sum rate vs log2(SNR), i.e. the measured DoF."""

    dof: float
    fit_quality: float
    snr_window_db: tuple[float, float]


@dataclass(frozen=True)
class MonteCarloRate:
    """Ergodic sum-rate estimate at one SNR point."""

    mean: float
    stderr: float
    trials: int
    redraws: int


def compute_rates(channels: ChannelSet, beamformers: BeamformerSet, noise_var: float) -> RateReport:
    """Per-user achievable rates log2(1 + SINR) for a fixed beamformer set.

    The SINR of user k in cell i has desired power
    ``p[i,k] |w^H H_i v[i,k]|^2`` over noise plus in-cell interference from
    the co-cell streams plus cross-cell interference from all of the other
    cell's streams. Streams with zero power contribute nothing anywhere.
    """
    if not noise_var > 0:
        raise InvalidInputError(f"noise_var must be positive, got {noise_var}")
    K = channels.K
    if beamformers.K != K or beamformers.v.shape[2] != channels.M or beamformers.w.shape[2] != channels.N:
        raise InvalidInputError("beamformer dimensions do not match the channel set")
    norms = np.linalg.norm(beamformers.w, axis=2)
    if np.any(np.abs(norms - 1.0) > _COMBINER_NORM_TOL):
        raise InvalidInputError("all combiners must be unit norm (noise term scales with ||w||^2)")

    p = beamformers.stream_power
    per_user = np.zeros((2, K))
    for i in (0, 1):
        j = other_cell(i)
        for k in range(K):
            w = beamformers.w[i, k]
            effective = w.conj() @ channels.bs_to_user(i, i, k)
            cross_row = w.conj() @ channels.bs_to_user(j, i, k)
            desired = p[i, k] * abs(effective @ beamformers.v[i, k]) ** 2
            iui = sum(
                p[i, kk] * abs(effective @ beamformers.v[i, kk]) ** 2
                for kk in range(K)
                if kk != k
            )
            ici = sum(p[j, kk] * abs(cross_row @ beamformers.v[j, kk]) ** 2 for kk in range(K))
            per_user[i, k] = math.log2(1.0 + desired / (noise_var + iui + ici))

    cell_power = float(p.sum(axis=1).max())
    snr_db = 10.0 * math.log10(cell_power / noise_var) if cell_power > 0 else float("-inf")
    return RateReport(per_user_rate=per_user, sum_rate=float(per_user.sum()), snr_db=snr_db)


def interference_leakage(channels: ChannelSet, beamformers: BeamformerSet, scope: str = "all") -> float:
    """Worst interference magnitude |w^H H v| over the constrained stream pairs.

    Receivers are users of active streams; interferers are the other active
    streams. ``scope`` restricts the pairs to in-cell ("iui"), cross-cell
    ("ici"), or both ("all"). Beamformer rows are unit norm, so for O(1)
    channel entries a value at noise-floor level certifies zero forcing.
    """
    if scope not in _LEAKAGE_SCOPES:
        raise InvalidInputError(f"scope must be one of {_LEAKAGE_SCOPES}, got {scope!r}")
    active = beamformers.active
    K = channels.K
    worst = 0.0
    for i in (0, 1):
        for k in range(K):
            if not active[i, k]:
                continue
            w = beamformers.w[i, k]
            for j in (0, 1):
                if scope == "iui" and j != i:
                    continue
                if scope == "ici" and j == i:
                    continue
                row = w.conj() @ channels.bs_to_user(j, i, k)
                for kk in range(K):
                    if (j, kk) == (i, k) or not active[j, kk]:
                        continue
                    worst = max(worst, abs(row @ beamformers.v[j, kk]))
    return worst


def estimate_dof(points, window: tuple[float, float] = DOF_WINDOW_DB) -> SlopeEstimate:
    """OLS slope of sum rate vs log2(SNR) over an SNR window.

    ``points`` is an iterable of (snr_db, sum_rate) pairs; at least two must
    fall inside the closed window. The fit quality is the coefficient of
    determination, defined as 1.0 for an exactly affine (including constant)
    input. The slope is clamped at zero, since a scheme's rate cannot
    decrease with transmit power.
    """
    low, high = float(window[0]), float(window[1])
    if not low < high:
        raise InvalidInputError(f"window must satisfy low < high, got {window}")
    pts = [(float(s), float(r)) for s, r in points]
    selected = [(s, r) for s, r in pts if low <= s <= high]
    if len(selected) < 2:
        raise InvalidInputError(
            f"need at least 2 points in the {low}-{high} dB window, found {len(selected)}"
        )
    snr_db = np.array([s for s, _ in selected])
    rates = np.array([r for _, r in selected])
    x = snr_db * (math.log2(10.0) / 10.0)  # log2 of the linear SNR
    xm, ym = x.mean(), rates.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0.0:
        raise InvalidInputError("window points share a single SNR value; slope undefined")
    slope = float(((x - xm) * (rates - ym)).sum() / sxx)
    residuals = rates - (ym + slope * (x - xm))
    ss_res = float((residuals**2).sum())
    ss_tot = float(((rates - ym) ** 2).sum())
    # Residuals at the round-off floor mean the input is affine to within
    # float precision: the fit is exact, even if the total variance is itself
    # too small for the R^2 ratio to say so (constant inputs included).
    floor = len(rates) * (8.0 * np.finfo(float).eps * max(1.0, float(np.abs(rates).max()))) ** 2
    if ss_res <= floor:
        fit = 1.0
    else:
        fit = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return SlopeEstimate(dof=max(slope, 0.0), fit_quality=fit, snr_window_db=(low, high))


def _trial_sum_rate(args: tuple[ScenarioConfig, str, int]) -> tuple[float, int]:
    """One Monte Carlo trial: sum rate and redraw count (top level for pickling)."""
    cfg, scheme, trial = args
    runner = scheme_runner(scheme)
    redraws = 0
    for attempt in range(MAX_REDRAWS_PER_TRIAL + 1):
        channels = generate_channels(cfg, trial, attempt=attempt)
        try:
            bf = runner(channels, cfg)
            return compute_rates(channels, bf, cfg.noise_var).sum_rate, redraws
        except DegenerateRealizationError:
            redraws += 1
    raise DegenerateRealizationError(
        f"trial {trial} still degenerate after {MAX_REDRAWS_PER_TRIAL} redraws"
    )


def ergodic_sum_rate(
    cfg: ScenarioConfig, scheme: str, snr_db: float, workers: int = 1
) -> MonteCarloRate:
    """Monte Carlo mean sum rate over ``cfg.trials`` independent realizations.

    Deterministic given the seed: per-trial substreams depend only on
    (seed, trial_index, attempt) and the reduction runs in trial order, so
    the result is bit-identical for any ``workers`` count. Degenerate
    realizations are redrawn and counted.
    """
    support = scheme_supported(scheme, cfg.M, cfg.N, cfg.K)
    if not support:
        raise InfeasibleConfigError(
            f"scheme {scheme!r} unsupported at (M, N, K) = {(cfg.M, cfg.N, cfg.K)}: {support.reason}"
        )
    cfg_at = config_at_snr(cfg, snr_db)
    jobs = [(cfg_at, scheme, t) for t in range(cfg.trials)]
    if workers <= 1:
        results = [_trial_sum_rate(job) for job in jobs]
    else:
        with Pool(processes=workers) as pool:
            results = pool.map(_trial_sum_rate, jobs)
    values = np.array([r for r, _ in results])
    redraws = sum(n for _, n in results)
    mean = float(values.mean())
    stderr = 0.0 if cfg.trials == 1 else float(values.std(ddof=1) / math.sqrt(cfg.trials))
    return MonteCarloRate(mean=mean, stderr=stderr, trials=cfg.trials, redraws=redraws)
