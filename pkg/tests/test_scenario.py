import dataclasses

import numpy as np
import pytest

from twocell_ia.errors import InvalidInputError
from twocell_ia.scenario import (
    ChannelSet,
    ScenarioConfig,
    config_at_snr,
    generate_channels,
    other_cell,
    snr_to_power,
)


@pytest.fixture
def cfg322():
    return ScenarioConfig(M=3, N=2, K=2, seed=1234)


class TestScenarioConfig:
    def test_defaults_valid(self, cfg322):
        assert cfg322.snr_grid_db[0] == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"M": 0},
            {"N": -1},
            {"K": 0},
            {"power_P": 0.0},
            {"noise_var": -1.0},
            {"trials": 0},
            {"seed": -1},
            {"seed": 2**64},
            {"snr_grid_db": (10.0, 10.0)},
            {"snr_grid_db": (20.0, 10.0)},
            {"snr_grid_db": ()},
        ],
    )
    def test_invalid_configs_rejected(self, kwargs):
        base = dict(M=3, N=2, K=2)
        base.update(kwargs)
        with pytest.raises(InvalidInputError):
            ScenarioConfig(**base)


class TestGenerateChannels:
    def test_dimensions(self, cfg322):
        ch = generate_channels(cfg322, 0)
        assert ch.h.shape == (2, 2, 2, 2, 3)
        assert (ch.M, ch.N, ch.K) == (3, 2, 2)
        for j in (0, 1):
            for i in (0, 1):
                for k in range(2):
                    assert ch.bs_to_user(j, i, k).shape == (2, 3)

    def test_deterministic_per_trial(self, cfg322):
        a = generate_channels(cfg322, 5)
        b = generate_channels(cfg322, 5)
        assert np.array_equal(a.h, b.h)

    def test_distinct_trials_and_attempts_differ(self, cfg322):
        base = generate_channels(cfg322, 0)
        assert not np.array_equal(base.h, generate_channels(cfg322, 1).h)
        assert not np.array_equal(base.h, generate_channels(cfg322, 0, attempt=1).h)

    def test_entry_moments(self):
        # 320 entries per realization at (5,4,4); 320 trials > 1e5 samples
        cfg = ScenarioConfig(M=5, N=4, K=4, seed=7)
        samples = np.concatenate(
            [generate_channels(cfg, t).h.ravel() for t in range(320)]
        )
        assert samples.size >= 100_000
        assert abs(samples.mean()) < 0.02
        assert 0.98 <= samples.var() <= 1.02

    def test_trial_streams_uncorrelated(self, cfg322):
        pairs = [(0, 1), (2, 9), (17, 18), (100, 101), (3, 300)]
        for t1, t2 in pairs:
            z1 = generate_channels(cfg322, t1).h.ravel()
            z2 = generate_channels(cfg322, t2).h.ravel()
            n = z1.size
            z1 = z1 - z1.mean()
            z2 = z2 - z2.mean()
            corr = abs(np.vdot(z1, z2)) / (np.linalg.norm(z1) * np.linalg.norm(z2))
            assert corr < 3.0 / np.sqrt(n)

    def test_no_rank_deficient_draws_in_10k_trials(self, cfg322):
        mats = np.stack(
            [generate_channels(cfg322, t).h.reshape(-1, 2, 3) for t in range(10_000)]
        ).reshape(-1, 2, 3)
        s = np.linalg.svd(mats, compute_uv=False)
        # relative rank threshold per matrix, as in numeric_rank
        assert np.all(s[:, 1] > 1e-10 * s[:, 0])

    def test_trial_index_validation(self, cfg322):
        with pytest.raises(InvalidInputError):
            generate_channels(cfg322, -1)
        with pytest.raises(InvalidInputError):
            generate_channels(cfg322, 0, attempt=-2)


class TestChannelSet:
    def test_cross_channels_view(self, cfg322):
        ch = generate_channels(cfg322, 0)
        assert np.array_equal(ch.cross_channels(0), ch.h[0, 1])
        assert np.array_equal(ch.cross_channels(1), ch.h[1, 0])

    def test_restrict_users(self):
        cfg = ScenarioConfig(M=5, N=4, K=4, seed=3)
        ch = generate_channels(cfg, 0)
        sub = ch.restrict_users(3)
        assert sub.K == 3
        assert np.array_equal(sub.h, ch.h[:, :, :3])
        with pytest.raises(InvalidInputError):
            ch.restrict_users(0)

    def test_rejects_bad_arrays(self):
        with pytest.raises(InvalidInputError):
            ChannelSet(np.zeros((2, 3, 2, 2, 3)))
        bad = np.zeros((2, 2, 1, 2, 3), dtype=complex)
        bad[0, 0, 0, 0, 0] = np.nan
        with pytest.raises(InvalidInputError):
            ChannelSet(bad)


class TestSnrMapping:
    def test_zero_db(self):
        assert snr_to_power(0.0) == (1.0, 1.0)

    def test_thirty_db(self):
        assert snr_to_power(30.0) == (pytest.approx(1000.0), 1.0)

    def test_three_db(self):
        power, noise = snr_to_power(3.0)
        assert power == pytest.approx(10**0.3)
        assert noise == 1.0

    def test_config_at_snr(self, cfg322):
        at = config_at_snr(cfg322, 20.0)
        assert at.power_P == pytest.approx(100.0)
        assert at.noise_var == 1.0
        assert dataclasses.replace(at, power_P=1.0) == dataclasses.replace(cfg322, noise_var=1.0)


def test_other_cell():
    assert other_cell(0) == 1
    assert other_cell(1) == 0
    with pytest.raises(InvalidInputError):
        other_cell(2)
