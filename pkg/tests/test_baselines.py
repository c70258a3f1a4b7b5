import numpy as np
import pytest

from twocell_ia.baselines import (
    SCHEME_NAMES,
    czf_dof,
    run_coordinated_zf,
    run_percell_zf,
    run_subspace_ia_proxy,
    scheme_runner,
    scheme_supported,
)
from twocell_ia.errors import InfeasibleConfigError, InvalidInputError
from twocell_ia.linalg import collinearity_angle
from twocell_ia.metrics import ergodic_sum_rate, estimate_dof, interference_leakage
from twocell_ia.scenario import ScenarioConfig, generate_channels


def make_channels(M, N, K, seed=0, trial=0):
    cfg = ScenarioConfig(M=M, N=N, K=K, seed=seed)
    return cfg, generate_channels(cfg, trial)


class TestCzfDof:
    def test_symmetric_setup(self):
        assert czf_dof(5, 4, 4) == 5
        for K in range(2, 9):
            assert czf_dof(K + 1, K, K) == K + 1

    def test_322(self):
        assert czf_dof(3, 2, 2) == 3

    def test_single_antenna(self):
        assert czf_dof(1, 1, 1) == 1

    def test_monotone_in_binding_term(self):
        # max(M, N) binds on the symmetric setup, so growing M grows the DoF
        assert czf_dof(6, 4, 4) >= czf_dof(5, 4, 4)

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            czf_dof(0, 1, 1)


class TestCoordinatedZf:
    def test_active_set_and_leakage_544(self):
        cfg, ch = make_channels(5, 4, 4, seed=20)
        bf = run_coordinated_zf(ch, cfg)
        assert int(np.count_nonzero(bf.stream_power)) == 5
        assert bf.active[0].all() and bf.active[1, 0] and not bf.active[1, 1:].any()
        assert interference_leakage(ch, bf) < 1e-8
        assert np.allclose(np.linalg.norm(bf.v, axis=2), 1.0, atol=1e-10)
        assert np.allclose(np.linalg.norm(bf.w, axis=2), 1.0, atol=1e-10)
        assert np.all(bf.stream_power.sum(axis=1) <= cfg.power_P + 1e-12)

    def test_leakage_322(self):
        cfg, ch = make_channels(3, 2, 2, seed=21)
        bf = run_coordinated_zf(ch, cfg)
        assert int(np.count_nonzero(bf.stream_power)) == 3
        assert interference_leakage(ch, bf) < 1e-8

    def test_requires_symmetric_setup(self):
        cfg, ch = make_channels(4, 2, 2, seed=22)
        with pytest.raises(InfeasibleConfigError):
            run_coordinated_zf(ch, cfg)


class TestSubspaceProxy:
    def test_stream_count_and_leakage_544(self):
        cfg, ch = make_channels(5, 4, 4, seed=23)
        bf = run_subspace_ia_proxy(ch, cfg)
        assert int(np.count_nonzero(bf.stream_power)) == 6
        assert interference_leakage(ch, bf) < 1e-8
        assert np.all(bf.stream_power.sum(axis=1) <= cfg.power_P + 1e-12)

    def test_alignment_inherited_on_served_users(self):
        # the K-1 served users' combined cross-cell vectors stay collinear
        cfg, ch = make_channels(5, 4, 4, seed=24)
        bf = run_subspace_ia_proxy(ch, cfg)
        for i in (0, 1):
            victim = 1 - i
            vecs = [ch.bs_to_user(i, victim, k).conj().T @ bf.w[victim, k] for k in range(3)]
            for a in range(3):
                for b in range(a + 1, 3):
                    assert collinearity_angle(vecs[a], vecs[b]) < 1e-8

    def test_two_streams_at_322(self):
        cfg, ch = make_channels(3, 2, 2, seed=25)
        bf = run_subspace_ia_proxy(ch, cfg)
        assert int(np.count_nonzero(bf.stream_power)) == 2
        assert interference_leakage(ch, bf) < 1e-8

    def test_preconditions(self):
        cfg, ch = make_channels(2, 1, 1, seed=26)
        with pytest.raises(InfeasibleConfigError):
            run_subspace_ia_proxy(ch, cfg)


class TestPercellZf:
    def test_iui_nulled_ici_untreated(self):
        cfg, ch = make_channels(3, 2, 2, seed=27)
        bf = run_percell_zf(ch, cfg)
        assert int(np.count_nonzero(bf.stream_power)) == 4
        assert interference_leakage(ch, bf, scope="iui") < 1e-8
        assert interference_leakage(ch, bf, scope="ici") > 1e-3

    def test_rate_saturates_at_high_snr(self):
        cfg = ScenarioConfig(M=3, N=2, K=2, seed=28, trials=100)
        points = [
            (snr, ergodic_sum_rate(cfg, "percell_zf", snr).mean) for snr in (40.0, 50.0, 60.0)
        ]
        est = estimate_dof(points, window=(40.0, 60.0))
        assert est.dof < 0.5

    def test_requires_enough_antennas(self):
        cfg, ch = make_channels(2, 2, 3, seed=29)
        with pytest.raises(InfeasibleConfigError):
            run_percell_zf(ch, cfg)


class TestSchemeRegistry:
    def test_runner_lookup(self):
        assert scheme_runner("proposed") is not None
        with pytest.raises(InvalidInputError):
            scheme_runner("magic")

    @pytest.mark.parametrize("name", SCHEME_NAMES)
    def test_supported_on_544(self, name):
        assert scheme_supported(name, 5, 4, 4).feasible

    def test_unsupported_reasons(self):
        assert scheme_supported("czf", 4, 2, 2).reason == "requires M = K+1 and N = K"
        assert scheme_supported("subspace_proxy", 2, 1, 1).reason == "requires M = K+1, N = K, K >= 2"
        assert scheme_supported("percell_zf", 1, 2, 2).reason == "requires M >= K"
        assert scheme_supported("proposed", 2, 2, 2).reason == "M < K+1"
