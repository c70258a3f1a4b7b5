import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twocell_ia.align import (
    alignment_matrix,
    check_feasibility,
    design_precoders,
    effective_row,
    precoders_from_rows,
    run_proposed_scheme,
    single_user_cross_direction,
    solve_alignment,
)
from twocell_ia.errors import (
    DegenerateRealizationError,
    InfeasibleConfigError,
    InvalidInputError,
)
from twocell_ia.linalg import collinearity_angle, null_space_basis
from twocell_ia.scenario import ChannelSet, ScenarioConfig, generate_channels, other_cell


def make_channels(M, N, K, seed=0, trial=0):
    cfg = ScenarioConfig(M=M, N=N, K=K, seed=seed)
    return cfg, generate_channels(cfg, trial)


class TestFeasibility:
    def test_spec_examples(self):
        assert check_feasibility(3, 2, 2).feasible
        res = check_feasibility(2, 2, 2)
        assert not res.feasible and res.reason == "M < K+1"
        res = check_feasibility(6, 4, 4)
        assert not res.feasible and res.reason == "M > (KN-1)/(K-1)"

    def test_symmetric_boundary(self):
        for K in range(2, 9):
            assert check_feasibility(K + 1, K, K).feasible
            assert not check_feasibility(K, K, K).feasible
        for K in range(3, 9):
            res = check_feasibility(2 * K, K, K)
            assert not res.feasible and res.reason == "M > (KN-1)/(K-1)"

    @settings(max_examples=200, deadline=None, derandomize=True)
    @given(M=st.integers(1, 15), N=st.integers(1, 15), K=st.integers(2, 10))
    def test_matches_brute_force_inequalities(self, M, N, K):
        expected = (M >= K + 1) and ((M + K * N) - K * M >= 1)
        assert check_feasibility(M, N, K).feasible == expected

    def test_k1_needs_two_antennas(self):
        assert check_feasibility(2, 1, 1).feasible
        assert not check_feasibility(1, 1, 1).feasible

    def test_input_validation(self):
        with pytest.raises(InvalidInputError):
            check_feasibility(0, 2, 2)


class TestAlignment:
    def test_system_matrix_shape_322(self):
        _, ch = make_channels(3, 2, 2, seed=1)
        system = alignment_matrix(ch.cross_channels(0))
        assert system.shape == (6, 7)
        assert null_space_basis(system).shape[1] == 1

    def test_system_matrix_shape_544(self):
        _, ch = make_channels(5, 4, 4, seed=2)
        assert alignment_matrix(ch.cross_channels(0)).shape == (20, 21)

    @pytest.mark.parametrize("interfering_bs", [0, 1])
    def test_solution_invariants_322(self, interfering_bs):
        _, ch = make_channels(3, 2, 2, seed=3)
        sol = solve_alignment(ch, interfering_bs)
        assert np.linalg.norm(sol.h_ici) == pytest.approx(1.0, abs=1e-10)
        victim = other_cell(interfering_bs)
        for k in range(2):
            assert np.linalg.norm(sol.combiners[k]) == pytest.approx(1.0, abs=1e-10)
            combined = ch.bs_to_user(interfering_bs, victim, k).conj().T @ sol.combiners[k]
            assert collinearity_angle(combined, sol.h_ici) < 1e-8

    def test_nullity_is_one_on_symmetric_setups(self):
        for K in range(2, 9):
            _, ch = make_channels(K + 1, K, K, seed=K)
            system = alignment_matrix(ch.cross_channels(0))
            assert null_space_basis(system).shape[1] == (K + 1 + K * K) - K * (K + 1) == 1

    def test_identical_interfering_channels(self):
        # symmetric instance: equal combiners solve it; whatever comes back
        # must still satisfy the alignment invariants
        _, ch = make_channels(3, 2, 2, seed=4)
        h = ch.h.copy()
        h[0, 1, 1] = h[0, 1, 0]
        ch_sym = ChannelSet(h)
        sol = solve_alignment(ch_sym, 0)
        for k in range(2):
            combined = ch_sym.bs_to_user(0, 1, k).conj().T @ sol.combiners[k]
            assert collinearity_angle(combined, sol.h_ici) < 1e-8

    def test_degenerate_zero_cross_channel(self):
        with pytest.raises(DegenerateRealizationError):
            single_user_cross_direction(np.zeros((2, 3)), np.array([1.0, 0.0]))


class TestPrecoders:
    def test_residuals_322(self):
        cfg, ch = make_channels(3, 2, 2, seed=5)
        sol0 = solve_alignment(ch, 0)  # constrains BS 0, provides cell-1 combiners
        sol1 = solve_alignment(ch, 1)
        own_combiners = sol1.combiners  # cell-0 users
        v = design_precoders(ch, 0, own_combiners, sol0.h_ici)
        for k in range(2):
            assert np.linalg.norm(v[k]) == pytest.approx(1.0, abs=1e-10)
            # in-cell rows of the other user
            for kk in range(2):
                if kk == k:
                    continue
                row = effective_row(own_combiners[kk], ch.bs_to_user(0, 0, kk))
                assert abs(row @ v[k]) < 1e-8
            # cross-cell rows through the victim cell's combiners
            for kk in range(2):
                row = effective_row(sol0.combiners[kk], ch.bs_to_user(0, 1, kk))
                assert abs(row @ v[k]) < 1e-8

    def test_zero_iui_rows_only_block_the_direction(self):
        rng = np.random.default_rng(6)
        blocked = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        blocked /= np.linalg.norm(blocked)
        v = precoders_from_rows(np.zeros((2, 4), dtype=complex), blocked)
        for k in range(2):
            assert np.linalg.norm(v[k]) == pytest.approx(1.0, abs=1e-10)
            assert abs(blocked.conj() @ v[k]) < 1e-10

    def test_compressed_stack_equals_full_stack_544(self):
        # the K-row compressed stack and the full 2K-1-row stack share their
        # null vector once the cross-cell rows are aligned
        cfg, ch = make_channels(5, 4, 4, seed=7)
        K = 4
        sol0 = solve_alignment(ch, 0)
        sol1 = solve_alignment(ch, 1)
        own = sol1.combiners
        serving_rows = np.vstack(
            [effective_row(own[k], ch.bs_to_user(0, 0, k)) for k in range(K)]
        )
        v = precoders_from_rows(serving_rows, sol0.h_ici)
        for k in range(K):
            full_stack = np.vstack(
                [serving_rows[kk] for kk in range(K) if kk != k]
                + [effective_row(sol0.combiners[kk], ch.bs_to_user(0, 1, kk)) for kk in range(K)]
            )
            assert full_stack.shape == (2 * K - 1, 5)
            full_null = null_space_basis(full_stack)
            assert full_null.shape[1] == 1
            assert collinearity_angle(v[k], full_null[:, 0]) < 1e-8

    def test_blocked_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            precoders_from_rows(np.zeros((2, 4), dtype=complex), np.ones(3, dtype=complex))


class TestRunProposedScheme:
    def max_leakage(self, ch, bf):
        K = ch.K
        worst = 0.0
        for i in (0, 1):
            for k in range(K):
                w = bf.w[i, k]
                for j in (0, 1):
                    row = w.conj() @ ch.bs_to_user(j, i, k)
                    for kk in range(K):
                        if (j, kk) == (i, k):
                            continue
                        worst = max(worst, abs(row @ bf.v[j, kk]))
        return worst

    def test_zero_leakage_322(self):
        cfg, ch = make_channels(3, 2, 2, seed=8)
        bf = run_proposed_scheme(ch, cfg)
        assert self.max_leakage(ch, bf) < 1e-8

    def test_bookkeeping_988(self):
        cfg, ch = make_channels(9, 8, 8, seed=9)
        bf = run_proposed_scheme(ch, cfg)
        assert bf.v.shape == (2, 8, 9)
        assert bf.w.shape == (2, 8, 8)
        assert np.allclose(np.linalg.norm(bf.v, axis=2), 1.0, atol=1e-10)
        assert np.allclose(np.linalg.norm(bf.w, axis=2), 1.0, atol=1e-10)
        assert np.allclose(bf.stream_power.sum(axis=1), cfg.power_P)

    def test_infeasible_rejected_before_work(self):
        cfg, ch = make_channels(2, 2, 2, seed=10)
        with pytest.raises(InfeasibleConfigError):
            run_proposed_scheme(ch, cfg)

    def test_k1_plain_zero_forcing(self):
        cfg, ch = make_channels(3, 2, 1, seed=11)
        bf = run_proposed_scheme(ch, cfg)
        assert self.max_leakage(ch, bf) < 1e-8
        assert np.allclose(np.linalg.norm(bf.w, axis=2), 1.0, atol=1e-10)

    def test_dimension_mismatch_rejected(self):
        cfg, _ = make_channels(3, 2, 2, seed=12)
        _, ch5 = make_channels(5, 4, 4, seed=12)
        with pytest.raises(InvalidInputError):
            run_proposed_scheme(ch5, cfg)

    def test_wider_than_minimum_m_still_aligns(self):
        # M between the bounds with larger N: nullity exceeds 1 and the
        # smallest-singular-value selection must still satisfy everything
        cfg, ch = make_channels(4, 4, 2, seed=13)  # bounds: 3 <= M <= 7
        bf = run_proposed_scheme(ch, cfg)
        assert self.max_leakage(ch, bf) < 1e-8
        system = alignment_matrix(ch.cross_channels(0))
        assert null_space_basis(system).shape[1] == (4 + 8) - 8 == 4
