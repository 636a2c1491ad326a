import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exnet import (
    EnumerationLimitError,
    SessionError,
    TradeState,
    brute_force_enumerate,
    enumerate_sessions,
    find_infeasible_witness,
    make_graph,
    run_relaxed_session,
    run_session,
    sample_sessions,
    star_instance,
    trade,
)
from .conftest import all_supergraphs, small_graphs, supergraph


def k11(d=3, s=3):
    return make_graph([("b1", d)], [("s1", s)], [(0, 0)])


class TestTrade:
    def make(self, d, s):
        g = k11(d, s)
        return g, TradeState.initial(g)

    def test_buyer_exceeds_seller(self):
        g, st0 = self.make(5, 3)
        st1 = trade(st0, 0, g)
        assert st1.remaining_demand == [2] and st1.remaining_supply == [0]

    def test_zero_demand_noop(self):
        g, st0 = self.make(0, 7)
        st1 = trade(st0, 0, g)
        assert st1.remaining_demand == [0] and st1.remaining_supply == [7]
        assert st1.processed == {0}

    def test_exact_match(self):
        g, st0 = self.make(4, 4)
        st1 = trade(st0, 0, g)
        assert st1.remaining_demand == [0] and st1.remaining_supply == [0]

    def test_link_reuse_rejected(self):
        g, st0 = self.make(1, 1)
        st1 = trade(st0, 0, g)
        with pytest.raises(SessionError):
            trade(st1, 0, g)


class TestRunSession:
    def test_k11_feasible(self):
        out = run_session(k11(), [0])
        assert out.feasible and out.unmet == (Fraction(0),)

    def test_star2_infeasible_trace(self):
        # links sorted: 0=(b1,s1), 1=(b2,s1), 2=(b2,s2)
        g = star_instance(2, 1, 1)
        assert g.link_list == ((0, 0), (1, 0), (1, 1))
        out = run_session(g, [1, 0, 2])  # b2 drains s1, b1 stranded, s2 stranded
        assert not out.feasible
        assert out.unmet == (Fraction(1), Fraction(0))
        assert out.total_unmet == 1
        # the enumeration oracle agrees some ordering fails
        assert brute_force_enumerate(g).infeasible_count > 0

    def test_star2_feasible_trace(self):
        g = star_instance(2, 1, 1)
        out = run_session(g, [0, 2, 1])
        assert out.feasible

    def test_malformed_ordering(self):
        g = star_instance(2, 1, 1)
        with pytest.raises(SessionError):
            run_session(g, [0, 1])
        with pytest.raises(SessionError):
            run_session(g, [0, 0, 1])


class TestEnumerate:
    def test_k11(self):
        s = enumerate_sessions(k11())
        assert s.total_orderings == 1
        assert s.infeasible_fraction == 0

    def test_backbone(self, backbone):
        s = enumerate_sessions(backbone)
        assert s.total_orderings == 24
        assert s.infeasible_count == 0
        assert s.max_total_unmet == 0

    def test_backbone_plus_any_one_link(self, backbone):
        for _, _, g in all_supergraphs(backbone, [1]):
            s = enumerate_sessions(g)
            assert s.infeasible_fraction > 0
            assert s.max_total_unmet > 0

    def test_limit_refused(self):
        g = make_graph(
            [(f"b{i}", 1) for i in range(13)],
            [("s1", 13)],
            [(i, 0) for i in range(13)],
        )
        with pytest.raises(EnumerationLimitError):
            enumerate_sessions(g)

    def test_limit_env_override(self, backbone, monkeypatch):
        monkeypatch.setenv("EXNET_LIMIT", "3")
        with pytest.raises(EnumerationLimitError):
            enumerate_sessions(backbone)

    def test_count_iff_unmet(self, backbone):
        for _, _, g in all_supergraphs(backbone, [0, 1, 2]):
            s = enumerate_sessions(g)
            assert (s.infeasible_count == 0) == (s.max_total_unmet == 0)

    @given(small_graphs(max_links=5))
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force(self, g):
        dp = enumerate_sessions(g)
        bf = brute_force_enumerate(g)
        assert dp.total_orderings == bf.total_orderings
        assert dp.infeasible_count == bf.infeasible_count
        assert dp.max_total_unmet == bf.max_total_unmet
        assert dp.max_buyer_unmet == bf.max_buyer_unmet


class TestWitness:
    def test_k11_none(self):
        assert find_infeasible_witness(k11()) is None

    def test_star2_found_and_replays(self):
        g = star_instance(2, 1, 1)
        w = find_infeasible_witness(g)
        assert w is not None
        assert not run_session(g, w).feasible
        assert enumerate_sessions(g).infeasible_count > 0

    def test_k21_union_k22_none(self, backbone):
        g = supergraph(backbone, [(0, 1), (1, 0)])
        assert find_infeasible_witness(g) is None

    def test_deterministic(self):
        g = star_instance(3, 1, 1)
        assert find_infeasible_witness(g) == find_infeasible_witness(g)


class TestSample:
    def test_successful_graph_all_feasible(self, backbone):
        s = sample_sessions(backbone, 500, seed=7)
        assert s.estimated
        assert s.infeasible_fraction == 0

    def test_close_to_exact(self):
        g = star_instance(3, 1, 1)
        exact = enumerate_sessions(g).infeasible_fraction
        est = sample_sessions(g, 10000, seed=123).infeasible_fraction
        assert abs(est - exact) <= Fraction(5, 100)

    def test_n1(self):
        s = sample_sessions(k11(), 1, seed=0)
        assert s.total_orderings == 1
        assert s.infeasible_fraction == 0

    def test_reproducible(self):
        g = star_instance(3, 1, 1)
        a = sample_sessions(g, 1000, seed=9)
        b = sample_sessions(g, 1000, seed=9)
        assert a == b

    def test_max_unmet_lower_bound(self):
        g = star_instance(3, 1, 1)
        exact = enumerate_sessions(g)
        est = sample_sessions(g, 2000, seed=5)
        assert est.max_total_unmet <= exact.max_total_unmet


class TestSessionProperties:
    @given(small_graphs(), st.randoms(use_true_random=False))
    @settings(max_examples=80, deadline=None)
    def test_conservation_and_monotonicity(self, g, rng):
        order = list(range(g.n_links))
        rng.shuffle(order)
        state = TradeState.initial(g)
        total_d0 = sum(state.remaining_demand)
        total_s0 = sum(state.remaining_supply)
        for link in order:
            before_d = list(state.remaining_demand)
            before_s = list(state.remaining_supply)
            b, s = g.link_list[link]
            delta, sigma = before_d[b], before_s[s]
            state = trade(state, link, g)
            # monotone, nonnegative
            assert all(0 <= a <= p for a, p in zip(state.remaining_demand, before_d))
            assert all(0 <= a <= p for a, p in zip(state.remaining_supply, before_s))
            # conservation of traded amount
            consumed_d = total_d0 - sum(state.remaining_demand)
            consumed_s = total_s0 - sum(state.remaining_supply)
            assert consumed_d == consumed_s
            # each trade zeroes an endpoint or was a no-op
            assert (
                state.remaining_demand[b] == 0
                or state.remaining_supply[s] == 0
                or delta == 0
                or sigma == 0
            )

    @given(small_graphs(), st.randoms(use_true_random=False), st.data())
    @settings(max_examples=60, deadline=None)
    def test_relaxed_split_preserves_terminal_state(self, g, rng, data):
        if g.n_links == 0:
            return
        order = list(range(g.n_links))
        rng.shuffle(order)
        baseline = run_session(g, order)
        split_at = data.draw(st.integers(0, g.n_links - 1))
        ratio = data.draw(
            st.fractions(min_value=0, max_value=1, max_denominator=8)
        )
        # replay with one trade split into two consecutive partial trades
        steps = []
        state = TradeState.initial(g)
        for pos, link in enumerate(order):
            b, s = g.link_list[link]
            amount = min(state.remaining_demand[b], state.remaining_supply[s])
            if pos == split_at:
                steps.append((link, amount * ratio))
                steps.append((link, amount - amount * ratio))
            else:
                steps.append((link, None))
            state = trade(state, link, g)
        relaxed = run_relaxed_session(g, steps)
        assert relaxed.unmet == baseline.unmet
        assert relaxed.feasible == baseline.feasible
        assert (
            relaxed.final_state.remaining_supply
            == baseline.final_state.remaining_supply
        )

    def test_relaxed_split_on_experiment_graphs(self, backbone):
        # every ordering, every split position, halves: terminal state unchanged
        for _, _, g in all_supergraphs(backbone, [0, 1]):
            for order in itertools.permutations(range(g.n_links)):
                baseline = run_session(g, order)
                for split_at in range(g.n_links):
                    steps = []
                    state = TradeState.initial(g)
                    for pos, link in enumerate(order):
                        b, s = g.link_list[link]
                        amount = min(
                            state.remaining_demand[b], state.remaining_supply[s]
                        )
                        if pos == split_at:
                            steps.append((link, amount / 2))
                            steps.append((link, amount / 2))
                        else:
                            steps.append((link, None))
                        state = trade(state, link, g)
                    relaxed = run_relaxed_session(g, steps)
                    assert relaxed.unmet == baseline.unmet
