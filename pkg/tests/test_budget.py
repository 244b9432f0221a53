"""Budget allocator: equal division, caps, floor, completion guarantee."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quorum.budget import (
    BudgetConfig,
    BudgetState,
    advance,
    allocate,
    initial_state,
)


class TestConfig:
    def test_defaults(self):
        cfg = BudgetConfig()
        assert cfg.total_limit_s == 18000
        assert cfg.infra_reserve_s == 540
        assert cfg.startup_reserve_s == 360
        assert cfg.solving_budget_s == 17100
        assert cfg.base_timeout_s <= cfg.max_timeout_s <= cfg.session_timeout_s

    def test_reserves_must_leave_solving_time(self):
        with pytest.raises(ValueError):
            BudgetConfig(total_limit_s=800, infra_reserve_s=540, startup_reserve_s=360)

    def test_timeout_ordering_enforced(self):
        with pytest.raises(ValueError):
            BudgetConfig(max_timeout_s=100, base_timeout_s=300)

    def test_from_mapping_roundtrip(self):
        cfg = BudgetConfig.from_mapping(
            {"total_limit_s": 18000, "max_timeout_s": 600, "solving_budget_s": 17100}
        )
        assert cfg.max_timeout_s == 600
        assert cfg.solving_budget_s == 17100

    def test_from_mapping_rejects_unknown_and_inconsistent(self):
        with pytest.raises(ValueError):
            BudgetConfig.from_mapping({"bogus_key": 1})
        with pytest.raises(ValueError):
            BudgetConfig.from_mapping({"solving_budget_s": 99999})


class TestAllocate:
    CFG = BudgetConfig()

    def test_opening_equal_division(self):
        assert allocate(BudgetState(17100, 50), self.CFG) == pytest.approx(342.0)

    def test_hard_floor_triggers_fallback(self):
        assert allocate(BudgetState(25, 3), self.CFG) is None

    def test_cap_at_max_timeout(self):
        assert allocate(BudgetState(10000, 2), self.CFG) == pytest.approx(900.0)

    def test_zero_problems_is_an_error(self):
        with pytest.raises(ValueError):
            allocate(BudgetState(1000, 0), self.CFG)

    def test_exactly_at_floor_allocates(self):
        assert allocate(BudgetState(30, 5), self.CFG) == pytest.approx(6.0)

    @given(
        st.floats(min_value=0, max_value=17100),
        st.integers(min_value=1, max_value=50),
    )
    def test_never_exceeds_cap_or_remaining_time(self, time_left, remaining):
        share = allocate(BudgetState(time_left, remaining), self.CFG)
        if share is not None:
            assert share <= self.CFG.max_timeout_s
            assert share <= time_left + 1e-9


class TestAdvance:
    def test_arithmetic(self):
        state = advance(BudgetState(17100, 50), 342.0)
        assert state == BudgetState(16758.0, 49)

    def test_floor_at_zero(self):
        assert advance(BudgetState(100, 1), 250.0) == BudgetState(0.0, 0)

    def test_skipped_problem(self):
        assert advance(BudgetState(342, 2), 0.0) == BudgetState(342.0, 1)

    def test_negative_elapsed_rejected(self):
        with pytest.raises(ValueError):
            advance(BudgetState(100, 1), -1.0)

    def test_state_validation(self):
        with pytest.raises(ValueError):
            BudgetState(-1.0, 5)
        with pytest.raises(ValueError):
            BudgetState(10.0, -1)


class TestCompletionGuarantee:
    CFG = BudgetConfig()

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=50, max_size=50))
    @settings(max_examples=200, deadline=None)
    def test_fifty_problems_always_finish(self, fractions):
        """Consuming at most each allocation can never blow the budget."""
        state = initial_state(self.CFG, 50)
        total = 0.0
        handled = 0
        for fraction in fractions:
            share = allocate(state, self.CFG)
            if share is None:
                consumed = 0.0  # immediate fallback answer
            else:
                assert share > 0
                consumed = share * fraction
            total += consumed
            state = advance(state, consumed)
            handled += 1
        assert handled == 50
        assert state.problems_remaining == 0
        assert state.time_left_s >= 0.0
        assert total <= self.CFG.solving_budget_s + 1e-6

    def test_underconsumption_raises_later_allocations(self):
        state = initial_state(self.CFG, 50)
        first = allocate(state, self.CFG)
        state = advance(state, first / 2)
        second = allocate(state, self.CFG)
        assert second > first
        assert second <= self.CFG.max_timeout_s

    def test_overrun_shrinks_later_allocations(self):
        state = initial_state(self.CFG, 50)
        first = allocate(state, self.CFG)
        state = advance(state, 900.0)  # problem blew way past its share
        second = allocate(state, self.CFG)
        assert second < first

    def test_saved_time_never_exceeds_cap(self):
        # burn almost nothing for 48 problems; the last two still cap at 900
        state = initial_state(self.CFG, 50)
        for _ in range(48):
            allocate(state, self.CFG)
            state = advance(state, 1.0)
        share = allocate(state, self.CFG)
        assert share == pytest.approx(self.CFG.max_timeout_s)
