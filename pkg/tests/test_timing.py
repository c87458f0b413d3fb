import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isomt.errors import CountMismatch, InvalidPlan, ZeroDuration
from isomt.textmodel import PauseMarkedSentence, TimedSentence
from isomt.timing import DubbingPlan, PlanItem, build_plan, deviations, relax, smoothness

from oracles import grid_relax_two


def plan_with_rates(rates, dur=1.0, pause=0.5):
    """Items of duration ``dur`` with ``rate * dur`` characters each."""
    items, t = [], 0.0
    for r in rates:
        items.append(("x" * round(r * dur), t, t + dur))
        t += dur + pause
    return DubbingPlan(items)


class TestBuildPlan:
    def test_rates(self):
        ts = TimedSentence([("a", 0, 2), ("b", 3, 5)])
        plan = build_plan(ts, PauseMarkedSentence(["x" * 20, "y" * 10]))
        assert plan.rates == [10.0, 5.0]
        assert [(i.start, i.end) for i in plan.items] == [(0, 2), (3, 5)]

    def test_count_mismatch(self):
        ts = TimedSentence([("a", 0, 2), ("b", 3, 5)])
        with pytest.raises(CountMismatch):
            build_plan(ts, PauseMarkedSentence(["x"]))

    def test_single_segment(self):
        plan = build_plan(TimedSentence([("a", 0.2, 0.9)]), PauseMarkedSentence(["Danke"]))
        assert len(plan) == 1 and plan.pauses == []

    def test_plan_validation(self):
        with pytest.raises(InvalidPlan):
            DubbingPlan([])
        with pytest.raises(InvalidPlan):
            DubbingPlan([("a", 1.0, 1.0)])
        with pytest.raises(InvalidPlan):
            DubbingPlan([("a", 0.0, 1.0), ("b", 0.5, 2.0)])

    def test_zero_duration_rate(self):
        with pytest.raises(ZeroDuration):
            PlanItem("a", 1.0, 1.0).rate


class TestSmoothness:
    def test_constant(self):
        assert smoothness([plan_with_rates([10, 10, 10])]) == 100.0

    def test_both_pairs_exceed(self):
        # deviations 0.30 and 0.2308
        assert smoothness([plan_with_rates([10, 13, 10])], tau=0.2) == 0.0
        assert deviations(plan_with_rates([10, 13, 10])) == pytest.approx([0.3, 3 / 13])

    def test_boundary_inclusive(self):
        assert smoothness([plan_with_rates([10, 12])], tau=0.2) == 100.0

    def test_pools_pairs_across_plans(self):
        plans = [plan_with_rates([10, 10]), plan_with_rates([10, 20, 20]), plan_with_rates([5])]
        assert smoothness(plans) == pytest.approx(200 / 3)

    def test_no_pairs(self):
        assert smoothness([plan_with_rates([7])]) == 100.0

    def test_empty(self):
        with pytest.raises(InvalidPlan):
            smoothness([])

    @given(st.lists(st.integers(1, 60), min_size=1, max_size=6), st.floats(0.1, 10))
    def test_scale_invariance(self, chars, k):
        items, t = [], 0.0
        for c in chars:
            items.append(("x" * c, t, t + 1.0))
            t += 1.5
        p = DubbingPlan(items)
        scaled = DubbingPlan([(i.text, i.start * k, i.end * k) for i in p.items])
        for tau in (0.1, 0.2, 0.3):
            assert smoothness([scaled], tau) == smoothness([p], tau)


class TestRelax:
    def test_uniform_rates_unchanged(self):
        p = plan_with_rates([10, 10, 10])
        assert relax(p) == p

    def test_no_slack_unchanged(self):
        p = plan_with_rates([20, 10, 30], pause=0.3)
        assert relax(p) == p

    def test_two_phrases_against_grid_oracle(self):
        p = DubbingPlan([("x" * 20, 0.0, 1.0), ("y" * 10, 2.0, 3.0)])
        out = relax(p)
        best_end, best_dev = grid_relax_two(20, 10, 0.0, 1.0, 2.0, 3.0, 0.3)
        assert abs(out.items[0].end - best_end) <= 1e-3
        assert deviations(out)[0] <= best_dev + 1e-9
        assert out.items[1] == p.items[1]

    def test_slower_phrase_first(self):
        p = DubbingPlan([("x" * 10, 0.0, 1.0), ("y" * 20, 2.0, 3.0)])
        out = relax(p)
        # Time goes to the faster second phrase: start moves earlier, to the floor.
        assert out.items[0] == p.items[0]
        assert out.items[1].start == pytest.approx(1.3)

    def test_equalizes_when_slack_allows(self):
        p = DubbingPlan([("x" * 12, 0.0, 1.0), ("y" * 10, 3.0, 4.0)])
        out = relax(p)
        assert out.rates[0] == pytest.approx(out.rates[1])

    def test_single_item(self):
        p = plan_with_rates([9])
        assert relax(p) == p

    def test_rejects_pause_below_floor(self):
        with pytest.raises(InvalidPlan):
            relax(plan_with_rates([10, 20], pause=0.2))

    def test_max_iters_zero(self):
        p = plan_with_rates([20, 10, 15])
        assert relax(p, max_iters=0) == p


def random_plan(rng: random.Random) -> DubbingPlan:
    items, t = [], rng.uniform(0, 2)
    for _ in range(rng.randint(1, 7)):
        d = rng.uniform(0.2, 3.0)
        items.append(("a" * rng.randint(1, 40), t, t + d))
        t += d + 0.3 + rng.choice([0.0, rng.uniform(0, 2)])
    return DubbingPlan(items)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_relax_contract(seed):
    p = random_plan(random.Random(seed))
    out = relax(p)
    assert out.span == p.span
    assert [i.text for i in out.items] == [i.text for i in p.items]
    for new, old in zip(out.pauses, p.pauses):
        assert new >= min(0.3, old)
    for tau in (0.05, 0.1, 0.2, 0.3, 0.5):
        assert smoothness([out], tau) >= smoothness([p], tau)
    assert max(deviations(out), default=0) <= max(deviations(p), default=0)
