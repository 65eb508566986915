import math
from statistics import NormalDist
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st
from statsmodels.stats.proportion import proportion_confint

from lfsearch.errors import DegenerateInput, DomainError
from lfsearch.metrics import (
    GameRecord,
    ProfileCurve,
    aggregate,
    aup,
    cumulative_wins,
    performance_profile,
    read_scores_csv,
    tree_size_summary,
    wilson_interval,
    win_rate,
)

FIXTURES = Path(__file__).parent / "fixtures"


def recs(game, method, wins, tokens=100):
    return [GameRecord(game, method, r, w, tokens) for r, w in enumerate(wins)]


def test_win_rate_strict_majority():
    assert win_rate(recs("g", "m", [1, 1, 1, 0, 0])) == (0.6, True)
    assert win_rate(recs("g", "m", [0] * 5)) == (0.0, False)
    assert win_rate(recs("g", "m", [1, 0, 1, 0, 0])) == (0.4, False)
    assert win_rate(recs("g", "m", [1, 0])) == (0.5, False)
    with pytest.raises(DomainError):
        win_rate([])


def test_aggregate_arithmetic():
    data = recs("a", "m", [1, 1], tokens=100) + recs("b", "m", [0, 0], tokens=300)
    rep = aggregate(data, "m")
    assert (rep.win_rate_star, rep.tokens_star) == (0.5, 200)
    assert rep.efficiency_score == pytest.approx(0.0025)
    assert aggregate(recs("a", "z", [0], tokens=0), "z").efficiency_score is None


def test_published_gap_survives_ingest():
    # 95 runs per method on countdown7; 45 and 31 wins give the published percentages
    lfs = [GameRecord(f"g{i}", "lfs", 0, int(i < 45), 1) for i in range(95)]
    mcts = [GameRecord(f"g{i}", "mcts", 0, int(i < 31), 1) for i in range(95)]
    gap = 100 * (aggregate(lfs, "lfs").win_rate_star - aggregate(mcts, "mcts").win_rate_star)
    assert round(gap, 2) == 14.74


def test_wilson_against_reference():
    z = NormalDist().inv_cdf(0.975)  # the reference uses the exact quantile, not 1.96
    for n in range(1, 21):
        for k in range(n + 1):
            lo, hi = wilson_interval(k, n, z)
            ref_lo, ref_hi = proportion_confint(k, n, alpha=0.05, method="wilson")
            assert lo == pytest.approx(ref_lo, abs=1e-6) and hi == pytest.approx(ref_hi, abs=1e-6)


def test_wilson_spot_values():
    assert wilson_interval(0, 5)[0] == 0.0
    lo, hi = wilson_interval(5, 5, 1.96)
    assert lo == pytest.approx(0.566, abs=1e-3) and hi == pytest.approx(1.0)
    lo, hi = wilson_interval(3, 5)
    assert lo < 0.6 < hi
    with pytest.raises(DomainError):
        wilson_interval(6, 5)


@given(st.integers(1, 200).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
def test_wilson_contains_estimate(kn):
    k, n = kn
    lo, hi = wilson_interval(k, n)
    assert 0.0 <= lo <= k / n <= hi <= 1.0


def test_profile_two_methods():
    curves = performance_profile({"A": {"t1": 1.0, "t2": 0.5}, "B": {"t1": 0.5, "t2": 1.0}})
    a = curves["A"]
    assert a.rho(0) == 0.5 and a.rho(math.log10(2)) == 1.0 and a.rho(-0.1) == 0.0
    assert curves["B"].breakpoints == a.breakpoints
    assert a.tau_max == pytest.approx(math.log10(2))


def test_dominant_method():
    curves = performance_profile({"A": {"x": 2, "y": 3}, "B": {"x": 1, "y": 1}})
    assert curves["A"].rho(0) == 1.0


def test_degenerate_inputs():
    with pytest.raises(DegenerateInput):
        performance_profile({"A": {"x": 0}, "B": {"x": 0}})
    with pytest.raises(DegenerateInput):
        performance_profile({"A": {"x": 1}})


def test_aup_rectangles():
    flat = ProfileCurve("m", [(1.0, 1.0)], tau_max=3.0, origin=1.0)
    assert aup(flat) == 2.0
    step = ProfileCurve("m", [(1.0, 0.5), (2.0, 1.0)], tau_max=3.0, origin=1.0)
    assert aup(step) == 1.5
    assert aup(step, lower=0.0) == 1.5
    assert aup(step, lower=2.5) == 0.5


def test_zero_scores_use_epsilon():
    curves = performance_profile({"A": {"x": 50.0}, "B": {"x": 0.0}}, epsilon=0.5)
    assert curves["B"].breakpoints == [(pytest.approx(2.0), 1.0)]
    assert curves["B"].settings["epsilon"] == 0.5


def test_published_table_ordering():
    scores = read_scores_csv(FIXTURES / "gpt4o_winrates.csv")
    areas = {m: aup(c) for m, c in performance_profile(scores).items()}
    assert areas["lfs"] > areas["mcts"] > areas["bestfs"] > areas["tot_bfs"]


def test_dominance_implies_larger_area():
    curves = performance_profile({"A": {"x": 3, "y": 2, "z": 1}, "B": {"x": 1, "y": 2, "z": 0.5}})
    assert aup(curves["A"]) >= aup(curves["B"])


def test_cumulative_wins():
    runs = [GameRecord("g", "m", 0, 1, 1000)]
    assert cumulative_wins(runs, [500, 1500]) == {"m": [(500, 0), (1500, 1)]}
    assert cumulative_wins([GameRecord("g", "m", 0, 0, 10)], [5, 50]) == {"m": [(5, 0), (50, 0)]}


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 5000)), min_size=1))
def test_cumulative_wins_monotone(rows):
    runs = [GameRecord(f"g{i}", "m", 0, w, t) for i, (w, t) in enumerate(rows)]
    counts = [w for _, w in cumulative_wins(runs, range(0, 5001, 250))["m"]]
    assert counts == sorted(counts)


def test_tree_size_summary():
    runs = [GameRecord("g", "m", i, 1, 1, tree_size=s) for i, s in enumerate([3, 9, 6, 1])]
    assert tree_size_summary(runs)["m"] == {"runs": 4, "mean": 4.75, "median": 4.5, "min": 1, "max": 9}
