import math
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from dynmis import (
    Insert,
    RandConfig,
    WorkMeter,
    build_random_mis,
    estimate_high_degree_mis_probability,
    gen_random_stream,
    greedy_mis,
    rand_update,
    random_permutation,
    recompute_state,
    run_rand,
)
from dynmis.rand import (
    Permutation,
    RandEpoch,
    binomial_std_error,
    ceil_sqrt,
    rand_high_threshold,
)

from conftest import graph_from, graphs_with_order, sequential_process


def test_permutation_examples():
    assert random_permutation(3, 0, 1).order == (0,)
    assert random_permutation(3, 4, 0).order == ()
    assert random_permutation(9, 2, 50) == random_permutation(9, 2, 50)
    assert random_permutation(9, 2, 50) != random_permutation(9, 3, 50)
    with pytest.raises(ValueError):
        random_permutation(0, 0, -1)


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6), st.integers(0, 40))
def test_permutation_is_a_bijection_with_inverse(seed, idx, n):
    p = random_permutation(seed, idx, n)
    assert sorted(p.order) == list(range(n))
    pos = p.position
    assert all(p.order[pos[v]] == v for v in range(n))


def test_permutations_of_five_are_uniform():
    draws = 100_000
    counts = Counter(random_permutation(seed, 0, 5).order for seed in range(draws))
    assert len(counts) == 120
    p = 1 / 120
    se = math.sqrt(p * (1 - p) / draws)
    for c in counts.values():
        assert abs(c / draws - p) <= 5 * se


def test_build_random_mis_examples():
    tri = graph_from(3, [(0, 1), (1, 2), (0, 2)])
    assert build_random_mis(tri, Permutation((0, 1, 2)), WorkMeter()).members == {0}
    empty = graph_from(6, [])
    for seed in range(5):
        sigma = random_permutation(seed, 0, 6)
        assert build_random_mis(empty, sigma, WorkMeter()).members == set(range(6))


@given(graphs_with_order(max_n=8))
def test_build_random_mis_matches_sequential_process(case):
    g, order = case
    s = build_random_mis(g, Permutation(tuple(order)), WorkMeter())
    assert s.members == sequential_process(g.n, list(g.edges()), order)
    assert s == greedy_mis(g, order, WorkMeter())


def _epoch(g, high=frozenset(), rounds=4):
    return RandEpoch(index=0, m0=max(1, g.edge_count), rounds_left=rounds,
                     sigma=Permutation(tuple(range(g.n))), v_high=high, threshold=0.0)


def test_rand_update_prefers_evicting_the_non_high_endpoint():
    # smaller-degree endpoint 1 is high, so the larger-degree endpoint 0 is evicted
    g = graph_from(6, [(0, 2), (0, 3), (1, 4)])
    s = recompute_state(g, {0, 1, 5})
    ep = _epoch(g, high=frozenset({1}))
    removed = rand_update(g, s, ep, Insert(0, 1), WorkMeter())
    assert removed == 0
    assert s.members == {1, 2, 3, 5}
    assert ep.rounds_left == 3


def test_rand_update_no_removal_with_one_endpoint_in_mis():
    g = graph_from(3, [(1, 2)])
    s = recompute_state(g, {0, 1})
    assert rand_update(g, s, _epoch(g), Insert(0, 2), WorkMeter()) is None
    assert s.members == {0, 1}


def test_rand_update_both_high_removes_smaller_degree():
    n = 560
    edges = [(0, w) for w in range(2, 302)] + [(1, w) for w in range(302, 551)]
    g = graph_from(n, edges)
    s = recompute_state(g, {0, 1} | set(range(551, n)))
    ep = _epoch(g, high=frozenset({0, 1}))
    removed = rand_update(g, s, ep, Insert(0, 1), WorkMeter())
    assert (g.degree(0), g.degree(1)) == (301, 250)
    assert removed == 1


def test_thresholds_and_epoch_length():
    assert ceil_sqrt(1) == 1 and ceil_sqrt(16) == 4 and ceil_sqrt(17) == 5
    assert rand_high_threshold(1, RandConfig()) == pytest.approx(200.0)
    m = 4096
    assert rand_high_threshold(m, RandConfig(c_high=1.0)) == pytest.approx(64 * 12**1.5)


def test_run_rand_examples():
    empty = run_rand(gen_random_stream(4, 0, 0.5, 0), verify=True)
    assert empty.ok and len(empty.epochs) == 1
    stream = gen_random_stream(64, 1000, 0.5, 3)
    a = run_rand(stream, RandConfig(seed=1), verify=True, check=True)
    b = run_rand(stream, RandConfig(seed=2), verify=True, check=True)
    assert a.ok and b.ok


def test_same_seed_reproduces_membership_history():
    stream = gen_random_stream(40, 600, 0.6, 21)

    def history(seed):
        seen = []
        run_rand(stream, RandConfig(seed=seed),
                 on_update=lambda alg, i: seen.append(tuple(alg.state.in_mis)))
        return seen

    assert history(5) == history(5)
    assert history(5) != history(6)


def test_epochs_rebuild_every_ceil_sqrt_m():
    r = run_rand(gen_random_stream(30, 500, 0.7, 1), RandConfig(seed=0))
    for e in r.epochs:
        assert e.length == ceil_sqrt(e.m0)
    starts = [e.start_event for e in r.epochs]
    for a, b, e in zip(starts, starts[1:], r.epochs):
        assert b - a == e.length


@given(st.integers(0, 2**32), st.sampled_from([0.05, 1.0, 200.0]))
def test_rand_valid_and_one_eviction_per_update(seed, c_high):
    stream = gen_random_stream(32, 300, 0.7, seed, hubs=2, hub_prob=0.5)
    r = run_rand(stream, RandConfig(c_high=c_high, seed=seed), verify=True, check=True)
    assert r.ok
    assert all(u.work.leaves <= 1 for u in r.updates)


def test_probability_estimator_examples():
    iso = graph_from(3, [(1, 2)])
    assert estimate_high_degree_mis_probability(iso, 0, 200, 1) == 1.0
    k2 = graph_from(2, [(0, 1)])
    trials = 20_000
    p = estimate_high_degree_mis_probability(k2, 0, trials, 2)
    assert abs(p - 0.5) <= 4 * binomial_std_error(0.5, trials)
    star = graph_from(7, [(0, w) for w in range(1, 7)])
    p = estimate_high_degree_mis_probability(star, 0, trials, 3)
    assert abs(p - 1 / 7) <= 4 * binomial_std_error(1 / 7, trials)
    with pytest.raises(ValueError):
        estimate_high_degree_mis_probability(star, 0, 0, 3)


def test_std_error_helper():
    assert binomial_std_error(0.5, 100) == pytest.approx(0.05)
    assert binomial_std_error(0.5, 0) == math.inf
