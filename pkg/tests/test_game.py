import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncgame.errors import ConvergenceTimeout, ValidationError
from ncgame.game import (
    GameState,
    make_state,
    payoff_vector,
    play,
    play_to_convergence,
    round_update,
    satisfaction_lower_bound,
    simulate_batch,
    write_trajectory_csv,
)
from ncgame.graph import complete_graph, empty_graph, generate_er, max_degree, star_graph
from ncgame.instances import reduction_example


def test_payoff_vector_examples():
    k2 = complete_graph(2)
    assert payoff_vector(k2, [0, 1]).tolist() == [1, 1]
    assert payoff_vector(k2, [0, 0]).tolist() == [0, 0]
    g, _, colors, _ = reduction_example()
    assert payoff_vector(g, colors).tolist() == [1] * 6
    assert payoff_vector(empty_graph(3), [0, 0, 0]).tolist() == [1, 1, 1]


def test_satisfied_state_is_fixed():
    g = complete_graph(3)
    s = make_state(g, [0, 1, 2], 5)
    assert round_update(g, s, 5, np.random.default_rng(0)) is s


def test_palette_refusal():
    g = complete_graph(3)
    s = make_state(g, [0, 0, 1], 4)
    with pytest.raises(ValidationError, match="max degree"):
        round_update(g, s, 3, np.random.default_rng(0))
    # the override lets it run
    round_update(g, s, 3, np.random.default_rng(0), allow_small_q=True)


def test_k2_collision_frequency():
    g = complete_graph(2)
    rng = np.random.default_rng(5)
    start = make_state(g, [1, 1], 3)
    hits = sum(not round_update(g, start, 3, rng).converged for _ in range(100_000))
    # 2 of the 4 equally likely redraw pairs collide
    assert abs(hits / 100_000 - 0.5) < 0.01


def test_isolated_unsatisfied_vertex_redraws_freely():
    g = empty_graph(1)
    fake = GameState(np.array([2]), np.array([0], dtype=np.int8), 0)
    seen = set()
    rng = np.random.default_rng(1)
    for _ in range(200):
        nxt = round_update(g, fake, 4, rng)
        assert nxt.converged
        seen.add(int(nxt.assignment[0]))
    assert seen == {0, 1, 2, 3}


def test_edgeless_converges_immediately():
    for q in (1, 2, 7):
        assert play_to_convergence(empty_graph(6), q, 3).rounds == 0


def test_k2_conditioned_on_collision():
    g = complete_graph(2)
    rng = np.random.default_rng(17)
    T = [play(g, 3, [0, 0], rng).rounds for _ in range(100_000)]
    # geometric with success 1/2: mean 2
    assert abs(np.mean(T) - 2.0) < 0.05


def test_k2_unconditioned_mean():
    g = complete_graph(2)
    T = [play_to_convergence(g, 3, s).rounds for s in range(100_000)]
    # collision at the start with probability 1/3, then mean 2
    assert abs(np.mean(T) - 2 / 3) < 0.02


def test_play_is_deterministic_per_seed():
    g = generate_er(40, 0.1, 3)
    q = max_degree(g) + 2
    a = play_to_convergence(g, q, 99, record=True)
    b = play_to_convergence(g, q, 99, record=True)
    assert a.rounds == b.rounds
    assert np.array_equal(a.final.assignment, b.final.assignment)
    assert a.trajectory == b.trajectory


def test_timeout_carries_partial_trajectory():
    g = complete_graph(2)
    with pytest.raises(ConvergenceTimeout) as info:
        play(g, 3, [1, 1], np.random.default_rng(0), max_rounds=0, record=True)
    assert info.value.result.trajectory == [(0, 0, 1)]


def test_satisfaction_lower_bound_values():
    assert satisfaction_lower_bound(2, 0) == 1.0
    assert satisfaction_lower_bound(5, 3) == 0.125
    assert satisfaction_lower_bound(6, 2) == pytest.approx(0.5625)
    with pytest.raises(ValidationError):
        satisfaction_lower_bound(4, 3)


def test_trajectory_csv(tmp_path):
    g = generate_er(25, 0.2, 8)
    res = play_to_convergence(g, max_degree(g) + 2, 1, record=True)
    p = tmp_path / "t.csv"
    write_trajectory_csv(res, p, header_lines=["seed=1"])
    lines = p.read_text().splitlines()
    assert lines[0] == "# seed=1"
    assert lines[1] == "round,satisfied_count,conflict_edge_count"
    assert len(lines) == 2 + res.rounds + 1


def test_batch_matches_scalar_law():
    g = complete_graph(2)
    T = simulate_batch(g, 3, np.zeros((100_000, 2), dtype=int), np.random.default_rng(2))
    assert abs(T.mean() - 2.0) < 0.05
    assert abs(T.var() - 2.0) < 0.1


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 25), st.floats(0.05, 0.6), st.integers(0, 2**32), st.integers(0, 3))
def test_satisfaction_never_drops(n, p, seed, extra):
    g = generate_er(n, p, seed)
    q = max_degree(g) + 2 + extra
    res = play_to_convergence(g, q, seed, record=True)
    assert res.final.converged
    sat = [s for _, s, _ in res.trajectory]
    assert sat == sorted(sat)
    assert res.trajectory[-1][2] == 0
    assert len(res.trajectory) == res.rounds + 1


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 15), st.integers(0, 2**32))
def test_satisfied_players_keep_colors(n, seed):
    g = generate_er(n, 0.4, seed)
    q = max_degree(g) + 2
    rng = np.random.default_rng(seed)
    state = make_state(g, rng.integers(0, q, n), q)
    while not state.converged:
        nxt = round_update(g, state, q, rng)
        keep = state.payoffs == 1
        assert np.array_equal(nxt.assignment[keep], state.assignment[keep])
        for i in np.flatnonzero(~keep):
            assert all(nxt.assignment[i] != state.assignment[j] for j in g.adjacency[i])
        assert np.array_equal(nxt.payoffs, payoff_vector(g, nxt.assignment))
        assert nxt.round == state.round + 1
        state = nxt


def test_star_resolution_bound_smoke():
    g = star_graph(7)
    T, (events, resolved) = simulate_batch(
        g, 9, np.zeros((2000, 8), dtype=int), np.random.default_rng(0), track_resolution=True)
    assert (resolved <= events).all()
    assert events[0] == T.sum()
