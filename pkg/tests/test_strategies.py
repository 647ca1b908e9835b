from __future__ import annotations

import random
from collections import Counter, deque

import pytest
from hypothesis import given, settings, strategies as st

from multigame.errors import DigitOutOfRange, NoMapping, NotInitialized, TableTooLarge
from multigame.games import GameType, ViewerOutcome, make_spec, resolve_round, revealed_view
from multigame.strategies import (
    STRATEGIES,
    BestPlay,
    BestPlayState,
    FixedChoice,
    RandomStrategy,
    StrategyResources,
    TitForTat,
    bag_select,
    best_play_choice,
    best_play_init,
    best_play_observe,
    best_play_resize,
    build_strategy,
    param_violations,
)


def resources(q=2, round_index=0, prior=(), game_type=GameType.IPD, coop=0, players=2):
    return StrategyResources(
        game_type=game_type,
        q=q,
        round_index=round_index,
        prior_outcomes=list(prior),
        own_moves=[0] * round_index,
        own_payoffs=[0.0] * round_index,
        cooperative_choice=coop,
        player_count=players,
    )


def prepared(strategy, q=2, game_type=GameType.IPD, seed=0):
    strategy.prepare(game_type, q, random.Random(seed))
    return strategy


def test_fixed_choice_is_constant():
    s = prepared(FixedChoice(1))
    rng = random.Random(3)
    assert {s.generate_choice(resources(round_index=i), rng) for i in range(20)} == {1}


def test_random_is_reproducible_and_balanced():
    s = prepared(RandomStrategy())
    draws = [s.generate_choice(resources(), random.Random(42)) for _ in range(3)]
    assert len(set(draws)) == 1
    rng_a, rng_b = random.Random(7), random.Random(7)
    seq_a = [s.generate_choice(resources(), rng_a) for _ in range(10_000)]
    seq_b = [s.generate_choice(resources(), rng_b) for _ in range(10_000)]
    assert seq_a == seq_b
    freq = Counter(seq_a)
    for choice in (0, 1):
        assert 0.47 <= freq[choice] / 10_000 <= 0.53


def test_unprepared_strategy_raises():
    with pytest.raises(NotInitialized):
        RandomStrategy().generate_choice(resources(), random.Random(0))
    s = prepared(TitForTat(), q=2)
    with pytest.raises(NotInitialized):
        s.generate_choice(resources(q=11), random.Random(0))


def test_update_strategy_store():
    s = TitForTat()
    s.update_strategy("label", "trial-7")
    assert s.read("label") == "trial-7"
    s.update_strategy("label", "a")
    s.update_strategy("label", "b")
    assert s.read("label") == "b"
    s.update_strategy("note", "")
    assert s.read("note") == ""
    assert s.read("missing") is None


def ipd_view(viewer_move, opp_move, round_index=0):
    spec = make_spec("IPD", 2)
    res = resolve_round(spec, {"me": viewer_move, "opp": opp_move}, round_index)
    return revealed_view(res, spec, "me")


def test_tit_for_tat_ipd():
    s = prepared(TitForTat())
    rng = random.Random(0)
    assert s.generate_choice(resources(), rng) == 0
    assert s.generate_choice(resources(round_index=1, prior=[ipd_view(0, 1)]), rng) == 1
    assert s.generate_choice(resources(round_index=2, prior=[ipd_view(0, 1), ipd_view(1, 0)]), rng) == 0


def test_tit_for_tat_lpgg_rounds_mean_of_others():
    spec = make_spec("LPGG", 4)
    res = resolve_round(spec, {"me": 2, "b": 10, "c": 4, "d": 4}, 0)
    view = revealed_view(res, spec, "me", {"me": "p0", "b": "p1", "c": "p2", "d": "p3"})
    s = prepared(TitForTat(), q=11, game_type=GameType.LPGG)
    r = resources(q=11, round_index=1, prior=[view], game_type=GameType.LPGG, coop=10, players=4)
    assert s.generate_choice(r, random.Random(0)) == 6


def test_tit_for_tat_lpgg_opens_with_full_contribution():
    s = prepared(TitForTat(), q=11, game_type=GameType.LPGG)
    r = resources(q=11, game_type=GameType.LPGG, coop=10, players=4)
    assert s.generate_choice(r, random.Random(0)) == 10


def test_tit_for_tat_falls_back_to_outcome_symbol():
    spec = make_spec("MG", 3)
    res = resolve_round(spec, {"me": 0, "b": 1, "c": 1}, 0)
    view = revealed_view(res, spec, "me")
    assert view.moves is None
    s = prepared(TitForTat(), game_type=GameType.MG)
    r = resources(round_index=1, prior=[view], game_type=GameType.MG, players=3)
    assert s.generate_choice(r, random.Random(0)) == 0


def test_tit_for_tat_pair_cooperates_forever():
    spec = make_spec("IPD", 2)
    players = {"a": prepared(TitForTat()), "b": prepared(TitForTat())}
    history = {"a": [], "b": []}
    rng = random.Random(0)
    for r in range(50):
        moves = {k: s.generate_choice(resources(round_index=r, prior=history[k]), rng) for k, s in players.items()}
        assert moves == {"a": 0, "b": 0}
        res = resolve_round(spec, moves, r)
        for k in players:
            history[k].append(revealed_view(res, spec, k))


@pytest.mark.parametrize(
    "m, q, pool, length",
    [(3, 2, 1, 8), (3, 3, 1, 27), (1, 2, 4, 2)],
)
def test_best_play_init_shapes(m, q, pool, length):
    state = best_play_init(m, q, pool, random.Random(1))
    assert len(state.tables) == pool
    assert all(len(t) == length for t in state.tables)
    assert all(0 <= x < q for t in state.tables for x in t)
    assert state.scores == [0] * pool
    assert len(state.history) == 0


def test_best_play_init_limits():
    with pytest.raises(TableTooLarge):
        best_play_init(30, 2, 1, random.Random(0))
    with pytest.raises(TableTooLarge):
        best_play_init(2, 2**40, 1, random.Random(0))


def fixed_state(tables, m, q, history=()):
    return BestPlayState(m=m, q=q, tables=[list(t) for t in tables], scores=[0] * len(tables), history=deque(history, maxlen=m))


def test_best_play_choice_binary_example():
    table = [10, 11, 12, 13, 14, 15, 16, 17]  # sentinel values expose the index read
    state = fixed_state([table], 3, 2, [0, 1, 0])
    assert best_play_choice(state, random.Random(0)) == 12


def test_best_play_choice_ternary_example():
    table = list(range(27))
    state = fixed_state([table], 3, 3, [2, 2, 2])
    assert best_play_choice(state, random.Random(0)) == 26


def test_best_play_warmup_is_random():
    state = best_play_init(3, 2, 1, random.Random(0))
    draws = Counter(best_play_choice(state, random.Random(s)) for s in range(200))
    assert set(draws) == {0, 1}


def test_best_play_picks_highest_score_lowest_index_on_tie():
    state = fixed_state([[0, 0], [1, 1], [1, 1]], 1, 2, [0])
    state.scores = [2, 5, 5]
    assert best_play_choice(state, random.Random(0)) == 1
    state.scores = [5, 5, 1]
    assert best_play_choice(state, random.Random(0)) == 0


def test_best_play_observe_scores_matching_tables():
    state = fixed_state([[0, 1], [0, 0]], 1, 2, [1])
    best_play_observe(state, 0)
    # index 1: table0 predicted 1 (wrong), table1 predicted 0 (right)
    assert state.scores == [0, 1]
    assert list(state.history) == [0]
    best_play_observe(state, 0)
    assert state.scores == [1, 2]


def test_best_play_observe_no_scoring_during_warmup():
    state = fixed_state([[0, 0, 0, 0]], 2, 2)
    best_play_observe(state, 0)
    assert state.scores == [0]
    best_play_observe(state, 0)
    assert state.scores == [0]
    best_play_observe(state, 0)
    assert state.scores == [1]


def test_best_play_observe_rejects_bad_symbol():
    state = best_play_init(2, 2, 1, random.Random(0))
    with pytest.raises(DigitOutOfRange):
        best_play_observe(state, 2)


def test_best_play_leaves_warmup_after_m_observations():
    # hand-stepped trace: m=2, q=2, table maps index -> 1 - (index % 2)
    table = [1, 0, 1, 0]
    state = fixed_state([table], 2, 2)
    rng = random.Random(5)
    best_play_observe(state, 1)
    assert len(state.history) < state.m
    before = rng.getstate()
    best_play_choice(state, rng)
    assert rng.getstate() != before  # warm-up draw consumed the stream
    best_play_observe(state, 0)
    before = rng.getstate()
    # history [1, 0] -> index 2 -> table[2] == 1
    assert best_play_choice(state, rng) == 1
    assert rng.getstate() == before
    best_play_observe(state, 1)  # history [0, 1] -> index 1
    assert best_play_choice(state, rng) == 0


def test_best_play_observe_never_touches_tables():
    state = best_play_init(3, 3, 3, random.Random(9))
    tables = [list(t) for t in state.tables]
    sym_rng = random.Random(1)
    for _ in range(100):
        best_play_observe(state, sym_rng.randrange(3))
    assert state.tables == tables


def test_best_play_resize():
    rng = random.Random(2)
    state = best_play_init(3, 2, 2, rng)
    state.scores = [4, 1]
    best_play_observe(state, 1)
    assert best_play_resize(state, 3, rng)
    assert state.q == 3
    assert all(len(t) == 27 and all(0 <= x < 3 for x in t) for t in state.tables)
    assert state.scores == [0, 0]
    assert len(state.history) == 0

    tables = [list(t) for t in state.tables]
    state.scores = [3, 3]
    assert not best_play_resize(state, 3, rng)
    assert state.tables == tables and state.scores == [3, 3]

    state2 = best_play_init(2, 2, 1, rng)
    best_play_resize(state2, 4, rng)
    assert len(state2.tables[0]) == 16


def test_best_play_single_table_ignores_scores():
    state = fixed_state([[0, 1, 1, 0]], 2, 2, [1, 1])
    for score in (0, 7, -3):
        state.scores = [score]
        assert best_play_choice(state, random.Random(0)) == 0


def test_best_play_choice_sequence_is_reproducible():
    def run(seed):
        s = BestPlay(memory=3, pool=2)
        rng = random.Random(seed)
        s.prepare(GameType.MG, 2, rng)
        out = []
        for r in range(60):
            out.append(s.generate_choice(resources(round_index=r, game_type=GameType.MG, players=3), rng))
            s.observe(ViewerOutcome("x", r, 0.0, out[-1], (r * 7) % 2, (1, 2)))
        return out

    assert run(11) == run(11)


def test_best_play_strategy_prepare_persists_and_resizes():
    s = BestPlay(memory=2, pool=1)
    rng = random.Random(0)
    assert s.prepare(GameType.MG, 2, rng) == "init q=2"
    tables = s.snapshot()["tables"]
    assert s.prepare(GameType.IPD, 2, rng) is None
    assert s.snapshot()["tables"] == tables
    assert s.prepare(GameType.LPGG, 11, rng) == "resize q=2->11"
    assert len(s.snapshot()["tables"][0]) == 121


def test_bag_select_fixed_and_random():
    tft, bp = TitForTat(), BestPlay()
    mapping = {GameType.IPD: 0, GameType.MG: 1}
    assert bag_select([tft, bp], "fixed", GameType.MG, random.Random(0), mapping) == 1
    with pytest.raises(NoMapping):
        bag_select([tft, bp], "fixed", GameType.LPGG, random.Random(0), mapping)
    assert bag_select([tft], "random", GameType.MG, random.Random(0)) == 0


def test_bag_select_random_frequencies():
    rng = random.Random(2024)
    bag = [RandomStrategy(), TitForTat(), BestPlay()]
    counts = Counter(bag_select(bag, "random", GameType.MG, rng) for _ in range(3000))
    for i in range(3):
        assert 900 <= counts[i] <= 1100


def test_bag_holds_member_for_the_game():
    bag = build_strategy(
        "Bag",
        {"mode": "random", "members": [{"strategy": "FixedChoice", "params": {"choice": 0}}, {"strategy": "FixedChoice", "params": {"choice": 1}}]},
    )
    rng = random.Random(3)
    bag.prepare(GameType.MG, 2, rng)
    first = {bag.generate_choice(resources(round_index=i, game_type=GameType.MG, players=3), rng) for i in range(30)}
    assert len(first) == 1
    assert bag.label in ("Bag/FixedChoice",)


def test_bag_fixed_mapping_from_params():
    bag = build_strategy(
        "Bag",
        {
            "mode": "fixed",
            "members": [{"strategy": "TitForTat"}, {"strategy": "BestPlay", "params": {"memory": 2}}],
            "mapping": {"IPD": 0, "MG": 1},
        },
    )
    bag.prepare(GameType.MG, 2, random.Random(0))
    assert bag.label == "Bag/BestPlay"
    bag.prepare(GameType.IPD, 2, random.Random(0))
    assert bag.label == "Bag/TitForTat"
    with pytest.raises(NoMapping):
        bag.prepare(GameType.LPGG, 11, random.Random(0))


def test_param_violations():
    assert param_violations("BestPlay", {"memory": 3, "pool": 2}) == []
    assert param_violations("BestPlay", {"memory": 0})[0][0] == "params.memory"
    assert param_violations("BestPlay", {"memry": 3})[0][0] == "params.memry"
    assert param_violations("FixedChoice", {})[0][0] == "params.choice"
    assert param_violations("Nope", {})[0][0] == "strategy"
    bad_bag = {"mode": "fixed", "members": [{"strategy": "TitForTat"}], "mapping": {"IPD": 3}}
    assert param_violations("Bag", bad_bag)[0][0] == "params.mapping.IPD"


def test_registry_names():
    assert set(STRATEGIES) == {"Random", "FixedChoice", "TitForTat", "BestPlay", "Bag"}


strategy_factories = st.sampled_from(
    [
        lambda: RandomStrategy(),
        lambda: FixedChoice(1),
        lambda: TitForTat(),
        lambda: BestPlay(memory=2, pool=3),
        lambda: build_strategy("Bag", {"members": [{"strategy": "TitForTat"}, {"strategy": "BestPlay"}]}),
    ]
)


@settings(max_examples=60, deadline=None)
@given(strategy_factories, st.integers(2, 12), st.integers(0, 2**32), st.integers(1, 25))
def test_every_choice_is_in_range(factory, q, seed, rounds):
    s = factory()
    rng = random.Random(seed)
    s.prepare(GameType.LPGG, q, rng)
    prior = []
    for r in range(rounds):
        res = resources(q=q, round_index=r, prior=prior, game_type=GameType.LPGG, coop=q - 1, players=3)
        choice = s.generate_choice(res, rng)
        assert 0 <= choice < q
        others = {"b": rng.randrange(q), "c": rng.randrange(q)}
        view = ViewerOutcome("a", r, 0.0, choice, rng.randrange(q), tuple([0] * q), {"a": choice, **others}, "a")
        prior.append(view)
        s.observe(view)
