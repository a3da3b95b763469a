import math

import pytest

from noma_games import (
    COLLISION,
    DEFERRED,
    SUCCESS,
    ContentionGame,
    ContentionResources,
    ValidationError,
    contention_round,
    contention_utility,
    monte_carlo_success_rate,
    success_probability,
    update_window,
)
from noma_games.oracle import contention_nash_certificate


class TestContentionRound:
    def test_single_user_always_succeeds_when_attempting(self):
        resources = ContentionResources(2, 1, 2)
        for seed in range(50):
            outcome = contention_round([1], resources, seed)
            assert outcome.statuses == (SUCCESS,)

    def test_forced_collision_on_single_triple(self):
        resources = ContentionResources(1, 1, 1)
        outcome = contention_round([1, 1], resources, 3)
        assert outcome.statuses == (COLLISION, COLLISION)
        assert outcome.occupancy == {0: 2}

    def test_status_conservation(self):
        resources = ContentionResources(2, 2, 2)
        for seed in range(30):
            outcome = contention_round([1, 2, 4, 8], resources, seed)
            counts = [outcome.count(s) for s in (SUCCESS, COLLISION, DEFERRED)]
            assert sum(counts) == 4

    def test_shared_triples_never_succeed(self):
        resources = ContentionResources(1, 2, 2)
        for seed in range(30):
            outcome = contention_round([1, 1, 1, 2, 2], resources, seed)
            for u, choice in enumerate(outcome.choices):
                if choice is None:
                    assert outcome.statuses[u] == DEFERRED
                elif outcome.occupancy[choice] >= 2:
                    assert outcome.statuses[u] == COLLISION
                else:
                    assert outcome.statuses[u] == SUCCESS

    def test_same_seed_identical(self):
        resources = ContentionResources(2, 1, 3)
        a = contention_round([2, 3, 4], resources, 11)
        b = contention_round([2, 3, 4], resources, 11)
        assert a == b

    def test_bad_window_rejected(self):
        with pytest.raises(ValidationError, match="windows"):
            contention_round([0], ContentionResources(), 1)

    def test_triple_decode(self):
        resources = ContentionResources(2, 3, 4)
        assert resources.num_triples == 24
        assert resources.decode(0) == (0, 0, 0)
        assert resources.decode(23) == (1, 2, 3)
        assert resources.decode(13) == (1, 0, 1)


class TestSuccessProbability:
    def test_single_always_on(self):
        assert success_probability(0, [1], ContentionResources()) == 1.0

    def test_two_users_half(self):
        # exactly (1 - 1/2) with both forced on and two sequences
        assert success_probability(0, [1, 1], ContentionResources(1, 1, 2)) == 0.5

    def test_decreasing_in_others_aggression(self):
        resources = ContentionResources(1, 1, 4)
        p_high = success_probability(0, [1, 1], resources)
        p_low = success_probability(0, [1, 8], resources)
        assert p_high < p_low

    def test_monte_carlo_agreement(self):
        resources = ContentionResources(1, 1, 2)
        freq = monte_carlo_success_rate([1, 1], resources, 100_000)
        assert abs(freq[0] - 0.5) < 0.005  # 1%
        se = math.sqrt(0.25 / 100_000)
        assert abs(freq[0] - 0.5) < 3 * se


class TestUtilityAndBestResponse:
    def test_free_single_user(self):
        assert contention_utility(0, [1], ContentionResources(), 0.0) == 1.0

    def test_symmetric_users_equal_utilities(self):
        resources = ContentionResources(1, 2, 2)
        us = [contention_utility(u, [3, 3, 3], resources, 0.4) for u in range(3)]
        assert us[0] == us[1] == us[2]

    def test_costly_attempts_push_to_largest_window(self):
        # price above any achievable success probability
        assert update_window(0, [1], ContentionResources(), 1.5, 6) == 6

    def test_price_tie_prefers_smallest_window(self):
        # single user: utility is (1 - price)/W, identically zero at price 1
        assert update_window(0, [4], ContentionResources(), 1.0, 6) == 1

    def test_matches_exhaustive_argmax(self):
        resources = ContentionResources(1, 1, 3)
        r = resources.num_triples
        for others in ([1], [2], [4]):
            for price in (0.0, 0.3, 0.8, 2.0):
                windows = [2] + others
                got = update_window(0, windows, resources, price, 4)
                best_w, best_u = None, -math.inf
                for w in range(1, 5):
                    prod = 1.0
                    for om in others:
                        prod *= 1.0 - 1.0 / (om * r)
                    util = prod / w - price / w
                    if util > best_u:
                        best_u, best_w = util, w
                assert got == best_w


class TestContentionGame:
    def test_single_user_free_attempts(self):
        game = ContentionGame(price=0.0, w_max=8).fit(1)
        assert game.windows_ == [1]
        assert game.converged_
        assert game.n_rounds_ <= 2

    def test_uniform_regimes_stay_symmetric(self):
        # free attempts: everyone ends at W=1; prohibitive price: all at w_max
        cheap = ContentionGame(num_sequences=8, price=0.0, w_max=4).fit(3)
        assert cheap.windows_ == [1, 1, 1]
        dear = ContentionGame(num_sequences=2, price=2.0, w_max=4).fit(3)
        assert dear.windows_ == [4, 4, 4]

    def test_mixed_regime_reaches_nash_anyway(self):
        # anti-coordination splits the population but still certifies
        game = ContentionGame(num_sequences=2, price=0.3, w_max=4).fit(4)
        assert game.converged_
        assert contention_nash_certificate(game.windows_, game.resources(),
                                           0.3, 4)

    def test_converged_profile_has_no_profitable_deviation(self):
        for n in (2, 3, 5):
            for price in (0.0, 0.25, 0.7):
                game = ContentionGame(num_slots=2, num_sequences=2,
                                      price=price, w_max=6).fit(n)
                assert game.converged_
                for u in range(n):
                    base = contention_utility(u, game.windows_,
                                              game.resources(), price)
                    for w in range(1, 7):
                        trial = list(game.windows_)
                        trial[u] = w
                        assert contention_utility(
                            u, trial, game.resources(), price) <= base + 1e-9
