import itertools
import math

import numpy as np
import pytest

from noma_games import (
    BROADBAND,
    SENSOR,
    ContentionGame,
    ContentionResources,
    MatchQuotas,
    Matching,
    NetworkScenario,
    PowerControlGame,
    SwapMatching,
    generate_channels,
    initialize_partition,
    matching_sum_rate,
)
from noma_games.oracle import (
    OracleBudget,
    OracleBudgetError,
    brute_force_best_matching,
    brute_force_best_partition,
    contention_nash_certificate,
    count_feasible_matchings,
    downlink_rates,
    power_nash_certificate,
)
from noma_games.rates import downlink_subcarrier_rates


def test_reference_rates_agree_with_engine_rates():
    rng = np.random.default_rng(31)
    for _ in range(30):
        n = int(rng.integers(1, 5))
        gains = {u: float(rng.exponential(1.0)) + 1e-9 for u in range(n)}
        budget = float(rng.uniform(0.5, 4.0))
        noise = float(rng.uniform(0.05, 0.5))
        a = downlink_rates(gains, budget, noise)
        b = downlink_subcarrier_rates(gains, budget, noise)
        for u in gains:
            assert a[u] == pytest.approx(b[u], rel=1e-12)


class TestBestMatching:
    def test_single_user_picks_better_subcarrier(self):
        gains = np.array([[0.2, 0.9]])
        pairs, rate = brute_force_best_matching(gains, 2.0, 0.1, MatchQuotas(1, 1))
        assert pairs == ((0, 1),)
        assert rate == pytest.approx(math.log2(1.0 + 1.0 * 0.9 / 0.1))

    def test_two_by_two_has_seven_feasible_matchings(self):
        assert count_feasible_matchings(2, 2, MatchQuotas(1, 1)) == 7

    def test_maximizer_matches_direct_enumeration(self):
        gains = np.array([[1.0, 0.8], [0.6, 0.1]])
        quotas = MatchQuotas(1, 1)
        candidates = [
            [], [(0, 0)], [(0, 1)], [(1, 0)], [(1, 1)],
            [(0, 0), (1, 1)], [(0, 1), (1, 0)],
        ]
        rates = {
            tuple(pairs): matching_sum_rate(Matching(2, 2, pairs), gains, 2.0, 0.1)
            for pairs in candidates
        }
        expected_pairs = max(rates, key=rates.get)
        pairs, rate = brute_force_best_matching(gains, 2.0, 0.1, quotas)
        assert pairs == expected_pairs
        assert rate == pytest.approx(rates[expected_pairs], rel=1e-12)

    def test_optimum_dominates_the_engine(self):
        rng = np.random.default_rng(32)
        for _ in range(10):
            scen = NetworkScenario(num_users=4, num_subcarriers=3)
            ch = generate_channels(scen, int(rng.integers(0, 2 ** 32)))
            quotas = MatchQuotas(1, 2)
            sm = SwapMatching(1, 2, scen.bs_total_power,
                              scen.noise_power).fit(ch.gains)
            _, best = brute_force_best_matching(
                ch.gains, scen.bs_total_power, scen.noise_power, quotas)
            assert best >= sm.sum_rate_ * (1.0 - 1e-9)

    def test_budget_refusal(self):
        gains = np.ones((8, 6))
        with pytest.raises(OracleBudgetError):
            brute_force_best_matching(gains, 2.0, 0.1, MatchQuotas(3, 2),
                                      OracleBudget(max_enumeration=100))


class TestBestPartition:
    @staticmethod
    def _instance(seed, sensors, broadband, k):
        scen = NetworkScenario(num_users=sensors + broadband, num_subcarriers=k)
        ch = generate_channels(scen, seed)
        cats = [SENSOR] * sensors + [BROADBAND] * broadband
        return scen, ch.gains, cats

    def test_no_movers_returns_the_anchors(self):
        scen, gains, cats = self._instance(41, 2, 0, 2)
        p = initialize_partition(gains, cats, scen.bs_total_power,
                                 scen.noise_power, 2)
        groups, value = brute_force_best_partition(
            p, gains, scen.bs_total_power, scen.noise_power, 2)
        assert groups == ((0,), (1,))
        assert value > 0.0

    def test_one_mover_two_groups_picks_the_better(self):
        scen, gains, cats = self._instance(42, 2, 1, 2)
        p = initialize_partition(gains, cats, scen.bs_total_power,
                                 scen.noise_power, 2)
        groups, value = brute_force_best_partition(
            p, gains, scen.bs_total_power, scen.noise_power, 2)
        share = scen.bs_total_power / 2
        options = []
        for dst in range(2):
            total = 0.0
            for i in range(2):
                members = [p.anchors[i]] + ([2] if i == dst else [])
                rates = downlink_rates(
                    {u: gains[u, p.subcarriers[i]] for u in members},
                    share, scen.noise_power)
                total += math.fsum(rates.values()) / 2
            options.append(total)
        assert value == pytest.approx(max(options), rel=1e-12)

    def test_two_movers_enumerates_four_placements(self):
        scen, gains, cats = self._instance(43, 2, 2, 2)
        p = initialize_partition(gains, cats, scen.bs_total_power,
                                 scen.noise_power, max_group_size=3)
        share = scen.bs_total_power / 2
        best = -math.inf
        for placement in itertools.product(range(2), repeat=2):
            groups = [[p.anchors[0]], [p.anchors[1]]]
            for mover, dst in zip((2, 3), placement):
                groups[dst].append(mover)
            if max(len(g) for g in groups) > 3:
                continue
            total = 0.0
            for i in range(2):
                rates = downlink_rates(
                    {u: gains[u, p.subcarriers[i]] for u in groups[i]},
                    share, scen.noise_power)
                total += math.fsum(rates.values()) / 2
            best = max(best, total)
        _, value = brute_force_best_partition(
            p, gains, scen.bs_total_power, scen.noise_power, 3)
        assert value == pytest.approx(best, rel=1e-12)

    def test_budget_refusal(self):
        scen, gains, cats = self._instance(44, 2, 3, 2)
        p = initialize_partition(gains, cats, scen.bs_total_power,
                                 scen.noise_power, 4)
        with pytest.raises(OracleBudgetError):
            brute_force_best_partition(p, gains, scen.bs_total_power,
                                       scen.noise_power, 4,
                                       OracleBudget(max_enumeration=2))


class TestCertificates:
    def test_single_player_converged_is_nash(self):
        gains = np.array([[0.8, 0.3]])
        game = PowerControlGame(price_per_watt=0.4, grid_points=5).fit(gains)
        assert game.converged_
        assert power_nash_certificate(game.allocation_, gains, 1.0, 0.1,
                                      0.4, 5)

    def test_perturbed_equilibrium_fails(self):
        gains = np.array([[0.8, 0.3]])
        # zero power with a free rate on offer is clearly not a best response
        assert not power_nash_certificate(np.zeros((1, 2)), gains, 1.0, 0.1,
                                          0.0, 5)

    def test_two_user_converged_game_certifies(self):
        scen = NetworkScenario(num_users=2, num_subcarriers=2, cell_radius=10.0)
        for seed in range(5):
            ch = generate_channels(scen, seed)
            game = PowerControlGame(noise_power=1.0, price_per_watt=0.5,
                                    grid_points=5).fit(ch.gains)
            assert game.converged_
            assert power_nash_certificate(game.allocation_, ch.gains, 1.0,
                                          1.0, 0.5, 5)

    def test_power_budget_refusal(self):
        gains = np.ones((3, 4))
        with pytest.raises(OracleBudgetError):
            power_nash_certificate(np.zeros((3, 4)), gains, 1.0, 0.1, 0.0,
                                   grid_points=9,
                                   budget=OracleBudget(max_enumeration=10))

    def test_contention_certificate_flags_deviation(self):
        resources = ContentionResources(1, 1, 4)
        game = ContentionGame(num_sequences=4, price=0.0, w_max=4).fit(2)
        assert contention_nash_certificate(game.windows_, resources, 0.0, 4)
        # everyone asleep with free attempts available is not an equilibrium
        assert not contention_nash_certificate([4, 4], resources, 0.0, 4)
