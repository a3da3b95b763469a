import numpy as np
import pytest

from noma_games import (
    NetworkScenario,
    ValidationError,
    generate_channels,
    sic_order,
)


def test_degenerate_geometry_gain_is_the_fade_draw():
    # min_distance == cell_radius pins the user at distance 1, so the
    # path-loss factor is exactly 1 and the gain equals the exponential draw
    scen = NetworkScenario(num_users=1, num_subcarriers=1, min_distance=1.0,
                           cell_radius=1.0, path_loss_exponent=2.0)
    ch = generate_channels(scen, seed=5)
    assert ch.user_distances[0] == 1.0
    rng = np.random.default_rng(5)
    rng.uniform(1.0, 1.0, size=1)
    expected = rng.exponential(1.0, size=(1, 1))
    assert ch.gains[0, 0] == expected[0, 0]


def test_same_seed_is_bit_identical():
    scen = NetworkScenario(num_users=5, num_subcarriers=3)
    a = generate_channels(scen, seed=77)
    b = generate_channels(scen, seed=77)
    assert np.array_equal(a.gains, b.gains)
    assert np.array_equal(a.user_distances, b.user_distances)
    c = generate_channels(scen, seed=78)
    assert not np.array_equal(a.gains, c.gains)


def test_mean_gain_matches_path_loss_at_fixed_distance():
    # distance pinned at 2 with alpha=3: mean gain = 2^-3 = 0.125
    scen = NetworkScenario(num_users=1, num_subcarriers=1, min_distance=2.0,
                           cell_radius=2.0, path_loss_exponent=3.0)
    total = 0.0
    n_seeds = 100_000
    for seed in range(n_seeds):
        total += generate_channels(scen, seed).gains[0, 0]
    mean = total / n_seeds
    assert abs(mean - 0.125) / 0.125 < 0.02


def test_gains_positive_and_finite():
    scen = NetworkScenario(num_users=8, num_subcarriers=4)
    for seed in range(50):
        ch = generate_channels(scen, seed)
        assert np.all(np.isfinite(ch.gains))
        assert np.all(ch.gains > 0.0)


def test_invalid_scenarios_name_the_field():
    with pytest.raises(ValidationError, match="num_users"):
        NetworkScenario(num_users=0)
    with pytest.raises(ValidationError, match="noise_power"):
        NetworkScenario(noise_power=0.0)
    with pytest.raises(ValidationError, match="cell_radius"):
        NetworkScenario(cell_radius=1.0, min_distance=2.0)
    with pytest.raises(ValidationError, match="path_loss_exponent"):
        NetworkScenario(path_loss_exponent=1.5)
    with pytest.raises(ValidationError, match="per_user_power_budget"):
        NetworkScenario(per_user_power_budget=-1.0)


def test_sic_order_two_users():
    gains = np.array([[0.9], [0.3]])
    assert sic_order(gains, 0, [0, 1]) == [0, 1]
    assert sic_order(gains, 0, [1, 0]) == [0, 1]


def test_sic_order_tie_breaks_by_id():
    gains = np.array([[0.5], [0.5]])
    assert sic_order(gains, 0, {1, 0}) == [0, 1]


def test_sic_order_matches_comparison_sort():
    rng = np.random.default_rng(11)
    for _ in range(20):
        gains = rng.exponential(1.0, size=(6, 2))
        users = list(range(6))
        got = sic_order(gains, 1, users)
        # independent selection sort on (gain desc, id asc)
        remaining = list(users)
        expected = []
        while remaining:
            best = remaining[0]
            for u in remaining[1:]:
                if gains[u, 1] > gains[best, 1] or (
                        gains[u, 1] == gains[best, 1] and u < best):
                    best = u
            expected.append(best)
            remaining.remove(best)
        assert got == expected


def test_sic_order_is_a_permutation():
    rng = np.random.default_rng(12)
    for _ in range(20):
        gains = rng.exponential(1.0, size=(7, 3))
        users = sorted(rng.choice(7, size=4, replace=False).tolist())
        assert sorted(sic_order(gains, 0, users)) == users


def test_sic_order_equivariant_under_row_permutation():
    rng = np.random.default_rng(13)
    gains = rng.exponential(1.0, size=(5, 2))
    perm = [3, 0, 4, 1, 2]  # new id -> old id
    permuted = gains[perm]
    base = sic_order(gains, 0, range(5))
    relabeled = sic_order(permuted, 0, range(5))
    # mapping old ids through the permutation gives the same order
    inverse = {old: new for new, old in enumerate(perm)}
    assert [inverse[u] for u in base] == relabeled


def test_sic_order_rejects_bad_input():
    gains = np.ones((2, 2))
    with pytest.raises(ValidationError, match="users"):
        sic_order(gains, 0, [])
    with pytest.raises(ValidationError, match="subcarrier"):
        sic_order(gains, 5, [0])
    with pytest.raises(ValidationError, match="users"):
        sic_order(gains, 0, [9])
