"""Problem instances and reproducible channel generation.

A :class:`NetworkScenario` is the static description of a single cell; a
:class:`ChannelState` is one random realization of per-user per-subcarrier
power gains. Generation is a pure function of (scenario, seed).
"""

from dataclasses import dataclass

import numpy as np

from .validation import ValidationError, check_count, check_positive


@dataclass(frozen=True)
class NetworkScenario:
    """Static single-cell instance: populations, budgets, noise, geometry.

    Powers are linear watts, distances meters. ``per_user_power_budget`` is
    the uplink per-user cap, ``bs_total_power`` the downlink broadcast budget,
    ``noise_power`` the per-subcarrier receiver noise.
    """

    num_users: int = 8
    num_subcarriers: int = 4
    bs_total_power: float = 4.0
    per_user_power_budget: float = 1.0
    noise_power: float = 0.1
    cell_radius: float = 2.0
    path_loss_exponent: float = 3.0
    min_distance: float = 1.0

    def __post_init__(self):
        check_count(self.num_users, "num_users", 1)
        check_count(self.num_subcarriers, "num_subcarriers", 1)
        check_positive(self.bs_total_power, "bs_total_power")
        check_positive(self.per_user_power_budget, "per_user_power_budget")
        check_positive(self.noise_power, "noise_power")
        check_positive(self.min_distance, "min_distance")
        check_positive(self.cell_radius, "cell_radius")
        if self.cell_radius < self.min_distance:
            raise ValidationError(
                f"cell_radius: must be >= min_distance "
                f"({self.cell_radius} < {self.min_distance})"
            )
        if self.path_loss_exponent < 2.0:
            raise ValidationError(
                f"path_loss_exponent: must be >= 2, got {self.path_loss_exponent}"
            )


@dataclass(frozen=True)
class ChannelState:
    """One channel realization: gains[user][subcarrier] plus user distances."""

    gains: np.ndarray
    user_distances: np.ndarray

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=float)
        distances = np.asarray(self.user_distances, dtype=float)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "user_distances", distances)
        if gains.ndim != 2:
            raise ValidationError(f"gains: expected a 2-D matrix, got shape {gains.shape}")
        if distances.shape != (gains.shape[0],):
            raise ValidationError(
                f"user_distances: expected shape ({gains.shape[0]},), got {distances.shape}"
            )
        if not np.all(np.isfinite(gains)) or np.any(gains < 0.0):
            raise ValidationError("gains: entries must be finite and >= 0")

    @property
    def num_users(self):
        return self.gains.shape[0]

    @property
    def num_subcarriers(self):
        return self.gains.shape[1]


def generate_channels(scenario, seed):
    """Draw one Rayleigh-faded channel realization for a scenario.

    Each user sits at a distance drawn uniformly in
    [min_distance, cell_radius]; the power gain on every subcarrier is
    distance**(-path_loss_exponent) times an independent unit-mean
    exponential fade. The draw is fully determined by ``seed``.
    """
    if not isinstance(scenario, NetworkScenario):
        raise ValidationError(f"scenario: expected NetworkScenario, got {type(scenario).__name__}")
    rng = np.random.default_rng(int(seed))
    n, k = scenario.num_users, scenario.num_subcarriers
    distances = rng.uniform(scenario.min_distance, scenario.cell_radius, size=n)
    fading = rng.exponential(1.0, size=(n, k))
    gains = distances[:, None] ** (-scenario.path_loss_exponent) * fading
    return ChannelState(gains=gains, user_distances=distances)


def sic_order(gains, subcarrier, users):
    """Decode order on one subcarrier: descending gain, ties by ascending id.

    ``gains`` is the (num_users, num_subcarriers) matrix; ``users`` any
    non-empty iterable of user ids present in it.
    """
    gains = np.asarray(gains, dtype=float)
    users = [int(u) for u in users]
    if not users:
        raise ValidationError("users: must be non-empty")
    n, k = gains.shape
    if not 0 <= int(subcarrier) < k:
        raise ValidationError(f"subcarrier: index {subcarrier} out of range for {k} subcarriers")
    for u in users:
        if not 0 <= u < n:
            raise ValidationError(f"users: user id {u} out of range for {n} users")
    col = gains[:, int(subcarrier)]
    return sorted(users, key=lambda u: (-col[u], u))
