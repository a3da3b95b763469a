"""Downlink user grouping as a strategic-form coalition game.

Two user categories: sensors are pinned one-per-subcarrier (they anchor the
groups), broadband users hop between groups to raise their own rate until no
profitable switch remains (Nash-stable). Because the group count is fixed by
the sensor count, a switch between two groups never changes the value of any
other group.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .rates import RateReport, downlink_subcarrier_rates
from .validation import (
    ValidationError,
    check_count,
    check_gain_matrix,
    check_nonnegative,
    check_positive,
)

SENSOR = "sensor"
BROADBAND = "broadband"


def _check_categories(categories, n):
    cats = [str(c) for c in categories]
    if len(cats) != n:
        raise ValidationError(f"categories: expected {n} entries, got {len(cats)}")
    for u, c in enumerate(cats):
        if c not in (SENSOR, BROADBAND):
            raise ValidationError(
                f"categories: user {u} has unknown category {c!r}"
            )
    return cats


class Partition:
    """Disjoint sensor-anchored groups, one per claimed subcarrier.

    Groups are ordered by ascending anchor id; ``subcarriers[i]`` is the
    subcarrier group i transmits on.
    """

    def __init__(self, groups, anchors, subcarriers):
        self.groups = [set(g) for g in groups]
        self.anchors = list(anchors)
        self.subcarriers = list(subcarriers)
        self.validate()

    def validate(self):
        if not (len(self.groups) == len(self.anchors) == len(self.subcarriers)):
            raise ValidationError("partition: groups, anchors and subcarriers disagree in length")
        seen = set()
        for i, group in enumerate(self.groups):
            if self.anchors[i] not in group:
                raise ValidationError(f"partition: anchor of group {i} is not a member")
            if seen & group:
                raise ValidationError("partition: groups are not disjoint")
            seen |= group
        if len(set(self.subcarriers)) != len(self.subcarriers):
            raise ValidationError("partition: two groups share a subcarrier")

    @property
    def num_groups(self):
        return len(self.groups)

    def all_users(self):
        users = set()
        for g in self.groups:
            users |= g
        return users

    def group_of(self, user):
        for i, g in enumerate(self.groups):
            if user in g:
                return i
        raise ValidationError(f"user: {user} is not in the partition")

    def members(self, group):
        if not 0 <= group < len(self.groups):
            raise ValidationError(f"group: index {group} out of range")
        return sorted(self.groups[group])

    def move(self, user, to_group):
        src = self.group_of(user)
        self.groups[src].discard(user)
        self.groups[to_group].add(user)

    def canonical(self):
        return tuple(tuple(sorted(g)) for g in self.groups)

    def copy(self):
        return Partition(
            [set(g) for g in self.groups], list(self.anchors), list(self.subcarriers)
        )


@dataclass(frozen=True)
class SwitchDecision:
    accept: bool
    rate_delta: float


def initialize_partition(gains, categories, bs_total_power, noise_power,
                         max_group_size, min_rates=None):
    """Anchor each sensor on its own subcarrier, then place broadband users.

    Sensors claim subcarriers greedily in descending best-gain order (each
    takes its highest-gain unclaimed subcarrier). Broadband users then join,
    in ascending id, whichever non-full group gives them the highest own rate
    among those whose anchor would stay at or above its QoS floor.
    """
    gains = check_gain_matrix(gains)
    n, k = gains.shape
    cats = _check_categories(categories, n)
    sensors = [u for u in range(n) if cats[u] == SENSOR]
    movers = [u for u in range(n) if cats[u] == BROADBAND]
    if not sensors:
        raise ValidationError("categories: at least one sensor is required")
    if len(sensors) > k:
        raise ValidationError(
            f"categories: {len(sensors)} sensors need {len(sensors)} orthogonal "
            f"subcarriers but only {k} exist"
        )
    check_positive(bs_total_power, "bs_total_power")
    check_positive(noise_power, "noise_power")
    check_count(max_group_size, "max_group_size", 1)

    claim_order = sorted(sensors, key=lambda u: (-gains[u].max(), u))
    claimed = {}
    free = set(range(k))
    for u in claim_order:
        best = min(free, key=lambda s: (-gains[u, s], s))
        claimed[u] = best
        free.discard(best)

    anchors = sorted(sensors)
    partition = Partition(
        groups=[{u} for u in anchors],
        anchors=anchors,
        subcarriers=[claimed[u] for u in anchors],
    )

    num_groups = partition.num_groups
    share = bs_total_power / num_groups
    for u in movers:
        best_group = None
        best_rate = float("-inf")
        for i in range(num_groups):
            if len(partition.groups[i]) >= max_group_size:
                continue
            members = partition.members(i) + [u]
            s = partition.subcarriers[i]
            rates = downlink_subcarrier_rates(
                {v: gains[v, s] for v in members}, share, noise_power
            )
            if min_rates is not None:
                anchor = partition.anchors[i]
                if rates[anchor] / num_groups < float(min_rates[anchor]):
                    continue
            rate = rates[u] / num_groups
            if rate > best_rate:
                best_rate = rate
                best_group = i
        if best_group is None:
            raise ValidationError(
                f"max_group_size: no group can admit broadband user {u} "
                f"within the size cap and QoS floors"
            )
        partition.groups[best_group].add(u)
    partition.validate()
    return partition


def coalition_value(partition, group, gains, bs_total_power, noise_power):
    """Total rate earned by one group's members on its subcarrier.

    Each member's rate is log2(1+SINR)/G with G the number of active groups;
    the subcarrier budget is bs_total_power/G split inverse to gain. The value
    depends on other groups only through the (fixed) group count.
    """
    gains = check_gain_matrix(gains)
    if not 0 <= group < partition.num_groups:
        raise ValidationError(f"group: index {group} is not in this partition")
    num_groups = partition.num_groups
    share = bs_total_power / num_groups
    s = partition.subcarriers[group]
    rates = downlink_subcarrier_rates(
        {u: gains[u, s] for u in partition.members(group)}, share, noise_power
    )
    return sum(rates[u] for u in sorted(rates)) / num_groups


def _member_rate(partition, group, members, user, gains, share, noise_power):
    s = partition.subcarriers[group]
    rates = downlink_subcarrier_rates(
        {v: gains[v, s] for v in members}, share, noise_power
    )
    return rates[user] / partition.num_groups


def evaluate_switch(user, to_group, partition, gains, categories,
                    bs_total_power, noise_power, max_group_size,
                    improvement_epsilon, min_rates=None):
    """Decide whether a broadband user should jump to another group.

    Accept iff the destination has room, the user's own rate strictly
    improves by more than ``improvement_epsilon``, and the destination
    anchor's rate stays at or above its QoS floor. Returns the decision and
    the user's rate delta either way.
    """
    gains = check_gain_matrix(gains)
    n = gains.shape[0]
    cats = _check_categories(categories, n)
    if cats[user] != BROADBAND:
        raise ValidationError(f"user: {user} is a sensor and sensors are pinned")
    from_group = partition.group_of(user)
    if to_group == from_group:
        raise ValidationError("to_group: must differ from the user's current group")
    if not 0 <= to_group < partition.num_groups:
        raise ValidationError(f"to_group: index {to_group} out of range")

    share = bs_total_power / partition.num_groups
    current = _member_rate(
        partition, from_group, partition.members(from_group), user,
        gains, share, noise_power,
    )
    joined_members = partition.members(to_group) + [user]
    proposed = _member_rate(
        partition, to_group, joined_members, user, gains, share, noise_power
    )
    delta = proposed - current

    if len(partition.groups[to_group]) >= max_group_size:
        return SwitchDecision(False, delta)
    if not delta > improvement_epsilon:
        return SwitchDecision(False, delta)
    anchor = partition.anchors[to_group]
    floor = 0.0 if min_rates is None else float(min_rates[anchor])
    anchor_rate = _member_rate(
        partition, to_group, joined_members, anchor, gains, share, noise_power
    )
    if anchor_rate < floor:
        return SwitchDecision(False, delta)
    return SwitchDecision(True, delta)


@dataclass(frozen=True)
class SwitchEvent:
    """One executed switch: who moved where and what it gained."""

    user: int
    from_group: int
    to_group: int
    rate_delta: float
    partition_after: tuple


def partition_rate_report(partition, gains, bs_total_power, noise_power):
    """Rates of every user under a partition, normalized by the group count."""
    gains = check_gain_matrix(gains)
    num_groups = partition.num_groups
    share = bs_total_power / num_groups
    pair_rates = {}
    for i in range(num_groups):
        s = partition.subcarriers[i]
        members = partition.members(i)
        rates = downlink_subcarrier_rates(
            {u: gains[u, s] for u in members}, share, noise_power
        )
        for u in members:
            pair_rates[(u, s)] = rates[u] / num_groups
    return RateReport.from_pair_rates(pair_rates, num_groups)


class CoalitionFormation(BaseEstimator):
    """Hedonic switch dynamics over sensor-anchored downlink groups.

    Parameters
    ----------
    bs_total_power : float
        Downlink broadcast budget in watts, split evenly over active groups.
    noise_power : float
        Receiver noise per subcarrier in watts.
    max_group_size : int
        SIC depth cap per subcarrier.
    max_rounds : int
        Passes over the broadband users before giving up.
    improvement_epsilon : float
        Minimum own-rate gain (bits/s/Hz) for a switch to be accepted.

    Attributes
    ----------
    partition_ : Partition
        Final grouping.
    labels_ : ndarray of shape (n_users,)
        Group index per user.
    history_ : list of SwitchEvent
        Every executed switch in order.
    n_rounds_ : int
        Passes executed (the last one makes no switch when stable).
    nash_stable_ : bool
        True when the dynamics stopped because no switch was accepted.
    rate_report_ : RateReport
        Per-user and per-pair rates of the final partition.
    """

    def __init__(self, bs_total_power=4.0, noise_power=0.1, max_group_size=2,
                 max_rounds=100, improvement_epsilon=1e-9):
        self.bs_total_power = bs_total_power
        self.noise_power = noise_power
        self.max_group_size = max_group_size
        self.max_rounds = max_rounds
        self.improvement_epsilon = improvement_epsilon

    def fit(self, X, categories, min_rates=None):
        """Form groups on a gain matrix X given per-user categories.

        ``categories`` holds "sensor"/"broadband" per user; ``min_rates``
        optionally gives per-user QoS floors (only sensor entries are used).
        """
        gains = check_gain_matrix(X)
        n = gains.shape[0]
        cats = _check_categories(categories, n)
        power = check_positive(self.bs_total_power, "bs_total_power")
        noise = check_positive(self.noise_power, "noise_power")
        cap = check_count(self.max_group_size, "max_group_size", 1)
        max_rounds = check_count(self.max_rounds, "max_rounds", 1)
        epsilon = check_positive(self.improvement_epsilon, "improvement_epsilon")
        if min_rates is not None:
            min_rates = [check_nonnegative(r, "min_rates") for r in min_rates]
            if len(min_rates) != n:
                raise ValidationError(f"min_rates: expected {n} entries")

        partition = initialize_partition(gains, cats, power, noise, cap,
                                         min_rates=min_rates)
        movers = [u for u in range(n) if cats[u] == BROADBAND]

        history = []
        stable = False
        rounds = 0
        for _ in range(max_rounds):
            rounds += 1
            moved = False
            for u in movers:
                current = partition.group_of(u)
                best_target = None
                best_delta = float("-inf")
                for g in range(partition.num_groups):
                    if g == current:
                        continue
                    decision = evaluate_switch(
                        u, g, partition, gains, cats, power, noise, cap,
                        epsilon, min_rates,
                    )
                    if decision.accept and decision.rate_delta > best_delta:
                        best_delta = decision.rate_delta
                        best_target = g
                if best_target is not None:
                    partition.move(u, best_target)
                    partition.validate()
                    history.append(SwitchEvent(
                        user=u, from_group=current, to_group=best_target,
                        rate_delta=best_delta,
                        partition_after=partition.canonical(),
                    ))
                    moved = True
            if not moved:
                stable = True
                break

        labels = np.empty(n, dtype=int)
        for i, group in enumerate(partition.groups):
            for u in group:
                labels[u] = i

        self.partition_ = partition
        self.labels_ = labels
        self.history_ = history
        self.n_rounds_ = rounds
        self.nash_stable_ = stable
        self.rate_report_ = partition_rate_report(partition, gains, power, noise)
        return self
