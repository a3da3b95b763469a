"""Brute-force references for the tests and the --oracle harness flag.

Everything here recomputes rates and payoffs from scratch rather than calling
the engine modules, so an engine bug cannot hide inside its own oracle. Each
enumeration sizes itself up front and refuses to run past the budget instead
of silently truncating.
"""

import itertools
import math
from dataclasses import dataclass

from .validation import ValidationError, check_count, check_gain_matrix

DEFAULT_ENUMERATION_LIMIT = 10_000_000


class OracleBudgetError(RuntimeError):
    """The requested enumeration exceeds the oracle budget."""


@dataclass(frozen=True)
class OracleBudget:
    """Hard cap on the number of states an oracle may enumerate."""

    max_enumeration: int = DEFAULT_ENUMERATION_LIMIT

    def check(self, size, what):
        if size > self.max_enumeration:
            raise OracleBudgetError(
                f"{what}: {size} states exceed the oracle budget "
                f"of {self.max_enumeration}"
            )


def downlink_rates(user_gains, budget, noise):
    """Reference downlink rates on one subcarrier (independent of rates.py).

    Budget split proportional to 1/gain (remainder to the weakest user),
    decoding in descending gain with ascending-id tie-break; earlier-decoded
    users interfere.
    """
    users = sorted(user_gains)
    total_inverse = 0.0
    for u in users:
        if user_gains[u] <= 0.0:
            raise ValidationError(f"gains: user {u} has non-positive gain")
        total_inverse += 1.0 / user_gains[u]
    weakest = min(users, key=lambda u: (user_gains[u], u))
    powers = {}
    spent = 0.0
    for u in users:
        if u == weakest:
            continue
        powers[u] = budget * (1.0 / user_gains[u]) / total_inverse
        spent += powers[u]
    powers[weakest] = budget - spent

    order = sorted(users, key=lambda u: (-user_gains[u], u))
    rates = {}
    interfering_power = 0.0
    for u in order:
        g = user_gains[u]
        sinr = powers[u] * g / (g * interfering_power + noise)
        rates[u] = math.log2(1.0 + sinr)
        interfering_power += powers[u]
    return rates


def _matching_rate(assignment, gains, share, noise, k):
    """Sum rate of a per-user subcarrier-subset assignment."""
    total = 0.0
    for s in range(k):
        members = {u: gains[u][s] for u, subs in enumerate(assignment) if s in subs}
        if members:
            total += math.fsum(downlink_rates(members, share, noise).values())
    return total


def brute_force_best_matching(gains, bs_total_power, noise_power, quotas,
                              budget=None):
    """Exhaustively best quota-feasible matching and its sum rate.

    Returns (pairs, sum_rate) with pairs a sorted tuple of (user, subcarrier);
    ties resolve to the lexicographically smallest pair set.
    """
    gains = check_gain_matrix(gains)
    n, k = gains.shape
    budget = budget or OracleBudget()
    subsets = []
    for size in range(quotas.user_quota + 1):
        subsets.extend(itertools.combinations(range(k), size))
    budget.check(len(subsets) ** n, "matchings")

    share = bs_total_power / k
    gains_list = gains.tolist()
    best_rate = float("-inf")
    best_pairs = None
    for assignment in itertools.product(subsets, repeat=n):
        load = [0] * k
        feasible = True
        for subs in assignment:
            for s in subs:
                load[s] += 1
                if load[s] > quotas.subcarrier_quota:
                    feasible = False
                    break
            if not feasible:
                break
        if not feasible:
            continue
        rate = _matching_rate(assignment, gains_list, share, noise_power, k)
        pairs = tuple(sorted(
            (u, s) for u, subs in enumerate(assignment) for s in subs
        ))
        if rate > best_rate or (rate == best_rate and pairs < best_pairs):
            best_rate = rate
            best_pairs = pairs
    return best_pairs, best_rate


def count_feasible_matchings(n, k, quotas, budget=None):
    """Number of quota-feasible matchings on an n x k instance."""
    budget = budget or OracleBudget()
    subsets = []
    for size in range(quotas.user_quota + 1):
        subsets.extend(itertools.combinations(range(k), size))
    budget.check(len(subsets) ** n, "matchings")
    count = 0
    for assignment in itertools.product(subsets, repeat=n):
        load = [0] * k
        for subs in assignment:
            for s in subs:
                load[s] += 1
        if max(load, default=0) <= quotas.subcarrier_quota:
            count += 1
    return count


def brute_force_best_partition(partition, gains, bs_total_power, noise_power,
                               max_group_size, budget=None):
    """Exhaustively best placement of non-anchor users into the given groups.

    Keeps the anchors and group/subcarrier structure of ``partition`` fixed
    and enumerates every assignment of the remaining users under the size
    cap. Returns (groups, total_value) with groups a tuple of sorted member
    tuples.
    """
    gains = check_gain_matrix(gains)
    budget = budget or OracleBudget()
    num_groups = partition.num_groups
    anchors = list(partition.anchors)
    movers = sorted(partition.all_users() - set(anchors))
    budget.check(num_groups ** max(len(movers), 1), "partitions")

    share = bs_total_power / num_groups
    best_value = float("-inf")
    best_groups = None
    for placement in itertools.product(range(num_groups), repeat=len(movers)):
        sizes = [1] * num_groups
        feasible = True
        for g in placement:
            sizes[g] += 1
            if sizes[g] > max_group_size:
                feasible = False
                break
        if not feasible:
            continue
        groups = [[anchors[i]] for i in range(num_groups)]
        for u, g in zip(movers, placement):
            groups[g].append(u)
        value = 0.0
        for i in range(num_groups):
            s = partition.subcarriers[i]
            rates = downlink_rates(
                {u: gains[u, s] for u in groups[i]}, share, noise_power
            )
            value += math.fsum(rates.values()) / num_groups
        if value > best_value:
            best_value = value
            best_groups = tuple(tuple(sorted(g)) for g in groups)
    return best_groups, best_value


def _uplink_payoff(user, power_rows, gains, subcarrier_sets, noise, price):
    """Reference uplink payoff (independent of power_control.py)."""
    payoff = 0.0
    for s in subcarrier_sets[user]:
        received = []
        for v, subs in enumerate(subcarrier_sets):
            if s in subs:
                received.append((power_rows[v][s] * gains[v][s], v))
        own = power_rows[user][s] * gains[user][s]
        later = sum(q for q, v in received if (-q, v) > (-own, user))
        payoff += math.log2(1.0 + own / (noise + later))
        payoff -= price * power_rows[user][s]
    return payoff


def power_nash_certificate(allocation, gains, budget_per_user, noise_power,
                           price_per_watt, grid_points, user_subcarriers=None,
                           tolerance=1e-9, budget=None):
    """True iff no user can gain more than ``tolerance`` by any grid deviation.

    Re-enumerates every per-subcarrier grid vector within the power budget
    for each user, recomputing payoffs from scratch.
    """
    gains = check_gain_matrix(gains)
    n, k = gains.shape
    check_count(grid_points, "grid_points", 2)
    budget = budget or OracleBudget()
    if user_subcarriers is None:
        sets = [list(range(k)) for _ in range(n)]
    else:
        sets = [sorted(int(s) for s in subs) for subs in user_subcarriers]
    budget.check(
        sum(grid_points ** len(subs) for subs in sets), "power grid deviations"
    )

    gains_list = gains.tolist()
    rows = [list(map(float, row)) for row in allocation]
    levels = [budget_per_user * i / (grid_points - 1) for i in range(grid_points)]
    cap = budget_per_user * (1.0 + 1e-12)
    for u in range(n):
        if not sets[u]:
            continue
        current = _uplink_payoff(u, rows, gains_list, sets, noise_power,
                                 price_per_watt)
        saved = list(rows[u])
        for combo in itertools.product(levels, repeat=len(sets[u])):
            if sum(combo) > cap:
                continue
            trial = [0.0] * k
            for s, p in zip(sets[u], combo):
                trial[s] = p
            rows[u] = trial
            deviation = _uplink_payoff(u, rows, gains_list, sets, noise_power,
                                       price_per_watt)
            if deviation > current + tolerance:
                rows[u] = saved
                return False
        rows[u] = saved
    return True


def contention_nash_certificate(windows, resources, price, w_max,
                                tolerance=1e-9, budget=None):
    """True iff no user can gain more than ``tolerance`` by changing its window.

    Utilities are recomputed from the closed form, independent of
    contention.py.
    """
    budget = budget or OracleBudget()
    ws = [int(w) for w in windows]
    n = len(ws)
    budget.check(n * w_max, "window deviations")
    r = resources.num_triples

    def utility(user, trial):
        p = 1.0 / trial[user]
        for m in range(n):
            if m != user:
                p *= 1.0 - 1.0 / (trial[m] * r)
        return p - price / trial[user]

    for u in range(n):
        current = utility(u, ws)
        saved = ws[u]
        for w in range(1, w_max + 1):
            ws[u] = w
            if utility(u, ws) > current + tolerance:
                ws[u] = saved
                return False
        ws[u] = saved
    return True
