"""Noncooperative uplink power control via iterated grid best responses.

Each user splits its power budget over the subcarriers it occupies; the
payoff is its SIC sum rate minus a linear power price. Best responses search
a per-subcarrier power grid exactly, so equilibria can be certified by
exhaustive deviation scans.
"""

import itertools
import logging

import numpy as np
from sklearn.base import BaseEstimator

from .rates import uplink_subcarrier_rates
from .validation import (
    ValidationError,
    check_count,
    check_gain_matrix,
    check_nonnegative,
    check_positive,
    check_uplink_allocation,
)

logger = logging.getLogger(__name__)


def _normalize_subcarrier_sets(user_subcarriers, n, k):
    """Per-user sorted subcarrier lists; None means everyone occupies all K."""
    if user_subcarriers is None:
        return [list(range(k)) for _ in range(n)]
    if len(user_subcarriers) != n:
        raise ValidationError(
            f"user_subcarriers: expected {n} entries, got {len(user_subcarriers)}"
        )
    sets = []
    for u, subs in enumerate(user_subcarriers):
        subs = sorted(int(s) for s in subs)
        for s in subs:
            if not 0 <= s < k:
                raise ValidationError(
                    f"user_subcarriers: user {u} occupies invalid subcarrier {s}"
                )
        if len(set(subs)) != len(subs):
            raise ValidationError(f"user_subcarriers: user {u} lists a subcarrier twice")
        sets.append(subs)
    return sets


def _occupants_by_subcarrier(subcarrier_sets, k):
    occupants = [[] for _ in range(k)]
    for u, subs in enumerate(subcarrier_sets):
        for s in subs:
            occupants[s].append(u)
    return occupants


def _payoff(user, powers, gains, subs, occupants, noise, price):
    total_rate = 0.0
    spent = 0.0
    for s in subs:
        g = {v: gains[v, s] for v in occupants[s]}
        p = {v: powers[v, s] for v in occupants[s]}
        total_rate += uplink_subcarrier_rates(g, p, noise)[user]
        spent += powers[user, s]
    return total_rate - price * spent


def user_payoff(user, powers, gains, user_subcarriers, noise, price):
    """Rate-minus-cost payoff of one user under a fixed power allocation.

    ``powers``/``gains`` are (num_users, num_subcarriers) matrices. A user
    occupying no subcarrier earns payoff 0.
    """
    gains = check_gain_matrix(gains)
    n, k = gains.shape
    powers = np.asarray(powers, dtype=float)
    sets = _normalize_subcarrier_sets(user_subcarriers, n, k)
    if not sets[user]:
        logger.debug("user %d occupies no subcarrier; payoff is 0", user)
        return 0.0
    occupants = _occupants_by_subcarrier(sets, k)
    return _payoff(user, powers, gains, sets[user], occupants, noise, price)


def best_response(user, powers, gains, user_subcarriers, noise, price, budget,
                  grid_points):
    """Grid-exact best response of one user, others' powers held fixed.

    Searches every per-subcarrier combination of the ``grid_points`` levels
    np.linspace(0, budget, grid_points) whose sum stays within the budget and
    returns the lexicographically smallest maximizer as a length-K vector.
    The SIC decode order is re-derived for every candidate, since it can
    depend on the user's own power.
    """
    gains = check_gain_matrix(gains)
    n, k = gains.shape
    powers = np.asarray(powers, dtype=float)
    sets = _normalize_subcarrier_sets(user_subcarriers, n, k)
    subs = sets[user]
    if not subs:
        return np.zeros(k)
    occupants = _occupants_by_subcarrier(sets, k)
    levels = np.linspace(0.0, budget, int(grid_points))
    work = powers.copy()
    budget_cap = budget * (1.0 + 1e-12)
    best_combo = None
    best_payoff = float("-inf")
    for combo in itertools.product(levels, repeat=len(subs)):
        if sum(combo) > budget_cap:
            continue
        for s, p in zip(subs, combo):
            work[user, s] = p
        payoff = _payoff(user, work, gains, subs, occupants, noise, price)
        if payoff > best_payoff:
            best_payoff = payoff
            best_combo = combo
    vector = np.zeros(k)
    for s, p in zip(subs, best_combo):
        vector[s] = p
    return vector


class PowerControlGame(BaseEstimator):
    """Round-robin best-response power control for uplink SIC multiple access.

    Parameters
    ----------
    budget : float
        Per-user power budget in watts.
    noise_power : float
        Receiver noise per subcarrier in watts.
    price_per_watt : float
        Linear price subtracted from the rate per transmitted watt.
    grid_points : int
        Number of power levels per subcarrier searched by a best response.
    tolerance : float
        Max per-entry power change (watts) over a full sweep that counts as
        converged.
    max_iterations : int
        Best-response sweeps before giving up with ``converged_ = False``.
    user_subcarriers : sequence of iterables or None
        Subcarriers occupied by each user; ``None`` puts everyone everywhere.

    Attributes
    ----------
    allocation_ : ndarray of shape (n_users, n_subcarriers)
        Final transmit powers.
    payoffs_ : ndarray of shape (n_users,)
        Payoffs at the final allocation.
    trace_ : list of float
        Max power change per sweep (the stopping statistic).
    payoff_trace_ : list of ndarray
        Per-sweep payoff snapshots.
    n_iter_ : int
        Sweeps executed.
    converged_ : bool
    """

    def __init__(self, budget=1.0, noise_power=0.1, price_per_watt=0.0,
                 grid_points=5, tolerance=1e-6, max_iterations=200,
                 user_subcarriers=None):
        self.budget = budget
        self.noise_power = noise_power
        self.price_per_watt = price_per_watt
        self.grid_points = grid_points
        self.tolerance = tolerance
        self.max_iterations = max_iterations
        self.user_subcarriers = user_subcarriers

    def fit(self, X, init=None):
        """Run the game on a gain matrix X of shape (n_users, n_subcarriers)."""
        gains = check_gain_matrix(X)
        n, k = gains.shape
        budget = check_positive(self.budget, "budget")
        noise = check_positive(self.noise_power, "noise_power")
        price = check_nonnegative(self.price_per_watt, "price_per_watt")
        grid = check_count(self.grid_points, "grid_points", 2)
        tolerance = check_positive(self.tolerance, "tolerance")
        max_iterations = check_count(self.max_iterations, "max_iterations", 1)
        sets = _normalize_subcarrier_sets(self.user_subcarriers, n, k)
        occupants = _occupants_by_subcarrier(sets, k)

        if init is None:
            powers = np.zeros((n, k))
        else:
            powers = check_uplink_allocation(init, budget, (n, k), "init")
            for u in range(n):
                off_support = [s for s in range(k) if s not in sets[u] and powers[u, s] > 0.0]
                if off_support:
                    raise ValidationError(
                        f"init: user {u} has power on unoccupied subcarrier {off_support[0]}"
                    )
            powers = powers.copy()

        trace = []
        payoff_trace = []
        converged = False
        sweeps = 0
        for _ in range(max_iterations):
            sweeps += 1
            max_delta = 0.0
            for u in range(n):
                response = best_response(
                    u, powers, gains, sets, noise, price, budget, grid
                )
                delta = float(np.max(np.abs(powers[u] - response))) if k else 0.0
                if delta > max_delta:
                    max_delta = delta
                powers[u] = response
            trace.append(max_delta)
            payoff_trace.append(np.array([
                _payoff(u, powers, gains, sets[u], occupants, noise, price)
                if sets[u] else 0.0
                for u in range(n)
            ]))
            if max_delta < tolerance:
                converged = True
                break

        self.allocation_ = powers
        self.payoffs_ = payoff_trace[-1]
        self.trace_ = trace
        self.payoff_trace_ = payoff_trace
        self.n_iter_ = sweeps
        self.converged_ = converged
        return self
