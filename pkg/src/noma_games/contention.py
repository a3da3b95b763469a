"""Grant-free slotted contention over (slot, subcarrier, sequence) triples.

Each frame, every user attempts with probability 1/W and picks one resource
triple uniformly at random; a triple chosen by exactly one user succeeds,
two or more collide. Users tune their window W selfishly against a linear
attempt price, giving a finite-action game solved by round-robin best
responses.
"""

from collections import Counter
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .validation import ValidationError, check_count, check_nonnegative

SUCCESS = "success"
COLLISION = "collision"
DEFERRED = "deferred"


@dataclass(frozen=True)
class ContentionResources:
    """Contention-accessible resources per frame."""

    num_slots: int = 1
    num_subcarriers: int = 1
    num_sequences: int = 1

    def __post_init__(self):
        check_count(self.num_slots, "num_slots", 1)
        check_count(self.num_subcarriers, "num_subcarriers", 1)
        check_count(self.num_sequences, "num_sequences", 1)

    @property
    def num_triples(self):
        return self.num_slots * self.num_subcarriers * self.num_sequences

    def decode(self, index):
        """Flat index -> (slot, subcarrier, sequence)."""
        per_slot = self.num_subcarriers * self.num_sequences
        slot, rest = divmod(int(index), per_slot)
        subcarrier, sequence = divmod(rest, self.num_sequences)
        return slot, subcarrier, sequence


def _check_windows(windows, w_max=None):
    ws = [int(w) for w in windows]
    if not ws:
        raise ValidationError("windows: must be non-empty")
    for u, w in enumerate(ws):
        if w < 1:
            raise ValidationError(f"windows: user {u} has window {w} < 1")
        if w_max is not None and w > w_max:
            raise ValidationError(f"windows: user {u} exceeds w_max ({w} > {w_max})")
    return ws


@dataclass(frozen=True)
class ContentionOutcome:
    """Per-user result of one frame plus the resource occupancy counts."""

    statuses: tuple
    choices: tuple          # flat triple index per user, None if deferred
    occupancy: dict         # flat triple index -> number of attempters

    def count(self, status):
        return sum(1 for s in self.statuses if s == status)


def contention_round(windows, resources, seed):
    """Simulate one frame; fully determined by ``seed``.

    A user with window W attempts with probability 1/W. All attempters on a
    triple with >= 2 occupants collide; lone occupants succeed; everyone else
    defers.
    """
    ws = _check_windows(windows)
    n = len(ws)
    rng = np.random.default_rng(int(seed))
    attempt_draws = rng.random(n)
    triple_draws = rng.integers(0, resources.num_triples, size=n)

    choices = [
        int(triple_draws[u]) if attempt_draws[u] < 1.0 / ws[u] else None
        for u in range(n)
    ]
    occupancy = Counter(c for c in choices if c is not None)
    statuses = tuple(
        DEFERRED if c is None else (SUCCESS if occupancy[c] == 1 else COLLISION)
        for c in choices
    )
    return ContentionOutcome(
        statuses=statuses, choices=tuple(choices), occupancy=dict(occupancy)
    )


def monte_carlo_success_rate(windows, resources, num_rounds, first_seed=0):
    """Per-user empirical success frequency over seeded independent rounds."""
    ws = _check_windows(windows)
    counts = np.zeros(len(ws))
    for r in range(int(num_rounds)):
        outcome = contention_round(ws, resources, first_seed + r)
        for u, status in enumerate(outcome.statuses):
            if status == SUCCESS:
                counts[u] += 1
    return counts / num_rounds


def success_probability(user, windows, resources):
    """Closed-form per-frame success probability.

    p = (1/W_u) * prod_{m != u} (1 - 1/(W_m * R)) with R the number of
    resource triples: the user must attempt and no other user may attempt on
    the same triple.
    """
    ws = _check_windows(windows)
    r = resources.num_triples
    p = 1.0 / ws[user]
    for m, w in enumerate(ws):
        if m != user:
            p *= 1.0 - 1.0 / (w * r)
    return p


def contention_utility(user, windows, resources, price):
    """Success probability minus a linear price per attempt probability."""
    check_nonnegative(price, "price")
    return success_probability(user, windows, resources) - price / int(windows[user])


def update_window(user, windows, resources, price, w_max):
    """Best-response window in {1..w_max}, ties resolved to the smallest."""
    check_count(w_max, "w_max", 1)
    trial = _check_windows(windows)
    best_w = None
    best_u = float("-inf")
    for w in range(1, w_max + 1):
        trial[user] = w
        u = contention_utility(user, trial, resources, price)
        if u > best_u:
            best_u = u
            best_w = w
    return best_w


class ContentionGame(BaseEstimator):
    """Round-robin window adjustment until no user wants to deviate.

    Parameters
    ----------
    num_slots, num_subcarriers, num_sequences : int
        Contention resources per frame.
    price : float
        Linear price per attempt probability in the utility.
    w_max : int
        Largest admissible contention window.
    max_rounds : int
        Update sweeps before giving up with ``converged_ = False``.

    Attributes
    ----------
    windows_ : list of int
        Final contention windows (all start at w_max).
    utilities_ : list of float
    success_probabilities_ : list of float
    n_rounds_ : int
    converged_ : bool
        True when a full sweep changed no window (a grid Nash point).
    """

    def __init__(self, num_slots=1, num_subcarriers=1, num_sequences=1,
                 price=0.0, w_max=8, max_rounds=100):
        self.num_slots = num_slots
        self.num_subcarriers = num_subcarriers
        self.num_sequences = num_sequences
        self.price = price
        self.w_max = w_max
        self.max_rounds = max_rounds

    def resources(self):
        return ContentionResources(
            self.num_slots, self.num_subcarriers, self.num_sequences
        )

    def fit(self, n_users):
        """Run the window game for ``n_users`` symmetric players."""
        n = check_count(n_users, "n_users", 1)
        w_max = check_count(self.w_max, "w_max", 1)
        max_rounds = check_count(self.max_rounds, "max_rounds", 1)
        price = check_nonnegative(self.price, "price")
        resources = self.resources()

        windows = [w_max] * n
        converged = False
        rounds = 0
        for _ in range(max_rounds):
            rounds += 1
            changed = False
            for u in range(n):
                new = update_window(u, windows, resources, price, w_max)
                if new != windows[u]:
                    windows[u] = new
                    changed = True
            if not changed:
                converged = True
                break

        self.windows_ = windows
        self.utilities_ = [
            contention_utility(u, windows, resources, price) for u in range(n)
        ]
        self.success_probabilities_ = [
            success_probability(u, windows, resources) for u in range(n)
        ]
        self.n_rounds_ = rounds
        self.converged_ = converged
        return self
