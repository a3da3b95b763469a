"""Many-to-many user/subcarrier matching with swap-stability refinement.

Three phases: build preference lists from interference-free rates, run
user-proposing deferred acceptance under quotas, then repeatedly execute
swap-blocking pairs (including relocations into unused quota) until none
remains. Swap acceptance uses the full SIC rate model, so every executed swap
strictly raises the system sum rate.
"""

from dataclasses import dataclass
import math

import numpy as np
from sklearn.base import BaseEstimator

from .rates import RateReport, downlink_subcarrier_rates
from .validation import ValidationError, check_count, check_gain_matrix, check_positive


@dataclass(frozen=True)
class MatchQuotas:
    """Degree caps: subcarriers per user (d_v) and users per subcarrier (d_f)."""

    user_quota: int = 1
    subcarrier_quota: int = 2

    def __post_init__(self):
        check_count(self.user_quota, "user_quota", 1)
        check_count(self.subcarrier_quota, "subcarrier_quota", 1)


@dataclass(frozen=True)
class Codebook:
    """Sparse-codeword bookkeeping: J books of M codewords of length K.

    Only the sparsity matters for resource allocation: a user occupies
    ``nonzeros_per_codeword`` subcarriers, which becomes its matching quota.
    """

    codebook_count: int
    codewords_per_book: int
    codeword_length: int
    nonzeros_per_codeword: int

    def __post_init__(self):
        check_count(self.codebook_count, "codebook_count", 1)
        check_count(self.codewords_per_book, "codewords_per_book", 1)
        check_count(self.codeword_length, "codeword_length", 1)
        check_count(self.nonzeros_per_codeword, "nonzeros_per_codeword", 1)
        m = self.codewords_per_book
        if m & (m - 1) != 0:
            raise ValidationError(
                f"codewords_per_book: must be a power of two, got {m}"
            )
        if self.nonzeros_per_codeword > self.codeword_length:
            raise ValidationError(
                "nonzeros_per_codeword: cannot exceed codeword_length"
            )

    @property
    def bits_per_codeword(self):
        return self.codewords_per_book.bit_length() - 1

    def quotas(self, subcarrier_quota):
        return MatchQuotas(self.nonzeros_per_codeword, subcarrier_quota)


class Matching:
    """A set of (user, subcarrier) pairs with per-side degree views."""

    def __init__(self, num_users, num_subcarriers, pairs=()):
        self.num_users = check_count(num_users, "num_users", 1)
        self.num_subcarriers = check_count(num_subcarriers, "num_subcarriers", 1)
        self._user_subs = [set() for _ in range(self.num_users)]
        self._sub_users = [set() for _ in range(self.num_subcarriers)]
        for u, s in pairs:
            self.add(u, s)

    def add(self, user, subcarrier):
        if not 0 <= user < self.num_users:
            raise ValidationError(f"user: id {user} out of range")
        if not 0 <= subcarrier < self.num_subcarriers:
            raise ValidationError(f"subcarrier: id {subcarrier} out of range")
        if subcarrier in self._user_subs[user]:
            raise ValidationError(f"pair: ({user}, {subcarrier}) already matched")
        self._user_subs[user].add(subcarrier)
        self._sub_users[subcarrier].add(user)

    def remove(self, user, subcarrier):
        if subcarrier not in self._user_subs[user]:
            raise ValidationError(f"pair: ({user}, {subcarrier}) is not matched")
        self._user_subs[user].discard(subcarrier)
        self._sub_users[subcarrier].discard(user)

    def has(self, user, subcarrier):
        return subcarrier in self._user_subs[user]

    def pairs(self):
        return sorted(
            (u, s) for u in range(self.num_users) for s in self._user_subs[u]
        )

    def subcarriers_of(self, user):
        return sorted(self._user_subs[user])

    def users_on(self, subcarrier):
        return sorted(self._sub_users[subcarrier])

    def scheduled_user_count(self):
        return sum(1 for subs in self._user_subs if subs)

    def check_quotas(self, quotas):
        for u, subs in enumerate(self._user_subs):
            if len(subs) > quotas.user_quota:
                raise ValidationError(f"user: {u} exceeds user_quota")
        for s, users in enumerate(self._sub_users):
            if len(users) > quotas.subcarrier_quota:
                raise ValidationError(f"subcarrier: {s} exceeds subcarrier_quota")

    def canonical(self):
        return tuple(self.pairs())

    def copy(self):
        return Matching(self.num_users, self.num_subcarriers, self.pairs())

    def __len__(self):
        return sum(len(subs) for subs in self._user_subs)


def scheduled_user_count(matching):
    """Number of distinct users holding at least one pair."""
    return matching.scheduled_user_count()


def build_preference_lists(gains, bs_total_power, noise_power):
    """Complete two-sided preference lists.

    Users rank subcarriers by the rate they would earn alone on an even
    budget share bs_total_power / K; subcarriers rank users by gain. Ties go
    to the lower id on both sides.
    """
    gains = check_gain_matrix(gains)
    n, k = gains.shape
    check_positive(bs_total_power, "bs_total_power")
    check_positive(noise_power, "noise_power")
    share = bs_total_power / k
    standalone = np.log2(1.0 + share * gains / noise_power)
    user_prefs = [
        sorted(range(k), key=lambda s: (-standalone[u, s], s)) for u in range(n)
    ]
    sub_prefs = [
        sorted(range(n), key=lambda u: (-gains[u, s], u)) for s in range(k)
    ]
    return user_prefs, sub_prefs


def deferred_acceptance(user_prefs, sub_prefs, quotas):
    """User-proposing deferred acceptance with quotas on both sides.

    Every round each user with spare quota and an unexhausted list proposes
    to its best subcarrier that has neither rejected nor accepted it;
    subcarriers keep their ``subcarrier_quota`` best candidates and reject
    the rest. Stops when nobody proposes.
    """
    n, k = len(user_prefs), len(sub_prefs)
    for u, prefs in enumerate(user_prefs):
        if sorted(prefs) != list(range(k)):
            raise ValidationError(f"user_prefs: list of user {u} is not complete")
    for s, prefs in enumerate(sub_prefs):
        if sorted(prefs) != list(range(n)):
            raise ValidationError(f"sub_prefs: list of subcarrier {s} is not complete")

    rank = [[0] * n for _ in range(k)]
    for s in range(k):
        for pos, u in enumerate(sub_prefs[s]):
            rank[s][u] = pos

    matching = Matching(n, k)
    next_idx = [0] * n
    while True:
        proposals = {}
        for u in range(n):
            if len(matching.subcarriers_of(u)) >= quotas.user_quota:
                continue
            if next_idx[u] >= k:
                continue
            s = user_prefs[u][next_idx[u]]
            next_idx[u] += 1
            proposals.setdefault(s, []).append(u)
        if not proposals:
            break
        for s in sorted(proposals):
            holders = matching.users_on(s)
            candidates = sorted(set(holders) | set(proposals[s]),
                                key=lambda u: rank[s][u])
            keep = set(candidates[:quotas.subcarrier_quota])
            for u in holders:
                if u not in keep:
                    matching.remove(u, s)
            for u in keep:
                if not matching.has(u, s):
                    matching.add(u, s)
    matching.check_quotas(quotas)
    return matching


def _rate_table(members, col, share, noise_power):
    """(per-user rate dict, total) for one subcarrier's matched users."""
    if not members:
        return {}, 0.0
    rates = downlink_subcarrier_rates(
        {u: col[u] for u in members}, share, noise_power
    )
    return rates, math.fsum(rates[u] for u in sorted(rates))


def matching_sum_rate(matching, gains, bs_total_power, noise_power):
    """System sum rate of a matching under the full SIC downlink model.

    Every subcarrier gets an even budget share bs_total_power / K, split
    inverse to gain among its matched users.
    """
    gains = check_gain_matrix(gains)
    n, k = gains.shape
    share = bs_total_power / k
    total = 0.0
    for s in range(k):
        members = matching.users_on(s)
        _, sub_total = _rate_table(members, gains[:, s], share, noise_power)
        total += sub_total
    return total


def matching_rate_report(matching, gains, bs_total_power, noise_power):
    """Un-normalized per-pair and per-user rates of a matching."""
    gains = check_gain_matrix(gains)
    n, k = gains.shape
    share = bs_total_power / k
    pair_rates = {}
    for s in range(k):
        members = matching.users_on(s)
        rates, _ = _rate_table(members, gains[:, s], share, noise_power)
        for u in members:
            pair_rates[(u, s)] = rates[u]
    return RateReport.from_pair_rates(pair_rates, k)


@dataclass(frozen=True)
class SwapCandidate:
    """A swap-blocking pair: user_b is None for a move into unused quota."""

    user_a: int
    user_b: int | None
    sub_a: int
    sub_b: int


def apply_swap(matching, candidate):
    """Execute a swap candidate in place."""
    matching.remove(candidate.user_a, candidate.sub_a)
    if candidate.user_b is not None:
        matching.remove(candidate.user_b, candidate.sub_b)
        matching.add(candidate.user_b, candidate.sub_a)
    matching.add(candidate.user_a, candidate.sub_b)


def find_swap_blocking_pair(matching, gains, bs_total_power, noise_power,
                            quotas, epsilon=1e-9):
    """First swap-blocking pair in ascending-id scan order, or None.

    A candidate exchanges (a, s_a) with (b, s_b) — or relocates (a, s_a) to a
    subcarrier with spare quota — and blocks iff neither mover's rate drops
    and the system sum rate strictly rises by more than ``epsilon``.
    """
    gains = check_gain_matrix(gains)
    n, k = gains.shape
    share = bs_total_power / k
    cols = [gains[:, s] for s in range(k)]

    before_rates = []
    before_totals = []
    for s in range(k):
        rates, total = _rate_table(matching.users_on(s), cols[s], share, noise_power)
        before_rates.append(rates)
        before_totals.append(total)

    for a in range(n):
        subs_a = matching.subcarriers_of(a)
        for s_a in subs_a:
            members_a = matching.users_on(s_a)
            rate_a_before = before_rates[s_a][a]
            for s_b in range(k):
                if s_b == s_a or matching.has(a, s_b):
                    continue
                members_b = matching.users_on(s_b)
                base_before = before_totals[s_a] + before_totals[s_b]

                if len(members_b) < quotas.subcarrier_quota:
                    after_a = [u for u in members_a if u != a]
                    after_b = sorted(members_b + [a])
                    _, total_a = _rate_table(after_a, cols[s_a], share, noise_power)
                    rates_b, total_b = _rate_table(after_b, cols[s_b], share, noise_power)
                    if (rates_b[a] - rate_a_before >= 0.0
                            and total_a + total_b - base_before > epsilon):
                        return SwapCandidate(a, None, s_a, s_b)

                for b in members_b:
                    if b == a or matching.has(b, s_a):
                        continue
                    after_a = sorted([u for u in members_a if u != a] + [b])
                    after_b = sorted([u for u in members_b if u != b] + [a])
                    rates_a, total_a = _rate_table(after_a, cols[s_a], share, noise_power)
                    rates_b, total_b = _rate_table(after_b, cols[s_b], share, noise_power)
                    if (rates_b[a] - rate_a_before >= 0.0
                            and rates_a[b] - before_rates[s_b][b] >= 0.0
                            and total_a + total_b - base_before > epsilon):
                        return SwapCandidate(a, b, s_a, s_b)
    return None


@dataclass(frozen=True)
class SwapRecord:
    """One executed swap and the sum rate it produced."""

    candidate: SwapCandidate
    sum_rate_after: float


class SwapMatching(BaseEstimator):
    """Deferred acceptance plus swap-stability refinement.

    Parameters
    ----------
    user_quota : int
        Subcarriers a user may occupy (codeword sparsity d_v).
    subcarrier_quota : int
        Users a subcarrier may carry (overloading degree d_f).
    bs_total_power : float
        Downlink budget in watts, shared evenly over all K subcarriers.
    noise_power : float
        Receiver noise per subcarrier in watts.
    swap_epsilon : float
        Minimum sum-rate gain for a swap to execute.

    Attributes
    ----------
    matching_ : Matching
        Final swap-stable matching.
    da_matching_ : Matching
        The deferred-acceptance matching before any swap.
    sum_rate_, da_sum_rate_ : float
    swap_log_ : list of SwapRecord
        Executed swaps with the sum rate after each.
    n_swaps_ : int
    scheduled_user_count_ : int
    rate_report_ : RateReport
    """

    def __init__(self, user_quota=1, subcarrier_quota=2, bs_total_power=4.0,
                 noise_power=0.1, swap_epsilon=1e-9):
        self.user_quota = user_quota
        self.subcarrier_quota = subcarrier_quota
        self.bs_total_power = bs_total_power
        self.noise_power = noise_power
        self.swap_epsilon = swap_epsilon

    def fit(self, X):
        """Match users to subcarriers on a gain matrix X of shape (N, K)."""
        gains = check_gain_matrix(X)
        quotas = MatchQuotas(self.user_quota, self.subcarrier_quota)
        power = check_positive(self.bs_total_power, "bs_total_power")
        noise = check_positive(self.noise_power, "noise_power")
        epsilon = check_positive(self.swap_epsilon, "swap_epsilon")

        user_prefs, sub_prefs = build_preference_lists(gains, power, noise)
        matching = deferred_acceptance(user_prefs, sub_prefs, quotas)
        da_matching = matching.copy()
        da_sum_rate = matching_sum_rate(matching, gains, power, noise)

        log = []
        while True:
            candidate = find_swap_blocking_pair(
                matching, gains, power, noise, quotas, epsilon
            )
            if candidate is None:
                break
            apply_swap(matching, candidate)
            matching.check_quotas(quotas)
            log.append(SwapRecord(
                candidate=candidate,
                sum_rate_after=matching_sum_rate(matching, gains, power, noise),
            ))

        self.matching_ = matching
        self.da_matching_ = da_matching
        self.da_sum_rate_ = da_sum_rate
        self.sum_rate_ = log[-1].sum_rate_after if log else da_sum_rate
        self.swap_log_ = log
        self.n_swaps_ = len(log)
        self.scheduled_user_count_ = matching.scheduled_user_count()
        self.rate_report_ = matching_rate_report(matching, gains, power, noise)
        return self
