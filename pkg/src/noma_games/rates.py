"""SINR and achievable-rate primitives for SIC receivers.

Downlink: the base station superposes signals on a subcarrier; a receiver
cancels every co-channel signal with a lower channel gain than its own and
treats the higher-gain ones as noise. Uplink: the base station decodes users
in descending received power, subtracting each decoded signal. Rates are
log2(1 + SINR) in bits/s/Hz.
"""

import math
from dataclasses import dataclass

from .validation import ValidationError


def downlink_sic_sinr(gains, powers, noise, target_user):
    """SINR of ``target_user`` when decoding a downlink superposition with SIC.

    ``gains``/``powers`` map user id -> channel power gain / transmit watts on
    one subcarrier. Signals of users with strictly lower gain (ties broken
    towards the lower user id) are cancelled; the rest interfere:

        SINR_t = p_t * g_t / (g_t * sum_{j ahead of t} p_j + noise)
    """
    if noise <= 0.0:
        raise ValidationError(f"noise: must be > 0, got {noise}")
    if target_user not in gains or target_user not in powers:
        raise ValidationError(f"target_user: {target_user} is not on this subcarrier")
    g_t = gains[target_user]
    interference = 0.0
    for u in sorted(gains):
        if u == target_user:
            continue
        g = gains[u]
        if g > g_t or (g == g_t and u < target_user):
            interference += powers[u]
    return powers[target_user] * g_t / (g_t * interference + noise)


def uplink_sic_sinr(gains, powers, noise, target_user):
    """SINR of ``target_user`` at a base station decoding with SIC.

    Users are decoded in descending received power p*g (ties towards the
    lower user id); decoded signals are subtracted, so only the users decoded
    after the target interfere with it.
    """
    if noise <= 0.0:
        raise ValidationError(f"noise: must be > 0, got {noise}")
    if target_user not in gains or target_user not in powers:
        raise ValidationError(f"target_user: {target_user} is not on this subcarrier")
    q_t = powers[target_user] * gains[target_user]
    key_t = (-q_t, target_user)
    residual = 0.0
    for u in sorted(gains):
        if u == target_user:
            continue
        q = powers[u] * gains[u]
        if (-q, u) > key_t:  # decoded after the target
            residual += q
    return q_t / (noise + residual)


def coalition_user_rate(sinr, used_subcarriers):
    """Per-user rate when the band is shared over ``used_subcarriers`` groups."""
    if used_subcarriers < 1:
        raise ValidationError(f"used_subcarriers: must be >= 1, got {used_subcarriers}")
    if sinr < 0.0:
        raise ValidationError(f"sinr: must be >= 0, got {sinr}")
    return math.log2(1.0 + sinr) / used_subcarriers


def inverse_gain_power_split(gains, budget):
    """Split one subcarrier's budget so weaker users get more power.

    Weights are 1/gain normalized over the users, so the share is strictly
    decreasing in gain. The weakest user absorbs the floating-point rounding
    remainder, making the shares sum to the budget exactly.
    """
    if budget <= 0.0:
        raise ValidationError(f"budget: must be > 0, got {budget}")
    if not gains:
        raise ValidationError("gains: must be non-empty")
    for u in gains:
        if gains[u] <= 0.0:
            raise ValidationError(f"gains: user {u} has non-positive gain {gains[u]}")
    total_inverse = sum(1.0 / g for g in gains.values())
    weakest = min(gains, key=lambda u: (gains[u], u))
    powers = {}
    assigned = 0.0
    for u in sorted(gains):
        if u == weakest:
            continue
        share = budget * (1.0 / gains[u]) / total_inverse
        powers[u] = share
        assigned += share
    powers[weakest] = budget - assigned
    return powers


def downlink_subcarrier_rates(gains, budget, noise):
    """Per-user rates log2(1+SINR) on one downlink subcarrier.

    The subcarrier budget is split by :func:`inverse_gain_power_split` and
    users decode with SIC in gain order.
    """
    powers = inverse_gain_power_split(gains, budget)
    order = sorted(gains, key=lambda u: (-gains[u], u))
    rates = {}
    decoded_ahead = 0.0
    for u in order:
        g = gains[u]
        sinr = powers[u] * g / (g * decoded_ahead + noise)
        rates[u] = math.log2(1.0 + sinr)
        decoded_ahead += powers[u]
    return rates


def uplink_subcarrier_rates(gains, powers, noise):
    """Per-user rates log2(1+SINR) on one uplink subcarrier under SIC."""
    if noise <= 0.0:
        raise ValidationError(f"noise: must be > 0, got {noise}")
    order = sorted(gains, key=lambda u: (-powers[u] * gains[u], u))
    rates = {}
    for i, u in enumerate(order):
        q = powers[u] * gains[u]
        residual = sum(powers[v] * gains[v] for v in order[i + 1:])
        rates[u] = math.log2(1.0 + q / (noise + residual))
    return rates


@dataclass(frozen=True)
class RateReport:
    """Rates achieved by an allocation: per user, per (user, subcarrier) pair.

    ``per_user_rate[u]`` is always the sum of u's ``per_pair_rate`` entries;
    ``used_subcarrier_count`` is the number of active subcarriers the band is
    split over.
    """

    per_user_rate: dict
    per_pair_rate: dict
    used_subcarrier_count: int

    @classmethod
    def from_pair_rates(cls, pair_rates, used_subcarrier_count):
        per_user = {}
        for (u, _), r in pair_rates.items():
            if r < 0.0:
                raise ValidationError(f"per_pair_rate: negative rate {r} for user {u}")
            per_user[u] = per_user.get(u, 0.0) + r
        return cls(
            per_user_rate=per_user,
            per_pair_rate=dict(pair_rates),
            used_subcarrier_count=used_subcarrier_count,
        )
