"""Input validation helpers shared by every module.

All checks raise :class:`ValidationError` with a message that names the
offending field, so callers (and the CLI) can surface exactly what was wrong.
"""

import numpy as np


class ValidationError(ValueError):
    """An input violated a documented invariant."""


def check_count(value, field, minimum=1):
    """Validate an integer count, returning it as a plain int."""
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValidationError(f"{field}: expected an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{field}: must be >= {minimum}, got {value}")
    return int(value)


def check_positive(value, field):
    """Validate a strictly positive finite scalar, returning it as a float."""
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValidationError(f"{field}: must be finite and > 0, got {value}")
    return value


def check_nonnegative(value, field):
    value = float(value)
    if not np.isfinite(value) or value < 0.0:
        raise ValidationError(f"{field}: must be finite and >= 0, got {value}")
    return value


def check_gain_matrix(X, field="gains"):
    """Coerce X to a (num_users, num_subcarriers) float matrix of power gains."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValidationError(f"{field}: expected a 2-D array, got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValidationError(f"{field}: must have at least one user and one subcarrier")
    if not np.all(np.isfinite(X)):
        raise ValidationError(f"{field}: entries must be finite")
    if np.any(X < 0.0):
        raise ValidationError(f"{field}: entries must be >= 0")
    return X


def check_power_matrix(P, shape, field="powers"):
    """Coerce P to a float matrix of the given shape with finite entries >= 0."""
    P = np.asarray(P, dtype=float)
    if P.shape != tuple(shape):
        raise ValidationError(f"{field}: expected shape {tuple(shape)}, got {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValidationError(f"{field}: entries must be finite")
    if np.any(P < 0.0):
        raise ValidationError(f"{field}: entries must be >= 0")
    return P


def check_uplink_allocation(P, budget, shape, field="powers"):
    """Validate a per-user power matrix against the individual budget."""
    P = check_power_matrix(P, shape, field)
    # small relative slack so grid sums that hit the budget exactly pass
    limit = budget * (1.0 + 1e-9)
    row_sums = P.sum(axis=1)
    if np.any(row_sums > limit):
        user = int(np.argmax(row_sums))
        raise ValidationError(
            f"{field}: user {user} exceeds its power budget "
            f"({row_sums[user]:.12g} > {budget:.12g})"
        )
    return P


def check_downlink_allocation(P, total_power, shape, field="powers"):
    """Validate a broadcast power matrix against the total base-station budget."""
    P = check_power_matrix(P, shape, field)
    if P.sum() > total_power * (1.0 + 1e-9):
        raise ValidationError(
            f"{field}: total power {P.sum():.12g} exceeds budget {total_power:.12g}"
        )
    return P
