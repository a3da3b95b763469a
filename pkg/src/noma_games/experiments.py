"""Experiment drivers, baselines and deterministic CSV emission."""

import dataclasses
import math

from .coalition import BROADBAND, SENSOR, CoalitionFormation
from .config import ExperimentConfig
from .contention import ContentionGame
from .matching import (
    Codebook,
    MatchQuotas,
    Matching,
    SwapMatching,
    matching_sum_rate,
)
from .oracle import (
    OracleBudget,
    brute_force_best_matching,
    brute_force_best_partition,
    contention_nash_certificate,
    power_nash_certificate,
)
from .power_control import PowerControlGame
from .scenario import generate_channels
from .validation import ValidationError, check_count, check_gain_matrix


def _format_field(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def write_csv(path, header, rows, metadata):
    """Write rows with a header and a trailing metadata comment, LF-terminated."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_format_field(v) for v in row))
    lines.append(f"# {metadata}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _mean(values):
    return math.fsum(values) / len(values)


def ofdma_baseline(gains):
    """Greedy one-user-per-subcarrier assignment by descending gain.

    Repeatedly matches the highest-gain unassigned (user, subcarrier) pair
    (ties towards lower ids) until either side runs out.
    """
    gains = check_gain_matrix(gains)
    n, k = gains.shape
    order = sorted(
        ((u, s) for u in range(n) for s in range(k)),
        key=lambda pair: (-gains[pair], pair[0], pair[1]),
    )
    matching = Matching(n, k)
    used_users, used_subs = set(), set()
    for u, s in order:
        if u in used_users or s in used_subs:
            continue
        matching.add(u, s)
        used_users.add(u)
        used_subs.add(s)
        if len(used_subs) == k or len(used_users) == n:
            break
    return matching


def _quota_list(value, field):
    values = value if isinstance(value, list) else [value]
    return [check_count(v, field, 1) for v in values]


def run_fig3(config):
    """Scheduled-user scaling versus population, per quota setting + OFDMA.

    Sweeps the user count, runs the swap matcher for every configured
    subcarrier quota and the greedy OFDMA baseline over all seeds, and emits
    one row of seed-averaged scheduled users and sum rate per (scheme, N).
    """
    scenario = config.scenario
    sweep_name = config.get("sweep.name", "scenario.num_users")
    if sweep_name != "scenario.num_users":
        raise ValidationError(
            f"sweep.name: the fig3 experiment sweeps scenario.num_users, got {sweep_name!r}"
        )
    n_values = config.get("sweep.values") or list(range(2, 25, 2))
    n_values = [check_count(v, "sweep.values", 1) for v in n_values]
    user_quota = check_count(config.get("fig3.user_quota", 1), "fig3.user_quota", 1)
    sub_quotas = _quota_list(
        config.get("fig3.subcarrier_quotas", [1, 2]), "fig3.subcarrier_quotas"
    )
    k = scenario.num_subcarriers

    header = ("experiment", "N", "K", "user_quota", "subcarrier_quota",
              "seed_count", "mean_scheduled", "mean_sum_rate")
    rows = []
    curves = {}

    def record(label, uq, sq, n, scheduled, rates):
        rows.append((label, n, k, uq, sq, len(config.seeds),
                     _mean(scheduled), _mean(rates)))
        curves.setdefault((label, uq, sq), []).append(_mean(scheduled))

    for n in n_values:
        scen = dataclasses.replace(scenario, num_users=n)
        scheduled, rates = [], []
        for seed in config.seeds:
            channel = generate_channels(scen, seed)
            baseline = ofdma_baseline(channel.gains)
            scheduled.append(baseline.scheduled_user_count())
            rates.append(matching_sum_rate(
                baseline, channel.gains, scen.bs_total_power, scen.noise_power
            ))
        record("fig3-ofdma", 1, 1, n, scheduled, rates)

    for sq in sub_quotas:
        matcher = SwapMatching(
            user_quota=user_quota, subcarrier_quota=sq,
            bs_total_power=scenario.bs_total_power,
            noise_power=scenario.noise_power,
        )
        for n in n_values:
            scen = dataclasses.replace(scenario, num_users=n)
            scheduled, rates = [], []
            for seed in config.seeds:
                channel = generate_channels(scen, seed)
                matcher.fit(channel.gains)
                scheduled.append(matcher.scheduled_user_count_)
                rates.append(matcher.sum_rate_)
            record("fig3", user_quota, sq, n, scheduled, rates)

    for key, curve in curves.items():
        for left, right in zip(curve, curve[1:]):
            if right < left:
                raise RuntimeError(
                    f"fig3: scheduled-user curve {key} is not nondecreasing in N"
                )
    if 1 in sub_quotas and 2 in sub_quotas:
        low = curves[("fig3", user_quota, 1)]
        high = curves[("fig3", user_quota, 2)]
        if any(h < l for l, h in zip(low, high)):
            raise RuntimeError(
                "fig3: subcarrier_quota=2 curve fell below subcarrier_quota=1"
            )

    overloading = ",".join(f"{sq / user_quota:.9g}" for sq in sub_quotas)
    return header, rows, f"overloading_factors=[{overloading}]"


def _matching_settings(config):
    scenario = config.scenario
    quotas = MatchQuotas(
        check_count(config.get("matching.user_quota", 1), "matching.user_quota", 1),
        check_count(config.get("matching.subcarrier_quota", 2),
                    "matching.subcarrier_quota", 1),
    )
    if config.get("matching.codewords_per_book") is not None:
        # validates the codebook structure; only the sparsity feeds the quotas
        Codebook(
            codebook_count=config.get("matching.codebook_count", 1),
            codewords_per_book=config.get("matching.codewords_per_book"),
            codeword_length=scenario.num_subcarriers,
            nonzeros_per_codeword=quotas.user_quota,
        )
    epsilon = config.get("matching.swap_epsilon", 1e-9)
    return quotas, epsilon


def run_matching(config):
    """Swap matching per seed; --oracle adds the brute-force optimum columns."""
    scenario = config.scenario
    quotas, epsilon = _matching_settings(config)
    matcher = SwapMatching(
        user_quota=quotas.user_quota, subcarrier_quota=quotas.subcarrier_quota,
        bs_total_power=scenario.bs_total_power, noise_power=scenario.noise_power,
        swap_epsilon=epsilon,
    )
    header = ["seed", "num_users", "num_subcarriers", "user_quota",
              "subcarrier_quota", "scheduled_users", "da_sum_rate", "sum_rate",
              "n_swaps"]
    if config.oracle:
        header += ["oracle_sum_rate", "sum_rate_ratio"]
    rows = []
    for seed in config.seeds:
        channel = generate_channels(scenario, seed)
        matcher.fit(channel.gains)
        row = [seed, scenario.num_users, scenario.num_subcarriers,
               quotas.user_quota, quotas.subcarrier_quota,
               matcher.scheduled_user_count_, matcher.da_sum_rate_,
               matcher.sum_rate_, matcher.n_swaps_]
        if config.oracle:
            _, best_rate = brute_force_best_matching(
                channel.gains, scenario.bs_total_power, scenario.noise_power,
                quotas, OracleBudget(),
            )
            row += [best_rate, matcher.sum_rate_ / best_rate if best_rate else 1.0]
        rows.append(tuple(row))
    return tuple(header), rows, None


def _parse_user_subcarriers(text, n):
    """Decode 'per-user space-separated lists joined by ;', e.g. '0 1;0;1'."""
    groups = [part.strip() for part in str(text).split(";")]
    if len(groups) != n:
        raise ValidationError(
            f"power.user_subcarriers: expected {n} groups, got {len(groups)}"
        )
    return [[int(tok) for tok in group.split()] for group in groups]


def run_power(config):
    """Uplink power-control game per seed with the full per-sweep trace."""
    scenario = config.scenario
    subcarriers = config.get("power.user_subcarriers")
    if subcarriers is not None:
        subcarriers = _parse_user_subcarriers(subcarriers, scenario.num_users)
    game = PowerControlGame(
        budget=scenario.per_user_power_budget,
        noise_power=scenario.noise_power,
        price_per_watt=config.get("power.price_per_watt", 0.0),
        grid_points=config.get("power.grid_points", 5),
        tolerance=config.get("power.tolerance", 1e-6),
        max_iterations=config.get("power.max_iterations", 200),
        user_subcarriers=subcarriers,
    )
    header = ["seed", "iteration", "max_power_delta"]
    header += [f"payoff_{u + 1}" for u in range(scenario.num_users)]
    rows = []
    certificates = []
    for seed in config.seeds:
        channel = generate_channels(scenario, seed)
        game.fit(channel.gains)
        for i, delta in enumerate(game.trace_, start=1):
            rows.append(tuple([seed, i, delta] + list(game.payoff_trace_[i - 1])))
        if config.oracle:
            certificates.append(power_nash_certificate(
                game.allocation_, channel.gains,
                scenario.per_user_power_budget, scenario.noise_power,
                game.price_per_watt, game.grid_points,
                user_subcarriers=subcarriers,
            ))
    extra = None
    if config.oracle:
        flags = ",".join("true" if c else "false" for c in certificates)
        extra = f"power_nash_certificates=[{flags}]"
    return tuple(header), rows, extra


def run_coalition(config):
    """Coalition formation per seed: switch counts, stability, total value."""
    scenario = config.scenario
    num_sensors = check_count(
        config.get("coalition.num_sensors", 1), "coalition.num_sensors", 1
    )
    num_broadband = config.get(
        "coalition.num_broadband", scenario.num_users - num_sensors
    )
    num_broadband = check_count(num_broadband, "coalition.num_broadband", 0)
    if num_sensors + num_broadband != scenario.num_users:
        raise ValidationError(
            "coalition.num_sensors: sensor and broadband counts must sum to "
            f"scenario.num_users ({num_sensors}+{num_broadband} != {scenario.num_users})"
        )
    sensor_min_rate = config.get("coalition.sensor_min_rate", 0.0)
    categories = [SENSOR] * num_sensors + [BROADBAND] * num_broadband
    min_rates = [float(sensor_min_rate)] * num_sensors + [0.0] * num_broadband

    former = CoalitionFormation(
        bs_total_power=scenario.bs_total_power,
        noise_power=scenario.noise_power,
        max_group_size=config.get("coalition.max_group_size", 2),
        max_rounds=config.get("coalition.max_rounds", 100),
        improvement_epsilon=config.get("coalition.improvement_epsilon", 1e-9),
    )
    header = ["seed", "num_sensors", "num_broadband", "rounds",
              "switches_executed", "nash_stable", "total_value"]
    if config.oracle:
        header += ["oracle_value", "value_ratio"]
    rows = []
    for seed in config.seeds:
        channel = generate_channels(scenario, seed)
        former.fit(channel.gains, categories, min_rates=min_rates)
        total_value = math.fsum(former.rate_report_.per_user_rate.values())
        row = [seed, num_sensors, num_broadband, former.n_rounds_,
               len(former.history_), former.nash_stable_, total_value]
        if config.oracle:
            _, best_value = brute_force_best_partition(
                former.partition_, channel.gains, scenario.bs_total_power,
                scenario.noise_power, former.max_group_size,
            )
            row += [best_value, total_value / best_value if best_value else 1.0]
        rows.append(tuple(row))
    return tuple(header), rows, None


def run_contention(config):
    """Contention-window game; one row per user of the final profile."""
    scenario = config.scenario
    game = ContentionGame(
        num_slots=config.get("contention.num_slots", 1),
        num_subcarriers=config.get("contention.num_subcarriers", 1),
        num_sequences=config.get("contention.num_sequences", 1),
        price=config.get("contention.price", 0.0),
        w_max=config.get("contention.w_max", 8),
        max_rounds=config.get("contention.max_rounds", 100),
    )
    game.fit(scenario.num_users)
    header = ("user", "window", "success_probability", "utility",
              "converged", "rounds")
    rows = [
        (u, game.windows_[u], game.success_probabilities_[u],
         game.utilities_[u], game.converged_, game.n_rounds_)
        for u in range(scenario.num_users)
    ]
    extra = None
    if config.oracle:
        certified = contention_nash_certificate(
            game.windows_, game.resources(), game.price, game.w_max
        )
        extra = f"contention_nash_certificate={'true' if certified else 'false'}"
    return header, rows, extra


_RUNNERS = {
    "fig3": run_fig3,
    "matching": run_matching,
    "power": run_power,
    "coalition": run_coalition,
    "contention": run_contention,
}


def run_experiment(config):
    """Dispatch to the named experiment and write its CSV. Returns the path."""
    if not isinstance(config, ExperimentConfig):
        raise ValidationError("config: expected an ExperimentConfig")
    if config.experiment != "fig3" and config.get("sweep.name") is not None:
        raise ValidationError("sweep.name: sweeps are only supported by fig3")
    if config.output_path is None:
        raise ValidationError("output: set an output path or pass --out")
    header, rows, extra = _RUNNERS[config.experiment](config)
    metadata = f"config_hash={config.hash()} seeds={config.seeds}"
    if extra:
        metadata += " " + extra
    write_csv(config.output_path, header, rows, metadata)
    return config.output_path
