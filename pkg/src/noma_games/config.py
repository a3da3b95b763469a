"""Flat key-value experiment configuration: parsing, validation, hashing.

Config files are plain text, one ``dotted.key = value`` per line, ``#``
comments allowed. Values are coerced to int, float, bool or a comma list;
everything else stays a string. The config hash covers every effective
setting except the output location, so identical settings always produce
byte-identical CSV regardless of where it is written.
"""

import hashlib

from .scenario import NetworkScenario
from .validation import ValidationError, check_count

EXPERIMENTS = ("fig3", "matching", "coalition", "power", "contention")

SCENARIO_FIELDS = (
    "num_users", "num_subcarriers", "bs_total_power", "per_user_power_budget",
    "noise_power", "cell_radius", "path_loss_exponent", "min_distance",
)


def _coerce_scalar(text):
    text = text.strip()
    low = text.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def coerce_value(text):
    text = text.strip()
    if "," in text:
        return [_coerce_scalar(part) for part in text.split(",") if part.strip()]
    return _coerce_scalar(text)


def parse_config_text(text):
    """Parse config text into a flat {dotted_key: value} dict."""
    flat = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config: line {lineno} is not 'key = value': {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValidationError(f"config: line {lineno} has an empty key")
        if not value.strip():
            raise ValidationError(f"config: key {key!r} has an empty value (line {lineno})")
        if key in flat:
            raise ValidationError(f"config: duplicate key {key!r} at line {lineno}")
        flat[key] = coerce_value(value)
    return flat


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ValidationError(f"config: cannot read {path}: {exc}") from exc


def _format_scalar(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def canonical_lines(flat):
    lines = []
    for key in sorted(flat):
        value = flat[key]
        if isinstance(value, list):
            text = ",".join(_format_scalar(v) for v in value)
        else:
            text = _format_scalar(value)
        lines.append(f"{key} = {text}")
    return lines


def config_hash(flat):
    payload = "\n".join(canonical_lines(flat)).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


class ExperimentConfig:
    """A validated experiment: scenario, per-game options, seeds, output."""

    def __init__(self, experiment, scenario, options, seeds, output_path,
                 oracle=False):
        self.experiment = experiment
        self.scenario = scenario
        self.options = dict(options)
        self.seeds = list(seeds)
        self.output_path = output_path
        self.oracle = bool(oracle)

    def get(self, key, default=None):
        return self.options.get(key, default)

    def effective_flat(self):
        """Every setting that shapes the output, output location excluded."""
        flat = {"experiment": self.experiment, "oracle": self.oracle}
        for field in SCENARIO_FIELDS:
            flat[f"scenario.{field}"] = getattr(self.scenario, field)
        for key in self.options:
            flat[key] = self.options[key]
        flat["seeds"] = list(self.seeds)
        return flat

    def hash(self):
        return config_hash(self.effective_flat())


def _as_int_list(value, field):
    items = value if isinstance(value, list) else [value]
    out = []
    for item in items:
        if isinstance(item, bool) or not isinstance(item, int):
            raise ValidationError(f"{field}: expected integers, got {item!r}")
        out.append(item)
    return out


def build_experiment_config(flat, seed_override=None, out_override=None,
                            oracle=False):
    """Assemble and validate an ExperimentConfig from a flat key dict.

    Seed resolution: an explicit ``seeds`` list wins unless --seed overrides
    the base, in which case ``replications`` seeds are generated from the
    override; otherwise ``seed`` (default 0) plus ``replications``.
    """
    flat = dict(flat)
    experiment = flat.pop("experiment", None)
    if experiment not in EXPERIMENTS:
        raise ValidationError(
            f"experiment: must be one of {', '.join(EXPERIMENTS)}, got {experiment!r}"
        )

    scenario_kwargs = {}
    if experiment == "fig3":
        scenario_kwargs["num_subcarriers"] = 8
    for field in SCENARIO_FIELDS:
        key = f"scenario.{field}"
        if key in flat:
            scenario_kwargs[field] = flat.pop(key)
    leftover = [k for k in flat if k.startswith("scenario.")]
    if leftover:
        raise ValidationError(f"config: unknown scenario field {leftover[0]!r}")
    scenario = NetworkScenario(**scenario_kwargs)

    replications = flat.pop("replications", 1)
    replications = check_count(replications, "replications", 1)
    base_seed = flat.pop("seed", 0)
    explicit_seeds = flat.pop("seeds", None)
    if seed_override is not None:
        seeds = [int(seed_override) + i for i in range(replications)]
    elif explicit_seeds is not None:
        seeds = _as_int_list(explicit_seeds, "seeds")
        if not seeds:
            raise ValidationError("seeds: must be non-empty")
    else:
        seeds = [int(base_seed) + i for i in range(replications)]

    output_path = flat.pop("output", None)
    if out_override is not None:
        output_path = out_override

    allowed_prefixes = ("matching.", "power.", "coalition.", "contention.",
                        "fig3.", "sweep.")
    for key in flat:
        if not key.startswith(allowed_prefixes):
            raise ValidationError(f"config: unknown key {key!r}")

    sweep_values = flat.get("sweep.values")
    if "sweep.name" in flat or sweep_values is not None:
        if flat.get("sweep.name") is None:
            raise ValidationError("sweep.name: required when sweep.values is set")
        values = sweep_values if isinstance(sweep_values, list) else [sweep_values]
        if sweep_values is None or not values:
            raise ValidationError("sweep.values: must be non-empty")
        flat["sweep.values"] = values

    return ExperimentConfig(
        experiment=experiment,
        scenario=scenario,
        options=flat,
        seeds=seeds,
        output_path=output_path,
        oracle=oracle,
    )
