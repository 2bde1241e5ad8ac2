"""Experiment configuration: ``key = value`` lines grouped under ``[section]`` headers.

Every key belongs to exactly one section.  Keys may also appear before the
first header.  Values are validated when the file is loaded and all
problems are reported together.
"""
import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .discretize import GridError, mesh_inverse

SUBCOMMANDS = ("bands", "flow", "fill", "scaling", "align", "localize", "muffin", "decouple")


class ConfigError(ValueError):
    """One or more configuration problems; ``errors`` lists them all."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


def _number(text):
    return float(Fraction(text.strip()))


def _fraction(text):
    return Fraction(text.strip())


def _integer(text):
    value = Fraction(text.strip())
    if value.denominator != 1:
        raise ValueError("expected an integer")
    return int(value)


def _list(parse):
    def inner(text):
        items = [s for s in text.split(",") if s.strip()]
        if not items:
            raise ValueError("expected a comma-separated list")
        return [parse(s) for s in items]
    return inner


def _choice(*options):
    def inner(text):
        value = text.strip()
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return value
    return inner


def _bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _text(text):
    return text.strip()


def _mesh(value):
    try:
        mesh_inverse(float(value))
    except GridError as exc:
        return str(exc)
    return None


def _check(cond, message):
    return lambda v: None if cond(v) else message


def _increasing(values):
    return all(b > a for a, b in zip(values, values[1:]))


HALF_PI = math.pi / 2

# key -> (section, parser, default, checks); default None means optional
SCHEMA = {
    "potential": ("potential", _choice("cosine", "smooth-muffin", "flat"), None, []),
    "A": ("potential", _number, None, [_check(lambda v: v >= 0, "A must be >= 0")]),
    "profile_r": ("potential", _number, 0.3,
                  [_check(lambda v: 0 < v < 0.5, "profile_r must lie in (0, 1/2)")]),
    "profile_w": ("potential", _number, 0.1,
                  [_check(lambda v: v > 0, "profile_w must be > 0")]),
    "h": ("grid", _fraction, None, [_mesh]),
    "n": ("grid", _integer, None, [_check(lambda v: v >= 1, "n must be >= 1")]),
    "momentum_grid": ("bands", _integer, 16,
                      [_check(lambda v: v >= 8, "momentum_grid must be >= 8")]),
    "flow_n": ("flow", _integer, 3, [_check(lambda v: v >= 1, "flow_n must be >= 1")]),
    "t_steps": ("flow", _integer, 16, [_check(lambda v: v >= 16, "t_steps must be >= 16")]),
    "energies": ("flow", _integer, 5, [_check(lambda v: v >= 1, "energies must be >= 1")]),
    "thetas": ("fill", _list(_number), None,
               [_check(lambda v: all(0 < t < HALF_PI for t in v),
                       "every fill theta must lie in (0, pi/2)")]),
    "eps": ("fill", _number, None, [_check(lambda v: v > 0, "eps must be > 0")]),
    "fill_window": ("fill", _choice("middle", "full"), "middle", []),
    "placement": ("fill", _choice("aligned", "origin"), "aligned", []),
    "m_max": ("fill", _integer, 10**7, [_check(lambda v: v >= 1, "m_max must be >= 1")]),
    "aef_n": ("fill", _integer, 16, [_check(lambda v: v >= 2, "aef_n must be >= 2")]),
    "scaling_theta": ("scaling", _number, None,
                      [_check(lambda v: 0 <= v < HALF_PI, "scaling_theta must lie in [0, pi/2)")]),
    "n_list": ("scaling", _list(_integer), None,
               [_check(lambda v: len(v) >= 3 and _increasing(v) and v[0] >= 2,
                       "n_list must be increasing, >= 2, with at least 3 values")]),
    "alpha": ("scaling", _number, None, []),
    "beta": ("scaling", _number, None, []),
    "width_fraction": ("scaling", _number, 0.25,
                       [_check(lambda v: 0 < v <= 1, "width_fraction must lie in (0, 1]")]),
    "control": ("scaling", _bool, False, []),
    "align_theta": ("align", _number, None,
                    [_check(lambda v: 0 < v < HALF_PI, "align_theta must lie in (0, pi/2)")]),
    "align_t": ("align", _number, None,
                [_check(lambda v: 0 < v < 1, "align_t must lie in (0, 1)")]),
    "align_eps": ("align", _number, None,
                  [_check(lambda v: 0 < v < 1, "align_eps must lie in (0, 1)")]),
    "nu": ("align", _integer, 1, [_check(lambda v: v >= 1, "nu must be >= 1")]),
    "horizon": ("align", _integer, None, [_check(lambda v: v >= 4, "horizon must be >= 4")]),
    "localize_n": ("localize", _integer, 8, [_check(lambda v: v >= 2, "localize_n must be >= 2")]),
    "localize_theta": ("localize", _number, 0.15,
                       [_check(lambda v: 0 < v < HALF_PI, "localize_theta must lie in (0, pi/2)")]),
    "localize_boxes": ("localize", _list(_integer), [8, 12],
                       [_check(lambda v: all(k >= 2 for k in v), "localize_boxes must be >= 2")]),
    "r": ("muffin", _number, None, [_check(lambda v: 0 < v < 0.5, "r must lie in (0, 1/2)")]),
    "theta": ("muffin", _number, None,
              [_check(lambda v: 0 < v <= math.pi / 4 + 1e-15, "theta must lie in (0, pi/4]")]),
    "tan_theta": ("muffin", _fraction, None,
                  [_check(lambda v: 0 < v <= 1, "tan_theta must lie in (0, 1]")]),
    "y_max": ("muffin", _number, None, [_check(lambda v: v > 0, "y_max must be > 0")]),
    "heights": ("muffin", _list(_number), None,
                [_check(lambda v: all(x > 0 for x in v) and _increasing(v),
                        "heights must be positive and increasing")]),
    "disc_h": ("muffin", _fraction, None, []),
    "box_h": ("muffin", _fraction, Fraction(1, 32), [_mesh]),
    "gap_index": ("muffin", _integer, 1, [_check(lambda v: v >= 1, "gap_index must be >= 1")]),
    "barrier_heights": ("decouple", _list(_number), None,
                        [_check(lambda v: all(x > 0 for x in v) and _increasing(v),
                                "barrier_heights must be positive and increasing")]),
    "decouple_r": ("decouple", _number, 0.3,
                   [_check(lambda v: 0 < v < 0.5, "decouple_r must lie in (0, 1/2)")]),
    "decouple_tan": ("decouple", _fraction, Fraction(1, 2),
                     [_check(lambda v: 0 <= v <= 1, "decouple_tan must lie in [0, 1]")]),
    "decouple_n": ("decouple", _integer, 2, [_check(lambda v: v >= 1, "decouple_n must be >= 1")]),
    "decouple_h": ("decouple", _fraction, Fraction(1, 16), [_mesh]),
    "workers": ("run", _integer, 1, [_check(lambda v: v >= 1, "workers must be >= 1")]),
    "out": ("run", _text, None, []),
    "seed": ("run", _integer, 0, []),
}

SECTIONS = sorted({spec[0] for spec in SCHEMA.values()})

REQUIRED = {
    None: ("potential", "h", "n"),
    "bands": (),
    "flow": (),
    "fill": ("thetas",),
    "scaling": ("scaling_theta", "n_list"),
    "align": ("align_theta", "align_t", "align_eps", "horizon"),
    "localize": (),
    "muffin": ("r", "y_max"),
    "decouple": ("barrier_heights",),
}

# settings that never change experiment numerics; excluded from the config hash
RUN_KEYS = ("workers", "out", "seed")


@dataclass
class ExperimentConfig:
    values: dict
    lines: dict = field(default_factory=dict)
    path: str = None

    def __getitem__(self, key):
        if key in self.values:
            return self.values[key]
        default = SCHEMA[key][2]
        return list(default) if isinstance(default, list) else default

    def get(self, key, default=None):
        value = self[key]
        return default if value is None else value

    def with_overrides(self, **overrides):
        values = dict(self.values)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig(values, dict(self.lines), self.path)

    def canonical(self):
        """Sorted ``key = value`` text of the numeric settings."""
        out = []
        for key in sorted(self.values):
            if key in RUN_KEYS:
                continue
            value = self.values[key]
            if isinstance(value, list):
                value = ", ".join(_render(v) for v in value)
            else:
                value = _render(value)
            out.append(f"{key} = {value}")
        return "\n".join(out) + "\n"

    @property
    def sha256(self):
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def _render(value):
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def parse_config(text, path=None, subcommand=None):
    """Parse and validate config text; raises ConfigError listing every problem."""
    errors, values, lines = [], {}, {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                errors.append(f"line {lineno}: malformed section header {line!r}")
                continue
            section = line[1:-1].strip()
            if section not in SECTIONS:
                errors.append(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        home = SCHEMA[key][0]
        if section is not None and section in SECTIONS and section != home:
            errors.append(f"line {lineno}: key {key!r} belongs to section [{home}], not [{section}]")
            continue
        if key in lines:
            errors.append(f"line {lineno}: duplicate key {key!r} (first set on line {lines[key]})")
            continue
        lines[key] = lineno
        try:
            values[key] = SCHEMA[key][1](value)
        except (ValueError, ZeroDivisionError) as exc:
            errors.append(f"line {lineno}: bad value for {key!r}: {exc}")
    config = ExperimentConfig(values, lines, path)
    errors.extend(validate(config, subcommand))
    if errors:
        raise ConfigError(errors)
    return config


def validate(config, subcommand=None):
    """All precondition violations of ``config`` (empty list when valid)."""
    errors = []
    values = config.values

    def where(key):
        line = config.lines.get(key)
        return f"line {line}: " if line else ""

    for key, value in values.items():
        for check in SCHEMA[key][3]:
            problem = check(value)
            if problem:
                errors.append(f"{where(key)}{problem}")
    needed = list(REQUIRED[None])
    if subcommand is not None:
        if subcommand not in REQUIRED:
            errors.append(f"unknown subcommand {subcommand!r}")
        else:
            needed += REQUIRED[subcommand]
    if values.get("potential") in ("cosine", "smooth-muffin"):
        needed.append("A")
    if subcommand == "muffin":
        if ("theta" in values) == ("tan_theta" in values):
            errors.append("muffin needs exactly one of theta and tan_theta")
        r = values.get("r")
        disc_h = values.get("disc_h")
        if r is not None and disc_h is not None and not float(disc_h) <= r / 32 * (1 + 1e-12):
            errors.append(f"{where('disc_h')}disc_h must satisfy disc_h <= r/32")
    for key in needed:
        if key not in values:
            errors.append(f"missing required key {key!r}")
    if "alpha" in values and "beta" in values and not values["alpha"] < values["beta"]:
        errors.append(f"{where('beta')}alpha must be below beta")
    if ("alpha" in values) != ("beta" in values):
        errors.append("alpha and beta must be given together")
    return errors


def load_config(path, subcommand=None):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, str(path), subcommand)
