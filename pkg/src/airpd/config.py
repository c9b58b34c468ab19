"""Experiment configuration: INI-style files, defaults, scenario presets.

A config has an [experiment] section with the shared radio and
algorithm parameters plus exactly one use-case section, [smart_grid] or
[fdma], matching the declared use_case. Omitted keys fall back to the
standard parameter set of the declared use case. Unknown keys or
sections are rejected by name so typos cannot silently change an
experiment.
"""

import configparser
import io
from dataclasses import dataclass, fields

CASES = ("smart_grid", "fdma")
CHANNELS = ("aircomp", "error_free")

SCENARIO_NAMES = (
    "fig2_stepsizes",
    "fig3_beta_caseB",
    "fig4_beta_caseA",
    "fig5_dualset",
    "fig6_timing",
)


class ConfigError(ValueError):
    """Raised for unknown keys, bad values, or malformed config text."""


@dataclass
class SmartGridConfig:
    n_devices: int = 20
    b_min: float = 35.0
    b_max: float = 65.0
    s_min: float = 1.0
    s_max: float = 2.0
    capacity: float = 99.0
    price: float = 30.0
    stackelberg: bool = True
    stackelberg_tol: float = 1e-3
    stackelberg_max_stages: int = 50
    price_rule: str = "max_u"
    util_scale: float = 0.02
    y_slope: float = 0.3

    def validate(self):
        if self.n_devices < 1:
            raise ConfigError("n_devices must be at least 1")
        if not 0 < self.b_min <= self.b_max:
            raise ConfigError("b_min/b_max must satisfy 0 < b_min <= b_max")
        if not 0 < self.s_min <= self.s_max:
            raise ConfigError("s_min/s_max must satisfy 0 < s_min <= s_max")
        if self.capacity <= 0:
            raise ConfigError("capacity must be positive")
        if self.price < 0:
            raise ConfigError("price must be nonnegative")
        if self.stackelberg_tol <= 0:
            raise ConfigError("stackelberg_tol must be positive")
        if self.stackelberg_max_stages < 1:
            raise ConfigError("stackelberg_max_stages must be at least 1")
        if self.price_rule not in ("max_u", "mean_u"):
            raise ConfigError("price_rule must be 'max_u' or 'mean_u'")
        if self.util_scale <= 0:
            raise ConfigError("util_scale must be positive")
        if self.y_slope <= 0:
            raise ConfigError("y_slope must be positive")


@dataclass
class FdmaConfig:
    n_users: int = 10
    n_bands: int = 64
    power_budget_w: float = 1.0
    n0_dbm_hz: float = -174.0
    r_th_bps: float = 2.85e6
    rate_scale: float = 1e-6
    objective_scale: float = 1.6e-10
    w_scale: float = 4e-4

    def validate(self):
        if self.n_users < 1:
            raise ConfigError("n_users must be at least 1")
        if self.n_bands < 1:
            raise ConfigError("n_bands must be at least 1")
        if self.power_budget_w <= 0:
            raise ConfigError("power_budget_w must be positive")
        if self.r_th_bps <= 0:
            raise ConfigError("r_th_bps must be positive")
        if self.rate_scale <= 0:
            raise ConfigError("rate_scale must be positive")
        if self.objective_scale <= 0:
            raise ConfigError("objective_scale must be positive")
        if self.w_scale <= 0:
            raise ConfigError("w_scale must be positive")


# per-use-case defaults for the keys whose standard values differ
_CASE_DEFAULTS = {
    "smart_grid": {"beta": 1e4, "vartheta": 2.0, "step_c1": 2.0, "step_c2": 3.0,
                   "symbols": 40},
    "fdma": {"beta": 1e6, "vartheta": 1.0, "step_c1": 1.0, "step_c2": 1e5,
             "symbols": 128},
}


@dataclass
class ExperimentConfig:
    use_case: str
    channel: str = "aircomp"
    rounds: int = 500
    runs: int = 500
    base_seed: int = 0
    out_dir: str = "results"
    beta: float = None
    bandwidth_hz: float = 1e6
    noise_dbm: float = -90.0
    p_max_w: float = 1.0
    zeta_prime: float = 2.0
    vartheta: float = None
    step_c1: float = None
    step_c2: float = None
    d_ratio_min: float = 10.0
    d_ratio_max: float = 20.0
    path_loss_exp: float = 2.2
    rician_factor: float = 10.0
    t0_db: float = -25.0
    symbols: int = None
    exclusion_probability: float = 1e-3
    workers: int = 1
    smart_grid: SmartGridConfig = None
    fdma: FdmaConfig = None

    def __post_init__(self):
        if self.use_case not in CASES:
            raise ConfigError(f"use_case must be one of {CASES}, got {self.use_case!r}")
        for key, value in _CASE_DEFAULTS[self.use_case].items():
            if getattr(self, key) is None:
                setattr(self, key, value)
        if self.use_case == "smart_grid":
            if self.fdma is not None:
                raise ConfigError("[fdma] section not allowed when use_case is smart_grid")
            if self.smart_grid is None:
                self.smart_grid = SmartGridConfig()
        else:
            if self.smart_grid is not None:
                raise ConfigError("[smart_grid] section not allowed when use_case is fdma")
            if self.fdma is None:
                self.fdma = FdmaConfig()
        self.validate()

    def validate(self):
        if self.channel not in CHANNELS:
            raise ConfigError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if self.rounds < 1:
            raise ConfigError("rounds must be at least 1")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be nonnegative")
        if self.beta <= 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth_hz must be positive")
        if self.p_max_w <= 0:
            raise ConfigError("p_max_w must be positive")
        if self.zeta_prime < 0:
            raise ConfigError("zeta_prime must be nonnegative")
        if self.vartheta <= 0:
            raise ConfigError("vartheta must be positive")
        if self.step_c1 <= 0:
            raise ConfigError("step_c1 must be positive")
        if self.step_c2 < 1:
            raise ConfigError("step_c2 must be at least 1")
        if not 0 < self.d_ratio_min <= self.d_ratio_max:
            raise ConfigError("d_ratio range must satisfy 0 < min <= max")
        if self.path_loss_exp < 0:
            raise ConfigError("path_loss_exp must be nonnegative")
        if self.rician_factor < 0:
            raise ConfigError("rician_factor must be nonnegative")
        if self.symbols < 1:
            raise ConfigError("symbols must be at least 1")
        if not 0 <= self.exclusion_probability <= 1:
            raise ConfigError("exclusion_probability must lie in [0, 1]")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.use_case == "smart_grid":
            self.smart_grid.validate()
        else:
            self.fdma.validate()

    @property
    def n_devices(self):
        return self.smart_grid.n_devices if self.use_case == "smart_grid" else self.fdma.n_users

    def replace(self, **changes):
        """Copy with [experiment]-level or use-case fields overridden."""
        if changes.get("use_case", self.use_case) != self.use_case:
            raise ConfigError("replace cannot switch use_case; build a new config")
        base = {f.name: getattr(self, f.name) for f in fields(self)
                if f.name not in ("smart_grid", "fdma")}
        case_cfg = self.smart_grid if self.use_case == "smart_grid" else self.fdma
        case_changes = {}
        for key in list(changes):
            if hasattr(case_cfg, key) and key not in base:
                case_changes[key] = changes.pop(key)
        unknown = set(changes) - set(base)
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        base.update(changes)
        new_case = type(case_cfg)(**{**case_cfg.__dict__, **case_changes})
        base["smart_grid"] = new_case if self.use_case == "smart_grid" else None
        base["fdma"] = new_case if self.use_case == "fdma" else None
        return ExperimentConfig(**base)


_EXPERIMENT_TYPES = {
    "use_case": str, "channel": str, "rounds": int, "runs": int, "base_seed": int,
    "out_dir": str, "beta": float, "bandwidth_hz": float, "noise_dbm": float,
    "p_max_w": float, "zeta_prime": float, "vartheta": float, "step_c1": float,
    "step_c2": float, "d_ratio_min": float, "d_ratio_max": float,
    "path_loss_exp": float, "rician_factor": float, "t0_db": float, "symbols": int,
    "exclusion_probability": float, "workers": int,
}
_SMART_GRID_TYPES = {
    "n_devices": int, "b_min": float, "b_max": float, "s_min": float, "s_max": float,
    "capacity": float, "price": float, "stackelberg": bool,
    "stackelberg_tol": float, "stackelberg_max_stages": int, "price_rule": str,
    "util_scale": float, "y_slope": float,
}
_FDMA_TYPES = {
    "n_users": int, "n_bands": int, "power_budget_w": float, "n0_dbm_hz": float,
    "r_th_bps": float, "rate_scale": float, "objective_scale": float, "w_scale": float,
}


def _convert(section, key, raw, kind):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            # accept 1e5-style ints as long as they are exact
            as_float = float(raw)
            as_int = int(as_float)
            if as_int != as_float:
                raise ValueError(raw)
            return as_int
        return kind(raw)
    except ValueError:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from None


def _read_section(parser, section, types):
    out = {}
    if not parser.has_section(section):
        return out
    for key, raw in parser.items(section):
        if key not in types:
            raise ConfigError(f"unknown key {key!r} in [{section}]")
        out[key] = _convert(section, key, raw, types[key])
    return out


def parse_config(text):
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    known = {"experiment", "smart_grid", "fdma"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(f"unknown section(s): {sorted(unknown)}")
    if not parser.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    exp = _read_section(parser, "experiment", _EXPERIMENT_TYPES)
    if "use_case" not in exp:
        raise ConfigError("missing required key use_case in [experiment]")
    use_case = exp["use_case"]
    if use_case not in CASES:
        raise ConfigError(f"use_case must be one of {CASES}, got {use_case!r}")
    other = "fdma" if use_case == "smart_grid" else "smart_grid"
    if parser.has_section(other):
        raise ConfigError(f"[{other}] section not allowed when use_case is {use_case}")
    if not parser.has_section(use_case):
        raise ConfigError(f"missing required section [{use_case}]")
    if use_case == "smart_grid":
        exp["smart_grid"] = SmartGridConfig(**_read_section(parser, "smart_grid",
                                                            _SMART_GRID_TYPES))
    else:
        exp["fdma"] = FdmaConfig(**_read_section(parser, "fdma", _FDMA_TYPES))
    return ExperimentConfig(**exp)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(config):
    """Render every field explicitly; parse(serialize(c)) == c."""
    parser = configparser.ConfigParser(interpolation=None)
    parser["experiment"] = {key: _format(getattr(config, key)) for key in _EXPERIMENT_TYPES}
    if config.use_case == "smart_grid":
        types, section = _SMART_GRID_TYPES, config.smart_grid
    else:
        types, section = _FDMA_TYPES, config.fdma
    parser[config.use_case] = {key: _format(getattr(section, key)) for key in types}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def scenario(name):
    """Named experiment families, one (label, config) pair per curve."""
    if name not in SCENARIO_NAMES:
        raise ConfigError(f"unknown scenario {name!r}; valid names: {', '.join(SCENARIO_NAMES)}")
    if name == "fig2_stepsizes":
        base = ExperimentConfig(use_case="fdma")
        out = [(f"step_c2_{c2:g}", base.replace(step_c2=float(c2)))
               for c2 in (1e3, 1e4, 1e5)]
        out.append(("error_free", base.replace(channel="error_free")))
        return out
    if name == "fig3_beta_caseB":
        base = ExperimentConfig(use_case="fdma")
        out = [(f"beta_{b:g}", base.replace(beta=float(b))) for b in (1e4, 1e8, 1e10)]
        out.append(("error_free", base.replace(channel="error_free")))
        return out
    if name == "fig4_beta_caseA":
        base = ExperimentConfig(use_case="smart_grid")
        out = [(f"beta_{b:g}", base.replace(beta=float(b))) for b in (1e4, 1e6, 1e8)]
        out.append(("error_free", base.replace(channel="error_free")))
        return out
    if name == "fig5_dualset":
        base = ExperimentConfig(use_case="smart_grid")
        base = base.replace(stackelberg=False)
        out = [(f"zeta_{z:g}_theta_{t:g}",
                base.replace(zeta_prime=float(z), vartheta=float(t)))
               for z, t in ((1, 1), (2, 2), (3, 3), (5, 5))]
        out.append(("error_free", base.replace(channel="error_free")))
        return out
    base = ExperimentConfig(use_case="fdma")
    return [("aircomp", base),
            ("error_free", base.replace(channel="error_free"))]
