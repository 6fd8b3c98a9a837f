"""Run configuration: flat key=value files, strict schema, shipped presets.

User-facing frequencies are cyclic (MHz/GHz/kHz) and times are microseconds;
conversion to angular rad/s happens here at the boundary and nowhere else.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

from .drive import OMEGA1_DEFAULT, OMEGA2_DEFAULT, DriveConfig
from .errors import ConfigError
from .noise import DriveNoiseParams, OUParams, calibrate_sigma

TWO_PI = 2.0 * math.pi

CALIBRATION_SEED = 715  # fixed: sigma is a physical calibration, not a run stream


def _boolean(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(*options):
    def convert(text: str) -> str:
        if text not in options:
            raise ValueError(f"must be one of {options}, got {text!r}")
        return text
    return convert


def _float_or_auto(text: str):
    if text.strip().lower() == "auto":
        return "auto"
    return float(text)


_REQUIRED = object()

# key -> (converter, default); _REQUIRED markers are enforced per command
SCHEMA = {
    "scheme": (_choice("basic", "improved"), "basic"),
    "drive_d_mhz": (float, None),
    "drive_b_mhz": (float, None),
    "rabi1_mhz": (float, None),
    "rabi2_mhz": (float, None),
    "delta_mhz": (float, None),
    "delta0_mhz": (float, 0.0),
    "omega1_ghz": (float, OMEGA1_DEFAULT / TWO_PI / 1e9),
    "omega2_ghz": (float, OMEGA2_DEFAULT / TWO_PI / 1e9),
    "resonant_phase_pi": (_boolean, True),
    "t2_star_us": (float, 2.0),
    "tau_c_us": (float, 15.0),
    "sigma_b_khz": (float, None),
    "delta_rms": (float, 0.005),
    "drive_correlation": (_choice("correlated", "independent", "imbalanced"),
                          "correlated"),
    "imbalance_ratio": (float, 4.0),
    "direction_w1": (float, 1.0),
    "direction_w2": (float, None),
    "protocol": (_choice("fid_bare", "rabi_bare", "dressed_ramsey",
                         "survival_probe"), None),
    "transition": (_choice("minus", "plus"), "minus"),
    "tau_max_us": (float, None),
    "tau_points": (int, None),
    "tau_windows": (int, None),
    "tau_window_span_us": (float, None),
    "trials": (int, None),
    "dt_ns": (float, None),
    "scan_type": (_choice("delta", "omega"), None),
    "delta_min_mhz": (float, None),
    "delta_max_mhz": (float, None),
    "delta_points": (int, None),
    "omega_min_mhz": (float, None),
    "omega_max_mhz": (float, None),
    "omega_points": (int, None),
    "t_limit_us": (_float_or_auto, "auto"),
    "seed": (int, 12345),
    "workers": (int, None),
}

_COMMAND_REQUIREMENTS = {
    "spectrum": ("delta_mhz",),
    "scan": ("scan_type",),
    "protocol": ("protocol", "tau_max_us", "tau_points", "trials"),
    "optimize": (),
}


@dataclass
class RunConfig:
    """Resolved flat configuration; field names mirror the file keys."""

    values: dict

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError as exc:
            raise AttributeError(name) from exc

    def drive_config(self, delta_mhz=None, delta0_mhz=None) -> DriveConfig:
        v = self.values
        if v["drive_d_mhz"] is not None:
            if v["rabi1_mhz"] is not None:
                raise ConfigError("give either drive_*_mhz or rabi*_mhz, not both")
            rabi1 = TWO_PI * 1e6 * v["drive_d_mhz"] / math.sqrt(2.0)
            drive_b = v["drive_b_mhz"] if v["drive_b_mhz"] is not None else v["drive_d_mhz"]
            rabi2 = TWO_PI * 1e6 * drive_b / math.sqrt(2.0)
        elif v["rabi1_mhz"] is not None:
            rabi1 = TWO_PI * 1e6 * v["rabi1_mhz"]
            rabi2 = TWO_PI * 1e6 * (v["rabi2_mhz"] if v["rabi2_mhz"] is not None
                                    else v["rabi1_mhz"])
        else:
            raise ConfigError("drive strength missing: set drive_d_mhz or rabi1_mhz")
        delta = v["delta_mhz"] if delta_mhz is None else delta_mhz
        if delta is None:
            raise ConfigError("delta_mhz is required for this command")
        delta0 = v["delta0_mhz"] if delta0_mhz is None else delta0_mhz
        return DriveConfig(rabi1=rabi1, rabi2=rabi2,
                           delta=TWO_PI * 1e6 * delta,
                           delta0=TWO_PI * 1e6 * delta0,
                           omega1=TWO_PI * 1e9 * v["omega1_ghz"],
                           omega2=TWO_PI * 1e9 * v["omega2_ghz"],
                           resonant_phase_pi=v["resonant_phase_pi"])

    def direction(self):
        w1 = self.values["direction_w1"]
        w2 = self.values["direction_w2"]
        if w2 is None:
            mode = self.values["drive_correlation"]
            w2 = self.values["imbalance_ratio"] if mode == "imbalanced" else w1
        return (w1, w2)

    def resolved_sigma(self) -> float:
        if self.values["sigma_b_khz"] is not None:
            return TWO_PI * 1e3 * self.values["sigma_b_khz"]
        return calibrate_sigma(self.values["t2_star_us"] * 1e-6,
                               self.values["tau_c_us"] * 1e-6,
                               trials=4000, tol=0.02, seed=CALIBRATION_SEED)

    def ou_params(self) -> OUParams:
        return OUParams(sigma=self.resolved_sigma(),
                        tau_c=self.values["tau_c_us"] * 1e-6)

    def drive_noise_params(self) -> DriveNoiseParams:
        return DriveNoiseParams(delta_rms=self.values["delta_rms"],
                                mode=self.values["drive_correlation"],
                                ratio=self.values["imbalance_ratio"])

    def as_dict(self) -> dict:
        return dict(self.values)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse key = value lines; '#' starts a comment; unknown keys rejected."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        converter, _ = SCHEMA[key]
        try:
            raw[key] = converter(value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    return raw


def resolve(raw: dict, command: str, overrides: dict | None = None) -> RunConfig:
    """Fill defaults, apply overrides, and enforce per-command requirements."""
    values = {key: default for key, (_, default) in SCHEMA.items()}
    values.update(raw)
    if overrides:
        for key, text in overrides.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown override key {key!r}")
            converter, _ = SCHEMA[key]
            try:
                values[key] = converter(text) if isinstance(text, str) else text
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad override for {key}: {exc}") from exc
    for key in _COMMAND_REQUIREMENTS.get(command, ()):
        if values.get(key) is None:
            raise ConfigError(f"command {command!r} requires the key {key!r}")
    _validate_positive(values)
    return RunConfig(values=values)


def _validate_positive(values: dict):
    positive = ["t2_star_us", "tau_c_us", "imbalance_ratio", "omega1_ghz",
                "omega2_ghz"]
    for key in positive:
        if values[key] is not None and not values[key] > 0:
            raise ConfigError(f"{key} must be positive")
    nonneg = ["delta_rms"]
    for key in nonneg:
        if values[key] is not None and values[key] < 0:
            raise ConfigError(f"{key} must be nonnegative")
    for key in ("tau_points", "trials", "delta_points", "omega_points"):
        if values[key] is not None and values[key] < 1:
            raise ConfigError(f"{key} must be at least 1")
    if values["tau_max_us"] is not None and not values["tau_max_us"] > 0:
        raise ConfigError("tau_max_us must be positive")
    if values["dt_ns"] is not None and not values["dt_ns"] > 0:
        raise ConfigError("dt_ns must be positive")
    if values["sigma_b_khz"] is not None and values["sigma_b_khz"] < 0:
        raise ConfigError("sigma_b_khz must be nonnegative")


def available_presets() -> list:
    pkg = resources.files(__package__) / "presets"
    return sorted(p.name[:-5] for p in pkg.iterdir() if p.name.endswith(".conf"))


def load_preset(name: str) -> dict:
    pkg = resources.files(__package__) / "presets" / f"{name}.conf"
    try:
        text = pkg.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"unknown preset {name!r}; available: "
                          f"{', '.join(available_presets())}") from exc
    return parse_config_text(text, source=f"preset:{name}")


def load_config_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=str(path))
