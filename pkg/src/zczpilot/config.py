"""Run configuration: flat INI-style text with one section per subsystem.

Sections: [scenario] (antenna counts, training length, correlation
coefficients, energy budget), [design] (designer knobs), [timing]
(sensing geometry) and [output] (directory, format).  Unknown sections or
keys are rejected with their location; values are validated on parse so
commands never start work on a bad configuration.
"""

import configparser
import hashlib
from dataclasses import dataclass

import numpy as np

from .covariance import build_scenario
from .designer import DesignConfig
from .timing import TimingScenario


class ConfigError(Exception):
    """Invalid or unreadable run configuration."""


_SCENARIO_KEYS = {
    "n_t": "transmit antennas (int)",
    "n_r": "receive antennas (int)",
    "b": "training length in symbols (int)",
    "rho_rt_mag": "transmit-side correlation magnitude",
    "rho_rt_phase_pi": "transmit-side correlation phase, units of pi",
    "rho_rr_mag": "receive-side correlation magnitude",
    "rho_rr_phase_pi": "receive-side correlation phase, units of pi",
    "rho_mt_mag": "temporal noise correlation magnitude",
    "rho_mt_phase_pi": "temporal noise correlation phase, units of pi",
    "gamma": "training energy budget (default b*n_t)",
}
_DESIGN_KEYS = {
    "k", "p", "epsilon", "eta", "mu", "max_outer", "inner_tol", "seed",
    "lags_from_one", "literal_transpose",
}
_TIMING_KEYS = {
    "d_user_m", "d_object_m", "symbol_time_s", "processing_symbols",
    "propagation_mps", "modulation_symbols",
}
_OUTPUT_KEYS = {"directory", "format"}
_SECTIONS = {
    "scenario": set(_SCENARIO_KEYS),
    "design": _DESIGN_KEYS,
    "timing": _TIMING_KEYS,
    "output": _OUTPUT_KEYS,
}

_DEFAULT_PHASES = {"rho_rt": -0.8349, "rho_rr": -0.4289, "rho_mt": -0.5361}
_DEFAULT_MAGS = {"rho_rt": 0.9, "rho_rr": 0.65, "rho_mt": 0.8}


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration; scenario/timing parts may be absent."""

    n_t: int | None
    n_r: int | None
    b: int | None
    rho_rt: complex
    rho_rr: complex
    rho_mt: complex
    gamma: float | None
    design: DesignConfig
    timing: TimingScenario | None
    out_dir: str
    fmt: str
    sha256: str

    def downlink(self):
        """Build the downlink scenario; requires the [scenario] section."""
        if self.n_t is None:
            raise ConfigError("[scenario] section with n_t, n_r, b is required")
        return build_scenario(
            self.n_t,
            self.n_r,
            self.b,
            rho_rt=self.rho_rt,
            rho_rr=self.rho_rr,
            rho_mt=self.rho_mt,
            gamma=self.gamma,
        )


def _parse(cp, section, key, conv, kind, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip()
    if raw == "":
        return default
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError(
            f"[{section}] {key}: expected {kind}, got {raw!r}"
        ) from None


def _parse_bool(cp, section, key, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip()
    if raw == "":
        return default
    try:
        return cp.getboolean(section, key)
    except ValueError:
        raise ConfigError(
            f"[{section}] {key}: expected boolean, got {raw!r}"
        ) from None


def parse_config(text, sha256=""):
    """Parse and validate configuration text into a RunConfig."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"cannot parse config: {err}") from None

    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp.options(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(f"[{section}] unknown key {key!r}")

    n_t = _parse(cp, "scenario", "n_t", int, "integer", None)
    n_r = _parse(cp, "scenario", "n_r", int, "integer", None)
    b = _parse(cp, "scenario", "b", int, "integer", None)
    if cp.has_section("scenario"):
        missing = [k for k, v in (("n_t", n_t), ("n_r", n_r), ("b", b)) if v is None]
        if missing:
            raise ConfigError(f"[scenario] missing required key(s): {', '.join(missing)}")

    rhos = {}
    for name in ("rho_rt", "rho_rr", "rho_mt"):
        mag = _parse(cp, "scenario", f"{name}_mag", float, "number", _DEFAULT_MAGS[name])
        phase = _parse(
            cp, "scenario", f"{name}_phase_pi", float, "number", _DEFAULT_PHASES[name]
        )
        if not 0 <= mag < 1:
            raise ConfigError(f"[scenario] {name}_mag: must be in [0, 1), got {mag}")
        rhos[name] = mag * np.exp(1j * np.pi * phase)
    gamma = _parse(cp, "scenario", "gamma", float, "number", None)
    if gamma is not None and gamma <= 0:
        raise ConfigError(f"[scenario] gamma: must be positive, got {gamma}")

    try:
        design = DesignConfig(
            k=_parse(cp, "design", "k", int, "integer", 4),
            p=_parse(cp, "design", "p", float, "number", None),
            epsilon=_parse(cp, "design", "epsilon", float, "number", 1e-5),
            eta=_parse(cp, "design", "eta", float, "number", 1e-5),
            mu=_parse(cp, "design", "mu", int, "integer", 50),
            max_outer=_parse(cp, "design", "max_outer", int, "integer", 200),
            inner_tol=_parse(cp, "design", "inner_tol", float, "number", 1e-8),
            seed=_parse(cp, "design", "seed", int, "integer", 0),
            lags_from_one=_parse_bool(cp, "design", "lags_from_one", False),
            literal_transpose=_parse_bool(cp, "design", "literal_transpose", False),
        )
    except ValueError as err:
        raise ConfigError(f"[design] {err}") from None
    if b is not None and design.k >= b:
        raise ConfigError(f"[design] k: must be smaller than b={b}, got {design.k}")

    timing = None
    if cp.has_section("timing"):
        d_user = _parse(cp, "timing", "d_user_m", float, "number", None)
        symbol_time = _parse(cp, "timing", "symbol_time_s", float, "number", None)
        if d_user is None or symbol_time is None:
            raise ConfigError("[timing] requires d_user_m and symbol_time_s")
        try:
            timing = TimingScenario(
                d_user=d_user,
                symbol_time=symbol_time,
                t_pr=_parse(cp, "timing", "processing_symbols", float, "number", 1.0),
                k=design.k,
                nu=_parse(cp, "timing", "propagation_mps", float, "number", 3.0e8),
                t_mod=_parse(cp, "timing", "modulation_symbols", float, "number", 0.0),
                d_object=_parse(cp, "timing", "d_object_m", float, "number", None),
            )
        except ValueError as err:
            raise ConfigError(f"[timing] {err}") from None

    fmt = "csv"
    out_dir = "out"
    if cp.has_section("output"):
        fmt = cp.get("output", "format", fallback="csv").strip() or "csv"
        if fmt not in ("csv", "json"):
            raise ConfigError(f"[output] format: expected csv or json, got {fmt!r}")
        out_dir = cp.get("output", "directory", fallback="out").strip() or "out"

    return RunConfig(
        n_t=n_t,
        n_r=n_r,
        b=b,
        rho_rt=rhos["rho_rt"],
        rho_rr=rhos["rho_rr"],
        rho_mt=rhos["rho_mt"],
        gamma=gamma,
        design=design,
        timing=timing,
        out_dir=out_dir,
        fmt=fmt,
        sha256=sha256,
    )


def load_config(path):
    """Read and parse a config file; errors name the offending path/key."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as err:
        raise ConfigError(f"config file {path} is not valid UTF-8: {err}") from None
    return parse_config(text, sha256=hashlib.sha256(raw).hexdigest())
