"""INI run configuration.

A config file has these sections (all optional except ``[model]``)::

    [model]     kind, l0 and the kind's parameters
    [window]    shape = disk|square, size_m
    [noise]     power_dbm
    [scenario]  name, adhoc_r_max
    [scaling]   transmit / receive antenna rules
    [sweep]     densities_per_km2 or start/stop/ratio, trials, min_expected_points
    [seed]      master
    [verify]    parameters of the verification checks

``configs/README.md`` documents every key.  Unknown sections or keys are
rejected so that typos do not silently fall back to defaults.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import dataclass, field

from .errors import ConfigurationError
from .experiments import AntennaScaling, SweepConfig
from .geometry import SimulationWindow, per_km2_to_per_m2
from .pathloss import KINDS, PathLossModel, model_from_spec
from .sinr import SCENARIOS, NoiseSpec

SECTIONS = ("model", "window", "noise", "scenario", "scaling", "sweep", "seed", "verify")

_MODEL_KEYS = {
    "stretched_exponential": {"eta": float, "kappa": float},
    "bounded_single_slope": {"exponent": float, "breakpoint_m": float},
    "bounded_multi_slope": {"breakpoints_m": "floats", "exponents": "floats"},
    "bounded_support": {"support_radius_m": float},
}

_VERIFY_DEFAULTS = {
    "lemma1_density_per_km2": 2000.0,
    "lemma1_trials": 2000,
    "lemma1_truncation": 0.01,
    "lemma1_tolerance": 0.03,
    "lemma1_exclusion": 1,
    "frobenius_draws": 10000,
    "frobenius_dims": "1x1, 4x8, 64x256",
    "semicircle_n_t": 256,
    "semicircle_ratio": 0.25,
    "semicircle_draws": 200,
    "semicircle_tolerance": 0.05,
    "limit_tolerance": 0.10,
    "slope_tolerance": 0.10,
    "band_slack": 0.10,
    "coordinated_c_factor": 2.0,
}

_ALLOWED = {
    "window": {"shape", "size_m"},
    "noise": {"power_dbm"},
    "scenario": {"name", "adhoc_r_max"},
    "scaling": {"transmit_rule", "transmit_n", "transmit_coefficient", "transmit_exponent",
                "receive_rule", "receive_n", "receive_coefficient", "receive_exponent"},
    "sweep": {"densities_per_km2", "start_per_km2", "stop_per_km2", "ratio", "trials", "min_expected_points"},
    "seed": {"master"},
    "verify": set(_VERIFY_DEFAULTS),
}


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs, plus the canonical form it was built from."""

    sweep: SweepConfig
    verify: dict
    canonical: dict = field(repr=False)

    @property
    def model(self) -> PathLossModel:
        return self.sweep.model

    def digest(self) -> str:
        return config_digest(self.canonical)


def config_digest(canonical: dict) -> str:
    """sha256 of the canonical JSON form of an effective configuration."""
    blob = json.dumps(canonical, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _floats(text: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    return tuple(float(p) for p in parts)


def _get(section, key, kind, default=None):
    if key not in section:
        if default is None:
            raise ConfigurationError(f"missing key {key!r} in [{section.name}]")
        return default
    raw = section[key].strip()
    try:
        if kind == "floats":
            return _floats(raw)
        if kind is int:
            value = float(raw)
            if value != int(value):
                raise ValueError(raw)
            return int(value)
        return kind(raw)
    except ValueError as exc:
        raise ConfigurationError(f"[{section.name}] {key} = {raw!r} is not a valid {getattr(kind, '__name__', kind)}") from exc


def _scaling(section, prefix: str) -> AntennaScaling:
    if section is None:
        return AntennaScaling()
    rule = section.get(f"{prefix}_rule", "constant").strip()
    if rule == "constant":
        return AntennaScaling.constant(_get(section, f"{prefix}_n", int, 1))
    coefficient = _get(section, f"{prefix}_coefficient", float)
    exponent = _get(section, f"{prefix}_exponent", float, 1.0) if rule == "power_law" else 1.0
    return AntennaScaling(rule, coefficient=coefficient, exponent=exponent)


def _model(section) -> PathLossModel:
    kind = section.get("kind", "").strip()
    if kind not in _MODEL_KEYS:
        raise ConfigurationError(f"path-loss kind {kind!r} unsupported; expected one of {KINDS}")
    allowed = set(_MODEL_KEYS[kind]) | {"kind", "l0"}
    extra = set(section) - allowed
    if extra:
        raise ConfigurationError(f"unknown keys for {kind} in [model]: {sorted(extra)}")
    params = {k: _get(section, k, t) for k, t in _MODEL_KEYS[kind].items() if k in section}
    params["l0"] = _get(section, "l0", float, 1.0)
    return model_from_spec(kind, **params)


def _grid(section) -> tuple[float, ...]:
    if section is None:
        section = {}
    if "densities_per_km2" in section:
        try:
            values = _floats(section["densities_per_km2"])
        except ValueError as exc:
            raise ConfigurationError(f"[sweep] densities_per_km2 is not a list of numbers: {exc}") from exc
    else:
        try:
            start = float(section.get("start_per_km2", 10.0))
            stop = float(section.get("stop_per_km2", 2e4))
            ratio = float(section.get("ratio", 2.0))
        except ValueError as exc:
            raise ConfigurationError(f"[sweep] grid bounds must be numbers: {exc}") from exc
        if not (start > 0 and stop >= start and ratio > 1):
            raise ConfigurationError("[sweep] needs 0 < start_per_km2 <= stop_per_km2 and ratio > 1")
        count = int(math.floor(math.log(stop / start) / math.log(ratio) + 1e-9)) + 1
        # anchored at the top so the densest point is exactly stop_per_km2
        values = tuple(stop / ratio**k for k in range(count - 1, -1, -1))
    return tuple(per_km2_to_per_m2(v) for v in values)


def parse_config(text: str, seed: int | None = None, trials: int | None = None) -> RunConfig:
    """Parse INI text; ``seed`` and ``trials`` override the file when given."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse config: {exc}") from exc
    unknown = set(parser.sections()) - set(SECTIONS)
    if unknown:
        raise ConfigurationError(f"unknown sections {sorted(unknown)}; expected some of {SECTIONS}")
    for name, allowed in _ALLOWED.items():
        if parser.has_section(name):
            extra = set(parser[name]) - allowed
            if extra:
                raise ConfigurationError(f"unknown keys in [{name}]: {sorted(extra)}")
    if not parser.has_section("model"):
        raise ConfigurationError("config needs a [model] section")
    sec = lambda name: parser[name] if parser.has_section(name) else None  # noqa: E731

    model = _model(parser["model"])

    w = sec("window")
    window = SimulationWindow(w.get("shape", "square").strip() if w else "square",
                              _get(w, "size_m", float, 500.0) if w else 500.0)
    noise = NoiseSpec(_get(sec("noise"), "power_dbm", float, -70.0) if sec("noise") else -70.0)

    s = sec("scenario")
    scenario = s.get("name", "miso_mrt").strip() if s else "miso_mrt"
    if scenario not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    r_max = _get(s, "adhoc_r_max", float) if s is not None and "adhoc_r_max" in s else None

    sw = sec("sweep")
    n_trials = _get(sw, "trials", int, 1000) if sw else 1000
    min_points = _get(sw, "min_expected_points", float, 50.0) if sw else 50.0
    if trials is not None:
        n_trials = trials
    master = _get(sec("seed"), "master", int, 1) if sec("seed") else 1
    if seed is not None:
        master = seed
    if not 0 <= master < 2**64:
        raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {master}")

    v = sec("verify")
    verify = {}
    for key, default in _VERIFY_DEFAULTS.items():
        kind = type(default)
        verify[key] = _get(v, key, kind, default) if v is not None else default

    sweep = SweepConfig(
        density_grid=_grid(sw),
        scenario=scenario,
        model=model,
        window=window,
        scaling_t=_scaling(sec("scaling"), "transmit"),
        scaling_r=_scaling(sec("scaling"), "receive"),
        noise=noise,
        trials_per_point=n_trials,
        master_seed=master,
        adhoc_r_max=r_max,
        min_expected_points=min_points,
    )
    canonical = {"sweep": sweep.to_dict(), "verify": verify}
    return RunConfig(sweep, verify, canonical)


def load_config(path, seed: int | None = None, trials: int | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, seed=seed, trials=trials)
