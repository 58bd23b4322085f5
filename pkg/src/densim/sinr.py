"""Per-trial SINR for the tagged user under each antenna scenario.

Every scenario shares one form::

    SINR = L(r0) * G / (sum_{i >= k} L(r_i) g_i + noise)

with ``g_i`` i.i.d. Exp(1) interferer gains and scenario-specific desired
gain ``G`` and exclusion count ``k``:

=================  =============================  ============================
scenario           desired gain ``G``             interference starts at
=================  =============================  ============================
miso_mrt           Gamma(n_t, 1)                  index 1 (serving BS excluded)
simo_mrc           Gamma(n_r, 1)                  index 1
mimo_eigen         largest eigenvalue of H H*     index 1
miso_coordinated   Gamma(n_t, 1)                  index n_t (n_t - 1 nulled)
adhoc              Gamma(n, 1), r0 ~ U[1, r_max]  index 0 (no serving BS in field)
=================  =============================  ============================

Combiners have unit norm, so the noise term is plain ``sigma^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import channel
from .errors import ContractError, DomainError, NoServingBSError, UnsupportedConfigurationError
from .geometry import NetworkRealization, serving_distance
from .pathloss import PathLossModel, evaluate
from .seeding import as_generator

SCENARIOS = ("miso_mrt", "simo_mrc", "mimo_eigen", "miso_coordinated", "adhoc")


@dataclass(frozen=True)
class NoiseSpec:
    power_dbm: float = -70.0

    @property
    def power_watts(self) -> float:
        return 10.0 ** ((self.power_dbm - 30.0) / 10.0)

    def __post_init__(self):
        if not math.isfinite(self.power_dbm):
            raise DomainError(f"noise power must be finite, got {self.power_dbm} dBm")


@dataclass(frozen=True)
class ScenarioSpec:
    """Antenna configuration of one trial (counts already resolved for a density)."""

    scenario: str
    n_t: int = 1
    n_r: int = 1
    adhoc_r_max: float | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise UnsupportedConfigurationError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.n_t < 1 or self.n_r < 1:
            raise DomainError(f"antenna counts must be >= 1, got n_t={self.n_t}, n_r={self.n_r}")
        if self.scenario == "mimo_eigen" and self.n_r > self.n_t:
            raise UnsupportedConfigurationError(f"mimo_eigen needs n_r <= n_t, got {self.n_r} > {self.n_t}")
        if self.scenario == "adhoc" and (self.adhoc_r_max is None or not self.adhoc_r_max > 1):
            raise DomainError(f"adhoc needs adhoc_r_max > 1, got {self.adhoc_r_max}")

    @property
    def normalizer(self) -> int:
        """Antenna count the normalized SINR divides by."""
        return self.n_r if self.scenario in ("simo_mrc", "adhoc") else self.n_t

    def with_counts(self, n_t: int, n_r: int) -> "ScenarioSpec":
        return replace(self, n_t=n_t, n_r=n_r)


@dataclass(frozen=True)
class TrialSample:
    sinr: float
    sinr_normalized: float
    ase: float
    serving_distance_m: float
    interference_power: float
    scenario: ScenarioSpec
    density_per_m2: float
    # set when the window held too few points for the requested exclusion
    flagged: bool = False


def _make_sample(signal, interference, noise, density, r0, spec, flagged=False) -> TrialSample:
    sinr = signal / (interference + noise.power_watts)
    return TrialSample(
        sinr=sinr,
        sinr_normalized=density / spec.normalizer * sinr,
        ase=density * math.log2(1.0 + sinr),
        serving_distance_m=r0,
        interference_power=interference,
        scenario=spec,
        density_per_m2=density,
        flagged=flagged,
    )


def _tail_sum(distances, model, gains, start) -> float:
    if start >= distances.size:
        return 0.0
    return float(np.dot(evaluate(model, distances[start:]), gains[start:]))


def interference_sum(realization: NetworkRealization, model: PathLossModel, interferer_gains, exclusion_count: int) -> float:
    """``sum_{i >= exclusion_count} L(r_i) g_i`` over the sorted points.

    ``interferer_gains`` holds one gain per point of the realization; the
    entries below ``exclusion_count`` are ignored.
    """
    gains = np.asarray(interferer_gains, dtype=float)
    if exclusion_count < 1:
        raise ContractError("exclusion_count must be >= 1: the serving BS never interferes")
    if gains.shape != (realization.count,):
        raise ContractError(f"got {gains.size} gains for {realization.count} points")
    return _tail_sum(realization.distances_m, model, gains, exclusion_count)


def _gamma_link(realization, model, noise, shape, spec, seed, exclusion) -> TrialSample:
    if realization.count == 0:
        raise NoServingBSError("realization has no base station inside the window")
    rng = as_generator(seed)
    desired = rng.gamma(float(shape), 1.0)
    gains = rng.exponential(1.0, realization.count)
    flagged = realization.count <= exclusion
    r0 = serving_distance(realization)
    interference = _tail_sum(realization.distances_m, model, gains, exclusion)
    return _make_sample(evaluate(model, r0) * desired, interference, noise, realization.density_per_m2, r0, spec, flagged)


def sinr_miso(realization, model, noise: NoiseSpec, n_t: int, seed_path) -> TrialSample:
    """MISO with maximum ratio transmission: desired gain Gamma(n_t, 1)."""
    spec = ScenarioSpec("miso_mrt", n_t=n_t)
    return _gamma_link(realization, model, noise, n_t, spec, seed_path, 1)


def sinr_simo(realization, model, noise: NoiseSpec, n_r: int, seed_path) -> TrialSample:
    """SIMO with maximum ratio combining: same draws as :func:`sinr_miso` with n_t := n_r."""
    spec = ScenarioSpec("simo_mrc", n_r=n_r)
    return _gamma_link(realization, model, noise, n_r, spec, seed_path, 1)


def sinr_mimo(realization, model, noise: NoiseSpec, n_t: int, n_r: int, seed_path) -> TrialSample:
    """Single-stream eigenbeamforming; the desired gain is the top squared singular value."""
    spec = ScenarioSpec("mimo_eigen", n_t=n_t, n_r=n_r)
    if realization.count == 0:
        raise NoServingBSError("realization has no base station inside the window")
    rng = as_generator(seed_path)
    h = channel.sample_matrix(n_r, n_t, rng)
    phi0_sq = channel.max_singular_value_sq(h)
    gains = rng.exponential(1.0, realization.count)
    r0 = serving_distance(realization)
    interference = _tail_sum(realization.distances_m, model, gains, 1)
    return _make_sample(evaluate(model, r0) * phi0_sq, interference, noise, realization.density_per_m2, r0, spec)


def sinr_coordinated(realization, model, noise: NoiseSpec, n_t: int, seed_path) -> TrialSample:
    """Coordinated beamforming nulling the ``n_t - 1`` nearest interferers.

    The desired gain keeps the Gamma(n_t, 1) law of plain MRT, which makes the
    result an idealized upper bound.  With ``n_t`` or fewer points in the
    window the out-of-cluster interference is zero and the sample is flagged.
    """
    spec = ScenarioSpec("miso_coordinated", n_t=n_t)
    return _gamma_link(realization, model, noise, n_t, spec, seed_path, n_t)


def sinr_adhoc(realization, model, noise: NoiseSpec, n: int, r_max: float, seed_path) -> TrialSample:
    """Ad hoc link: serving distance U[1, r_max] independent of the field, every point interferes."""
    spec = ScenarioSpec("adhoc", n_r=n, adhoc_r_max=r_max)
    rng = as_generator(seed_path)
    r0 = float(rng.uniform(1.0, r_max))
    desired = rng.gamma(float(n), 1.0)
    gains = rng.exponential(1.0, realization.count)
    interference = _tail_sum(realization.distances_m, model, gains, 0)
    return _make_sample(evaluate(model, r0) * desired, interference, noise, realization.density_per_m2, r0, spec)


def run_trial(spec: ScenarioSpec, realization, model, noise, seed_path) -> TrialSample:
    """Dispatch to the SINR function of ``spec.scenario``."""
    if spec.scenario == "miso_mrt":
        return sinr_miso(realization, model, noise, spec.n_t, seed_path)
    if spec.scenario == "simo_mrc":
        return sinr_simo(realization, model, noise, spec.n_r, seed_path)
    if spec.scenario == "mimo_eigen":
        return sinr_mimo(realization, model, noise, spec.n_t, spec.n_r, seed_path)
    if spec.scenario == "miso_coordinated":
        return sinr_coordinated(realization, model, noise, spec.n_t, seed_path)
    return sinr_adhoc(realization, model, noise, spec.n_r, spec.adhoc_r_max, seed_path)
