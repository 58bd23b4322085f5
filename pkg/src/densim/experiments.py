"""Density sweeps, aggregation and scaling-law checks."""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import limits
from .errors import ConfigurationError, InfeasibleModelError, InsufficientDataError, UnsupportedConfigurationError
from .geometry import SimulationWindow, per_km2_to_per_m2, per_m2_to_per_km2, sample_ppp
from .pathloss import PathLossModel, check_feasibility, truncation_bound
from .seeding import SeedPath
from .sinr import SCENARIOS, NoiseSpec, ScenarioSpec, _tail_sum, run_trial

Z95 = 1.959963984540054

# run_sweep records a warning above this truncation fraction
SWEEP_TRUNCATION_WARN = 0.05

RULES = ("constant", "power_law", "linear_ceiling")


@dataclass(frozen=True)
class AntennaScaling:
    """``N(density)``: a constant, ``ceil(a * density**beta)`` or ``ceil(a * density)``.

    Densities are in BS/m^2, so ``a`` carries units of ``m^(2 beta)``.
    """

    rule: str = "constant"
    n: int = 1
    coefficient: float = 1.0
    exponent: float = 1.0

    def __post_init__(self):
        if self.rule not in RULES:
            raise ConfigurationError(f"unknown antenna scaling rule {self.rule!r}; expected one of {RULES}")
        if self.rule == "constant" and (int(self.n) != self.n or self.n < 1):
            raise ConfigurationError(f"constant antenna count must be an integer >= 1, got {self.n}")
        if self.rule != "constant":
            if not (self.coefficient > 0 and math.isfinite(self.coefficient)):
                raise ConfigurationError(f"scaling coefficient must be positive, got {self.coefficient}")
            if self.rule == "power_law" and not self.exponent >= 0:
                raise ConfigurationError(f"scaling exponent must be >= 0 to be non-decreasing, got {self.exponent}")

    @classmethod
    def constant(cls, n: int = 1):
        return cls("constant", n=n)

    @classmethod
    def linear(cls, coefficient: float):
        return cls("linear_ceiling", coefficient=coefficient)

    @classmethod
    def power_law(cls, coefficient: float, exponent: float):
        return cls("power_law", coefficient=coefficient, exponent=exponent)

    def to_dict(self) -> dict:
        if self.rule == "constant":
            return {"rule": "constant", "n": int(self.n)}
        out = {"rule": self.rule, "coefficient": self.coefficient}
        if self.rule == "power_law":
            out["exponent"] = self.exponent
        return out


def antenna_count(scaling: AntennaScaling, density_per_m2: float) -> int:
    if not density_per_m2 > 0:
        raise ConfigurationError(f"density must be positive, got {density_per_m2}")
    if scaling.rule == "constant":
        return int(scaling.n)
    beta = 1.0 if scaling.rule == "linear_ceiling" else scaling.exponent
    x = scaling.coefficient * density_per_m2**beta
    # strip representation error so that e.g. 3e-3 * 1e6 -> 3000, not 3001
    n = math.ceil(x * (1.0 - 1e-12))
    if n < 1:
        raise ConfigurationError(f"scaling rule gives N = {n} < 1 at density {density_per_m2}")
    return n


def geometric_grid(start_per_km2: float, stop_per_km2: float, ratio: float = 2.0) -> tuple[float, ...]:
    """Densities ``start * ratio**k`` up to ``stop`` inclusive, returned in BS/m^2."""
    if not (start_per_km2 > 0 and stop_per_km2 >= start_per_km2 and ratio > 1):
        raise ConfigurationError("need 0 < start <= stop and ratio > 1")
    count = int(math.floor(math.log(stop_per_km2 / start_per_km2) / math.log(ratio) + 1e-9)) + 1
    return tuple(per_km2_to_per_m2(start_per_km2 * ratio**k) for k in range(count))


@dataclass(frozen=True)
class SweepConfig:
    density_grid: tuple[float, ...]
    scenario: str
    model: PathLossModel
    window: SimulationWindow
    scaling_t: AntennaScaling = AntennaScaling()
    scaling_r: AntennaScaling = AntennaScaling()
    noise: NoiseSpec = NoiseSpec()
    trials_per_point: int = 1000
    master_seed: int = 1
    adhoc_r_max: float | None = None
    # the window grows per density until it holds this many points on average
    min_expected_points: float = 50.0

    def __post_init__(self):
        grid = tuple(float(d) for d in self.density_grid)
        if not grid or any(d <= 0 for d in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigurationError("density grid must be non-empty, positive and strictly ascending")
        object.__setattr__(self, "density_grid", grid)
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if int(self.trials_per_point) != self.trials_per_point or self.trials_per_point < 1:
            raise ConfigurationError(f"trials_per_point must be an integer >= 1, got {self.trials_per_point}")
        if self.scenario == "adhoc" and (self.adhoc_r_max is None or not self.adhoc_r_max > 1):
            raise ConfigurationError("adhoc sweeps need adhoc_r_max > 1")

    def antennas(self, density_per_m2: float) -> tuple[int, int]:
        """``(n_t, n_r)`` the scenario uses at this density."""
        s = self.scenario
        n_t = antenna_count(self.scaling_t, density_per_m2) if s in ("miso_mrt", "mimo_eigen", "miso_coordinated") else 1
        n_r = antenna_count(self.scaling_r, density_per_m2) if s in ("simo_mrc", "mimo_eigen", "adhoc") else 1
        if s == "mimo_eigen" and n_r > n_t:
            raise UnsupportedConfigurationError(f"n_r = {n_r} exceeds n_t = {n_t} at density {density_per_m2}")
        return n_t, n_r

    def window_for(self, density_per_m2: float, n_t: int) -> SimulationWindow:
        need = self.min_expected_points
        if self.scenario == "miso_coordinated":
            need += n_t + 10.0 * math.sqrt(n_t)
        return self.window.with_min_expected_count(density_per_m2, need)

    def to_dict(self) -> dict:
        return {
            "density_grid_per_km2": [per_m2_to_per_km2(d) for d in self.density_grid],
            "scenario": self.scenario,
            "adhoc_r_max": self.adhoc_r_max,
            "model": self.model.to_dict(),
            "window": self.window.to_dict(),
            "scaling_t": self.scaling_t.to_dict(),
            "scaling_r": self.scaling_r.to_dict(),
            "noise_dbm": self.noise.power_dbm,
            "trials_per_point": int(self.trials_per_point),
            "master_seed": int(self.master_seed),
            "min_expected_points": self.min_expected_points,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class SweepRow:
    density_per_m2: float
    n_t: int
    n_r: int
    trials: int
    mean_sinr: float
    mean_sinr_normalized: float
    mean_ase: float
    ase_relative_gain_vs_half_density: float
    ci_halfwidth_95: float
    ci95_ase: float
    ci95_sinr_normalized: float
    truncation_fraction: float
    flagged_trials: int = 0
    window_size_m: float = math.nan

    @property
    def density_per_km2(self) -> float:
        return per_m2_to_per_km2(self.density_per_m2)

    @property
    def mean_sinr_db(self) -> float:
        return 10.0 * math.log10(self.mean_sinr) if self.mean_sinr > 0 else -math.inf


@dataclass
class SweepResult:
    scenario: str
    rows: list[SweepRow]
    provenance: dict
    warnings: list[str] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    @property
    def densities(self) -> np.ndarray:
        return self.column("density_per_m2")


def ci_halfwidth_95(values: np.ndarray) -> float:
    """Normal-approximation 95% half-width of the mean, from the sample variance."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return math.nan
    return Z95 * float(np.std(values, ddof=1)) / math.sqrt(values.size)


def _trial_block(config: SweepConfig, density: float, window: SimulationWindow,
                 spec: ScenarioSpec, start: int, stop: int) -> np.ndarray:
    """Trials ``start..stop-1`` of one density as rows ``(sinr, normalized, ase, flagged)``."""
    out = np.empty((stop - start, 4))
    for k, t in enumerate(range(start, stop)):
        path = SeedPath(config.master_seed, (t,))
        realization = sample_ppp(density, window, path.child(0))
        s = run_trial(spec, realization, config.model, config.noise, path.child(1))
        out[k] = (s.sinr, s.sinr_normalized, s.ase, s.flagged)
    return out


def _blocks(trials: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(trials / (4 * workers)))
    return [(a, min(a + size, trials)) for a in range(0, trials, size)]


def run_sweep(config: SweepConfig, workers: int = 1) -> SweepResult:
    """Run ``trials_per_point`` independent trials at every density of the grid.

    Trial ``t`` draws from seed path ``(master_seed, t)`` at every density, so
    neighbouring densities see common random numbers and their ratios are
    far less noisy than independent rows would give.  Per-trial values are
    reduced in trial order, so the result does not depend on ``workers``.
    """
    report = check_feasibility(config.model)
    if not report.feasible:
        raise InfeasibleModelError(f"model {config.model.describe()} is not physically feasible", report)

    warnings_: list[str] = []
    jobs = []
    for i, density in enumerate(config.density_grid):
        n_t, n_r = config.antennas(density)
        spec = ScenarioSpec(config.scenario, n_t=n_t, n_r=n_r, adhoc_r_max=config.adhoc_r_max)
        window = config.window_for(density, n_t)
        jobs.append((i, density, window, spec))

    results = {}
    blocks = _blocks(config.trials_per_point, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {(i, a): pool.submit(_trial_block, config, d, w, s, a, b)
                       for i, d, w, s in jobs for a, b in blocks}
            results = {key: f.result() for key, f in futures.items()}
    else:
        for i, d, w, s in jobs:
            for a, b in blocks:
                results[(i, a)] = _trial_block(config, d, w, s, a, b)

    rows: list[SweepRow] = []
    for i, density, window, spec in jobs:
        data = np.concatenate([results[(i, a)] for a, _ in blocks])
        sinr, norm, ase, flagged = data.T
        trunc = truncation_bound(config.model, window.inscribed_radius_m)
        if trunc > SWEEP_TRUNCATION_WARN:
            warnings_.append(
                f"density {per_m2_to_per_km2(density):g}/km2: window truncates {trunc:.2%} of gamma"
            )
        n_flagged = int(flagged.sum())
        if n_flagged:
            warnings_.append(
                f"density {per_m2_to_per_km2(density):g}/km2: {n_flagged} trials had no out-of-cluster interferer"
            )
        gain = math.nan
        mean_ase = float(np.mean(ase))
        if rows and math.isclose(density / rows[-1].density_per_m2, 2.0, rel_tol=1e-9):
            gain = mean_ase / rows[-1].mean_ase
        rows.append(SweepRow(
            density_per_m2=density,
            n_t=spec.n_t,
            n_r=spec.n_r,
            trials=int(sinr.size),
            mean_sinr=float(np.mean(sinr)),
            mean_sinr_normalized=float(np.mean(norm)),
            mean_ase=mean_ase,
            ase_relative_gain_vs_half_density=gain,
            ci_halfwidth_95=ci_halfwidth_95(sinr),
            ci95_ase=ci_halfwidth_95(ase),
            ci95_sinr_normalized=ci_halfwidth_95(norm),
            truncation_fraction=trunc,
            flagged_trials=n_flagged,
            window_size_m=window.size_m,
        ))
    provenance = {"master_seed": int(config.master_seed), "config_digest": config.digest()}
    return SweepResult(config.scenario, rows, provenance, warnings_)


# ---------------------------------------------------------------------------
# checks


def ase_relative_gain(sweep: SweepResult) -> np.ndarray:
    """``mean_ase[i] / mean_ase[i-1]`` for a grid that doubles at every step."""
    d = sweep.densities
    if d.size < 2:
        raise InsufficientDataError("need at least two densities")
    ratios = d[1:] / d[:-1]
    if not np.allclose(ratios, 2.0, rtol=1e-9, atol=0.0):
        raise ConfigurationError("ASE relative gain needs a density grid with ratio 2")
    ase = sweep.column("mean_ase")
    return ase[1:] / ase[:-1]


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 2:
        raise InsufficientDataError("need at least two points for a slope")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@dataclass(frozen=True)
class LimitReport:
    metric: str
    densest_density_per_m2: float
    value: float
    target: float | None
    relative_deviation: float | None
    slope: float
    slope_densities_per_m2: tuple[float, ...]

    def to_dict(self) -> dict:
        return asdict(self)


def estimate_limit(sweep: SweepResult, target_constant: float | None = None,
                   metric: str = "mean_sinr_normalized", decades: float = 1.0) -> LimitReport:
    """Compare the densest row with a limit and fit the log-log slope over the top ``decades``."""
    if len(sweep.rows) < 4:
        raise InsufficientDataError(f"need at least 4 density points, got {len(sweep.rows)}")
    d = sweep.densities
    values = sweep.column(metric)
    top = d >= d[-1] / 10.0**decades * (1 - 1e-9)
    if top.sum() < 2:
        raise InsufficientDataError("fewer than two densities in the slope window")
    value = float(values[-1])
    deviation = None if target_constant is None else (value - target_constant) / target_constant
    return LimitReport(metric, float(d[-1]), value, target_constant, deviation,
                       loglog_slope(d[top], values[top]), tuple(float(x) for x in d[top]))


@dataclass(frozen=True)
class ConvergenceReport:
    density_per_m2: float
    trials: int
    exclusion_count: int
    empirical_mean: float
    ci_halfwidth_95: float
    target: float
    relative_error: float
    finite_density_mean: float
    truncation_fraction: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.relative_error) <= self.tolerance

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def lemma1_samples(model: PathLossModel, density_per_m2: float, window: SimulationWindow, trials: int,
                   master_seed: int, exclusion_count: int = 1) -> np.ndarray:
    """Per-trial ``(1/density) * sum_{i >= exclusion_count} L(r_i) g_i`` with Exp(1) gains."""
    out = np.empty(trials)
    for t in range(trials):
        path = SeedPath(master_seed, (t,))
        realization = sample_ppp(density_per_m2, window, path.child(0))
        gains = path.child(1).generator().exponential(1.0, realization.count)
        out[t] = _tail_sum(realization.distances_m, model, gains, exclusion_count) / density_per_m2
    return out


def verify_lemma1(model: PathLossModel, density_per_m2: float, window: SimulationWindow, trials: int,
                  master_seed: int, exclusion_count: int = 1, tolerance: float = 0.03) -> ConvergenceReport:
    """Normalized interference at one density against its limit ``2*pi*gamma``.

    ``finite_density_mean`` is the exact expectation at this density and
    window, which the empirical mean must match up to Monte Carlo error even
    where the limit itself is still far away.
    """
    if not (density_per_m2 > 0 and trials > 0):
        raise ConfigurationError("density and trials must be positive")
    values = lemma1_samples(model, density_per_m2, window, trials, master_seed, exclusion_count)
    target = limits.interference_limit(model)
    mean = float(np.mean(values))
    return ConvergenceReport(
        density_per_m2=density_per_m2,
        trials=trials,
        exclusion_count=exclusion_count,
        empirical_mean=mean,
        ci_halfwidth_95=ci_halfwidth_95(values),
        target=target,
        relative_error=(mean - target) / target,
        finite_density_mean=limits.lemma1_finite_mean(model, density_per_m2, window, exclusion_count),
        truncation_fraction=truncation_bound(model, window.inscribed_radius_m),
        tolerance=tolerance,
    )
