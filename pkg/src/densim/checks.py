"""Pass/fail verification checks behind ``densim verify``.

Every check returns a :class:`CheckReport` with the target constant, the
empirical value, the relative error and the tolerance it was judged at.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import channel, limits
from .errors import ConfigurationError
from .experiments import AntennaScaling, SweepConfig, estimate_limit, run_sweep, verify_lemma1
from .geometry import SimulationWindow, per_km2_to_per_m2, sample_ppp
from .pathloss import PathLossModel, radius_for_truncation
from .seeding import SeedPath
from .sinr import sinr_coordinated, sinr_miso

CHECKS = ("lemma1", "theorem1", "theorem3", "corollary3", "frobenius")


@dataclass
class CheckReport:
    check: str
    target: float | list | None
    empirical: float | None
    relative_error: float | None
    tolerance: float | None
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "target": self.target,
            "empirical": self.empirical,
            "relative_error": self.relative_error,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "details": self.details,
        }


def _rel(value: float, target: float) -> float:
    return (value - target) / target


def lemma1_window(model: PathLossModel, truncation: float) -> SimulationWindow:
    """Smallest disk whose truncation bound is (just) below ``truncation``."""
    return SimulationWindow.disk(radius_for_truncation(model, truncation) * 1.001)


def check_lemma1(model: PathLossModel, density_per_km2: float, trials: int, master_seed: int,
                 truncation: float = 0.01, tolerance: float = 0.03, exclusion_count: int = 1) -> CheckReport:
    window = lemma1_window(model, truncation)
    rep = verify_lemma1(model, per_km2_to_per_m2(density_per_km2), window, trials, master_seed,
                        exclusion_count=exclusion_count, tolerance=tolerance)
    details = rep.to_dict()
    details["window"] = window.to_dict()
    details["finite_density_relative_gap"] = _rel(rep.finite_density_mean, rep.target)
    return CheckReport("lemma1", rep.target, rep.empirical_mean, rep.relative_error, tolerance, rep.passed, details)


def scenario_limit(config: SweepConfig, n_t: int, n_r: int) -> float:
    """Limit of the normalized mean SINR for the scenario of ``config``."""
    s = config.scenario
    if s == "mimo_eigen":
        return limits.mimo_limit(config.model, n_r / n_t)
    if s == "adhoc":
        return limits.adhoc_limit(config.model, config.adhoc_r_max)
    if s == "miso_coordinated":
        raise ValueError("coordinated beamforming has a band, not a single limit")
    return limits.miso_limit(config.model)


def check_limit(config: SweepConfig, name: str = "theorem1", tolerance: float = 0.10,
                slope_tolerance: float = 0.10, workers: int = 1) -> CheckReport:
    """Densest-point deviation of the normalized mean SINR and flatness over the top decade."""
    sweep = run_sweep(config, workers=workers)
    top = sweep.rows[-1]
    target = scenario_limit(config, top.n_t, top.n_r)
    rep = estimate_limit(sweep, target)
    passed = abs(rep.relative_deviation) <= tolerance and abs(rep.slope) <= slope_tolerance
    details = {"limit": rep.to_dict(), "slope_tolerance": slope_tolerance, "warnings": sweep.warnings,
               "n_t": top.n_t, "n_r": top.n_r}
    return CheckReport(name, target, rep.value, rep.relative_deviation, tolerance, passed, details)


def semicircle_samples(n_t: int, n_r: int, draws: int, master_seed: int) -> np.ndarray:
    """``phi0^2 / n_t`` over ``draws`` independent ``n_r x n_t`` channels."""
    out = np.empty(draws)
    for k in range(draws):
        h = channel.sample_matrix(n_r, n_t, SeedPath(master_seed, (k,)))
        out[k] = channel.max_singular_value_sq(h) / n_t
    return out


def check_semicircle(n_t: int, ratio: float, draws: int, master_seed: int, tolerance: float = 0.05) -> CheckReport:
    n_r = max(1, round(ratio * n_t))
    values = semicircle_samples(n_t, n_r, draws, master_seed)
    target = channel.semicircle_edge(n_r / n_t)
    mean = float(np.mean(values))
    err = _rel(mean, target)
    return CheckReport("semicircle", float(target), mean, err, tolerance, abs(err) <= tolerance,
                       {"n_t": n_t, "n_r": n_r, "draws": draws})


def check_theorem3(config: SweepConfig, semicircle: dict, tolerance: float = 0.10,
                   slope_tolerance: float = 0.10, workers: int = 1) -> CheckReport:
    """MIMO sweep limit, with the random-matrix constant checked alongside."""
    mimo = replace(config, scenario="mimo_eigen")
    sweep_rep = check_limit(mimo, "theorem3", tolerance, slope_tolerance, workers)
    sc = check_semicircle(master_seed=config.master_seed, **semicircle)
    sweep_rep.details["semicircle"] = sc.to_dict()
    sweep_rep.passed = sweep_rep.passed and sc.passed
    return sweep_rep


def coupling_violations(model, noise, density_per_m2: float, window: SimulationWindow, n_t: int,
                        trials: int, master_seed: int) -> int:
    """Trials where coordinated beamforming falls below MRT on shared seeds."""
    bad = 0
    for t in range(trials):
        path = SeedPath(master_seed, (t,))
        real = sample_ppp(density_per_m2, window, path.child(0))
        coord = sinr_coordinated(real, model, noise, n_t, path.child(1))
        plain = sinr_miso(real, model, noise, n_t, path.child(1))
        bad += coord.sinr < plain.sinr
    return bad


def check_corollary3(config: SweepConfig, c_factor: float = 2.0, slack: float = 0.10, workers: int = 1) -> CheckReport:
    """Mean SINR band with ``density / n_t -> c`` and the pathwise coupling with plain MRT."""
    c = c_factor * limits.miso_limit(config.model)
    cfg = replace(config, scenario="miso_coordinated", scaling_t=AntennaScaling.linear(1.0 / c))
    sweep = run_sweep(cfg, workers=workers)
    top = sweep.rows[-1]
    lo, hi = limits.coordinated_band(config.model, c)
    in_band = lo * (1 - slack) <= top.mean_sinr <= hi * (1 + slack)
    bad = coupling_violations(cfg.model, cfg.noise, top.density_per_m2, cfg.window_for(top.density_per_m2, top.n_t),
                              top.n_t, cfg.trials_per_point, cfg.master_seed)
    mid = 0.5 * (lo + hi)
    details = {"c": c, "band": [lo, hi], "n_t": top.n_t, "coupling_trials": cfg.trials_per_point,
               "coupling_violations": bad, "warnings": sweep.warnings,
               "mean_sinr_by_density": [r.mean_sinr for r in sweep.rows]}
    return CheckReport("corollary3", [lo, hi], top.mean_sinr, _rel(top.mean_sinr, mid), slack,
                       bool(in_band and bad == 0), details)


def parse_dims(text: str) -> list[tuple[int, int]]:
    dims = []
    for part in text.split(","):
        part = part.strip().lower()
        if part:
            try:
                r, t = part.split("x")
                dims.append((int(r), int(t)))
            except ValueError:
                raise ConfigurationError(f"matrix dimensions must look like 4x8, got {part!r}") from None
    if not dims:
        raise ConfigurationError("no matrix dimensions given")
    return dims


def sandwich_violations(dims, draws: int, master_seed: int) -> dict:
    """Count draws breaking ``||H||_F / min(n_t, n_r) <= phi0^2 <= ||H||_F`` (sum |h|^2 norm).

    ``draws`` are split as evenly as possible over ``dims``.
    """
    counts = {}
    per = [draws // len(dims) + (k < draws % len(dims)) for k in range(len(dims))]
    for j, ((n_r, n_t), n) in enumerate(zip(dims, per)):
        low = high = 0
        for k in range(n):
            h = channel.sample_matrix(n_r, n_t, SeedPath(master_seed, (j, k)))
            fro = channel.frobenius_sq(h)
            phi = channel.max_singular_value_sq(h)
            low += phi < fro / min(n_r, n_t)
            high += phi > fro
        counts[f"{n_r}x{n_t}"] = {"draws": n, "below_lower": low, "above_upper": high}
    return counts


def check_frobenius(dims_text: str, draws: int, master_seed: int) -> CheckReport:
    counts = sandwich_violations(parse_dims(dims_text), draws, master_seed)
    total = sum(c["below_lower"] + c["above_upper"] for c in counts.values())
    return CheckReport("frobenius", 0.0, float(total), None, 0.0, total == 0, {"per_dimension": counts})


def run_check(name: str, config: SweepConfig, verify: dict, workers: int = 1) -> CheckReport:
    if name == "lemma1":
        return check_lemma1(config.model, verify["lemma1_density_per_km2"], verify["lemma1_trials"],
                            config.master_seed, verify["lemma1_truncation"], verify["lemma1_tolerance"],
                            verify["lemma1_exclusion"])
    if name == "theorem1":
        return check_limit(config, "theorem1", verify["limit_tolerance"], verify["slope_tolerance"], workers)
    if name == "theorem3":
        semicircle = {"n_t": verify["semicircle_n_t"], "ratio": verify["semicircle_ratio"],
                      "draws": verify["semicircle_draws"], "tolerance": verify["semicircle_tolerance"]}
        return check_theorem3(config, semicircle, verify["limit_tolerance"], verify["slope_tolerance"], workers)
    if name == "corollary3":
        return check_corollary3(config, verify["coordinated_c_factor"], verify["band_slack"], workers)
    if name == "frobenius":
        return check_frobenius(verify["frobenius_dims"], verify["frobenius_draws"], config.master_seed)
    raise KeyError(name)
