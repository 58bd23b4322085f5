"""Limiting constants and exact finite-density means used as check targets."""
from __future__ import annotations

import math

from scipy import integrate, special

from .geometry import SimulationWindow
from .pathloss import PathLossModel, _upper_integral, evaluate, gamma_integral


def interference_limit(model: PathLossModel) -> float:
    """``2*pi*gamma``: limit of total interference divided by density."""
    return 2.0 * math.pi * gamma_integral(model)


def miso_limit(model: PathLossModel) -> float:
    """Limit of ``density / N_t * SINR`` for MISO, SIMO (with N_r) and coordinated sub-linear."""
    return model.l0 / interference_limit(model)


def mimo_limit(model: PathLossModel, ratio: float) -> float:
    """Eigenbeamforming limit with ``N_r / N_t -> ratio``: ``L0 (1 + sqrt(ratio))^2 / (2 pi gamma)``."""
    if not 0 <= ratio <= 1:
        raise ValueError(f"antenna ratio must lie in [0, 1], got {ratio}")
    return miso_limit(model) * (1.0 + math.sqrt(ratio)) ** 2


def coordinated_band(model: PathLossModel, c: float) -> tuple[float, float]:
    """Bounds on the limiting SINR for coordinated beamforming with ``density / N_t -> c``.

    Valid for ``c > L0 / (2 pi gamma)``.
    """
    two_pi_gamma = interference_limit(model)
    if not c * two_pi_gamma > model.l0:
        raise ValueError("the band needs c > L0 / (2 pi gamma)")
    return model.l0 / (c * two_pi_gamma), model.l0 / (c * two_pi_gamma - model.l0)


def mean_gain_uniform(model: PathLossModel, r_max: float) -> float:
    """Average of ``L`` over a serving distance uniform on ``[1, r_max]``."""
    knots = sorted({1.0, r_max, *(b for b in model.breakpoints() if 1.0 < b < r_max)})
    total = sum(integrate.quad(lambda r: evaluate(model, r), a, b, epsabs=0, epsrel=1e-11, limit=200)[0]
                for a, b in zip(knots, knots[1:]))
    return total / (r_max - 1.0)


def adhoc_limit(model: PathLossModel, r_max: float) -> float:
    """Limit of ``density / n * SINR`` for the ad hoc link."""
    return mean_gain_uniform(model, r_max) / interference_limit(model)


def expected_gain_nth(model: PathLossModel, density_per_m2: float, n: int) -> float:
    """``E[L(r_n)]`` for the ``n``-th nearest point (0-indexed) of an unbounded PPP.

    ``u = pi * density * r_n^2`` is Gamma(n + 1, 1) distributed.
    """
    k = n + 1
    scale = math.pi * density_per_m2

    def integrand(u):
        if u == 0.0:
            return model.l0 if k == 1 else 0.0
        density = math.exp((k - 1) * math.log(u) - u - special.gammaln(k))
        return evaluate(model, math.sqrt(u / scale)) * density

    knots = [0.0] + [scale * b * b for b in model.breakpoints()] + [k + 60.0 * math.sqrt(k) + 60.0]
    knots = sorted(set(knots))
    return sum(integrate.quad(integrand, a, b, epsabs=0, epsrel=1e-11, limit=400)[0] for a, b in zip(knots, knots[1:]))


def campbell_window_integral(model: PathLossModel, window: SimulationWindow) -> float:
    """``int_window L(|x|) dx``: mean total power per unit density inside the window."""
    gamma = gamma_integral(model)
    if window.shape == "disk":
        return 2.0 * math.pi * (gamma - _upper_integral(model, window.size_m))
    h = window.size_m
    # eight congruent triangles; on each the radial extent is h / cos(theta)
    val, _ = integrate.quad(lambda t: gamma - _upper_integral(model, h / math.cos(t)), 0.0, math.pi / 4,
                            epsabs=0, epsrel=1e-11)
    return 8.0 * val


def lemma1_finite_mean(model: PathLossModel, density_per_m2: float, window: SimulationWindow, exclusion_count: int) -> float:
    """Exact mean of ``(1/density) * sum_{i >= exclusion_count} L(r_i) g_i`` at finite density.

    Campbell's formula for the whole window minus the mean power of the
    ``exclusion_count`` nearest points (their laws taken in the unbounded
    plane, which is exact up to the chance the window holds fewer points).
    """
    full = campbell_window_integral(model, window)
    removed = sum(expected_gain_nth(model, density_per_m2, j) for j in range(exclusion_count))
    return full - removed / density_per_m2
