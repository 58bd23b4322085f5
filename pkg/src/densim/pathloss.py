"""Physically feasible path-loss models.

A model maps distance ``r`` (meters) to the mean channel gain ``L(r)``.  It is
physically feasible when ``L0 = L(0)`` is finite, ``L(r) <= L0`` everywhere and
``gamma = int_0^inf r L(r) dr`` is finite and positive.  ``2*pi*gamma`` is the
per-unit-density mean of the total received power from a Poisson field of
unit-power transmitters, so it sets every limiting constant in the simulator.

Built-in kinds
--------------
``stretched_exponential``  ``L0 * exp(-eta * r**kappa)``, ``eta > 0``, ``0 < kappa <= 1``
``bounded_single_slope``   ``L0 * min(1, (r / d)**-exponent)``
``bounded_multi_slope``    flat up to the first breakpoint, then continuous
                           power-law segments; the last exponent must exceed 2
``bounded_support``        ``L0`` inside ``support_radius_m``, zero outside
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Callable, Mapping

import numpy as np
from scipy import integrate, optimize, special

from .errors import ConfigurationError, DomainError, InfeasibleModelError, NumericError

KINDS = ("stretched_exponential", "bounded_single_slope", "bounded_multi_slope", "bounded_support")

# Grid used for the boundedness / monotonicity spot checks (meters).
CHECK_GRID_M = np.concatenate(([0.0], np.logspace(-6, 6, 2401)))

QUAD_EPSREL = 1e-9


@dataclass(frozen=True)
class PathLossModel:
    """An immutable path-loss model; build it with the kind-specific factories."""

    kind: str
    params: Mapping[str, object] = field(default_factory=dict)
    l0: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unsupported path-loss kind {self.kind!r}; expected one of {KINDS}")
        l0 = float(self.l0)
        if not (math.isfinite(l0) and l0 > 0):
            raise ConfigurationError(f"l0 must be finite and positive, got {self.l0}")
        object.__setattr__(self, "l0", l0)
        object.__setattr__(self, "params", dict(self.params))
        _VALIDATORS[self.kind](self.params)

    def __call__(self, r):
        return evaluate(self, r)

    @property
    def gamma_value(self) -> float:
        return gamma_integral(self)

    @cached_property
    def _gamma_cache(self) -> float:
        value = float(_upper_integral(self, 0.0))
        if not (math.isfinite(value) and value > 0):
            raise InfeasibleModelError(f"gamma integral diverges for {self.describe()}")
        return value

    @property
    def assumption1_satisfied(self) -> bool:
        # Analytic metadata: the dominating-tail conditions hold for every kind
        # with an unbounded support and fail for compact support.
        return self.kind != "bounded_support"

    def scaled(self, factor: float) -> "PathLossModel":
        """The same shape with ``L0`` multiplied by ``factor``."""
        return PathLossModel(self.kind, self.params, self.l0 * float(factor))

    def breakpoints(self) -> tuple[float, ...]:
        """Distances where ``L`` is not smooth; quadrature splits there."""
        if self.kind in ("bounded_single_slope", "bounded_multi_slope"):
            return tuple(self.params["breakpoints_m"])
        if self.kind == "bounded_support":
            return (self.params["support_radius_m"],)
        return ()

    def describe(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}({args}, l0={self.l0:g})"

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "l0": self.l0}
        out.update({k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()})
        return out


def _validate_stretched(p):
    eta, kappa = float(p["eta"]), float(p["kappa"])
    if not eta > 0:
        raise ConfigurationError(f"stretched_exponential needs eta > 0, got {eta}")
    if not 0 < kappa <= 1:
        raise ConfigurationError(f"stretched_exponential needs 0 < kappa <= 1, got {kappa}")
    p["eta"], p["kappa"] = eta, kappa


def _validate_slopes(p):
    b = tuple(float(x) for x in p["breakpoints_m"])
    a = tuple(float(x) for x in p["exponents"])
    if not b or len(a) != len(b):
        raise ConfigurationError("multi-slope model needs one exponent per breakpoint")
    if any(x <= 0 for x in b) or any(y <= x for x, y in zip(b, b[1:])):
        raise ConfigurationError(f"breakpoints must be positive and strictly increasing, got {b}")
    if any(x < 0 for x in a):
        raise ConfigurationError(f"exponents must be non-negative, got {a}")
    p["breakpoints_m"], p["exponents"] = b, a


def _validate_support(p):
    s = float(p["support_radius_m"])
    if not s > 0:
        raise ConfigurationError(f"support_radius_m must be positive, got {s}")
    p["support_radius_m"] = s


_VALIDATORS = {
    "stretched_exponential": _validate_stretched,
    "bounded_single_slope": _validate_slopes,
    "bounded_multi_slope": _validate_slopes,
    "bounded_support": _validate_support,
}


def stretched_exponential(eta: float = 0.9, kappa: float = 0.52, l0: float = 1.0) -> PathLossModel:
    return PathLossModel("stretched_exponential", {"eta": eta, "kappa": kappa}, l0)


def bounded_single_slope(exponent: float = 4.0, breakpoint_m: float = 1.0, l0: float = 1.0) -> PathLossModel:
    return PathLossModel(
        "bounded_single_slope", {"breakpoints_m": (breakpoint_m,), "exponents": (exponent,)}, l0
    )


def bounded_multi_slope(breakpoints_m, exponents, l0: float = 1.0) -> PathLossModel:
    return PathLossModel(
        "bounded_multi_slope", {"breakpoints_m": tuple(breakpoints_m), "exponents": tuple(exponents)}, l0
    )


def bounded_support(support_radius_m: float, l0: float = 1.0) -> PathLossModel:
    return PathLossModel("bounded_support", {"support_radius_m": support_radius_m}, l0)


_FACTORY_KEYS = {
    "stretched_exponential": (stretched_exponential, {"eta", "kappa"}),
    "bounded_single_slope": (bounded_single_slope, {"exponent", "breakpoint_m"}),
    "bounded_multi_slope": (bounded_multi_slope, {"breakpoints_m", "exponents"}),
    "bounded_support": (bounded_support, {"support_radius_m"}),
}


def model_from_spec(kind: str, **params) -> PathLossModel:
    """Build a model from a kind string and named parameters (config files)."""
    if kind not in _FACTORY_KEYS:
        raise ConfigurationError(f"path-loss kind {kind!r} unsupported; expected one of {KINDS}")
    factory, allowed = _FACTORY_KEYS[kind]
    unknown = set(params) - allowed - {"l0"}
    if unknown:
        raise ConfigurationError(f"unknown parameters for {kind}: {sorted(unknown)}")
    try:
        return factory(**params)
    except (TypeError, KeyError) as exc:
        raise ConfigurationError(f"bad parameters for {kind}: {exc}") from exc


# ---------------------------------------------------------------------------
# evaluation


def _slope_coefficients(breaks, exps):
    """Gain at the start of every power-law segment, relative to L0."""
    c = [1.0]
    for k in range(len(breaks) - 1):
        c.append(c[-1] * (breaks[k + 1] / breaks[k]) ** (-exps[k]))
    return c


def evaluate(model: PathLossModel, r):
    """``L(r)`` for scalar or array ``r`` in meters."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise DomainError("path loss is defined for r >= 0 only")
    p = model.params
    if model.kind == "stretched_exponential":
        out = np.exp(-p["eta"] * r_arr ** p["kappa"])
    elif model.kind == "bounded_support":
        out = (r_arr <= p["support_radius_m"]).astype(float)
    else:
        breaks, exps = p["breakpoints_m"], p["exponents"]
        out = np.ones_like(r_arr)
        coeffs = _slope_coefficients(breaks, exps)
        seg = np.searchsorted(breaks, r_arr, side="right") - 1
        for k, (b, a, c) in enumerate(zip(breaks, exps, coeffs)):
            mask = seg == k
            if np.any(mask):
                out[mask] = c * (r_arr[mask] / b) ** (-a)
    out = model.l0 * out
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# the gamma integral and its tails


def _power_segment(c, b, a, x, y):
    """``int_x^y r * c * (r/b)**-a dr`` for ``b <= x <= y <= inf``."""
    if x >= y:
        return 0.0
    if math.isinf(y):
        if a <= 2:
            return math.inf
        return c * b**a * x ** (2 - a) / (a - 2)
    if a == 2:
        return c * b * b * math.log(y / x)
    return c * b**a * (y ** (2 - a) - x ** (2 - a)) / (2 - a)


def _upper_integral(model: PathLossModel, radius: float) -> float:
    """Closed form of ``int_radius^inf r L(r) dr``."""
    p, R = model.params, float(radius)
    if model.kind == "stretched_exponential":
        eta, kappa = p["eta"], p["kappa"]
        s = 2.0 / kappa
        full = eta ** (-s) * special.gamma(s) / kappa
        # gammaincc is the regularized upper incomplete gamma function
        return model.l0 * full * (special.gammaincc(s, eta * R**kappa) if R > 0 else 1.0)
    if model.kind == "bounded_support":
        s = p["support_radius_m"]
        return model.l0 * max(s * s - R * R, 0.0) / 2.0
    breaks, exps = p["breakpoints_m"], p["exponents"]
    coeffs = _slope_coefficients(breaks, exps)
    total = max(breaks[0] ** 2 - R * R, 0.0) / 2.0
    ends = breaks[1:] + (math.inf,)
    for b, a, c, end in zip(breaks, exps, coeffs, ends):
        total += _power_segment(c, b, a, max(R, b), end)
    return model.l0 * total


def gamma_integral(model: PathLossModel) -> float:
    """``gamma = int_0^inf r L(r) dr`` in m^2 (closed form, cached per model)."""
    return model._gamma_cache


def gamma_quadrature(model, breakpoints=(), lower: float = 0.0, epsrel: float = QUAD_EPSREL) -> float:
    """``int_lower^inf r L(r) dr`` by adaptive quadrature.

    ``model`` is a PathLossModel or any callable ``L(r)``.  The range is split
    at the kinks of the model so every piece is smooth.  Raises
    InfeasibleModelError when the integral does not converge.
    """
    f = model if not isinstance(model, PathLossModel) else (lambda r: evaluate(model, r))
    if isinstance(model, PathLossModel):
        breakpoints = model.breakpoints()
    knots = sorted({float(lower), *(b for b in breakpoints if b > lower)})
    pieces = list(zip(knots, knots[1:])) + [(knots[-1], math.inf)]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for a, b in pieces:
            try:
                val, err = integrate.quad(lambda r: r * f(r), a, b, epsabs=0.0, epsrel=epsrel, limit=500)
            except (integrate.IntegrationWarning, ZeroDivisionError, OverflowError) as exc:
                raise InfeasibleModelError(f"gamma quadrature did not converge on [{a}, {b}]: {exc}") from exc
            if not math.isfinite(val):
                raise InfeasibleModelError(f"gamma quadrature diverges on [{a}, {b}]")
            total += val
    return total


def truncation_bound(model: PathLossModel, radius_m: float) -> float:
    """Fraction of ``gamma`` carried by distances beyond ``radius_m``.

    This is the relative bias of the mean interference when the Poisson field
    is simulated only inside a disk of that radius.
    """
    if radius_m < 0 or math.isnan(radius_m):
        raise DomainError(f"radius must be non-negative, got {radius_m}")
    if radius_m == 0:
        return 1.0
    frac = _upper_integral(model, radius_m) / gamma_integral(model)
    if not math.isfinite(frac):
        raise NumericError("truncation bound is not finite", {"model": model.describe(), "radius_m": radius_m})
    return float(min(max(frac, 0.0), 1.0))


def radius_for_truncation(model: PathLossModel, fraction: float) -> float:
    """Smallest radius whose truncation bound is at most ``fraction``."""
    if not 0 < fraction < 1:
        raise DomainError(f"fraction must lie in (0, 1), got {fraction}")
    if model.kind == "bounded_support":
        s = model.params["support_radius_m"]
        return s * math.sqrt(1.0 - fraction)
    hi = 1.0
    while truncation_bound(model, hi) > fraction:
        hi *= 2.0
        if hi > 1e12:
            raise NumericError("no finite radius reaches the requested truncation", {"fraction": fraction})
    return optimize.brentq(lambda R: truncation_bound(model, R) - fraction, 0.0, hi, xtol=1e-9, rtol=1e-12)


# ---------------------------------------------------------------------------
# feasibility


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the three feasibility properties plus metadata."""

    model: str
    l0_finite: bool
    bounded: bool
    gamma_finite: bool
    assumption1_satisfied: bool | None
    nonincreasing: bool
    l0: float | None = None
    gamma: float | None = None
    notes: tuple[str, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.l0_finite and self.bounded and self.gamma_finite

    def to_dict(self) -> dict:
        out = asdict(self)
        out["notes"] = list(self.notes)
        out["feasible"] = self.feasible
        return out


def check_feasibility(model: PathLossModel | Callable) -> FeasibilityReport:
    """Check finite ``L0``, boundedness on a dense grid and finite ``gamma``.

    Also accepts a bare callable ``L(r)``, for which Assumption-1 status is
    unknown (``None``).  Failures are report entries, never exceptions.
    """
    notes = []
    if isinstance(model, PathLossModel):
        name, f, breaks, a1 = model.describe(), (lambda r: evaluate(model, r)), model.breakpoints(), model.assumption1_satisfied
    else:
        name, f, breaks, a1 = getattr(model, "__name__", repr(model)), model, (), None
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        values = np.asarray(f(CHECK_GRID_M), dtype=float)
    l0 = float(values[0])
    l0_finite = math.isfinite(l0) and l0 > 0
    if not l0_finite:
        notes.append(f"L(0) = {l0} is not a finite positive gain")
    finite = values[np.isfinite(values)]
    bounded = l0_finite and bool(np.all(np.isfinite(values))) and bool(np.all(finite <= l0 * (1 + 1e-12)))
    if not bounded:
        notes.append("L(r) exceeds L(0) or is unbounded on the check grid")
    nonincreasing = bool(np.all(np.diff(values) <= 1e-15 * np.abs(values[:-1]))) if l0_finite else False

    gamma = None
    gamma_finite = False
    if l0_finite:
        try:
            gamma = float(gamma_integral(model) if isinstance(model, PathLossModel) else gamma_quadrature(f, breaks))
            gamma_finite = bool(math.isfinite(gamma) and gamma > 0)
        except InfeasibleModelError as exc:
            notes.append(str(exc))
    else:
        notes.append("gamma not evaluated: L(0) is not finite")
    return FeasibilityReport(
        model=name,
        l0_finite=l0_finite,
        bounded=bounded,
        gamma_finite=gamma_finite,
        assumption1_satisfied=a1,
        nonincreasing=nonincreasing,
        l0=l0 if math.isfinite(l0) else None,
        gamma=gamma,
        notes=tuple(notes),
    )


def unbounded_power_law(exponent: float = 4.0) -> Callable:
    """The classic ``r**-exponent`` law, infinite at the origin.

    Not a PathLossModel (it is infeasible); provided so feasibility checks can
    be exercised against it.
    """
    def power_law(r):
        return np.asarray(r, dtype=float) ** (-exponent)

    power_law.__name__ = f"power_law(exponent={exponent})"
    return power_law
