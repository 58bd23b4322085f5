"""Poisson base-station layouts seen from a tagged user at the origin."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, InsufficientPointsError, NoServingBSError
from .seeding import SeedPath, as_seed_path

KM2_PER_M2 = 1e-6
M2_PER_KM2 = 1e6

# Windows whose truncation bound exceeds this fraction of gamma trigger a warning.
TRUNCATION_WARN_FRACTION = 0.01


def per_km2_to_per_m2(density_per_km2: float) -> float:
    # division is correctly rounded, so 80 /km^2 maps to exactly 8e-05 /m^2
    return density_per_km2 / M2_PER_KM2


def per_m2_to_per_km2(density_per_m2: float) -> float:
    return density_per_m2 * M2_PER_KM2


@dataclass(frozen=True)
class SimulationWindow:
    """A disk of ``radius_m`` or a square of ``half_side_m`` centred on the user."""

    shape: str
    size_m: float

    def __post_init__(self):
        if self.shape not in ("disk", "square"):
            raise ConfigurationError(f"window shape must be 'disk' or 'square', got {self.shape!r}")
        size = float(self.size_m)
        if not (math.isfinite(size) and size > 0):
            raise ConfigurationError(f"window size must be finite and positive, got {self.size_m}")
        object.__setattr__(self, "size_m", size)

    @classmethod
    def disk(cls, radius_m: float) -> "SimulationWindow":
        return cls("disk", radius_m)

    @classmethod
    def square(cls, half_side_m: float) -> "SimulationWindow":
        return cls("square", half_side_m)

    @property
    def area_m2(self) -> float:
        if self.shape == "disk":
            return math.pi * self.size_m**2
        return 4.0 * self.size_m**2

    @property
    def inscribed_radius_m(self) -> float:
        """Radius of the largest origin-centred disk inside the window."""
        return self.size_m

    @property
    def max_extent_m(self) -> float:
        """Largest distance from the origin to a point of the window."""
        return self.size_m if self.shape == "disk" else self.size_m * math.sqrt(2.0)

    def scaled(self, factor: float) -> "SimulationWindow":
        return SimulationWindow(self.shape, self.size_m * factor)

    def with_min_expected_count(self, density_per_m2: float, count: float) -> "SimulationWindow":
        """This window, enlarged if needed so it holds ``count`` points on average."""
        if density_per_m2 <= 0 or density_per_m2 * self.area_m2 >= count:
            return self
        return self.scaled(math.sqrt(count / (density_per_m2 * self.area_m2)))

    def to_dict(self) -> dict:
        key = "radius_m" if self.shape == "disk" else "half_side_m"
        return {"shape": self.shape, key: self.size_m}


@dataclass(frozen=True)
class NetworkRealization:
    """One draw of the base-station process, reduced to sorted distances.

    ``truncation_fraction`` is the share of ``gamma`` lying outside the window
    for the model the realization was drawn for (``None`` if no model given).
    """

    density_per_m2: float
    distances_m: np.ndarray
    window: SimulationWindow
    seed_path: SeedPath | None = None
    truncation_fraction: float | None = field(default=None, compare=False)

    def __post_init__(self):
        d = np.array(self.distances_m, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "distances_m", d)

    def __len__(self):
        return self.distances_m.size

    @property
    def count(self) -> int:
        return self.distances_m.size


def _uniform_distances(window: SimulationWindow, n: int, rng: np.random.Generator) -> np.ndarray:
    if window.shape == "disk":
        # radius of a uniform point in a disk is R * sqrt(U)
        return window.size_m * np.sqrt(rng.random(n))
    xy = rng.uniform(-window.size_m, window.size_m, size=(n, 2))
    return np.hypot(xy[:, 0], xy[:, 1])


def sample_ppp(density_per_m2: float, window: SimulationWindow, seed_path, model=None) -> NetworkRealization:
    """Draw a homogeneous PPP of the given density inside ``window``.

    Only distances to the origin are kept, sorted ascending with ties left in
    draw order.  Passing ``model`` attaches its truncation bound for the
    window and warns when it exceeds ``TRUNCATION_WARN_FRACTION``.
    """
    if not isinstance(window, SimulationWindow):
        raise ConfigurationError(f"expected a SimulationWindow, got {type(window).__name__}")
    if not (density_per_m2 >= 0 and math.isfinite(density_per_m2)):
        raise DomainError(f"density must be finite and non-negative, got {density_per_m2}")
    path = as_seed_path(seed_path)
    rng = path.generator()
    n = int(rng.poisson(density_per_m2 * window.area_m2)) if density_per_m2 > 0 else 0
    dist = np.sort(_uniform_distances(window, n, rng), kind="stable")

    trunc = None
    if model is not None:
        from .pathloss import truncation_bound

        trunc = truncation_bound(model, window.inscribed_radius_m)
        if trunc > TRUNCATION_WARN_FRACTION:
            warnings.warn(
                f"window {window.to_dict()} truncates {trunc:.3%} of gamma for {model.describe()}",
                RuntimeWarning,
                stacklevel=2,
            )
    return NetworkRealization(density_per_m2, dist, window, path, trunc)


def serving_distance(realization: NetworkRealization) -> float:
    """Distance to the nearest base station (the serving one)."""
    if realization.count == 0:
        raise NoServingBSError("realization has no base station inside the window")
    return float(realization.distances_m[0])


def nth_nearest_distance(realization: NetworkRealization, n: int) -> float:
    """Distance to the ``n``-th nearest base station, 0-indexed (0 = serving)."""
    if n < 0:
        raise DomainError(f"order must be non-negative, got {n}")
    if n >= realization.count:
        raise InsufficientPointsError(
            f"asked for point {n} but the window holds {realization.count}; enlarge the window or resample"
        )
    return float(realization.distances_m[n])


def merge(*realizations: NetworkRealization) -> NetworkRealization:
    """Superpose independent realizations drawn in the same window."""
    if not realizations:
        raise ValueError("nothing to merge")
    window = realizations[0].window
    if any(r.window != window for r in realizations):
        raise ConfigurationError("can only superpose realizations drawn in the same window")
    dist = np.sort(np.concatenate([r.distances_m for r in realizations]), kind="stable")
    return NetworkRealization(sum(r.density_per_m2 for r in realizations), dist, window)


def nearest_neighbor_mean(density_per_m2: float, n: int) -> float:
    """Mean distance to the ``n``-th nearest point (0-indexed) of a planar PPP.

    ``pi * density * r_n**2`` is Gamma(n + 1, 1), giving
    ``Gamma(n + 1.5) / (Gamma(n + 1) * sqrt(pi * density))``.
    """
    k = n + 1
    return math.exp(math.lgamma(k + 0.5) - math.lgamma(k)) / math.sqrt(math.pi * density_per_m2)
