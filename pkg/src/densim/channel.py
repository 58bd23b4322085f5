"""Small-scale fading: exponential and gamma gains, complex Gaussian channels.

All samplers accept a seed path (or an already-built Generator) so a trial
can reproduce its draws on any worker.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError, NumericError
from .seeding import as_generator

POWER_ITER_TOL = 1e-12
POWER_ITER_MAX = 10_000


def sample_exponential(seed, size=None):
    """Unit-mean exponential gain(s)."""
    return as_generator(seed).exponential(1.0, size)


def sample_gamma(shape_n: int, seed, size=None):
    """Gamma(shape_n, 1) gain(s), the law of ``||h||^2`` for ``shape_n`` unit CN entries."""
    if int(shape_n) != shape_n or shape_n < 1:
        raise DomainError(f"gamma shape must be an integer >= 1, got {shape_n}")
    return as_generator(seed).gamma(float(shape_n), 1.0, size)


def sample_matrix(n_r: int, n_t: int, seed) -> np.ndarray:
    """``n_r x n_t`` matrix of i.i.d. CN(0, 1) entries (each part has variance 1/2)."""
    if n_r < 1 or n_t < 1:
        raise DomainError(f"channel dimensions must be positive, got {n_r}x{n_t}")
    rng = as_generator(seed)
    z = rng.standard_normal((2, n_r, n_t))
    return (z[0] + 1j * z[1]) * np.sqrt(0.5)


def frobenius_sq(matrix) -> float:
    """Sum of squared entry magnitudes, ``sum |h_ij|^2``."""
    h = np.asarray(matrix)
    return float(np.sum(h.real**2 + h.imag**2))


def _start_vector(n: int) -> np.ndarray:
    # fixed generic start: deterministic, and orthogonal to the dominant
    # eigenvector only on a measure-zero set
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def max_eigenvalue_hermitian(gram, tol: float = POWER_ITER_TOL, max_iter: int = POWER_ITER_MAX):
    """Largest eigenvalue of a Hermitian PSD matrix by power iteration.

    Stops when the Rayleigh quotient changes by at most ``tol`` relative.
    Returns ``(eigenvalue, iterations)``.
    """
    g = np.asarray(gram)
    n = g.shape[0]
    v = _start_vector(n)
    mu_prev = None
    change = np.inf
    for it in range(1, max_iter + 1):
        w = g @ v
        mu = float(np.real(np.vdot(v, w)))
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, it
        if mu_prev is not None:
            change = abs(mu - mu_prev)
            if change <= tol * abs(mu):
                return mu, it
        mu_prev = mu
        v = w / norm
    raise NumericError(
        "power iteration did not converge",
        {"iterations": max_iter, "last_estimate": mu_prev, "last_change": change, "dimension": n},
    )


def max_singular_value_sq(matrix, tol: float = POWER_ITER_TOL, max_iter: int = POWER_ITER_MAX) -> float:
    """Squared largest singular value of ``matrix``.

    Works on the Gram matrix of the smaller side.  When that side has length 1
    the Gram matrix is the scalar ``||H||_F^2`` and is returned as computed by
    :func:`frobenius_sq`, so the two agree bit for bit.
    """
    h = np.asarray(matrix)
    if h.ndim != 2 or h.size == 0:
        raise DomainError(f"expected a non-empty 2-D matrix, got shape {h.shape}")
    n_r, n_t = h.shape
    if min(n_r, n_t) == 1:
        return frobenius_sq(h)
    gram = h @ h.conj().T if n_r <= n_t else h.conj().T @ h
    mu, _ = max_eigenvalue_hermitian(gram, tol, max_iter)
    return mu


def semicircle_edge(ratio: float) -> float:
    """First-order limit of ``phi0^2 / N_t`` for ``N_r / N_t -> ratio``."""
    return (1.0 + np.sqrt(ratio)) ** 2
