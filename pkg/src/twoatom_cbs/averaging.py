"""Disorder average over the relative position of the two atoms.

Orientation is averaged isotropically over the unit sphere and the distance
uniformly over a window of one wavelength (``2 pi / k0``) around ``r_mean``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MIN_K0_R12, Configuration

MIN_N_ORIENT = 64
MIN_N_RADIAL = 16
MODES = ("quadrature", "monte-carlo")


@dataclass(frozen=True)
class AverageSpec:
    """Resolution and geometry of the configuration average.

    ``window`` is the radial half-width in wavelengths, so the default 0.5
    spans exactly one wavelength. In monte-carlo mode ``n_samples`` i.i.d.
    configurations are drawn (default ``n_orient * n_radial``).
    """

    r_mean: float = 1000.0
    window: float = 0.5
    n_orient: int = 128
    n_radial: int = 16
    mode: str = "quadrature"
    seed: int = 0
    n_samples: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.window <= 0:
            raise ValueError("window must be positive")
        if self.r_mean - self.half_width < MIN_K0_R12:
            raise ValueError(
                f"radial window [{self.r_min:.3g}, {self.r_max:.3g}] reaches below "
                f"k0 r12 = {MIN_K0_R12}"
            )
        if self.n_orient < MIN_N_ORIENT or self.n_radial < MIN_N_RADIAL:
            raise ValueError(
                f"resolution below floor: need n_orient >= {MIN_N_ORIENT} and "
                f"n_radial >= {MIN_N_RADIAL}, got {self.n_orient}, {self.n_radial}"
            )
        if self.n_samples is not None and self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")

    @property
    def half_width(self) -> float:
        return 2.0 * np.pi * self.window

    @property
    def r_min(self) -> float:
        return self.r_mean - self.half_width

    @property
    def r_max(self) -> float:
        return self.r_mean + self.half_width

    @property
    def mean_coupling_sq(self) -> float:
        """Window average of ``|g|**2 = 9 / (4 (k0 r12)**2)``."""
        return 2.25 / (self.r_min * self.r_max)


@dataclass(frozen=True)
class ConfigurationSample:
    """Weighted configurations stored as arrays; atom 1 sits at the origin."""

    n_hat: np.ndarray
    k0_r12: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        for n, x, w in zip(self.n_hat, self.k0_r12, self.weights):
            yield Configuration(k0_r12=float(x), n_hat=tuple(n)), float(w)

    @property
    def separation(self) -> np.ndarray:
        return self.k0_r12[:, None] * self.n_hat

    @property
    def g(self) -> np.ndarray:
        return 1.5j * np.exp(1j * self.k0_r12) / self.k0_r12

    def phases(self, kL) -> np.ndarray:
        """Laser phases ``k_L . r_alpha`` at both atoms, shape (N, 2)."""
        return np.stack([np.zeros(len(self)), self.separation @ np.asarray(kL, float)], axis=1)

    def chunks(self, size: int):
        for start in range(0, len(self), size):
            sl = slice(start, start + size)
            yield ConfigurationSample(self.n_hat[sl], self.k0_r12[sl], self.weights[sl])


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` near-uniform unit vectors on a Fibonacci lattice, shape (n, 3)."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    azimuth = np.pi * (1.0 + np.sqrt(5.0)) * i
    rho = np.sqrt(1.0 - z * z)
    return np.stack([rho * np.cos(azimuth), rho * np.sin(azimuth), z], axis=1)


def _quadrature_sample(n_orient, n_radial, r_min, r_max) -> ConfigurationSample:
    orient = fibonacci_sphere(n_orient)
    x, w = np.polynomial.legendre.leggauss(n_radial)
    radii = 0.5 * (r_max - r_min) * x + 0.5 * (r_max + r_min)
    w_rad = 0.5 * w
    n_hat = np.repeat(orient, n_radial, axis=0)
    k0_r12 = np.tile(radii, n_orient)
    weights = np.tile(w_rad, n_orient) / n_orient
    return ConfigurationSample(n_hat, k0_r12, weights)


def _monte_carlo_sample(n, r_min, r_max, seed) -> ConfigurationSample:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, 3))
    n_hat = v / np.linalg.norm(v, axis=1)[:, None]
    k0_r12 = rng.uniform(r_min, r_max, n)
    return ConfigurationSample(n_hat, k0_r12, np.full(n, 1.0 / n))


def sample_configurations(spec: AverageSpec) -> ConfigurationSample:
    """Configurations and weights (summing to one) for the given spec.

    Quadrature mode takes the product of a Fibonacci lattice and Gauss-Legendre
    radial nodes; monte-carlo mode draws uniform orientations and radii from
    ``spec.seed``.
    """
    if spec.mode == "quadrature":
        return _quadrature_sample(spec.n_orient, spec.n_radial, spec.r_min, spec.r_max)
    n = spec.n_samples or spec.n_orient * spec.n_radial
    return _monte_carlo_sample(n, spec.r_min, spec.r_max, spec.seed)


def half_resolution_sample(spec: AverageSpec) -> ConfigurationSample:
    """Quadrature sample at half the orientation and radial resolution (error estimate)."""
    return _quadrature_sample(max(spec.n_orient // 2, 1), max(spec.n_radial // 2, 1),
                              spec.r_min, spec.r_max)


def weighted_mean(values, weights):
    """``sum(w * v)`` along the sample axis (last axis), in sample order."""
    return np.sum(np.asarray(values) * np.asarray(weights), axis=-1)


def sample_stderr(values, weights):
    """Standard error of an equally weighted i.i.d. mean (complex values allowed)."""
    values = np.asarray(values)
    n = values.shape[-1]
    mean = weighted_mean(values, weights)
    var = np.sum(np.abs(values - mean[..., None]) ** 2, axis=-1) / (n - 1)
    return np.sqrt(var / n)


def average_observable(per_config, spec: AverageSpec):
    """Average ``per_config(Configuration) -> complex`` over the configurations.

    Returns ``(mean, stderr)``. In quadrature mode ``stderr`` is the magnitude
    of the difference between the full- and half-resolution averages.
    """
    sample = sample_configurations(spec)
    values = np.array([per_config(c) for c, _ in sample])
    mean = weighted_mean(values, sample.weights)
    if spec.mode == "monte-carlo":
        return complex(mean), float(sample_stderr(values, sample.weights))
    half = half_resolution_sample(spec)
    coarse = weighted_mean(np.array([per_config(c) for c, _ in half]), half.weights)
    return complex(mean), float(abs(mean - coarse))
