"""Backscattered intensities in the helicity-preserving channel.

The detected signal is built from the |2> -> |1> transition of both atoms::

    I = <s1_22> + <s2_22> + 2 Re(<s1_21 s2_12> exp(i k.(r1 - r2)))

Ladder terms collect the populations, crossed terms the interference, each
at second order in the coupling g. The elastic part replaces the correlation
functions by products of mean dipoles.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .averaging import (
    AverageSpec,
    ConfigurationSample,
    half_resolution_sample,
    sample_configurations,
    sample_stderr,
    weighted_mean,
)
from .model import DriveParams, two_atom_sigma
from .perturbation import BatchSolver, PerturbativeState

#: Overall detector normalization. The orientation-averaged elastic intensity
#: of this model is (2/15) s/((1+delta)(1+s)^4) |g|^2; scaling by 180 pi puts
#: it in the conventional 24 pi |g|^2 form.
INTENSITY_SCALE = 180.0 * np.pi

MAX_THETA = 0.1

POPULATION_2 = {a: two_atom_sigma(2, 2, a) for a in (1, 2)}
RAISING_21 = {a: two_atom_sigma(2, 1, a) for a in (1, 2)}
LOWERING_12 = {a: two_atom_sigma(1, 2, a) for a in (1, 2)}
CORRELATION = two_atom_sigma(2, 1, 1) @ two_atom_sigma(1, 2, 2)

CHUNK = 2048


def expectation(rho, op) -> np.ndarray:
    """``Tr(rho op)`` over the trailing two axes."""
    return np.einsum("...ij,ji->...", rho, op)


def intensity_expectations(rho):
    """``(<s1_22>, <s2_22>, <s1_21 s2_12>, <s1_21>, <s2_21>)`` for ``rho``."""
    return (
        expectation(rho, POPULATION_2[1]),
        expectation(rho, POPULATION_2[2]),
        expectation(rho, CORRELATION),
        expectation(rho, RAISING_21[1]),
        expectation(rho, RAISING_21[2]),
    )


def detection_direction(kL, theta: float) -> np.ndarray:
    """Unit vector at angle ``theta`` from ``-kL`` in a fixed plane containing ``kL``."""
    kL = np.asarray(kL, float)
    helper = np.array([0.0, 1.0, 0.0]) if abs(kL[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
    perp = np.cross(helper, kL)
    perp /= np.linalg.norm(perp)
    return -np.cos(theta) * kL + np.sin(theta) * perp


def detection_phase(kL, theta, separation) -> np.ndarray:
    """Far-field phase ``exp(i k.(r1 - r2))`` between the two emitters."""
    k = detection_direction(kL, theta)
    return np.exp(-1j * (np.asarray(separation) @ k))


def _check_theta(theta):
    if abs(theta) > MAX_THETA:
        raise ValueError(f"|theta| must be <= {MAX_THETA} rad (backscattering cone), got {theta}")


def ladder_term(state: PerturbativeState, config) -> np.ndarray:
    """Second-order ``<s1_22> + <s2_22>`` with the g-phases of ``config`` attached."""
    rho2 = state.second_order(config.g)
    return expectation(rho2, POPULATION_2[1]) + expectation(rho2, POPULATION_2[2])


def crossed_term(state: PerturbativeState, theta: float, config,
                 kL=(0.0, 0.0, 1.0)) -> np.ndarray:
    """``2 <s1_21 s2_12>^[2]`` times the detection phase; real part taken after averaging."""
    _check_theta(theta)
    corr = expectation(state.second_order(config.g), CORRELATION)
    return 2.0 * corr * detection_phase(kL, theta, config.separation)


def mean_dipoles(state: PerturbativeState, config):
    """First-order mean dipoles ``<s1_21>^[1]`` and ``<s2_21>^[1]``."""
    rho1 = state.first_order(config.g)
    return expectation(rho1, RAISING_21[1]), expectation(rho1, RAISING_21[2])


def elastic_components(state: PerturbativeState, config, theta: float = 0.0,
                       kL=(0.0, 0.0, 1.0)):
    """Elastic ladder and crossed contributions from products of first-order dipoles.

    Products involving a zeroth-order dipole on the undriven |1>-|2>
    transition vanish and are not formed.
    """
    _check_theta(theta)
    d1, d2 = mean_dipoles(state, config)
    lowering_2 = expectation(state.first_order(config.g), LOWERING_12[2])
    ladder = np.abs(d1) ** 2 + np.abs(d2) ** 2
    crossed = 2.0 * d1 * lowering_2 * detection_phase(kL, theta, config.separation)
    return ladder, crossed


def enhancement(L_tot: float, C_tot0: float) -> float:
    """Enhancement factor ``(L + C(0)) / L``."""
    if not L_tot > 0:
        raise ValueError(f"no background signal (L_tot = {L_tot})")
    return 1.0 + C_tot0 / L_tot


def elastic_analytic(s, delta_sq=0.0):
    """Closed-form elastic ladder (= crossed) intensity, units of |g|^2."""
    s = np.asarray(s, dtype=float)
    return 24.0 * np.pi * s / ((1.0 + delta_sq) * (1.0 + s) ** 4)


@dataclass(frozen=True)
class CbsPoint:
    """Configuration-averaged intensities at one drive setting, units of <|g|^2>."""

    s: float
    delta_sq: float
    theta: float
    L_tot: float
    C_tot: float
    L_el: float
    C_el: float
    alpha: float
    errors: dict = field(default_factory=dict)

    @property
    def I_tot(self) -> float:
        return self.L_tot + self.C_tot

    @property
    def L_inel(self) -> float:
        return self.L_tot - self.L_el

    @property
    def C_inel(self) -> float:
        return self.C_tot - self.C_el


def inelastic_components(point: CbsPoint):
    """``(L_tot - L_el, C_tot - C_el)``."""
    return point.L_inel, point.C_inel


def sample_values(solver: BatchSolver, sample: ConfigurationSample, theta: float = 0.0,
                  chunk: int = CHUNK) -> np.ndarray:
    """Per-configuration ``(L_tot, C_tot(theta), L_el, C_el(theta))``, shape (4, N).

    Unnormalized: multiply by ``INTENSITY_SCALE / <|g|^2>`` for reported units.
    """
    _check_theta(theta)
    kL = solver.params.kL
    out = []
    for part in sample.chunks(chunk):
        state = solver.solve(part.n_hat, part.phases(kL))
        lad_el, cr_el = elastic_components(state, part, theta, kL)
        out.append(np.stack([
            ladder_term(state, part),
            crossed_term(state, theta, part, kL),
            lad_el,
            cr_el,
        ]))
    return np.concatenate(out, axis=1)


def cbs_point(params: DriveParams, spec: AverageSpec | None = None, theta: float = 0.0,
              solver: BatchSolver | None = None) -> CbsPoint:
    """Average ladder, crossed and elastic intensities over configurations.

    Errors are the full- vs half-resolution difference (quadrature) or the
    standard error (monte-carlo).
    """
    spec = spec or AverageSpec()
    solver = solver or BatchSolver(params)
    scale = INTENSITY_SCALE / spec.mean_coupling_sq
    sample = sample_configurations(spec)
    values = sample_values(solver, sample, theta) * scale
    mean = weighted_mean(values, sample.weights).real
    L, C, Le, Ce = mean
    if not L > 0 and params.omega == 0:
        raise ValueError("no background signal: the drive is off (omega = 0)")
    alpha = enhancement(L, C)

    if spec.mode == "quadrature":
        half = half_resolution_sample(spec)
        coarse = weighted_mean(sample_values(solver, half, theta) * scale, half.weights).real
        err = np.abs(mean - coarse)
        alpha_err = abs(alpha - enhancement(coarse[0], coarse[1]))
    else:
        err = sample_stderr(values.real, sample.weights)
        # delta method for the ratio C/L
        resid = values[1].real - (C / L) * values[0].real
        alpha_err = float(sample_stderr(resid, sample.weights) / L)

    errors = dict(zip(("L_tot", "C_tot", "L_el", "C_el"), map(float, err)))
    errors["alpha"] = float(alpha_err)
    return CbsPoint(
        s=params.saturation, delta_sq=params.delta_sq, theta=theta,
        L_tot=float(L), C_tot=float(C), L_el=float(Le), C_el=float(Ce),
        alpha=float(alpha), errors=errors,
    )


def averaged_intensities(params: DriveParams, spec: AverageSpec | None = None,
                         theta: float = 0.0, solver: BatchSolver | None = None) -> np.ndarray:
    """Averaged ``(L_tot, C_tot(theta), L_el, C_el(theta))`` without forming the enhancement."""
    spec = spec or AverageSpec()
    solver = solver or BatchSolver(params)
    sample = sample_configurations(spec)
    values = sample_values(solver, sample, theta)
    return weighted_mean(values, sample.weights).real * (INTENSITY_SCALE / spec.mean_coupling_sq)


def cbs_at(s: float, delta: float = 0.0, spec: AverageSpec | None = None,
           theta: float = 0.0) -> CbsPoint:
    """Convenience wrapper: ``cbs_point`` for saturation ``s`` and detuning ``delta`` (units of gamma)."""
    return cbs_point(DriveParams.from_saturation(s, delta), spec, theta)


def _theta_means(solver, sample, thetas, scale):
    kL = solver.params.kL
    crossed = np.zeros(len(thetas), complex)
    ladder = 0.0
    for part in sample.chunks(CHUNK):
        state = solver.solve(part.n_hat, part.phases(kL))
        ladder += weighted_mean(ladder_term(state, part), part.weights)
        for k, th in enumerate(thetas):
            crossed[k] += weighted_mean(crossed_term(state, th, part, kL), part.weights)
    return crossed.real * scale, float(np.real(ladder)) * scale


def theta_profile(params: DriveParams, thetas, spec: AverageSpec | None = None):
    """Averaged crossed term over a grid of observation angles.

    Returns ``(C_tot(theta), C_err(theta), L_tot)``; each configuration is
    solved once for the whole grid. Monte-carlo errors are not propagated
    here; the quadrature error is the full- vs half-resolution difference.
    """
    spec = spec or AverageSpec()
    thetas = np.asarray(thetas, dtype=float)
    for th in thetas:
        _check_theta(th)
    solver = BatchSolver(params)
    scale = INTENSITY_SCALE / spec.mean_coupling_sq
    crossed, ladder = _theta_means(solver, sample_configurations(spec), thetas, scale)
    if spec.mode == "quadrature":
        coarse, _ = _theta_means(solver, half_resolution_sample(spec), thetas, scale)
        err = np.abs(crossed - coarse)
    else:
        err = np.full(len(thetas), np.nan)
    return crossed, err, ladder
