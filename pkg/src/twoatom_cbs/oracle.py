"""Nonperturbative cross-checks of the perturbative solver.

* ``exact_steady_state``: null vector of the full ``L0 + g A + conj(g) B``.
* ``time_integrate``: explicit adaptive integration of ``d rho/dt = L rho``.
* ``richardson_order2``: the t**2 coefficient of an observable evaluated on
  exact steady states at scaled couplings ``t g``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .model import (
    DIM,
    Configuration,
    DriveParams,
    Superoperator,
    build_coupling_blocks,
    build_single_atom_liouvillian,
    unvec,
    vec,
)
from .observables import intensity_expectations
from .perturbation import SteadyStateSolver, solve_perturbative

DEFAULT_SCALES = (1.0, 0.5, 0.25)


class IntegrationError(RuntimeError):
    pass


class SeriesBreakdownError(RuntimeError):
    """Scaled exact solutions are not described by a low-order polynomial in t."""


def exact_steady_state(l_full) -> np.ndarray:
    """Unit-trace steady state of the full coupled Liouvillian."""
    return SteadyStateSolver(l_full).order0()


@dataclass(frozen=True)
class Trajectory:
    rho: np.ndarray
    residual: float
    max_trace_error: float
    times: np.ndarray
    states: np.ndarray  # (n_checkpoints, 16, 16)


def time_integrate(l_full, rho_init, t_final: float, rtol: float = 1e-11,
                   atol: float = 1e-13, n_checkpoints: int = 200) -> Trajectory:
    """Integrate ``rho' = L rho`` to ``t_final`` (units of 1/gamma) with DOP853.

    ``residual`` is ``||L rho(t_final)||``; ``max_trace_error`` tracks
    ``|Tr rho(t) - Tr rho(0)|`` on ``n_checkpoints`` output times.
    """
    if t_final < 50:
        raise ValueError(f"t_final must be >= 50/gamma, got {t_final}")
    mat = np.asarray(getattr(l_full, "matrix", l_full), dtype=complex)
    y0 = vec(np.asarray(rho_init, dtype=complex))
    times = np.linspace(0.0, t_final, n_checkpoints)
    sol = solve_ivp(lambda t, y: mat @ y, (0.0, t_final), y0, method="DOP853",
                    t_eval=times, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise IntegrationError(sol.message)
    traces = np.trace(unvec(sol.y.T), axis1=-2, axis2=-1)
    rho = unvec(sol.y[:, -1])
    return Trajectory(
        rho=rho,
        residual=float(np.linalg.norm(mat @ sol.y[:, -1])),
        max_trace_error=float(np.max(np.abs(traces - np.trace(rho_init)))),
        times=sol.t,
        states=unvec(sol.y.T),
    )


class ScaledCouplingFamily:
    """Exact steady states of ``L0 + t g A + t conj(g) B`` for real ``t``."""

    def __init__(self, params: DriveParams, config: Configuration, g: complex | None = None):
        self.g = config.g if g is None else g
        self.l0 = build_single_atom_liouvillian(params, config)
        self.a, self.b = build_coupling_blocks(config, params.gamma)
        self._cache = {}

    def liouvillian(self, t: float) -> Superoperator:
        g = t * self.g
        return self.l0 + g * self.a + np.conj(g) * self.b

    def steady_state(self, t: float) -> np.ndarray:
        if t not in self._cache:
            self._cache[t] = exact_steady_state(self.liouvillian(t))
        return self._cache[t]


def richardson_order2(observable, params: DriveParams, config: Configuration,
                      scales=DEFAULT_SCALES, rel_tol: float = 1e-6,
                      family: ScaledCouplingFamily | None = None) -> complex:
    """t**2 coefficient of ``observable(rho_exact(t g))``.

    The even part ``(O(t) + O(-t))/2`` at ``t = 0`` and ``t in scales`` is fitted
    by ``c0 + c2 t**2 + c4 t**4`` (least squares); a fit residual above
    ``rel_tol`` times the data scale raises ``SeriesBreakdownError``.
    """
    family = family or ScaledCouplingFamily(params, config)
    ts = np.asarray(scales, dtype=float)
    o0 = observable(family.steady_state(0.0))
    even = np.array([o0] + [0.5 * (observable(family.steady_state(t))
                                   + observable(family.steady_state(-t))) for t in ts])
    t2 = np.concatenate([[0.0], ts**2])
    design = np.stack([np.ones_like(t2), t2, t2**2], axis=1)
    coef, *_ = np.linalg.lstsq(design, even, rcond=None)
    resid = np.max(np.abs(design @ coef - even))
    scale = max(np.max(np.abs(even - o0)), np.finfo(float).tiny)
    if resid > rel_tol * scale and resid > 1e-14:
        raise SeriesBreakdownError(
            f"order-2 fit residual {resid:.3e} exceeds {rel_tol:g} x {scale:.3e}"
        )
    return complex(coef[1])


@dataclass(frozen=True)
class OracleReport:
    exact_rho: np.ndarray
    series_error: float
    richardson_coeffs: dict
    perturbative_coeffs: dict
    integrator_residual: float


OBSERVABLE_NAMES = ("s1_22", "s2_22", "s1_21 s2_12", "s1_21", "s2_21")


def expectation_functions():
    """One callable per expectation value of the detected intensity."""
    return {name: (lambda rho, k=k: intensity_expectations(rho)[k])
            for k, name in enumerate(OBSERVABLE_NAMES)}


def oracle_report(params: DriveParams, config: Configuration, t_final: float = 100.0,
                  integrate: bool = True) -> OracleReport:
    """Compare the perturbative solution of ``config`` against exact solves."""
    family = ScaledCouplingFamily(params, config)
    state = solve_perturbative(family.l0, family.a, family.b)
    exact = family.steady_state(1.0)
    series_error = float(np.linalg.norm(state.assemble(family.g) - exact))
    rho2 = state.second_order(family.g)
    rich, pert = {}, {}
    for name, fn in expectation_functions().items():
        rich[name] = richardson_order2(fn, params, config, family=family)
        pert[name] = complex(fn(rho2))
    residual = float("nan")
    if integrate:
        ground = np.zeros((DIM, DIM), complex)
        ground[0, 0] = 1.0
        residual = time_integrate(family.liouvillian(1.0), ground, t_final).residual
    return OracleReport(exact, series_error, rich, pert, residual)
