import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twoatom_cbs import (
    BatchSolver,
    Configuration,
    DriveParams,
    SteadyStateSolver,
    build_full_liouvillian,
    build_single_atom_liouvillian,
    solve_configuration,
    solve_order0,
    solve_order_n,
    solve_perturbative,
)
from twoatom_cbs.model import drive_hamiltonian, spost, spre, two_atom_sigma
from twoatom_cbs.observables import expectation
from twoatom_cbs.oracle import ScaledCouplingFamily, exact_steady_state, richardson_order2
from twoatom_cbs.perturbation import SingularLiouvillianError, TraceLeakError

COEFFS = ("rho1_a", "rho1_b", "rho2_aa", "rho2_ab", "rho2_bb")


def unit(v):
    v = np.asarray(v, float)
    return tuple(v / np.linalg.norm(v))


@pytest.fixture(scope="module")
def state_s1():
    config = Configuration(40.0, unit([1, 2, 2]), r1=(0.5, -1.0, 3.0))
    params = DriveParams.from_saturation(1.0)
    return params, config, solve_configuration(params, config)


def test_singular_liouvillian_reports_singular_values():
    # two decoupled copies of nothing: the zero map has a 256-dimensional kernel
    with pytest.raises(SingularLiouvillianError, match="singular values"):
        SteadyStateSolver(np.zeros((256, 256)))


def test_singular_liouvillian_without_decay():
    # purely Hamiltonian evolution conserves every eigenprojector of H
    h = drive_hamiltonian(DriveParams(omega=1.0))
    with pytest.raises(SingularLiouvillianError):
        SteadyStateSolver(-1j * (spre(h) - spost(h)).toarray())


def test_order_n_zero_rhs_and_trace_leak():
    l0 = build_single_atom_liouvillian(DriveParams(omega=1.0))
    np.testing.assert_array_equal(solve_order_n(l0, np.zeros((16, 16))), 0)
    rhs = np.zeros((16, 16))
    rhs[0, 0] = 1e-6
    with pytest.raises(TraceLeakError):
        solve_order_n(l0, rhs)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_order_n_solves_and_commutes_with_adjoint(seed):
    rng = np.random.default_rng(seed)
    solver = SteadyStateSolver(build_single_atom_liouvillian(DriveParams(omega=rng.uniform(0.1, 4))))
    rhs = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    rhs -= np.trace(rhs) / 16 * np.eye(16)
    x = solver.order_n(rhs)
    assert abs(np.trace(x)) < 1e-12
    np.testing.assert_allclose(solver.matrix @ x.ravel(), rhs.ravel(), atol=1e-10)
    np.testing.assert_allclose(solver.order_n(rhs.conj().T), x.conj().T, atol=1e-12)


def test_order_n_batch_matches_single():
    solver = SteadyStateSolver(build_single_atom_liouvillian(DriveParams(omega=1.0)))
    rng = np.random.default_rng(0)
    rhs = rng.standard_normal((3, 16, 16)).astype(complex)
    rhs -= np.trace(rhs, axis1=1, axis2=2)[:, None, None] / 16 * np.eye(16)
    batch = solver.order_n(rhs)
    for k in range(3):
        np.testing.assert_allclose(batch[k], solver.order_n(rhs[k]), atol=1e-14)


def test_order0_no_drive_and_saturated_populations():
    rho0 = solve_order0(build_single_atom_liouvillian(DriveParams(omega=0.0)))
    assert rho0[0, 0] == pytest.approx(1.0)
    rho0 = solve_order0(build_single_atom_liouvillian(DriveParams.from_saturation(1.0)))
    for atom in (1, 2):
        assert expectation(rho0, two_atom_sigma(4, 4, atom)).real == pytest.approx(0.25, abs=1e-12)
        assert expectation(rho0, two_atom_sigma(1, 1, atom)).real == pytest.approx(0.75, abs=1e-12)


def test_coefficient_invariants(state_s1):
    _, _, st_ = state_s1
    assert np.trace(st_.rho0) == pytest.approx(1.0, abs=1e-12)
    for name in COEFFS:
        assert abs(np.trace(getattr(st_, name))) < 1e-12
    np.testing.assert_allclose(st_.rho1_b, st_.rho1_a.conj().T, atol=1e-12)
    np.testing.assert_allclose(st_.rho2_bb, st_.rho2_aa.conj().T, atol=1e-12)
    np.testing.assert_allclose(st_.rho2_ab, st_.rho2_ab.conj().T, atol=1e-12)


def test_ladder_channel_positive_and_matches_oracle(state_s1):
    params, config, st_ = state_s1
    pop = two_atom_sigma(2, 2, 1)
    coeff = expectation(st_.rho2_ab, pop)
    assert coeff.real > 0 and abs(coeff.imag) < 1e-15
    rich = richardson_order2(lambda r: expectation(r, pop), params, config)
    pert = expectation(st_.second_order(config.g), pop)
    assert abs(rich - pert) < 1e-4 * abs(pert)
    assert pert == pytest.approx(abs(config.g) ** 2 * coeff, rel=1e-12)


def test_assemble(state_s1):
    _, config, st_ = state_s1
    np.testing.assert_array_equal(st_.assemble(0.0), st_.rho0)
    rng = np.random.default_rng(1)
    for _ in range(20):
        g = 0.15 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
        rho = st_.assemble(g)
        assert np.trace(rho) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
    with pytest.raises(ValueError, match="series bound"):
        st_.assemble(0.2)


def test_series_error_is_third_order():
    # same geometry, g halved: truncation error should drop by about 2**3
    params = DriveParams.from_saturation(1.0)
    errors = []
    for x in (10 * np.pi, 20 * np.pi):
        config = Configuration(x, (1.0, 0.0, 0.0))
        family = ScaledCouplingFamily(params, config)
        st_ = solve_perturbative(family.l0, family.a, family.b)
        errors.append(np.linalg.norm(st_.assemble(config.g) - family.steady_state(1.0)))
    assert 6.0 < errors[0] / errors[1] < 10.0


def test_exact_solution_within_series_bound():
    params = DriveParams.from_saturation(0.5, 1.0)
    config = Configuration(10 * np.pi, unit([1, 1, 0]))
    st_ = solve_configuration(params, config)
    exact = exact_steady_state(build_full_liouvillian(params, config))
    assert np.linalg.norm(st_.assemble(config.g) - exact) < abs(config.g) ** 3


@pytest.mark.parametrize("s, delta", [(0.2, 0.0), (3.0, 1.0)])
def test_batch_solver_matches_direct_path(s, delta):
    params = DriveParams.from_saturation(s, delta)
    rng = np.random.default_rng(9)
    configs = [Configuration(rng.uniform(10, 500), unit(rng.standard_normal(3)),
                             r1=tuple(rng.uniform(-20, 20, 3))) for _ in range(4)]
    batch = BatchSolver(params).solve_configurations(configs)
    for k, c in enumerate(configs):
        direct = solve_configuration(params, c)
        for name in ("rho0",) + COEFFS:
            np.testing.assert_allclose(getattr(batch, name)[k], getattr(direct, name), atol=1e-12)


def test_batch_solver_unpaired_path_agrees():
    # a b_sign one ulp below 1 takes the five-solve branch with identical physics
    params = DriveParams.from_saturation(1.0)
    rng = np.random.default_rng(4)
    n_hat = np.array([unit(rng.standard_normal(3)) for _ in range(3)])
    phases = rng.uniform(0, 50, (3, 2))
    paired = BatchSolver(params).solve(n_hat, phases)
    general = BatchSolver(params, b_sign=np.nextafter(1.0, 0.0))
    assert general.b_sign != 1.0
    general_state = general.solve(n_hat, phases)
    for name in COEFFS:
        np.testing.assert_allclose(getattr(general_state, name), getattr(paired, name), atol=1e-12)
