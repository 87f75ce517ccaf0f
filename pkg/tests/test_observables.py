import numpy as np
import pytest

from _reference import sphere_product_quadrature
from twoatom_cbs import (
    AverageSpec,
    BatchSolver,
    CbsPoint,
    Configuration,
    DriveParams,
    cbs_at,
    cbs_point,
    crossed_term,
    elastic_analytic,
    elastic_components,
    enhancement,
    inelastic_components,
    intensity_expectations,
    ladder_term,
    solve_configuration,
    theta_profile,
)
from twoatom_cbs.averaging import ConfigurationSample, sample_configurations
from twoatom_cbs.spherical import SphericalVector
from twoatom_cbs.observables import (
    INTENSITY_SCALE,
    detection_direction,
    mean_dipoles,
    sample_values,
)


@pytest.fixture(scope="module")
def weak_point():
    return cbs_at(1e-4)


def test_ground_state_emits_nothing():
    rho = np.zeros((16, 16), complex)
    rho[0, 0] = 1.0
    assert all(v == 0 for v in intensity_expectations(rho))


def test_order0_has_no_level_2_signal():
    config = Configuration(50.0, (0.0, 0.6, 0.8))
    st = solve_configuration(DriveParams.from_saturation(2.0, 0.5), config)
    pop1, pop2, corr, d1, d2 = intensity_expectations(st.rho0)
    assert pop1 == 0 and pop2 == 0 and corr == 0 and d1 == 0 and d2 == 0


def test_no_drive_gives_no_ladder_or_dipoles():
    config = Configuration(50.0, (0.6, 0.0, 0.8))
    st = solve_configuration(DriveParams(omega=0.0), config)
    assert abs(ladder_term(st, config)) < 1e-15
    assert all(abs(d) < 1e-15 for d in mean_dipoles(st, config))
    with pytest.raises(ValueError, match="no background signal"):
        cbs_point(DriveParams(omega=0.0), AverageSpec(n_orient=64))


def test_theta_range_checked():
    config = Configuration(50.0, (0.0, 0.0, 1.0))
    st = solve_configuration(DriveParams.from_saturation(1.0), config)
    with pytest.raises(ValueError, match="theta"):
        crossed_term(st, 0.2, config)
    with pytest.raises(ValueError):
        elastic_components(st, config, theta=-0.11)


def test_detection_direction_is_backward():
    kL = np.array([0.0, 0.0, 1.0])
    np.testing.assert_allclose(detection_direction(kL, 0.0), -kL)
    d = detection_direction(kL, 0.05)
    assert np.linalg.norm(d) == pytest.approx(1.0)
    assert np.arccos(-d @ kL) == pytest.approx(0.05)


def test_enhancement():
    assert enhancement(2.0, 1.5) == pytest.approx(1.75)
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError, match="no background signal"):
            enhancement(bad, 1.0)


def test_elastic_closed_form_values():
    assert elastic_analytic(1.0) == pytest.approx(1.5 * np.pi)
    assert elastic_analytic(1.0, 1.0) == pytest.approx(0.75 * np.pi)
    s = np.geomspace(0.01, 10, 200)
    assert s[np.argmax(elastic_analytic(s))] == pytest.approx(1 / 3, rel=0.03)


def test_linear_regime_is_elastic(weak_point):
    p = weak_point
    exact = elastic_analytic(p.s)
    assert p.L_tot == pytest.approx(exact, rel=1e-3)
    assert p.C_tot == pytest.approx(p.L_tot, rel=1e-3)
    L_inel, C_inel = inelastic_components(p)
    assert L_inel / p.L_tot < 1e-3 and abs(C_inel) / p.L_tot < 1e-3


def test_cbs_point_bookkeeping():
    p = cbs_at(1.0, spec=AverageSpec(n_orient=64))
    assert isinstance(p, CbsPoint)
    assert p.I_tot == pytest.approx(p.L_tot + p.C_tot)
    assert p.alpha == pytest.approx(1 + p.C_tot / p.L_tot)
    assert p.L_el == pytest.approx(elastic_analytic(1.0), rel=1e-6)
    assert 0 < p.L_el < p.L_tot and 0 < p.C_tot < p.L_tot
    assert set(p.errors) == {"L_tot", "C_tot", "L_el", "C_el", "alpha"}
    assert all(v >= 0 for v in p.errors.values())


def test_orientation_average_matches_product_quadrature():
    """Fibonacci-lattice average vs an independent Gauss-Legendre x trapezoid rule.

    Per configuration the intensities scale as |g|^2 times a function of the
    orientation, so a single radius suffices for the orientation part.
    """
    params = DriveParams.from_saturation(0.7, 1.0)
    solver = BatchSolver(params)
    x = 997.3

    def per_orientation(n_hat):
        sample = ConfigurationSample(n_hat, np.full(len(n_hat), x), np.ones(len(n_hat)))
        vals = sample_values(solver, sample)
        return vals.real / (2.25 / x**2)

    reference = sphere_product_quadrature(per_orientation) * INTENSITY_SCALE
    point = cbs_point(params, AverageSpec(n_orient=256))
    got = np.array([point.L_tot, point.C_tot, point.L_el, point.C_el])
    np.testing.assert_allclose(got, reference, rtol=2e-5)


def test_per_configuration_ladder_is_coupling_squared_times_shape():
    params = DriveParams.from_saturation(1.0)
    n = (0.48, 0.6, 0.64)
    values = []
    for x in (500.0, 733.1, 1500.5):
        c = Configuration(x, n)
        values.append(ladder_term(solve_configuration(params, c), c) / abs(c.g) ** 2)
    np.testing.assert_allclose(values, values[0], rtol=1e-10)


def _rotated(sample, angle):
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    return ConfigurationSample(sample.n_hat @ rot.T, sample.k0_r12, sample.weights)


def test_cone_profile_symmetric_and_plane_independent():
    params = DriveParams.from_saturation(1.0)
    spec = AverageSpec(n_orient=512)
    solver = BatchSolver(params)
    sample = sample_configurations(spec)
    theta = 0.004
    base = [np.sum(sample_values(solver, sample, t)[1] * sample.weights).real for t in (theta, -theta)]
    turned = np.sum(sample_values(solver, _rotated(sample, 1.1), theta)[1] * sample.weights).real
    c0 = np.sum(sample_values(solver, sample, 0.0)[1] * sample.weights).real
    assert base[0] == pytest.approx(base[1], abs=1e-3 * c0)
    assert turned == pytest.approx(base[0], abs=1e-3 * c0)


def test_cone_decays_at_large_angle():
    # theta * k0 r_mean = 20
    crossed, err, ladder = theta_profile(DriveParams.from_saturation(1.0), [0.0, 0.02],
                                         AverageSpec(n_orient=512))
    assert abs(crossed[1]) < 0.1 * crossed[0]
    assert crossed[0] < ladder


def _signals(params, config):
    st = solve_configuration(params, config)
    el_l, el_c = elastic_components(st, config)
    return np.array([ladder_term(st, config), crossed_term(st, 0.0, config), el_l, el_c])


def test_signals_independent_of_laser_phase_convention():
    config = Configuration(123.4, (0.36, 0.48, 0.8), r1=(0.3, -2.0, 5.0))
    params = DriveParams.from_saturation(1.5, 0.5)
    base = _signals(params, config)
    # a global phase on the polarization vector re-phases the drive amplitude
    alt = _signals(DriveParams(omega=params.omega, delta=0.5,
                               pol=SphericalVector(plus=np.exp(0.7j))), config)
    np.testing.assert_allclose(alt, base, rtol=1e-10, atol=1e-20)


def test_signals_invariant_under_translation_of_the_pair():
    params = DriveParams.from_saturation(2.0)
    config = Configuration(88.0, (0.0, 0.6, 0.8))
    base = _signals(params, config)
    for shift in ((0.0, 0.0, 3.7), (5.0, -1.0, 0.2)):
        moved = Configuration(config.k0_r12, config.n_hat, r1=shift)
        np.testing.assert_allclose(_signals(params, moved), base, rtol=1e-10, atol=1e-20)
