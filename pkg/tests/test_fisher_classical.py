import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermomag.fisher_classical import (
    CfiReport,
    DegenerateMeasurementError,
    FisherPathologyError,
    MeasurementAxis,
    cfi,
    ensemble_precision,
    fisher_report,
    outcome_probabilities,
    probability_derivatives,
    pure_state_cfi,
    qubit_closed_form,
)
from thermomag.fisher_quantum import optimal_angle, pure_state_qfi, qfi
from thermomag.spin_algebra import AxisVector, SpinLength, axis_projection, build_spin_matrices
from thermomag.thermal_state import ParamPoint, density_matrix, thermal_state

FD_STEP = 1e-6


def dense_probabilities(state, theta, axis):
    """<M_O| rho |M_O> from an eigensolve of S_O, ordered M_O = S..-S."""
    n = axis.lab_vector(theta)
    w, v = np.linalg.eigh(axis_projection(*build_spin_matrices(state.s), n))
    rho = density_matrix(state, theta)
    p = np.einsum("ik,ij,jk->k", v.conj(), rho, v).real
    return p[np.argsort(-w)]


def fd_derivatives(state, theta, axis, h=FD_STEP):
    """Central differences with the measurement axis held fixed in the lab."""
    s = state.s

    def at(dt, dd):
        return outcome_probabilities(
            thermal_state(s, state.delta + dd), theta + dt, MeasurementAxis(axis.phi - dt, axis.gamma)
        )

    return (at(h, 0) - at(-h, 0)) / (2 * h), (at(0, h) - at(0, -h)) / (2 * h)


def _state(twoS, delta):
    return thermal_state(SpinLength(twoS), delta)


def test_axis_lab_vector():
    n = MeasurementAxis(0.4).lab_vector(0.3)
    np.testing.assert_allclose(n.as_array(), [np.sin(0.7), 0, np.cos(0.7)])
    with pytest.raises(ValueError):
        MeasurementAxis(np.nan)


def test_probabilities_along_field():
    st_ = _state(5, 1.3)
    np.testing.assert_allclose(outcome_probabilities(st_, 0.4, MeasurementAxis(0.0)), st_.populations, atol=1e-15)


@pytest.mark.parametrize("axis", [MeasurementAxis(0.3), MeasurementAxis(1.2, 0.8)])
def test_probabilities_uniform_at_infinite_temperature(axis):
    p = outcome_probabilities(_state(6, 0.0), 0.5, axis)
    np.testing.assert_allclose(p, 1 / 7, atol=1e-14)


def test_probabilities_match_dense_projection():
    st_ = _state(2, 1.0)
    axis = MeasurementAxis(np.pi / 4)
    np.testing.assert_allclose(
        outcome_probabilities(st_, 0.3, axis), dense_probabilities(st_, 0.3, axis), atol=1e-13
    )


@settings(max_examples=60, deadline=None)
@given(
    twoS=st.integers(1, 10),
    delta=st.floats(-5, 5),
    theta=st.floats(0, np.pi),
    phi=st.floats(-np.pi, np.pi),
    gamma=st.sampled_from([0.0, 0.4, -1.3, 2.5]),
)
def test_probabilities_property(twoS, delta, theta, phi, gamma):
    st_ = _state(twoS, delta)
    axis = MeasurementAxis(phi, gamma)
    p = outcome_probabilities(st_, theta, axis)
    assert p.sum() == pytest.approx(1.0, abs=1e-13)
    np.testing.assert_allclose(p, dense_probabilities(st_, theta, axis), atol=1e-12)


def test_derivatives_conserve_probability():
    st_ = _state(7, 0.8)
    for axis in (MeasurementAxis(0.6), MeasurementAxis(-0.2, 1.0)):
        dt, dd = probability_derivatives(st_, 0.2, axis)
        assert abs(dt.sum()) < 1e-12 and abs(dd.sum()) < 1e-12


def test_qubit_along_field_has_no_orientation_signal():
    st_ = _state(1, 0.9)
    dt, _ = probability_derivatives(st_, 0.5, MeasurementAxis(0.0))
    np.testing.assert_array_equal(dt, 0)
    fd_t, _ = fd_derivatives(st_, 0.5, MeasurementAxis(0.0))
    np.testing.assert_allclose(fd_t, 0, atol=1e-9)


def test_derivatives_match_finite_differences_example():
    st_ = _state(2, 1.0)
    axis = MeasurementAxis(0.9)
    for a, b in zip(probability_derivatives(st_, 0.3, axis), fd_derivatives(st_, 0.3, axis)):
        np.testing.assert_allclose(a, b, atol=1e-7)


@settings(max_examples=80, deadline=None)
@given(
    twoS=st.integers(1, 10),
    delta=st.floats(-5, 5),
    theta=st.floats(0, np.pi),
    phi=st.floats(-np.pi, np.pi),
    gamma=st.sampled_from([0.0, 0.0, 0.7, -2.1]),
)
def test_derivatives_property(twoS, delta, theta, phi, gamma):
    st_ = _state(twoS, delta)
    axis = MeasurementAxis(phi, gamma)
    for a, b in zip(probability_derivatives(st_, theta, axis), fd_derivatives(st_, theta, axis)):
        np.testing.assert_allclose(a, b, atol=1e-7)


def test_cfi_high_temperature_intensity(spin):
    S = spin.S
    c = cfi(thermal_state(spin, 1e-6), ParamPoint(0.0, 1e-6, 0.0, 1.0), MeasurementAxis(0.0))
    assert c.A_dd == pytest.approx(S * (S + 1) / 3, rel=1e-9)


def test_cfi_low_temperature_orientation(spin):
    c = cfi(thermal_state(spin, 60.0), ParamPoint(0.0, 60.0, 1.0, 0.0), MeasurementAxis(np.pi / 2))
    assert c.A_tt == pytest.approx(spin.twoS, rel=1e-9)


def test_cfi_at_optimal_axis_saturates_qfi():
    st_ = _state(2, 1.0)
    pt = ParamPoint(0.3, 1.0, 1.0, 1.0)
    c = cfi(st_, pt, MeasurementAxis(optimal_angle(pt)))
    assert c.F == pytest.approx(qfi(st_, pt).H, rel=1e-8)


@settings(max_examples=80, deadline=None)
@given(
    twoS=st.integers(1, 10),
    delta=st.floats(-5, 5),
    td=st.floats(-2, 2),
    dd=st.floats(-2, 2),
    phi=st.floats(-np.pi, np.pi),
)
def test_cfi_decomposition(twoS, delta, td, dd, phi):
    c = cfi(_state(twoS, delta), ParamPoint(0.1, delta, td, dd), MeasurementAxis(phi))
    assert c.F == pytest.approx(c.A_tt * td**2 + c.A_dd * dd**2 + 2 * c.A_dt * td * dd, rel=1e-11, abs=1e-15)
    assert c.A_dt**2 <= c.A_tt * c.A_dd * (1 + 1e-9) + 1e-15


def test_cfi_is_pi_periodic_in_phi():
    st_ = _state(5, 1.7)
    pt = ParamPoint(0.2, 1.7, 0.8, -0.6)
    for phi in np.linspace(-1.5, 1.5, 13):
        a, b = cfi(st_, pt, MeasurementAxis(phi)), cfi(st_, pt, MeasurementAxis(phi + np.pi))
        assert a.F == pytest.approx(b.F, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("phi", [0.0, np.pi / 2])
@pytest.mark.parametrize("twoS", [1, 2, 5, 10])
def test_decomposition_terms_even_in_delta(twoS, phi):
    for delta in (0.3, 1.1, 4.0):
        a = cfi(_state(twoS, delta), ParamPoint(0, delta, 1, 1), MeasurementAxis(phi))
        b = cfi(_state(twoS, -delta), ParamPoint(0, -delta, 1, 1), MeasurementAxis(phi))
        np.testing.assert_allclose([a.A_tt, a.A_dd, a.A_dt], [b.A_tt, b.A_dd, b.A_dt], rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("twoS", [1, 2, 3, 4, 10])
def test_a_tt_dips_along_field(twoS):
    for delta in (0.5, 3.0):
        st_ = _state(twoS, delta)
        pt = ParamPoint(0.0, delta, 1, 0)
        for dip in (0.0, np.pi):
            centre = cfi(st_, pt, MeasurementAxis(dip)).A_tt
            for off in (-0.1, 0.1):
                assert centre < cfi(st_, pt, MeasurementAxis(dip + off)).A_tt


def test_zero_temperature_any_in_plane_axis_is_optimal(spin):
    st_ = thermal_state(spin, 1e3)
    pt = ParamPoint(0.3, 1e3, 1.0, 0.5)
    H = qfi(st_, pt).H
    for phi in (0.2, np.pi / 6, np.pi / 3, np.pi / 2, 2.5):
        assert cfi(st_, pt, MeasurementAxis(phi)).F == pytest.approx(H, rel=1e-6)


def test_chain_on_grid():
    phis = np.linspace(-np.pi / 2, np.pi / 2, 41)[1:]
    for twoS in (1, 2, 3, 4, 10):
        s = SpinLength(twoS)
        for delta in np.linspace(-6, 6, 40):
            st_ = thermal_state(s, delta)
            for td, dd in ((1.0, 1.0), (1.0, -0.3), (0.0, 1.0), (1.0, 0.0), (-2.0, 0.7), (0.4, 1.9)):
                pt = ParamPoint(0.0, delta, td, dd)
                H = qfi(st_, pt).H
                for phi in phis:
                    c = cfi(st_, pt, MeasurementAxis(phi))
                    assert 0 <= c.P <= c.F + 1e-10
                    assert c.F <= H + 1e-9


def test_pure_state_cfi_examples():
    s = SpinLength(4)
    theta = 0.6
    n_x = AxisVector(np.cos(theta), 0.0, -np.sin(theta))
    n_y = AxisVector(0.0, 1.0, 0.0)
    n_z = AxisVector(np.sin(theta), 0.0, np.cos(theta))
    h = pure_state_qfi(s, -1, 1.3)
    for phi in (0.3, 1.0, 2.0):
        n_o = MeasurementAxis(phi).lab_vector(theta)
        assert pure_state_cfi(s, -1, 1.3, n_o, n_x, n_y) == pytest.approx(h, rel=1e-14)
    assert pure_state_cfi(s, -1, 1.3, n_y, n_x, n_y) == 0.0
    diag = AxisVector(*((n_x.as_array() + n_y.as_array()) / np.sqrt(2)))
    assert pure_state_cfi(s, -1, 1.3, diag, n_x, n_y) == pytest.approx(h / 2, rel=1e-14)
    with pytest.raises(DegenerateMeasurementError):
        pure_state_cfi(s, -1, 1.3, n_z, n_x, n_y)


@pytest.mark.parametrize("twoS", [1, 2, 5, 8])
@pytest.mark.parametrize("phi,gamma", [(0.7, 0.5), (1.4, -1.1), (2.2, 2.0)])
def test_pure_state_cfi_matches_general_machinery(twoS, phi, gamma):
    s = SpinLength(twoS)
    theta = 0.4
    axis = MeasurementAxis(phi, gamma)
    n_x = AxisVector(np.cos(theta), 0.0, -np.sin(theta))
    n_y = AxisVector(0.0, 1.0, 0.0)
    F = cfi(thermal_state(s, 1e3), ParamPoint(theta, 1e3, 1.0, 0.0), axis).F
    assert F == pytest.approx(pure_state_cfi(s, -s.S, 1.0, axis.lab_vector(theta), n_x, n_y), rel=1e-8)


def test_ensemble_precision_optimal_axis(spin):
    for delta in (0.2, 1.0, 4.0):
        st_ = thermal_state(spin, delta)
        pt = ParamPoint(0.1, delta, 0.9, 1.2)
        H = qfi(st_, pt).H
        c = cfi(st_, pt, MeasurementAxis(optimal_angle(pt)))
        assert c.P == pytest.approx(H, rel=1e-9)
        assert c.F == pytest.approx(H, rel=1e-9)


def test_ensemble_precision_infinite_temperature(spin):
    S = spin.S
    st_ = thermal_state(spin, 0.0)
    for phi in (0.0, 0.4, 1.2):
        P = ensemble_precision(st_, ParamPoint(0.0, 0.0, 0.7, 1.3), MeasurementAxis(phi))
        assert P == pytest.approx(1.3**2 * np.cos(phi) ** 2 * S * (S + 1) / 3, rel=1e-13)
    pt = ParamPoint(0.0, 0.0, 0.7, 1.3)
    assert ensemble_precision(st_, pt, MeasurementAxis(0.0)) == pytest.approx(qfi(st_, pt).H, rel=1e-13)


def test_ensemble_precision_below_cfi():
    st_ = _state(2, 1.0)
    pt = ParamPoint(0.3, 1.0, 1.0, 1.0)
    c = cfi(st_, pt, MeasurementAxis(0.3))
    assert c.P <= c.F + 1e-10
    assert c.F - c.P > 0  # S=1 off the optimal axis: strictly lossy


def test_ensemble_precision_matches_dense_moments():
    s = SpinLength(5)
    st_ = thermal_state(s, 0.8)
    theta, h = 0.5, 1e-6
    pt = ParamPoint(theta, 0.8, 0.6, -1.1)
    for axis in (MeasurementAxis(0.7), MeasurementAxis(0.7, 0.9)):
        op = axis_projection(*build_spin_matrices(s), axis.lab_vector(theta))

        def mean(e):
            st_e = thermal_state(s, 0.8 - 1.1 * e)
            return np.trace(density_matrix(st_e, theta + 0.6 * e) @ op).real

        rho = density_matrix(st_, theta)
        var = np.trace(rho @ op @ op).real - mean(0) ** 2
        expected = ((mean(h) - mean(-h)) / (2 * h)) ** 2 / var
        assert ensemble_precision(st_, pt, axis) == pytest.approx(expected, rel=1e-7)


def test_ensemble_precision_degenerate():
    st_ = _state(4, 1e3)
    with pytest.raises(DegenerateMeasurementError):
        ensemble_precision(st_, ParamPoint(0.0, 1e3, 1.0, 0.0), MeasurementAxis(0.0))
    assert np.isnan(cfi(st_, ParamPoint(0.0, 1e3, 1.0, 0.0), MeasurementAxis(0.0)).P)


def test_qubit_closed_form_examples():
    assert qubit_closed_form(ParamPoint(0, 0.0, 0.3, 1.7), 0.0) == pytest.approx(1.7**2 / 4, rel=1e-15)
    for phi in (0.3, 1.0, 2.0):
        assert qubit_closed_form(ParamPoint(0, 60.0, 1.3, 0.2), phi) == pytest.approx(1.3**2, rel=1e-12)


def test_qubit_closed_form_matches_general_machinery():
    s = SpinLength(1)
    for delta in np.linspace(-4, 4, 20):
        st_ = thermal_state(s, delta)
        pt = ParamPoint(0.2, delta, 1.0, 1.0)
        for phi in np.linspace(-np.pi / 2, np.pi / 2, 21)[1:]:
            c = cfi(st_, pt, MeasurementAxis(phi))
            ref = qubit_closed_form(pt, phi)
            assert c.F == pytest.approx(ref, rel=1e-10, abs=1e-15)
            assert c.P == pytest.approx(ref, rel=1e-10, abs=1e-15)


def test_floor_drops_negligible_outcomes():
    st_ = _state(20, 8.0)
    c = cfi(st_, ParamPoint(0.0, 8.0, 1.0, 1.0), MeasurementAxis(0.0))
    assert isinstance(c, CfiReport) and np.isfinite(c.F)
    assert st_.populations[0] < 1e-14


def test_floor_flags_boundary_pathology():
    # pure qubit measured 1e-8 rad off its axis: p ~ 2.5e-17, dp/dtheta ~ 5e-9
    st_ = _state(1, 1e3)
    with pytest.raises(FisherPathologyError):
        cfi(st_, ParamPoint(0.0, 1e3, 1.0, 0.0), MeasurementAxis(1e-8))


def test_fisher_report_bundles_everything():
    st_ = _state(3, 0.7)
    pt = ParamPoint(0.1, 0.7, 0.5, 0.5)
    r = fisher_report(st_, pt, MeasurementAxis(0.2))
    q, c = qfi(st_, pt), cfi(st_, pt, MeasurementAxis(0.2))
    assert (r.H, r.h_C, r.h_Q, r.phi_opt) == (q.H, q.h_C, q.h_Q, q.phi_opt)
    assert (r.F, r.A_tt, r.A_dd, r.A_dt, r.P) == (c.F, c.A_tt, c.A_dd, c.A_dt, c.P)
    assert set(r.as_dict()) == {"H", "h_C", "h_Q", "F", "A_tt", "A_dd", "A_dt", "P", "phi_opt"}
