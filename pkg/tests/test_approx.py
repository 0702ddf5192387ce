import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx, raises

from gflab.approx import (
    ConvergenceReport,
    FitConfig,
    FittedRational,
    anchored_antiderivative,
    convergence_report,
    differentiate_fit,
    fit_simple_poles,
    integrate_phi,
    reproducing_apply,
)
from gflab.domains import DISK, HALFPLANE, HALFSTRIP
from gflab.errors import ArgumentError, PathError
from gflab.rational import RationalQD


def _shifted_square(z):
    return (np.asarray(z, dtype=complex) + 1j) ** -2


def _shifted_square_int(z):
    return -1.0 / (np.asarray(z, dtype=complex) + 1j)


# --- path integration -------------------------------------------------------


def test_integrate_zero_is_zero():
    assert integrate_phi(lambda z: 0.0 * np.asarray(z, complex), HALFPLANE, 3j) == 0


def test_integrate_cubic_antiderivative():
    # antiderivative (z+i)^3 between i and 0: (2i)^3 - i^3 = -7i
    got = integrate_phi(lambda z: 3.0 * (np.asarray(z, complex) + 1j) ** 2, HALFPLANE, 1j)
    assert got == approx(-7j, abs=1e-10)


def test_integrate_decaying_pole():
    # antiderivative -1/2 (z+i)^-2 between i and 0
    got = integrate_phi(lambda z: (np.asarray(z, complex) + 1j) ** -3, HALFPLANE, 1j)
    assert got == approx(-0.375, abs=1e-10)


def test_integrate_path_independence():
    phi = lambda z: (np.asarray(z, complex) + 1j) ** -3
    p1 = integrate_phi(phi, HALFPLANE, 2.0 + 2j, waypoints=(1.0 + 0.5j,))
    p2 = integrate_phi(phi, HALFPLANE, 2.0 + 2j, waypoints=(0.2 + 1.8j,))
    assert abs(p1 - p2) < 1e-8


def test_integrate_refuses_path_through_pole():
    qd = RationalQD(((1.0, 1.0, 0.0),))
    with raises(PathError):
        integrate_phi(qd, HALFPLANE, 2.0 + 0.0004j)


def test_integrate_refuses_nonfinite_integrand():
    def blows_up(z):
        z = np.asarray(z, dtype=complex)
        return np.where(np.abs(z - (1.0 + 1j)) < 0.5, np.inf, 1.0)

    with raises(PathError):
        integrate_phi(blows_up, HALFPLANE, 2.0 + 2j)


@pytest.mark.parametrize("z", [1j, 2.0 + 0.5j, -3.0 + 4.0j])
def test_anchored_antiderivative_vanishes_at_infinity(z):
    psi = anchored_antiderivative(_shifted_square, HALFPLANE)
    assert psi(z) == approx(-1.0 / (z + 1j), abs=1e-9)


def test_anchored_antiderivative_broadcasts():
    psi = anchored_antiderivative(_shifted_square, HALFPLANE)
    out = psi(np.array([1j, 2j]))
    assert out.shape == (2,)
    assert out[1] == approx(-1.0 / 3j, abs=1e-9)


# --- reproducing formula ----------------------------------------------------


def test_reproducing_shifted_square():
    got = reproducing_apply(_shifted_square, 2, 1j)
    assert got == approx(-0.25, abs=1e-4 * 1.25)


def test_reproducing_higher_weight():
    got = reproducing_apply(lambda z: (np.asarray(z, complex) + 2j) ** -3, 3, 1j)
    want = (3j) ** -3
    assert got == approx(want, abs=1e-4 * (1 + abs(want)))


def test_reproducing_zero_field():
    assert reproducing_apply(lambda z: 0.0 * np.asarray(z, complex), 2, 1j) == approx(
        0.0, abs=1e-12
    )


def test_reproducing_identity_on_a_grid():
    # the identity holds to the contract tolerance at 20 interior points
    xs = np.linspace(-2.0, 2.0, 5)
    ys = (0.3, 0.8, 1.7, 3.5)
    for x in xs:
        for y in ys:
            z = complex(x, y)
            want = complex(_shifted_square(z))
            got = reproducing_apply(_shifted_square, 2, z)
            assert abs(got - want) <= 1e-4 * (1.0 + abs(want))


def test_reproducing_validates_arguments():
    with raises(ArgumentError):
        reproducing_apply(_shifted_square, 0, 1j)
    with raises(ArgumentError):
        reproducing_apply(_shifted_square, 2, 1.0 - 1j)


# --- least-squares fitting --------------------------------------------------


def test_fit_recovers_exact_member():
    # a single pole already in the uniform placement set is reproduced exactly
    cfg = FitConfig(n=9, pole_placement="uniform", interval=(-4.0, 4.0))
    a0 = np.linspace(-4.0, 4.0, 9)[3]
    psi = lambda z: 1.0 / (np.asarray(z, complex) - a0)
    dpsi = lambda z: -1.0 / (np.asarray(z, complex) - a0) ** 2
    fit = fit_simple_poles(psi, HALFPLANE, cfg, derivative=dpsi)
    assert fit.residual < 1e-10
    hit = np.argmin(np.abs(fit.poles - a0))
    assert fit.coefficients[hit] == approx(1.0, abs=1e-8)
    others = np.delete(fit.coefficients, hit)
    assert np.max(np.abs(others)) < 1e-8


@settings(max_examples=9, deadline=None)
@given(idx=st.integers(min_value=0, max_value=8))
def test_fit_recovers_any_grid_pole(idx):
    cfg = FitConfig(n=9, pole_placement="uniform", interval=(-4.0, 4.0))
    a0 = np.linspace(-4.0, 4.0, 9)[idx]
    psi = lambda z: 1.0 / (np.asarray(z, complex) - a0)
    dpsi = lambda z: -1.0 / (np.asarray(z, complex) - a0) ** 2
    assert fit_simple_poles(psi, HALFPLANE, cfg, derivative=dpsi).residual < 1e-8


def test_fit_residual_drops_with_more_poles():
    dpsi = _shifted_square
    psi = _shifted_square_int
    r8 = fit_simple_poles(
        psi, HALFPLANE, FitConfig(n=8, pole_placement="chebyshev"), derivative=dpsi
    ).residual
    r32 = fit_simple_poles(
        psi, HALFPLANE, FitConfig(n=32, pole_placement="chebyshev"), derivative=dpsi
    ).residual
    assert r32 < r8


def test_fit_residual_nonincreasing_on_nested_sets():
    # same design rows, strictly larger dictionary: exact least-squares fact
    psi = _shifted_square_int
    dpsi = _shifted_square
    small, big = (
        fit_simple_poles(
            psi,
            HALFPLANE,
            FitConfig(n=n, pole_placement="uniform", sample_count=200, gap_probes=False),
            derivative=dpsi,
        ).residual
        for n in (9, 17)  # linspace(-4, 4, 17) contains linspace(-4, 4, 9)
    )
    assert big <= small + 1e-12


def test_fit_without_derivative_callable():
    # central differences stand in; exact member still found to fd accuracy
    cfg = FitConfig(n=9, pole_placement="uniform")
    a0 = np.linspace(-4.0, 4.0, 9)[4]
    psi = lambda z: 1.0 / (np.asarray(z, complex) - a0)
    fit = fit_simple_poles(psi, HALFPLANE, cfg)
    hit = np.argmin(np.abs(fit.poles - a0))
    assert fit.coefficients[hit] == approx(1.0, abs=1e-6)


def test_fit_rejects_unknown_domain():
    with raises(ArgumentError):
        fit_simple_poles(_shifted_square_int, HALFSTRIP, FitConfig(n=4))


def test_fitted_rational_evaluates():
    ft = FittedRational(
        ((1.0 + 0j, 2.0 + 0j), (-1.0 + 0j, 0.5j)), HALFPLANE, 0.0, 1.0, 2.5 + 0.5j, FitConfig(n=2)
    )
    z = 0.3 + 1.1j
    assert ft(z) == approx(2.0 / (z - 1.0) + 0.5j / (z + 1.0), abs=1e-14)


# --- Theorem-2 mode: real poles, real coefficients --------------------------


def _real_pair(z):
    z = np.asarray(z, dtype=complex)
    return 1.0 / (z - 0.5) - 1.0 / (z + 0.5)


def _real_pair_d(z):
    z = np.asarray(z, dtype=complex)
    return -1.0 / (z - 0.5) ** 2 + 1.0 / (z + 0.5) ** 2


def test_real_mode_exact_representation():
    # the uniform 17-point grid on (-4, 4) contains the true poles at +-1/2
    fit = fit_simple_poles(
        _real_pair,
        HALFPLANE,
        FitConfig(n=17, pole_placement="uniform", real_coefficients=True),
        derivative=_real_pair_d,
    )
    assert fit.residual < 1e-8


def test_real_mode_output_is_exactly_real():
    fit = fit_simple_poles(
        _real_pair,
        HALFPLANE,
        FitConfig(n=16, real_coefficients=True),
        derivative=_real_pair_d,
    )
    qd = differentiate_fit(fit)
    for a, c, cp in qd.terms:
        assert a.imag == 0.0
        assert c.imag == 0.0
        assert cp == 0.0


def test_real_mode_residual_improves_with_n():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r9, r33 = (
            fit_simple_poles(
                _real_pair,
                HALFPLANE,
                FitConfig(n=n, real_coefficients=True),
                derivative=_real_pair_d,
            ).residual
            for n in (9, 33)
        )
    assert r33 < r9


# --- circle-symmetric fits on the disk --------------------------------------


def test_disk_symmetric_constraint_holds_on_circle():
    fit = fit_simple_poles(
        lambda z: np.asarray(z, complex) ** 2, DISK, FitConfig(n=12, pole_placement="uniform", symmetry=2)
    )
    th = 2.0 * np.pi * (np.arange(251) + 0.3) / 251
    circ = np.exp(1j * th)
    assert np.max(np.abs((circ**2 * fit(circ)).imag)) < 1e-8


def test_disk_symmetric_fit_is_analytic_at_origin():
    fit = fit_simple_poles(
        lambda z: np.asarray(z, complex) ** 2, DISK, FitConfig(n=12, pole_placement="uniform", symmetry=2)
    )
    vals = fit(np.array([0.0 + 0j, 1e-3 + 1e-3j]))
    assert np.all(np.isfinite(vals))


def test_disk_fit_requires_symmetry_mode():
    with raises(ArgumentError):
        fit_simple_poles(lambda z: np.asarray(z, complex) ** 2, DISK, FitConfig(n=8))


def test_disk_fit_needs_room_for_constraints():
    with raises(ArgumentError):
        fit_simple_poles(
            lambda z: np.asarray(z, complex) ** 2, DISK, FitConfig(n=2, symmetry=2)
        )


# --- differentiation --------------------------------------------------------


def test_differentiate_single_term():
    ft = FittedRational(((1.0 + 0j, 1.0 + 0j),), HALFPLANE, 0.0, 1.0, 1.0 + 0j, FitConfig(n=1))
    qd = differentiate_fit(ft)
    assert qd.terms == ((1.0 + 0j, -1.0 + 0j, 0j),)


def test_differentiate_is_termwise():
    ft = FittedRational(
        ((1.0 + 0j, 2.0 + 0j), (-1.0 + 0j, 0.5j)), HALFPLANE, 0.0, 1.0, 2.5 + 0.5j, FitConfig(n=2)
    )
    qd = differentiate_fit(ft)
    assert qd.terms == ((1.0 + 0j, -2.0 + 0j, 0j), (-1.0 + 0j, -0.5j, 0j))


def test_differentiate_commutes_with_summation():
    terms = ((1.0 + 0j, 2.0 + 0j), (-1.0 + 0j, 0.5j), (3.0 + 0j, -1.0 + 0j))
    whole = differentiate_fit(
        FittedRational(terms, HALFPLANE, 0.0, 1.0, 0j, FitConfig(n=3))
    )
    z = np.array([0.4 + 0.9j, -2.0 + 0.3j])
    parts = sum(-c / (z - a) ** 2 for a, c in terms)
    assert np.max(np.abs(whole(z) - parts)) < 1e-14


def test_differentiate_matches_finite_differences():
    # single term: the derivative -2/(z-1)^2 has no zeros to spoil the
    # relative comparison
    ft = FittedRational(((1.0 + 0j, 2.0 + 0j),), HALFPLANE, 0.0, 1.0, 2.0 + 0j, FitConfig(n=1))
    qd = differentiate_fit(ft)
    zs = np.linspace(-2.0, 2.0, 20) + 1.3j
    h = 1e-6
    fd = (ft(zs + h) - ft(zs - h)) / (2.0 * h)
    assert np.max(np.abs(fd - qd(zs)) / np.abs(qd(zs))) < 1e-8


def test_differentiate_rejects_zero_fit():
    ft = FittedRational(((1.0 + 0j, 0j),), HALFPLANE, 0.0, 1.0, 0j, FitConfig(n=1))
    with raises(ArgumentError):
        differentiate_fit(ft)


# --- convergence measurement ------------------------------------------------


def test_convergence_table_decreases():
    rep = convergence_report(_shifted_square, HALFPLANE, 2, (4, 8, 16, 32, 64))
    errs = [row[1] for row in rep.rows]
    assert rep.strictly_decreasing
    assert rep.tail_failure is None
    assert errs[-1] < 1e-2
    # frozen from the tuned design; loose bounds guard against BLAS drift
    assert errs[0] == approx(1.972, rel=1e-2)
    assert errs[-1] == approx(8.174e-3, rel=1e-2)


def test_convergence_zero_field():
    rep = convergence_report(
        lambda z: 0.0 * np.asarray(z, complex), HALFPLANE, 2, (4, 8)
    )
    assert all(row[1] == 0.0 for row in rep.rows)
    assert rep.strictly_decreasing


def test_convergence_flat_tail_is_reported():
    rep = convergence_report(_shifted_square, HALFPLANE, 2, (6, 6, 6))
    assert not rep.strictly_decreasing
    assert rep.tail_failure is not None
    assert "n=6" in rep.tail_failure


def test_convergence_warns_when_residual_rises():
    with pytest.warns(UserWarning, match="residual rose"):
        convergence_report(_shifted_square, HALFPLANE, 2, (16, 4))


def test_convergence_rejects_bad_schedule():
    with raises(ArgumentError):
        convergence_report(_shifted_square, HALFPLANE, 2, ())
    with raises(ArgumentError):
        convergence_report(_shifted_square, HALFPLANE, 2, (4, 0))


def test_convergence_csv_shape():
    rep = ConvergenceReport(((4, 0.5, 0.1, 3.0),), True, None)
    rows = rep.csv_rows()
    assert rows[0] == ("n", "bp1_error", "residual", "condition_estimate")
    assert rows[1][0] == "4"
    d = rep.to_json_dict()
    assert d["n"] == [4]
    assert d["strictly_decreasing"] is True


# --- configuration ----------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=0),
        dict(n=4, sample_count=39),
        dict(n=4, pole_placement="magic"),
        dict(n=4, interval=(2.0, 2.0)),
        dict(n=4, symmetry=0),
    ],
)
def test_config_rejects_bad_values(kwargs):
    with raises(ArgumentError):
        FitConfig(**kwargs)


def test_config_default_sample_count():
    assert FitConfig(n=6).resolved_sample_count() == 72
    assert FitConfig(n=6, sample_count=100).resolved_sample_count() == 100


def test_config_json_round_trip():
    cfg = FitConfig(n=6, sample_count=80, symmetry=3, real_coefficients=True)
    assert FitConfig.from_json_dict(cfg.to_json_dict()) == cfg
