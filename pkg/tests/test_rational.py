import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx, raises

from gflab.cplane import INFINITY, SIGMA, is_infinity
from gflab.domains import DISK, HALFPLANE, HALFSTRIP
from gflab.errors import ArgumentError, DivergenceError, PoleError
from gflab.maps import mobius_map
from gflab.rational import (
    MEAN_INEQUALITY_CONSTANT,
    RationalQD,
    ap_norm,
    boundary_limsup,
    bp_norm,
    check_mean_inequality,
    eval_rational,
    random_rational,
)

ONE_POLE = RationalQD(((0.0, 1.0, 0.0),))
TWO_POLE = RationalQD(((-1.0, 1.0, 0.0), (1.0, 1.0, 0.0)))


def closed_form_limit(r):
    """Largest boundary value of 4 y^2 |r|: directional limits at each pole
    and at infinity are 4|c_j| sin^2 and 4|sum c_j + a_j c'_j| sin^2."""
    return max(
        4.0 * float(np.max(np.abs(r.double_coeffs))),
        4.0 * abs(r.far_coefficient()),
    )


# --- construction and evaluation


def test_pole_must_sit_on_the_boundary():
    with raises(ArgumentError):
        RationalQD(((0.5 + 0.2j, 1.0, 0.0),))
    with raises(ArgumentError):
        RationalQD(((0.5 + 0.2j, 1.0, 0.0),), DISK)
    # unit-circle pole is fine for the disk model
    RationalQD(((1.0 + 0j, 1.0, 0.0),), DISK)


def test_coincident_poles_rejected():
    with raises(ArgumentError):
        RationalQD(((0.0, 1.0, 0.0), (0.0, 0.5, 0.0)))


def test_all_zero_double_coefficients_rejected():
    with raises(ArgumentError):
        RationalQD(((0.0, 0.0, 1.0),))


def test_eval_at_pole_raises():
    with raises(PoleError):
        eval_rational(ONE_POLE, 0.0)


def test_eval_values_and_shapes():
    assert eval_rational(ONE_POLE, 2j) == approx(-0.25)
    z = np.array([1j, 2j, 1 + 1j])
    vals = eval_rational(TWO_POLE, z)
    assert vals.shape == (3,)
    assert vals[0] == approx(1 / (1j + 1) ** 2 + 1 / (1j - 1) ** 2)
    assert eval_rational(ONE_POLE, INFINITY) == 0.0


def test_json_round_trip():
    r = RationalQD(((0.0, 1.0 + 0.5j, 0.25), (2.0, -0.5j, -0.25)))
    blob = json.dumps(r.to_json_dict())
    back = RationalQD.from_json_dict(json.loads(blob))
    assert back.terms == r.terms
    assert back.domain.kind == "halfplane"


def test_csv_row_shape():
    res = bp_norm(ONE_POLE, HALFPLANE, 2)
    row = res.csv_row()
    parts = row.split(",")
    assert len(parts) == 5
    assert parts[-1] in ("true", "false")
    float(parts[0])


# --- sup norm: frozen oracle values


def test_bp_single_pole_is_four():
    # 4 y^2 |z|^-2 is identically 4 on the imaginary axis
    res = bp_norm(ONE_POLE, HALFPLANE, 2)
    assert res.value == approx(4.0, abs=1e-7)
    assert res.converged


def test_bp_inverse_square_off_axis_attained_at_infinity():
    quad = lambda z: (np.asarray(z) + 1j) ** -2.0
    res = bp_norm(quad, HALFPLANE, 2)
    assert res.value == approx(4.0, rel=1e-7)
    assert is_infinity(res.argmax)
    assert res.converged


def test_bp_quartic_interior_maximum():
    quart = lambda z: (np.asarray(z) + 1j) ** -4.0
    res = bp_norm(quart, HALFPLANE, 2)
    assert res.value == approx(0.25, rel=1e-8)
    assert abs(res.argmax - 1j) < 1e-4
    assert res.converged


def test_bp_p3_sextic():
    sext = lambda z: (np.asarray(z) + 1j) ** -6.0
    res = bp_norm(sext, HALFPLANE, 3)
    assert res.value == approx(0.125, rel=1e-8)
    assert abs(res.argmax - 1j) < 1e-4


def test_bp_rejects_p_below_two():
    with raises(ArgumentError):
        bp_norm(ONE_POLE, HALFPLANE, 1)


def test_bp_nonzero_simple_sum_diverges():
    bad = RationalQD(((0.0, 1.0, 1.0),))
    res = bp_norm(bad, HALFPLANE, 2)
    assert res.value == np.inf
    assert not res.converged


def test_bp_double_pole_not_in_p3_space():
    res = bp_norm(ONE_POLE, HALFPLANE, 3)
    assert res.value == np.inf
    assert not res.converged


def test_bp_conformal_invariance_to_disk():
    # pull 1/z^2 back to the disk through sigma^{-1} as a quadratic differential
    sig_inv = mobius_map(SIGMA.inverse())

    def disk_field(w):
        w = np.asarray(w, dtype=complex)
        return eval_rational(ONE_POLE, sig_inv.evaluator(w)) * sig_inv.derivative(w) ** 2

    upper = bp_norm(ONE_POLE, HALFPLANE, 2)
    disk = bp_norm(disk_field, DISK, 2, poles=[1.0 + 0j, -1.0 + 0j])
    assert disk.value == approx(upper.value, rel=1e-5)


@settings(max_examples=12, deadline=None)
@given(
    st.floats(min_value=-3.0, max_value=3.0),
    st.floats(min_value=0.01, max_value=100.0),
)
def test_bp_scaling_property(phase_t, magnitude):
    c = magnitude * np.exp(1j * phase_t)
    base = bp_norm(ONE_POLE, HALFPLANE, 2).value
    scaled = bp_norm(lambda z: c * eval_rational(ONE_POLE, z), HALFPLANE, 2,
                     poles=[0j]).value
    assert scaled == approx(abs(c) * base, rel=1e-9)


# --- integral norm


def test_ap_quartic_value():
    quart = lambda z: (np.asarray(z) + 1j) ** -4.0
    assert ap_norm(quart, HALFPLANE, 2) == approx(np.pi / 4, rel=1e-6)


def test_ap_p3_sextic_value():
    sext = lambda z: (np.asarray(z) + 1j) ** -6.0
    assert ap_norm(sext, HALFPLANE, 3) == approx(np.pi / 16, rel=1e-6)


def test_ap_boundary_double_pole_diverges():
    with raises(DivergenceError):
        ap_norm(ONE_POLE, HALFPLANE, 2)


def test_ap_strip_exponential():
    f = lambda z: np.exp(-np.asarray(z, dtype=complex).real)
    assert ap_norm(f, HALFSTRIP, 2) == approx(1.0, rel=1e-7)


def test_mean_inequality_quartic():
    quart = lambda z: (np.asarray(z) + 1j) ** -4.0
    rep = check_mean_inequality(quart, HALFPLANE, 2)
    assert rep.ok
    assert rep.ratio == approx(1 / np.pi, rel=1e-6)
    assert rep.ratio <= MEAN_INEQUALITY_CONSTANT


def test_mean_inequality_zero_field():
    zero = lambda z: np.zeros_like(np.asarray(z, dtype=complex))
    rep = check_mean_inequality(zero, HALFPLANE, 2)
    assert rep.ok
    assert rep.bp_value == 0.0


@settings(max_examples=8, deadline=None)
@given(
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=0.6, max_value=2.5),
    st.sampled_from([3, 4]),
)
def test_mean_inequality_random_fields(x0, h, k):
    # interior-pole fields with enough far-field decay to be integrable
    pole = complex(x0, -h)
    f = lambda z: (np.asarray(z, dtype=complex) - pole) ** (-float(k))
    rep = check_mean_inequality(f, HALFPLANE, 2)
    assert rep.bp_value <= MEAN_INEQUALITY_CONSTANT * rep.ap_value + 1e-6


# --- boundary collar limsup


def test_limsup_single_pole():
    res = boundary_limsup(ONE_POLE, 2)
    assert res.value == approx(4.0, rel=1e-4)
    assert abs(res.argmax) < 1e-6
    assert res.converged


def test_limsup_two_pole_equals_bp():
    # far-field coefficient is 2, so the boundary value at infinity (=8) wins
    sup = bp_norm(TWO_POLE, HALFPLANE, 2)
    lim = boundary_limsup(TWO_POLE, 2)
    assert lim.value == approx(8.0, rel=1e-4)
    assert abs(sup.value - lim.value) <= 1e-4 * sup.value
    assert is_infinity(lim.argmax)


def test_limsup_contrast_interior_pole():
    # pole away from the boundary: collar limit 0, interior sup 0.25
    quart = lambda z: (np.asarray(z) + 1j) ** -4.0
    lim = boundary_limsup(quart, 2, domain=HALFPLANE)
    sup = bp_norm(quart, HALFPLANE, 2)
    assert lim.value < 1e-6
    assert lim.converged
    assert sup.value == approx(0.25, rel=1e-8)
    assert lim.value < sup.value


def test_limsup_needs_domain_for_plain_evaluators():
    with raises(ArgumentError):
        boundary_limsup(lambda z: 1.0 / np.asarray(z) ** 2, 2)


def test_boundary_attainment_randomized_suite():
    # Positive convex combinations of double poles: the weighted sup is
    # attained at the boundary, so sup and boundary limsup agree.  (For
    # that class 4 y^2 |r| <= 4 sum(c_j) holds pointwise since
    # y <= |z - a_j|, with equality in the vertical limit.)
    rng = np.random.default_rng(2024)
    for _ in range(12):
        r = random_rational(rng, n_poles=int(rng.integers(1, 5)))
        oracle = closed_form_limit(r)
        sup = bp_norm(r, HALFPLANE, 2)
        lim = boundary_limsup(r, 2)
        assert abs(sup.value - oracle) <= 1e-4 * oracle
        assert abs(lim.value - oracle) <= 1e-4 * oracle
        assert abs(sup.value - lim.value) <= 1e-4 * sup.value
        assert sup.converged and lim.converged


# A rational differential with complex coefficients for which the interior
# sup strictly exceeds every boundary directional limit.  4 y^2 |r| is not
# log-subharmonic (log y has negative Laplacian), so nothing pushes its
# maximum to the boundary once the coefficient phases are free.
BUMPED = RationalQD(
    (
        (
            -1.2225241271300389,
            -0.6019628707378049 + 0.05390786336884419j,
            -0.2608521068431079 + 0.40507457798297575j,
        ),
        (
            -2.9245973925148725,
            0.14936403148547633 + 0.1556110838268272j,
            0.3445503514678546 + 0.00968016189414489j,
        ),
        (
            -2.1587466787600995,
            -0.6943976855712353 + 0.623717201288407j,
            0.11407930141101419 - 0.36124387541322733j,
        ),
        (
            1.132496147256818,
            0.08017968478626346 - 0.3892888209192899j,
            -0.19777754603576092 - 0.053510864463893304j,
        ),
    )
)


def test_attainment_fails_for_complex_coefficients():
    assert abs(BUMPED.simple_coeff_sum()) < 1e-15  # field is in the sup-norm space
    sup = bp_norm(BUMPED, HALFPLANE, 2)
    lim = boundary_limsup(BUMPED, 2)
    assert sup.converged and lim.converged
    assert lim.value == approx(closed_form_limit(BUMPED), rel=1e-4)
    # the interior maximum beats the boundary limsup by over 20%
    assert sup.value > 1.2 * lim.value
    # re-verify the reported maximum by direct scalar evaluation
    z0 = sup.argmax
    direct = 4.0 * z0.imag**2 * abs(
        sum(c / (z0 - a) ** 2 + cp / (z0 - a) for (a, c, cp) in BUMPED.terms)
    )
    assert direct == approx(sup.value, rel=1e-12)
    assert z0.imag > 1.0  # genuinely interior, not a collar artifact


def test_random_rational_coefficient_classes():
    rng = np.random.default_rng(9)
    for n in (1, 2, 5):
        r = random_rational(rng, n_poles=n, coeff_class="complex+simple")
        assert abs(r.simple_coeff_sum()) < 1e-12
    r = random_rational(rng, n_poles=3)
    assert all(c.imag == 0.0 and c.real > 0.0 for c in r.double_coeffs)
    assert all(cp == 0.0 for cp in r.simple_coeffs)
    with raises(ArgumentError):
        random_rational(rng, coeff_class="bogus")
