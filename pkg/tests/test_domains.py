import numpy as np
import pytest
from pytest import approx, raises

from gflab.cplane import INFINITY, Mobius, is_infinity, sphere_distance
from gflab.domains import (
    DISK,
    EXTERIOR_DISK,
    HALFPLANE,
    HALFSTRIP,
    LOWER_HALFPLANE,
    DomainModel,
    boundary_distance,
    check_koebe_bounds,
    contains,
    halfstrip_map,
    hyperbolic_density,
    make_quasidisk,
    mobius_sigma,
    mobius_sigma_inverse,
    sample_interior,
)
from gflab.errors import ArgumentError, DomainError
from gflab.maps import (
    chain_from_config,
    check_conformal,
    cosh_pi_map,
    mobius_map,
    power_map,
)


def test_density_reference_values():
    assert hyperbolic_density(HALFPLANE, 1j) == approx(0.5, abs=1e-15)
    assert hyperbolic_density(HALFPLANE, 2j) == approx(0.25, abs=1e-15)
    assert hyperbolic_density(DISK, 0j) == approx(1.0, abs=1e-15)
    assert hyperbolic_density(DISK, 0.5 + 0j) == approx(1 / 0.75, abs=1e-15)
    assert hyperbolic_density(EXTERIOR_DISK, 2.0 + 0j) == approx(1 / 3.0, abs=1e-15)
    assert hyperbolic_density(LOWER_HALFPLANE, -2j) == approx(0.25, abs=1e-15)


def test_density_rejects_exterior_and_infinity():
    with raises(DomainError):
        hyperbolic_density(HALFPLANE, -1j)
    with raises(DomainError):
        hyperbolic_density(DISK, 2.0 + 0j)
    with raises(DomainError):
        hyperbolic_density(HALFPLANE, INFINITY)


def test_strip_density_matches_cosh_uniformizer():
    # cosh(pi zeta) maps the half-strip onto the upper half-plane, so the
    # strip density must be the pullback of 1/(2 Im w)
    cosh = cosh_pi_map()
    rng = np.random.default_rng(3)
    for _ in range(40):
        zeta = complex(rng.uniform(0.05, 3.0), rng.uniform(0.05, 0.95))
        w = cosh.evaluator(zeta)
        lam_pull = hyperbolic_density(HALFPLANE, w) * abs(cosh.derivative(zeta))
        assert hyperbolic_density(HALFSTRIP, zeta) == approx(lam_pull, rel=1e-12)


def test_strip_density_far_from_the_end():
    # deep in the strip the metric looks like the width-1 parallel strip
    lam = hyperbolic_density(HALFSTRIP, 80.0 + 0.5j)
    assert lam == approx(np.pi / 2, rel=1e-12)


def test_boundary_distance_values():
    assert boundary_distance(HALFPLANE, 3.0 + 2.5j) == approx(2.5)
    assert boundary_distance(DISK, 0.4 + 0.3j) == approx(0.5)
    assert boundary_distance(HALFSTRIP, 0.1 + 0.7j) == approx(0.1)
    assert boundary_distance(HALFSTRIP, 2.0 + 0.8j) == approx(0.2)


@pytest.mark.parametrize("d", [HALFPLANE, DISK])
def test_koebe_bounds_random(d):
    rng = np.random.default_rng(11)
    pts = sample_interior(d, 500, rng)
    report = check_koebe_bounds(d, pts)
    assert report.ok
    assert report.min_product >= 0.25 - 1e-9
    assert report.max_product <= 1.0 + 1e-9


def test_koebe_halfplane_product_is_exactly_half():
    rng = np.random.default_rng(5)
    pts = sample_interior(HALFPLANE, 64, rng)
    prod = hyperbolic_density(HALFPLANE, pts) * boundary_distance(HALFPLANE, pts)
    assert np.allclose(prod, 0.5, atol=1e-14)


def test_koebe_disk_examples():
    # at the origin the product attains the Koebe upper bound
    assert hyperbolic_density(DISK, 0j) * boundary_distance(DISK, 0j) == approx(1.0)
    z = 0.9 + 0j
    got = hyperbolic_density(DISK, z) * boundary_distance(DISK, z)
    assert got == approx(0.1 / 0.19, rel=1e-12)


def test_koebe_rejects_exterior_disk():
    with raises(DomainError):
        check_koebe_bounds(EXTERIOR_DISK, np.array([2.0 + 0j]))


def test_sigma_maps_reference_points():
    assert mobius_sigma(1j) == approx(0.0)
    assert mobius_sigma(0.0) == approx(-1.0)
    assert is_infinity(mobius_sigma(-1j))
    assert mobius_sigma(INFINITY) == approx(1.0)


def test_sigma_round_trip_on_sphere():
    rng = np.random.default_rng(17)
    zs = rng.normal(size=100) + 1j * rng.normal(size=100)
    for z in zs:
        back = mobius_sigma_inverse(mobius_sigma(complex(z)))
        assert sphere_distance(back, complex(z)) < 1e-12


def test_sigma_conformal_density_transport():
    rng = np.random.default_rng(23)
    pts = sample_interior(HALFPLANE, 50, rng)
    sig = Mobius(1, -1j, 1, 1j)
    for zeta in pts:
        z = complex(zeta)
        w = sig(z)
        lhs = hyperbolic_density(HALFPLANE, z)
        rhs = hyperbolic_density(DISK, w) * abs(sig.derivative(z))
        assert lhs == approx(rhs, rel=1e-8)


def _power_quasidisk(alpha=0.9):
    # S_{z^alpha} = (1-alpha^2)/(2z^2) has weighted sup norm 2|1-alpha^2|
    # on the half-plane, so alpha = 0.9 gives exactly 0.38 < 1/2.  Keeping
    # alpha < 1 also keeps the sector inside the principal inversion branch.
    return make_quasidisk(power_map(alpha), schwarzian_bound=0.38)


def test_quasidisk_density_is_pullback():
    d = _power_quasidisk()
    g = d.map
    rng = np.random.default_rng(29)
    for zeta in sample_interior(HALFPLANE, 30, rng):
        z = complex(zeta)
        w = g.evaluator(z)
        lam = hyperbolic_density(d, w)
        assert lam == approx(
            hyperbolic_density(HALFPLANE, z) / abs(g.derivative(z)), rel=1e-9
        )


def test_quasidisk_koebe_products():
    d = _power_quasidisk()
    rng = np.random.default_rng(31)
    pts = sample_interior(d, 40, rng)
    report = check_koebe_bounds(d, pts, tolerance=1e-6)
    assert report.ok, report


def test_quasidisk_model_validation():
    with raises(ArgumentError):
        DomainModel("quasidisk")
    with raises(ArgumentError):
        make_quasidisk(power_map(1.3), schwarzian_bound=0.7)


def test_contains_vectorized():
    z = np.array([1j, -1j, 2 + 0.001j])
    got = contains(HALFPLANE, z)
    assert got.tolist() == [True, False, True]
    assert contains(DISK, 0.999 + 0j)
    assert not contains(DISK, 1.0 + 0j)


# --- half-strip corner map -------------------------------------------------


def test_halfstrip_map_finite_far_value():
    g = halfstrip_map(-2.0, -1.0, 0.0)
    # the two finite corners go to the prescribed boundary points
    imgs = sorted([complex(g.evaluator(0.0 + 0j)).real, complex(g.evaluator(1j)).real])
    assert imgs == approx([-2.0, -1.0], abs=1e-12)
    # far end of the strip approaches the third prescribed point
    far = complex(g.evaluator(40.0 + 0.37j))
    assert abs(far - 0.0) < 1e-10


def test_halfstrip_map_infinite_far_value_grows():
    g = halfstrip_map(-1.0, 1.0, INFINITY)
    assert abs(complex(g.evaluator(10.0 + 0.5j))) > 1e3
    imgs = sorted([complex(g.evaluator(0j)).real, complex(g.evaluator(1j)).real])
    assert imgs == approx([-1.0, 1.0], abs=1e-12)


def test_halfstrip_map_sends_interior_to_halfplane_and_edges_to_reals():
    g = halfstrip_map(-2.0, -1.0, 0.0)
    rng = np.random.default_rng(37)
    zeta = sample_interior(HALFSTRIP, 60, rng)
    w = g.evaluator(zeta)
    assert np.all(w.imag > 0)
    # both long edges land on the real axis
    xi = np.linspace(0.05, 12.0, 50)
    for edge in (xi + 0j, xi + 1j):
        img = g.evaluator(edge.astype(complex))
        assert np.max(np.abs(img.imag)) < 1e-9


def test_halfstrip_map_is_conformal_inside():
    g = halfstrip_map(-1.0, 1.0, INFINITY)
    rng = np.random.default_rng(41)
    pts = sample_interior(HALFSTRIP, 20, rng)
    assert check_conformal(g, pts)


def test_halfstrip_map_rejects_coincident_targets():
    with raises(ArgumentError):
        halfstrip_map(1.0, 1.0, 0.0)


# --- analytic-map plumbing used by the domain models ------------------------


def test_chain_from_config_matches_spec_shape():
    cfg = [
        {"kind": "mobius", "a": [1, 0], "b": [0, 0], "c": [0, 0], "d": [1, 0]},
        {"kind": "power", "alpha": 1.2},
    ]
    g = chain_from_config(cfg)
    z = 1.0 + 2.0j
    assert complex(g.evaluator(z)) == approx(z**1.2)
    rng = np.random.default_rng(43)
    assert check_conformal(g, sample_interior(HALFPLANE, 15, rng))


def test_mobius_map_derivatives_are_exact():
    m = Mobius(2.0, 1.0, 1.0, 3.0)
    am = mobius_map(m)
    z = 0.7 + 0.4j
    det = 2.0 * 3.0 - 1.0 * 1.0
    assert complex(am.derivative(z)) == approx(det / (z + 3.0) ** 2)
    assert complex(am.second_derivative(z)) == approx(-2 * det / (z + 3.0) ** 3)


def test_power_map_inverse_round_trip():
    pm = power_map(1.3)
    z = 0.5 + 1.1j
    assert complex(pm.invert(pm.evaluator(z))) == approx(z, rel=1e-13)
