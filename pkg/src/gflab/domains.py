"""Canonical plane domains, hyperbolic densities, and boundary geometry.

All densities use the Gaussian curvature -4 normalization, so the upper
half-plane carries lambda(z) = 1/(2 Im z).  A quasidisk is represented by an
explicit conformal map from the half-plane and inherits its density by
pullback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cplane import INFINITY, Mobius, SIGMA, is_infinity
from .errors import ArgumentError, DomainError, NumericError
from .maps import AnalyticMap, compose_maps, cosh_pi_map, mobius_map

HALFPLANE_KIND = "halfplane"
LOWER_HALFPLANE_KIND = "lower_halfplane"
DISK_KIND = "disk"
EXTERIOR_DISK_KIND = "exterior_disk"
HALFSTRIP_KIND = "halfstrip"
QUASIDISK_KIND = "quasidisk"

_CANONICAL_KINDS = (
    HALFPLANE_KIND,
    LOWER_HALFPLANE_KIND,
    DISK_KIND,
    EXTERIOR_DISK_KIND,
    HALFSTRIP_KIND,
)


@dataclass(frozen=True)
class DomainModel:
    """One of the canonical domains, or a quasidisk carried by a conformal map."""

    kind: str
    map: AnalyticMap | None = None
    schwarzian_bound: float | None = None

    def __post_init__(self):
        if self.kind in _CANONICAL_KINDS:
            return
        if self.kind != QUASIDISK_KIND:
            raise ArgumentError(f"unknown domain kind {self.kind!r}")
        if self.map is None:
            raise ArgumentError("quasidisk domains need an explicit conformal map")
        if self.schwarzian_bound is None or not (self.schwarzian_bound < 0.5):
            raise ArgumentError(
                "quasidisk map needs a verified Schwarzian sup-norm below 1/2, "
                f"got {self.schwarzian_bound!r}"
            )


HALFPLANE = DomainModel(HALFPLANE_KIND)
LOWER_HALFPLANE = DomainModel(LOWER_HALFPLANE_KIND)
DISK = DomainModel(DISK_KIND)
EXTERIOR_DISK = DomainModel(EXTERIOR_DISK_KIND)
HALFSTRIP = DomainModel(HALFSTRIP_KIND)


def make_quasidisk(g: AnalyticMap, schwarzian_bound: float) -> DomainModel:
    return DomainModel(QUASIDISK_KIND, map=g, schwarzian_bound=float(schwarzian_bound))


def _as_array(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def contains(d: DomainModel, z, margin: float = 0.0):
    """Strict interior test (vectorized); ``margin`` demands clearance."""
    arr, scalar = _as_array(z)
    if d.kind == HALFPLANE_KIND:
        ok = arr.imag > margin
    elif d.kind == LOWER_HALFPLANE_KIND:
        ok = arr.imag < -margin
    elif d.kind == DISK_KIND:
        ok = np.abs(arr) < 1.0 - margin
    elif d.kind == EXTERIOR_DISK_KIND:
        ok = np.abs(arr) > 1.0 + margin
    elif d.kind == HALFSTRIP_KIND:
        ok = (arr.real > margin) & (arr.imag > margin) & (arr.imag < 1.0 - margin)
    else:
        zeta = d.map.invert(arr)
        ok = zeta.imag > margin
    return bool(ok) if scalar else ok


def _require_inside(d: DomainModel, arr):
    inside = contains(d, arr)
    if not np.all(inside):
        bad = arr if arr.ndim == 0 else arr[~np.asarray(inside)][0]
        raise DomainError(f"point {complex(bad)} is not strictly inside {d.kind}")


def hyperbolic_density(d: DomainModel, z):
    """Density of the curvature -4 hyperbolic metric of ``d`` at interior ``z``."""
    if is_infinity(z):
        raise DomainError("density is not defined at the point at infinity")
    arr, scalar = _as_array(z)
    _require_inside(d, arr)
    if d.kind == HALFPLANE_KIND:
        lam = 1.0 / (2.0 * arr.imag)
    elif d.kind == LOWER_HALFPLANE_KIND:
        lam = 1.0 / (2.0 * np.abs(arr.imag))
    elif d.kind == DISK_KIND:
        lam = 1.0 / (1.0 - np.abs(arr) ** 2)
    elif d.kind == EXTERIOR_DISK_KIND:
        lam = 1.0 / (np.abs(arr) ** 2 - 1.0)
    elif d.kind == HALFSTRIP_KIND:
        xi, eta = arr.real, arr.imag
        s_eta = np.sin(np.pi * eta)
        with np.errstate(over="ignore"):
            ratio = s_eta / np.sinh(np.pi * xi)
        lam = np.pi * np.hypot(1.0, ratio) / (2.0 * s_eta)
    else:
        zeta = d.map.invert(arr)
        lam = 1.0 / (2.0 * zeta.imag) / np.abs(d.map.derivative(zeta))
    return float(lam) if scalar else lam


def _quasidisk_boundary_distance(d: DomainModel, z: complex) -> float:
    """Min |z - g(x)| over the boundary parametrized by x = tan(theta/2)."""
    thetas = np.linspace(-np.pi, np.pi, 4098)[1:-1]
    with np.errstate(over="ignore", invalid="ignore"):
        bdry = d.map.evaluator(np.tan(thetas / 2.0).astype(complex))
        dist = np.abs(bdry - z)
    dist = np.where(np.isfinite(dist), dist, np.inf)
    k = int(np.argmin(dist))
    lo, hi = thetas[max(k - 1, 0)], thetas[min(k + 1, len(thetas) - 1)]

    def objective(theta):
        w = complex(d.map.evaluator(complex(np.tan(theta / 2.0))))
        return abs(w - z)

    # golden-section refinement on the bracketing parameter interval
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c_pt = b - invphi * (b - a)
    d_pt = a + invphi * (b - a)
    fc, fd = objective(c_pt), objective(d_pt)
    for _ in range(80):
        if fc < fd:
            b, d_pt, fd = d_pt, c_pt, fc
            c_pt = b - invphi * (b - a)
            fc = objective(c_pt)
        else:
            a, c_pt, fc = c_pt, d_pt, fd
            d_pt = a + invphi * (b - a)
            fd = objective(d_pt)
    best = min(fc, fd, float(dist[k]))
    if not np.isfinite(best):
        raise NumericError(
            "boundary-distance minimization failed",
            diagnostics={"domain": d.kind, "point": z},
        )
    return best


def boundary_distance(d: DomainModel, z):
    """Euclidean distance from interior ``z`` to the boundary of ``d``."""
    arr, scalar = _as_array(z)
    _require_inside(d, arr)
    if d.kind == HALFPLANE_KIND:
        delta = arr.imag
    elif d.kind == LOWER_HALFPLANE_KIND:
        delta = -arr.imag
    elif d.kind == DISK_KIND:
        delta = 1.0 - np.abs(arr)
    elif d.kind == EXTERIOR_DISK_KIND:
        delta = np.abs(arr) - 1.0
    elif d.kind == HALFSTRIP_KIND:
        delta = np.minimum(arr.real, np.minimum(arr.imag, 1.0 - arr.imag))
    else:
        if scalar:
            return _quasidisk_boundary_distance(d, complex(arr))
        return np.array([_quasidisk_boundary_distance(d, complex(w)) for w in arr.ravel()]).reshape(arr.shape)
    return float(delta) if scalar else delta


@dataclass(frozen=True)
class KoebeReport:
    ok: bool
    min_product: float
    max_product: float
    witness: complex | None = None
    tolerance: float = 1e-9


def check_koebe_bounds(d: DomainModel, samples, tolerance: float = 1e-9) -> KoebeReport:
    """Check 1/4 <= lambda*delta <= 1 at each sample of a simply connected domain."""
    if d.kind == EXTERIOR_DISK_KIND:
        raise DomainError("the exterior disk contains infinity; distance bounds do not apply")
    arr = np.atleast_1d(np.asarray(samples, dtype=complex))
    lam = hyperbolic_density(d, arr)
    delta = boundary_distance(d, arr)
    product = np.asarray(lam * delta, dtype=float)
    lo_bad = product < 0.25 - tolerance
    hi_bad = product > 1.0 + tolerance
    bad = lo_bad | hi_bad
    witness = complex(arr[bad][0]) if np.any(bad) else None
    return KoebeReport(
        ok=not np.any(bad),
        min_product=float(np.min(product)),
        max_product=float(np.max(product)),
        witness=witness,
        tolerance=tolerance,
    )


def mobius_sigma(z):
    """sigma(z) = (z - i)/(z + i): half-plane to disk, i -> 0, infinity -> 1."""
    return SIGMA(z)


def mobius_sigma_inverse(w):
    return SIGMA.inverse()(w)


def sigma_analytic_map() -> AnalyticMap:
    return mobius_map(SIGMA, HALFPLANE_KIND, DISK_KIND)


def halfstrip_map(x_prime: float, x_dblprime: float, a0) -> AnalyticMap:
    """Conformal map of the half-strip onto the upper half-plane.

    The two finite corners of the strip go to ``x_prime`` and ``x_dblprime``
    and the far end of the strip goes to ``a0`` (a real number, or the
    INFINITY marker).  The corner assignment is chosen so the composed Moebius
    factor preserves the upper half-plane; the label records the choice.
    """
    finite_params = [x_prime, x_dblprime] + ([] if is_infinity(a0) else [a0])
    vals = [float(v) for v in finite_params]
    if len(set(vals)) != len(vals):
        raise ArgumentError(f"halfstrip_map parameters must be distinct, got {vals}")

    # cosh(pi . ) sends corner 0 -> 1, corner i -> -1, far end -> infinity
    sources = (1.0, -1.0, INFINITY)
    for targets in ((x_prime, x_dblprime, a0), (x_dblprime, x_prime, a0)):
        m = Mobius.from_triple(sources, targets)
        det = m.det
        if abs(det.imag) > 1e-12 * abs(det):
            raise NumericError("halfstrip Moebius factor is not real", {"det": det})
        if det.real > 0:
            g = compose_maps(mobius_map(m), cosh_pi_map())
            label = f"halfstrip(corner0->{targets[0]}, corner_i->{targets[1]}, far->{a0})"
            return AnalyticMap(
                g.evaluator,
                g.derivative,
                g.second_derivative,
                HALFSTRIP_KIND,
                HALFPLANE_KIND,
                g.third_derivative,
                g.inverse,
                label,
            )
    raise NumericError("no orientation-preserving corner assignment found", {})


def sample_interior(d: DomainModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Random interior points, reasonably spread over the domain's geometry."""
    if d.kind == HALFPLANE_KIND:
        x = 3.0 * rng.standard_normal(n)
        y = np.exp(rng.uniform(np.log(1e-3), np.log(30.0), n))
        return x + 1j * y
    if d.kind == LOWER_HALFPLANE_KIND:
        return np.conj(sample_interior(HALFPLANE, n, rng))
    if d.kind == DISK_KIND:
        r = np.sqrt(rng.uniform(0.0, 1.0, n)) * (1.0 - 1e-12)
        t = rng.uniform(-np.pi, np.pi, n)
        return r * np.exp(1j * t)
    if d.kind == EXTERIOR_DISK_KIND:
        return 1.0 / sample_interior(DISK, n, rng)
    if d.kind == HALFSTRIP_KIND:
        xi = rng.exponential(1.0, n) + 1e-9
        eta = rng.uniform(1e-9, 1.0 - 1e-9, n)
        return xi + 1j * eta
    zeta = sample_interior(HALFPLANE, n, rng)
    return d.map.evaluator(zeta)
