"""Riemann-sphere plumbing: the point at infinity and Moebius transforms.

Finite points are plain ``complex`` numbers; the sphere point at infinity
is the module-level singleton ``INFINITY``.  Everything downstream accepts
either and treats overflow-prone evaluations through the 1/z chart.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from .errors import ArgumentError


class _Infinity:
    """Singleton marker for the sphere point at infinity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("gflab-point-at-infinity")


INFINITY = _Infinity()

#: evaluations with modulus above this are folded onto the infinity marker
HUGE = 1e300


def is_infinity(z) -> bool:
    return z is INFINITY


def as_sphere_point(z):
    """Normalize a value to either a finite complex or INFINITY."""
    if z is INFINITY:
        return z
    z = complex(z)
    if not (cmath.isfinite(z)):
        return INFINITY
    if abs(z) > HUGE:
        return INFINITY
    return z


def sphere_distance(z, w) -> float:
    """Chordal distance on the sphere; 0 iff the points coincide."""
    zi, wi = is_infinity(z), is_infinity(w)
    if zi and wi:
        return 0.0
    if zi or wi:
        finite = w if zi else z
        return 2.0 / (1.0 + abs(finite) ** 2) ** 0.5
    z, w = complex(z), complex(w)
    num = 2.0 * abs(z - w)
    den = ((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2)) ** 0.5
    return num / den


@dataclass(frozen=True)
class Mobius:
    """The fractional linear map z -> (a z + b)/(c z + d), ad - bc != 0."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if abs(self.det) == 0.0:
            raise ArgumentError("degenerate Moebius coefficients (ad - bc = 0)")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __call__(self, z):
        if is_infinity(z):
            if self.c == 0:
                return INFINITY
            return as_sphere_point(self.a / self.c)
        z = complex(z)
        den = self.c * z + self.d
        if den == 0:
            return INFINITY
        return as_sphere_point((self.a * z + self.b) / den)

    def derivative(self, z) -> complex:
        """d/dz of the map at a finite non-pole point."""
        z = complex(z)
        den = self.c * z + self.d
        if den == 0:
            raise ArgumentError("derivative requested at the pole of the Moebius map")
        return self.det / den**2

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "Mobius") -> "Mobius":
        """self after other: (self.compose(other))(z) = self(other(z))."""
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def normalized(self) -> "Mobius":
        """Scale coefficients so det = 1 (unimodular representative)."""
        s = cmath.sqrt(self.det)
        return Mobius(self.a / s, self.b / s, self.c / s, self.d / s)

    @staticmethod
    def identity() -> "Mobius":
        return Mobius(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def from_triple(sources, targets) -> "Mobius":
        """The unique Moebius sending three distinct sphere points to three others."""
        return Mobius._to_zero_one_inf(targets).inverse().compose(
            Mobius._to_zero_one_inf(sources)
        )

    @staticmethod
    def _to_zero_one_inf(points) -> "Mobius":
        p, q, r = points
        for s, t in ((p, q), (q, r), (p, r)):
            if sphere_distance(s, t) == 0.0:
                raise ArgumentError("Moebius interpolation points must be distinct")
        # cross-ratio map (z, p, q, r) with p -> 0, q -> 1, r -> infinity
        if is_infinity(p):
            return Mobius(0.0, q - r, 1.0, -r)
        if is_infinity(q):
            return Mobius(1.0, -p, 1.0, -r)
        if is_infinity(r):
            return Mobius(1.0, -p, 0.0, q - p)
        return Mobius(q - r, -p * (q - r), q - p, -r * (q - p))


#: sigma(z) = (z - i)/(z + i), the standard half-plane -> disk map
SIGMA = Mobius(1.0, -1j, 1.0, 1j)

#: i(zeta + 1)/(zeta - 1), carrying the exterior disk onto the upper half-plane
EXT_TO_HALFPLANE = Mobius(1j, 1j, 1.0, -1.0)
