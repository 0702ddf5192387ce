"""Schwarzian derivative machinery.

schwarzian_of computes S_w = w'''/w' - (3/2)(w''/w')^2 for a packaged
analytic map.  solve_schwarzian integrates the associated linear equation
u'' + (1/2) phi u = 0 along pole-avoiding paths and reassembles the
developing map w = u1/u2, optionally renormalized by the Moebius map that
fixes the boundary points 0, 1 and infinity.  compose_schwarzian applies
the change-of-variable rule, and ahlfors_weill_gate checks the sup-norm
smallness condition under which w admits a quasiconformal extension built
from a harmonic Beltrami coefficient.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .cplane import INFINITY, Mobius, is_infinity
from .domains import DISK_KIND, DomainModel, HALFPLANE_KIND
from .errors import ArgumentError, CriticalPointError, NumericError, PathError
from .maps import AnalyticMap
from .rational import bp_norm

__all__ = [
    "SchwarzianSolution",
    "schwarzian_of",
    "solve_schwarzian",
    "compose_schwarzian",
    "ahlfors_weill_gate",
]

POLE_CLEARANCE = 1e-3


def schwarzian_of(w: AnalyticMap, z, h_scale: float = 1e-4):
    """S_w at z (scalar or array), from derivatives carried by the map.

    When the map has no third derivative, w''' is taken from Richardson
    finite differences of second-derivative values with step
    h = h_scale * (1 + |z|); that keeps round-trip tests honest for maps
    assembled from ODE solutions.
    """
    zz = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        w1 = np.asarray(w.derivative(zz), dtype=complex)
    if np.any(np.abs(w1) == 0.0) or not np.all(np.isfinite(w1)):
        raise CriticalPointError("Schwarzian requested where the derivative vanishes")
    w2 = np.asarray(w.second_derivative(zz), dtype=complex)
    if w.third_derivative is not None:
        w3 = np.asarray(w.third_derivative(zz), dtype=complex)
    else:
        h = h_scale * (1.0 + np.abs(zz))

        def central(step):
            up = np.asarray(w.second_derivative(zz + step), dtype=complex)
            dn = np.asarray(w.second_derivative(zz - step), dtype=complex)
            return (up - dn) / (2.0 * step)

        w3 = (4.0 * central(h / 2.0) - central(h)) / 3.0
    s = w3 / w1 - 1.5 * (w2 / w1) ** 2
    return s if s.ndim else complex(s)


def compose_schwarzian(phi, g: AnalyticMap):
    """The Schwarzian of a composition: zeta -> phi(g(zeta)) g'(zeta)^2 + S_g(zeta)."""

    def composed(zeta):
        zz = np.asarray(zeta, dtype=complex)
        dg = np.asarray(g.derivative(zz), dtype=complex)
        out = np.asarray(phi(g.evaluator(zz)), dtype=complex) * dg**2
        out = out + schwarzian_of(g, zz)
        return out if out.ndim else complex(out)

    return composed


def ahlfors_weill_gate(phi, d: DomainModel) -> bool:
    """True iff the weighted sup norm of phi on d is below the 1/2 threshold."""
    if d.kind not in (HALFPLANE_KIND, DISK_KIND):
        raise ArgumentError("the extension gate is defined on the half-plane or disk")
    return bool(bp_norm(phi, d, 2).value < 0.5)


# ---------------------------------------------------------------------------
# Dormand-Prince 4(5) for the complex linear system Y = (u1, u1', u2, u2')

_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_DP_ERR = tuple(b5 - b4 for b5, b4 in zip(_DP_B5, _DP_B4))

_RENORM_EVERY = 100


class _PathSolver:
    """Integrates the solution pair from a base point, caching endpoints.

    The equation is linear, so the pair can be renormalized to Wronskian 1
    at any moment without changing the projective ratio; this is done every
    _RENORM_EVERY accepted steps and the worst drift seen beforehand is kept
    as a diagnostic.
    """

    def __init__(self, phi, base: complex, poles, rtol=1e-10, atol=1e-10):
        self.phi = phi
        self.base = complex(base)
        self.poles = tuple(complex(a) for a in poles)
        self.rtol = rtol
        self.atol = atol
        self.wronskian_drift = 0.0
        # u1(base) = 0, u1'(base) = 1, u2(base) = 1, u2'(base) = 0
        self._cache: dict[complex, np.ndarray] = {
            self.base: np.array([0.0, 1.0, 1.0, 0.0], dtype=complex)
        }
        self._lock = threading.Lock()

    # -- path geometry ------------------------------------------------------

    def _segment_clearance(self, z0: complex, z1: complex) -> float:
        if not self.poles:
            return np.inf
        seg = z1 - z0
        length2 = abs(seg) ** 2
        worst = np.inf
        for a in self.poles:
            if length2 == 0.0:
                worst = min(worst, abs(z0 - a))
                continue
            t = ((a - z0) / seg).real  # projection parameter onto the segment
            t = min(1.0, max(0.0, t))
            worst = min(worst, abs(z0 + t * seg - a))
        return worst

    def _plan(self, target: complex) -> list[complex]:
        """Vertical-horizontal-vertical waypoints from base to target,
        hub-displaced sideways if a corner comes too close to a pole."""
        hub = max(1.0, self.base.imag, target.imag)
        for shift in (0.0, 0.05, -0.05, 0.25, -0.25, 1.0, -1.0):
            pts = [
                self.base,
                complex(self.base.real + shift, hub),
                complex(target.real + shift, hub),
                complex(target.real + shift, target.imag),
                target,
            ]
            path = [pts[0]]
            for q in pts[1:]:
                if q != path[-1]:
                    path.append(q)
            if all(
                self._segment_clearance(p, q) >= POLE_CLEARANCE
                for p, q in zip(path, path[1:])
            ):
                return path
        raise PathError(
            f"no integration path from {self.base} to {target} stays "
            f"{POLE_CLEARANCE:g} away from the poles"
        )

    # -- the integrator -----------------------------------------------------

    def _rhs(self, z: complex, y: np.ndarray) -> np.ndarray:
        p = complex(np.asarray(self.phi(z), dtype=complex).reshape(()))
        return np.array([y[1], -0.5 * p * y[0], y[3], -0.5 * p * y[2]], dtype=complex)

    def _renormalize(self, y: np.ndarray) -> np.ndarray:
        wr = y[1] * y[2] - y[0] * y[3]
        self.wronskian_drift = max(self.wronskian_drift, abs(wr - 1.0))
        y[2] /= wr
        y[3] /= wr
        return y

    def _integrate_segment(self, z0: complex, z1: complex, y: np.ndarray) -> np.ndarray:
        """One straight leg z0 -> z1, the leg factor folded into the stages."""
        leg = z1 - z0
        if leg == 0.0:
            return y
        t = 0.0
        dt = 0.05
        prev_err = 1.0
        k = [np.zeros(4, dtype=complex)] * 7
        steps = 0
        accepted = 0
        while t < 1.0:
            dt = min(dt, 1.0 - t)
            k[0] = leg * self._rhs(z0 + t * leg, y)
            for i in range(1, 7):
                yi = y + dt * sum(a * k[j] for j, a in enumerate(_DP_A[i]))
                k[i] = leg * self._rhs(z0 + (t + _DP_C[i] * dt) * leg, yi)
            err_vec = dt * sum(e * k[j] for j, e in enumerate(_DP_ERR))
            y5 = y + dt * sum(b * k[j] for j, b in enumerate(_DP_B5))
            scale = self.atol + self.rtol * np.maximum(np.abs(y), np.abs(y5))
            err = float(np.max(np.abs(err_vec) / scale))
            if err <= 1.0:
                t += dt
                y = y5
                accepted += 1
                if accepted % _RENORM_EVERY == 0:
                    y = self._renormalize(y.copy())
                # PI controller: react to the current error, damp with the last
                fac = 0.9 * (err + 1e-16) ** -0.14 * (prev_err + 1e-16) ** 0.08
                prev_err = err
            else:
                fac = max(0.2, 0.9 * (err + 1e-16) ** -0.2)
            dt *= min(5.0, max(0.2, fac))
            steps += 1
            if steps > 200000:
                raise NumericError(
                    f"step budget exhausted integrating toward {z1}",
                    {"t": t, "dt": dt},
                )
        return y

    def state(self, z) -> np.ndarray:
        """(u1, u1', u2, u2') at z, integrating from the base point."""
        z = complex(z)
        with self._lock:
            hit = self._cache.get(z)
            if hit is not None:
                return hit.copy()
            path = self._plan(z)
            y = self._cache[self.base].copy()
            for p, q in zip(path, path[1:]):
                y = self._integrate_segment(p, q, y)
            y = self._renormalize(y)
            self._cache[z] = y.copy()
            return y


@dataclass
class SchwarzianSolution:
    """A developing map for S_w = phi, with its underlying solution pair."""

    phi: object
    domain: DomainModel
    base: complex
    normalizer: Mobius | None
    normalization: tuple | None
    _solver: _PathSolver = field(repr=False)

    @property
    def wronskian_drift(self) -> float:
        return self._solver.wronskian_drift

    def u1(self, z):
        return complex(self._solver.state(z)[0])

    def u2(self, z):
        return complex(self._solver.state(z)[2])

    def w(self, z):
        """Value of the normalized developing map; INFINITY at poles of w."""
        st = self._solver.state(z)
        m = self.normalizer or Mobius.identity()
        if st[2] == 0.0:
            return m(INFINITY)
        return m(st[0] / st[2])

    def _raw_parts(self, z):
        st = self._solver.state(z)
        if st[2] == 0.0:
            raise PoleError(f"the developing map has a pole at {z}")
        ratio = st[0] / st[2]
        d1 = 1.0 / st[2] ** 2  # Wronskian is kept at 1
        d2 = -2.0 * st[3] / st[2] ** 3
        return ratio, d1, d2

    def as_map(self) -> AnalyticMap:
        """Package w with exact first and second derivatives.

        The third derivative is deliberately left out: recomputing it from
        the differential equation would make any Schwarzian round-trip test
        an algebraic identity, so consumers fall back to finite differences
        of second-derivative values.
        """
        m = self.normalizer or Mobius.identity()
        a, b, c, d = complex(m.a), complex(m.b), complex(m.c), complex(m.d)
        det = a * d - b * c

        def _vec(fn, z):
            zz = np.asarray(z, dtype=complex)
            out = np.array([fn(p) for p in np.atleast_1d(zz).ravel()], dtype=complex)
            return out.reshape(np.atleast_1d(zz).shape) if zz.ndim else complex(out[0])

        def value(z):
            ratio, _, _ = self._raw_parts(z)
            return (a * ratio + b) / (c * ratio + d)

        def deriv(z):
            ratio, d1, _ = self._raw_parts(z)
            return det / (c * ratio + d) ** 2 * d1

        def second(z):
            ratio, d1, d2 = self._raw_parts(z)
            den = c * ratio + d
            return det * (d2 / den**2 - 2.0 * c * d1**2 / den**3)

        return AnalyticMap(
            evaluator=lambda z: _vec(value, z),
            derivative=lambda z: _vec(deriv, z),
            second_derivative=lambda z: _vec(second, z),
            domain_tag=self.domain.kind,
            codomain_tag="sphere",
            label="developing-map",
        )

    def csv_rows(self, points) -> list[tuple[str, str, str, str]]:
        rows = []
        for z in points:
            z = complex(z)
            wv = self.w(z)
            if is_infinity(wv):
                re, im = "inf", "inf"
            else:
                re, im = format(wv.real, ".17g"), format(wv.imag, ".17g")
            rows.append((format(z.real, ".17g"), format(z.imag, ".17g"), re, im))
        return rows


def _aitken_stage(seq):
    out = []
    for a, b, c in zip(seq, seq[1:], seq[2:]):
        d = (c - b) - (b - a)
        out.append(c if abs(d) < 1e-300 else c - (c - b) ** 2 / d)
    return out


def _sequence_limit(values):
    """Limit of a sequence with geometric corrections of unknown ratio.

    Iterated Aitken acceleration strips one geometric mode per stage, which
    covers the non-integer indicial exponents arising when a probe ray ends
    at a pole.  Returns (limit, converged): the last two stage estimates
    must agree to 1e-6 (relative to max(1, |limit|)).
    """
    stages = [[complex(v) for v in values]]
    while len(stages[-1]) >= 3:
        stages.append(_aitken_stage(stages[-1]))
    est = stages[-1][-1]
    corr = abs(est - stages[-2][-1]) if len(stages) > 1 else np.inf
    return est, corr <= 1e-6 * max(1.0, abs(est))


def _probe_limit(solution_w, foot, heights):
    """Boundary value of w at a real foot point, by vertical-ray extrapolation."""
    vals = [solution_w(complex(foot, h)) for h in heights]
    if any(is_infinity(v) for v in vals):
        return INFINITY, True
    return _sequence_limit(vals)


def _probe_limit_far(solution_w, heights):
    """Value of w at the upper end of the imaginary axis (possibly INFINITY)."""
    vals = [solution_w(complex(0.0, h)) for h in heights]
    if any(is_infinity(v) for v in vals):
        return INFINITY, True
    mags = [abs(v) for v in vals]
    growing = all(b > 1.4 * a for a, b in zip(mags, mags[1:]))
    if growing and mags[-1] > 10.0 * (1.0 + mags[0]):
        return INFINITY, True
    return _sequence_limit(vals)


# feet stop at 2^-9: descending further would breach the pole clearance
_FOOT_HEIGHTS = tuple(2.0**-k for k in range(4, 10))
_FAR_HEIGHTS = tuple(2.0**k for k in range(4, 13))


def solve_schwarzian(
    phi,
    d: DomainModel,
    base: complex,
    poles=(),
    normalize: bool = True,
) -> SchwarzianSolution:
    """Solve S_w = phi on d from an interior base point.

    Any poles of phi (on the boundary) must be passed in so integration
    paths keep their distance.  With normalize=True on the half-plane the
    returned w is post-composed with the Moebius map fixing 0, 1 and
    infinity, provided the three boundary probes converge; fields without
    boundary limits there (e.g. nonzero constants) fall back to the raw
    ratio, recorded as normalization=None.
    """
    if getattr(phi, "poles", None) is not None and not poles:
        poles = tuple(phi.poles)
    base = complex(base)
    if d.kind == HALFPLANE_KIND:
        if base.imag <= 0:
            raise ArgumentError("base point must lie in the open upper half-plane")
    elif d.kind == DISK_KIND:
        if abs(base) >= 1:
            raise ArgumentError("base point must lie in the open unit disk")
        if normalize:
            raise ArgumentError(
                "the 0/1/infinity normalization lives on the half-plane chart"
            )
    solver = _PathSolver(phi, base, poles)
    sol = SchwarzianSolution(
        phi=phi, domain=d, base=base, normalizer=None, normalization=None, _solver=solver
    )
    if not normalize or d.kind != HALFPLANE_KIND:
        return sol

    l0, ok0 = _probe_limit(sol.w, 0.0, _FOOT_HEIGHTS)
    l1, ok1 = _probe_limit(sol.w, 1.0, _FOOT_HEIGHTS)
    linf, okf = _probe_limit_far(sol.w, _FAR_HEIGHTS)
    distinct = (
        not _sphere_same(l0, l1) and not _sphere_same(l1, linf) and not _sphere_same(l0, linf)
    )
    if ok0 and ok1 and okf and distinct:
        sol.normalizer = Mobius.from_triple((l0, l1, linf), (0.0, 1.0, INFINITY))
        sol.normalization = ((l0, 0.0), (l1, 1.0), (linf, INFINITY))
    return sol


def _sphere_same(p, q) -> bool:
    from .cplane import sphere_distance

    return sphere_distance(p, q) < 1e-9
