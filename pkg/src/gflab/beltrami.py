"""Beltrami coefficients: harmonic fields, pullbacks, pairings with
quadratic differentials, degenerating-sequence limits, and a
finite-certificate lower bound for the extremality supremum.

Conventions.  Harmonic coefficients live on the lower half-plane and are
built from a field on the upper one by mu(z) = -2 y^2 phi(conj z).  The
pairing <mu, psi> integrates mu*psi over the stated domain.  To move a
lower-half-plane field onto the upper half-plane (where the half-strip
chart lands) use reflect_beltrami, which is an isometry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cplane import INFINITY, is_infinity
from .domains import (
    HALFPLANE,
    HALFPLANE_KIND,
    HALFSTRIP,
    HALFSTRIP_KIND,
    LOWER_HALFPLANE,
    LOWER_HALFPLANE_KIND,
    DomainModel,
    halfstrip_map,
)
from .errors import (
    ArgumentError,
    CriticalPointError,
    DivergenceError,
    GateError,
    InvariantViolation,
)
from .maps import AnalyticMap
from .rational import NormResult, RationalQD, bp_norm
from .schwarzian import ahlfors_weill_gate

__all__ = [
    "BeltramiField",
    "DegeneratingElement",
    "DegenerationReport",
    "harmonic_beltrami",
    "dilatation",
    "reflect_beltrami",
    "pullback_beltrami",
    "pairing",
    "degenerating_sequence",
    "degen_pairing_limit",
    "hkrs_basis",
    "hkrs_extremality_estimate",
]

# unit-ball slack: normalized pipeline fields sit exactly on the sphere
_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class BeltramiField:
    evaluator: object
    domain: DomainModel
    sup_norm: NormResult

    def __post_init__(self):
        if not self.sup_norm.value < 1.0 + _UNIT_TOL:
            raise InvariantViolation(
                "Beltrami coefficient leaves the unit ball",
                witness={"sup_norm": self.sup_norm.value},
            )

    def __call__(self, z):
        return self.evaluator(z)


def _harmonic_eval(phi, z):
    """-2 y^2 phi(conj z), computed in ratio form for rational fields.

    The ratio form y/(conj z - a) stays O(1) however large |z| gets, so the
    evaluator survives the cosh-scale points the half-strip chart produces.
    The simple-pole part is rewritten through sum c'_j = 0 for the same
    reason; fields violating that cancellation fall back to the direct
    formula (they are not in B_2 anyway).
    """
    z = np.asarray(z, dtype=complex)
    y = z.imag
    zb = np.conj(z)
    if isinstance(phi, RationalQD):
        acc = np.zeros_like(z)
        for a, c, _ in phi.terms:
            q = y / (zb - a)
            acc = acc + c * q * q
        simple = phi.simple_coeffs
        if np.any(simple != 0.0):
            if abs(phi.simple_coeff_sum()) <= 1e-12 * np.sum(np.abs(simple)):
                q0 = y / zb
                for a, _, cp in phi.terms:
                    if cp != 0.0:
                        acc = acc + cp * a * q0 * (y / (zb - a))
            else:
                acc = acc + y * y * sum(
                    cp / (zb - a) for a, _, cp in phi.terms if cp != 0.0
                )
        return -2.0 * acc
    return -2.0 * y * y * np.asarray(phi(zb), dtype=complex)


def harmonic_beltrami(phi) -> BeltramiField:
    """The harmonic coefficient mu(z) = -2 y^2 phi(conj z) on the lower half-plane.

    Requires the Ahlfors-Weill gate (weighted sup norm of phi below 1/2);
    the curvature normalization makes ||mu||_inf exactly half that norm,
    which is asserted at the attaining point.
    """
    if not ahlfors_weill_gate(phi, HALFPLANE):
        raise GateError(
            "field fails the Ahlfors-Weill bound; harmonic coefficient undefined"
        )
    bpn = bp_norm(phi, HALFPLANE, 2)

    def mu(z):
        return _harmonic_eval(phi, z)

    value = 0.5 * bpn.value
    argmax = bpn.argmax if is_infinity(bpn.argmax) else np.conj(bpn.argmax)
    if not is_infinity(argmax):
        direct = abs(complex(mu(complex(argmax))))
        if abs(direct - value) > 1e-9 * max(value, 1e-300):
            raise InvariantViolation(
                "harmonic coefficient does not halve the weighted sup norm",
                witness={"direct": direct, "half_norm": value},
            )
    sup = NormResult(value, argmax, bpn.grid_level, bpn.converged)
    return BeltramiField(mu, LOWER_HALFPLANE, sup)


def dilatation(mu: BeltramiField) -> float:
    return mu.sup_norm.value


def reflect_beltrami(mu: BeltramiField) -> BeltramiField:
    """conj(mu(conj z)): isometry between fields on the two half-planes."""
    if mu.domain.kind == LOWER_HALFPLANE_KIND:
        target = HALFPLANE
    elif mu.domain.kind == HALFPLANE_KIND:
        target = LOWER_HALFPLANE
    else:
        raise ArgumentError(f"reflection is for half-planes, not {mu.domain.kind}")

    def ev(z):
        return np.conj(mu(np.conj(np.asarray(z, dtype=complex))))

    argmax = mu.sup_norm.argmax
    if not is_infinity(argmax):
        argmax = np.conj(argmax)
    sup = NormResult(mu.sup_norm.value, argmax, mu.sup_norm.grid_level, mu.sup_norm.converged)
    return BeltramiField(ev, target, sup)


def pullback_beltrami(
    mu: BeltramiField, g: AnalyticMap, domain: DomainModel = HALFSTRIP
) -> BeltramiField:
    """(mu o g) conj(g')/g' on the parametrizing domain of g.

    The unimodular factor preserves |mu| pointwise, so for surjective g the
    sup norm carries over unchanged.
    """

    def ev(z):
        z = np.asarray(z, dtype=complex)
        gp = np.asarray(g.d1(z), dtype=complex)
        if not np.all(np.isfinite(gp)) or np.any(gp == 0.0):
            raise CriticalPointError("pullback through a critical point of the chart")
        return np.asarray(mu(g(z)), dtype=complex) * np.conj(gp) / gp

    argmax = mu.sup_norm.argmax
    if g.inverse is not None and not is_infinity(argmax):
        try:
            argmax = complex(g.invert(complex(argmax)))
        except Exception:
            argmax = INFINITY
    else:
        argmax = INFINITY
    sup = NormResult(mu.sup_norm.value, argmax, mu.sup_norm.grid_level, mu.sup_norm.converged)
    return BeltramiField(ev, domain, sup)


# ---------------------------------------------------------------------------
# quadrature engine


def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


_GL_CACHE = {n: _gl(n) for n in (12, 20, 48)}


def _tensor(f, x0, x1, y0, y1, n):
    gx, gw = _GL_CACHE[n]
    X = x0 + (x1 - x0) * gx
    Y = y0 + (y1 - y0) * gx
    Z = X[:, None] + 1j * Y[None, :]
    V = np.asarray(f(Z), dtype=complex)
    return (x1 - x0) * (y1 - y0) * complex(np.sum(gw[:, None] * gw[None, :] * V))


def _adaptive_cell(f, x0, x1, y0, y1, tol_abs, depth=0):
    coarse = _tensor(f, x0, x1, y0, y1, 12)
    fine = _tensor(f, x0, x1, y0, y1, 20)
    if not (np.isfinite(fine) and np.isfinite(coarse)):
        raise DivergenceError(
            f"integrand is not finite on [{x0}, {x1}] x [{y0}, {y1}]"
        )
    # the relative guard stops subdivision once a cell is resolved to
    # roundoff, keeping tolerance splitting from forcing a uniform blowup
    if abs(fine - coarse) <= max(tol_abs, 1e-14 * abs(fine)) or depth >= 14:
        return fine
    xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    q = tol_abs / 4.0
    return (
        _adaptive_cell(f, x0, xm, y0, ym, q, depth + 1)
        + _adaptive_cell(f, xm, x1, y0, ym, q, depth + 1)
        + _adaptive_cell(f, x0, xm, ym, y1, q, depth + 1)
        + _adaptive_cell(f, xm, x1, ym, y1, q, depth + 1)
    )


def _pair_halfstrip(f, tol_rel):
    total = 0.0 + 0.0j
    quiet = 0
    shells = []
    # unit columns near the edge, then doubling widths
    edges = [float(k) for k in range(9)]
    while edges[-1] < 2.0**40:
        edges.append(2.0 * edges[-1])
    for x0, x1 in zip(edges, edges[1:]):
        scale = max(1.0, abs(total))
        part = _adaptive_cell(f, x0, x1, 0.0, 1.0, 1e-13 * scale)
        total += part
        shells.append(abs(part))
        if abs(part) <= tol_rel * max(abs(total), 1e-300):
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
        if len(shells) >= 6 and all(
            shells[-i] > shells[-i - 1] for i in range(1, 4)
        ):
            raise DivergenceError(
                f"half-strip pairing grows without decay near xi = {x1}"
            )
    raise DivergenceError("half-strip pairing did not settle inside xi <= 2^40")


def _pair_halfplane(f, tol_rel):
    total = (
        _adaptive_cell(f, -8.0, 0.0, 0.0, 8.0, 1e-13)
        + _adaptive_cell(f, 0.0, 8.0, 0.0, 8.0, 1e-13)
    )
    size = 8.0
    quiet = 0
    prev = None
    for _ in range(34):
        scale = max(1.0, abs(total))
        tol_abs = 1e-13 * scale
        shell = (
            _adaptive_cell(f, -2 * size, 2 * size, size, 2 * size, tol_abs)
            + _adaptive_cell(f, size, 2 * size, 0.0, size, tol_abs)
            + _adaptive_cell(f, -2 * size, -size, 0.0, size, tol_abs)
        )
        total += shell
        if abs(shell) <= tol_rel * max(abs(total), 1e-300):
            quiet += 1
            if quiet >= 2:
                return total
        else:
            quiet = 0
        if prev is not None and abs(shell) > 4.0 * prev and abs(shell) > 1e-10:
            raise DivergenceError(
                f"half-plane pairing shells grow: {prev:.3e} -> {abs(shell):.3e}"
            )
        prev = abs(shell)
        size *= 2.0
    raise DivergenceError("half-plane pairing did not settle within the box budget")


def pairing(mu, psi, d: DomainModel, tol_rel: float = 1e-9) -> complex:
    """Adaptive-quadrature value of the integral of mu*psi over d."""

    def f(z):
        return np.asarray(mu(z), dtype=complex) * np.asarray(psi(z), dtype=complex)

    if d.kind == HALFSTRIP_KIND:
        return _pair_halfstrip(f, tol_rel)
    if d.kind == HALFPLANE_KIND:
        return _pair_halfplane(f, tol_rel)
    if d.kind == LOWER_HALFPLANE_KIND:
        # integrate the conjugate-parametrized integrand over the upper half
        return _pair_halfplane(lambda w: f(np.conj(w)), tol_rel)
    raise ArgumentError(f"pairing is not implemented on {d.kind}")


# ---------------------------------------------------------------------------
# degenerating sequence


@dataclass(frozen=True)
class DegeneratingElement:
    """omega_m(zeta) = (1/m) exp(-zeta/m) on the half-strip; unit A_2 norm."""

    m: int

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.exp(-z / self.m) / self.m

    def root(self, z):
        """omega_m = root^2, witnessing membership in the squares class."""
        z = np.asarray(z, dtype=complex)
        return np.exp(-z / (2.0 * self.m)) / np.sqrt(float(self.m))


def degenerating_sequence(m: int) -> DegeneratingElement:
    if int(m) < 1:
        raise ArgumentError("the degenerating index must be a positive integer")
    return DegeneratingElement(int(m))


_XI_SPLIT = 200.0  # cosh(pi xi) overflows past ~225; beyond this the tail is analytic
_XI_PROBE = 30.0  # the far profile is xi-independent to machine precision here


def _degen_single(mu_star, m: int) -> complex:
    omega = DegeneratingElement(m)

    def f(z):
        return np.asarray(mu_star(z), dtype=complex) * omega(z)

    total = 0.0 + 0.0j
    sup = mu_star.sup_norm.value if isinstance(mu_star, BeltramiField) else 1.0
    for j in range(int(_XI_SPLIT)):
        if np.exp(-j / m) * sup / m < 1e-16 * max(abs(total), 1e-300) and j > 8:
            # remaining columns and the analytic tail are below roundoff
            return total
        total += _adaptive_cell(f, float(j), float(j + 1), 0.0, 1.0, 1e-14 * max(1.0, abs(total)))
    gx, gw = _GL_CACHE[48]
    profile = np.asarray(mu_star(_XI_PROBE + 1j * gx), dtype=complex)
    eta_integral = complex(np.sum(gw * profile * np.exp(-1j * gx / m)))
    return total + np.exp(-_XI_SPLIT / m) * eta_integral


def _aitken_limit(values):
    seq = [float(v) for v in values]
    best = seq[-1]
    converged = False
    while len(seq) >= 3:
        nxt = []
        for a, b, c in zip(seq, seq[1:], seq[2:]):
            d = c - 2.0 * b + a
            nxt.append(c - (c - b) ** 2 / d if abs(d) > 1e-300 else c)
        if not nxt:
            break
        prev_best, best = best, nxt[-1]
        if abs(best - prev_best) <= 1e-9 * max(1.0, abs(best)):
            converged = True
        seq = nxt
    return best, converged


@dataclass(frozen=True)
class DegenerationReport:
    entries: tuple  # (m, pairing modulus)
    limit: float
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "m": [int(m) for m, _ in self.entries],
            "pairing_modulus": [v for _, v in self.entries],
            "limit": self.limit,
            "converged": self.converged,
        }


def degen_pairing_limit(mu_star: BeltramiField, m_schedule) -> DegenerationReport:
    """|<mu_star, omega_m>| along the schedule, with an extrapolated limit.

    The xi integral is split at 200 (the chart's overflow horizon): numeric
    below, analytic tail above using the far profile sampled at xi = 30,
    where it has stopped moving.
    """
    if mu_star.domain.kind != HALFSTRIP_KIND:
        raise ArgumentError("degenerating pairings live on the half-strip chart")
    if not mu_star.sup_norm.value <= 1.0 + _UNIT_TOL:
        raise ArgumentError("mu_star must lie in the closed unit ball")
    ms = [int(m) for m in m_schedule]
    if not ms or any(m < 1 for m in ms):
        raise ArgumentError("the schedule must list positive integers")
    entries = tuple((m, abs(_degen_single(mu_star, m))) for m in ms)
    limit, converged = _aitken_limit([v for _, v in entries])
    return DegenerationReport(entries, limit, converged)


# ---------------------------------------------------------------------------
# extremality lower bound


def _rational_elements(d: DomainModel, anchors, heights):
    # poles reflected across the boundary, closed-form A_2 norms:
    # integral of |z - p|^-4 over the half-plane at distance h is pi/(4h^2),
    # of |z - p|^-6 is 3 pi/(32 h^4)
    side = -1.0 if d.kind == HALFPLANE_KIND else 1.0
    out = []
    for x0 in anchors:
        for h in heights:
            p4 = complex(x0, side * h)
            n4 = np.pi / (4.0 * h * h)
            out.append(
                (
                    f"pole4@{x0}:h={h}",
                    (lambda z, p=p4, n=n4: (np.asarray(z, complex) - p) ** -4 / n),
                    True,
                )
            )
            n6 = 3.0 * np.pi / (32.0 * h**4)
            out.append(
                (
                    f"pole6@{x0}:h={h}",
                    (lambda z, p=p4, n=n6: (np.asarray(z, complex) - p) ** -6 / n),
                    True,
                )
            )
    return out


def _pair_elements(d: DomainModel, anchors, heights, tol_rel):
    # two-pole sums are generally not squares of analytic fields
    side = -1.0 if d.kind == HALFPLANE_KIND else 1.0
    out = []
    one = lambda z: np.ones_like(np.asarray(z, dtype=complex))
    for x0 in anchors:
        for h in heights:
            p = complex(x0 - h, side * h)
            q = complex(x0 + h, side * h)
            raw = lambda z, p=p, q=q: (np.asarray(z, complex) - p) ** -4 + (
                np.asarray(z, complex) - q
            ) ** -4
            norm = abs(pairing(one, lambda z, r=raw: np.abs(r(z)), d, tol_rel))
            out.append(
                (f"pair4@{x0}:h={h}", (lambda z, r=raw, n=norm: r(z) / n), False)
            )
    return out


def hkrs_basis(
    d: DomainModel,
    basis_size: int = 200,
    squares_only: bool = False,
    anchors=(0.0,),
    tol_rel: float = 1e-8,
):
    """Deterministic family of unit-A_2-norm test differentials on d.

    Entries are (label, evaluator, is_square).  Truncating the list never
    reorders it, so estimates grow monotonically with basis_size.
    """
    if basis_size < 1:
        raise ArgumentError("basis_size must be positive")
    elements = []
    if d.kind in (HALFPLANE_KIND, LOWER_HALFPLANE_KIND):
        heights = [2.0 ** -j for j in range(-2, 10)]
        elements.extend(_rational_elements(d, anchors, heights))
        elements.extend(_pair_elements(d, anchors, heights[2:8], tol_rel))
    elif d.kind == HALFSTRIP_KIND:
        for m in (1, 2, 4, 8, 16, 32, 64, 128, 256, 512):
            elements.append((f"omega_{m}", degenerating_sequence(m), True))
    else:
        raise ArgumentError(f"no test-differential basis on {d.kind}")
    if squares_only:
        elements = [e for e in elements if e[2]]
    return elements[:basis_size]


def hkrs_extremality_estimate(
    mu: BeltramiField,
    d: DomainModel,
    basis_size: int = 200,
    squares_only: bool = False,
    anchors=None,
    chart=None,
    m_schedule=(4, 8, 16, 32, 64),
) -> float:
    """Certified lower bound for sup over unit-norm psi of |<mu, psi>|.

    Sweeps the rational basis directly; when a half-strip chart is supplied
    (or derivable from the anchors) the pushed-forward degenerating elements
    are paired in the chart, where their mass is reachable.  Always at most
    ||mu||_inf up to quadrature error.
    """
    if anchors is None:
        am = mu.sup_norm.argmax
        anchors = (0.0,) if is_infinity(am) else (float(np.real(am)),)
    best = 0.0
    for _, psi, _ in hkrs_basis(d, basis_size, squares_only, anchors):
        if isinstance(psi, DegeneratingElement):
            continue  # strip elements are handled through the chart below
        best = max(best, abs(pairing(mu, psi, d)))
    if d.kind in (HALFPLANE_KIND, LOWER_HALFPLANE_KIND):
        field = mu if d.kind == HALFPLANE_KIND else reflect_beltrami(mu)
        if chart is None:
            x0 = anchors[0]
            chart = halfstrip_map(x0 - 1.0, x0 + 1.0, INFINITY)
        transported = pullback_beltrami(field, chart, HALFSTRIP)
        for m in m_schedule:
            best = max(best, abs(_degen_single(transported, int(m))))
    elif d.kind == HALFSTRIP_KIND:
        for m in m_schedule:
            best = max(best, abs(_degen_single(mu, int(m))))
    return best
