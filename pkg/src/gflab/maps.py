"""Analytic maps with derivative data, and composition chains of primitives.

A map is carried as evaluators for w, w', w'' (and w''' when cheap), plus an
optional inverse.  Everything is vectorized over numpy arrays.  Conformal
chains are built from a small primitive set -- mobius(a,b,c,d), power(alpha),
exp, cosh_pi, affine(a,b) -- which is also the JSON config surface for
user-supplied domains.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .cplane import Mobius
from .errors import ArgumentError, CriticalPointError


@dataclass(frozen=True)
class AnalyticMap:
    """A holomorphic map packaged with its first two (or three) derivatives."""

    evaluator: Callable
    derivative: Callable
    second_derivative: Callable
    domain_tag: str = ""
    codomain_tag: str = ""
    third_derivative: Callable | None = None
    inverse: Callable | None = None
    label: str = ""

    def __call__(self, z):
        return self.evaluator(z)

    def d1(self, z):
        return self.derivative(z)

    def d2(self, z):
        return self.second_derivative(z)

    def d3(self, z):
        if self.third_derivative is None:
            raise ArgumentError(f"map {self.label or '?'} carries no third derivative")
        return self.third_derivative(z)

    def invert(self, w):
        if self.inverse is None:
            raise ArgumentError(f"map {self.label or '?'} carries no inverse")
        return self.inverse(w)


def identity_map(tag: str = "") -> AnalyticMap:
    one = lambda z: np.ones_like(np.asarray(z, dtype=complex))
    zero = lambda z: np.zeros_like(np.asarray(z, dtype=complex))
    return AnalyticMap(
        evaluator=lambda z: np.asarray(z, dtype=complex),
        derivative=one,
        second_derivative=zero,
        third_derivative=zero,
        inverse=lambda w: np.asarray(w, dtype=complex),
        domain_tag=tag,
        codomain_tag=tag,
        label="identity",
    )


def mobius_map(m: Mobius, domain_tag="", codomain_tag="") -> AnalyticMap:
    a, b, c, d = (complex(m.a), complex(m.b), complex(m.c), complex(m.d))
    det = a * d - b * c
    inv = m.inverse()

    def ev(z):
        z = np.asarray(z, dtype=complex)
        return (a * z + b) / (c * z + d)

    def d1(z):
        z = np.asarray(z, dtype=complex)
        return det / (c * z + d) ** 2

    def d2(z):
        z = np.asarray(z, dtype=complex)
        return -2.0 * c * det / (c * z + d) ** 3

    def d3(z):
        z = np.asarray(z, dtype=complex)
        return 6.0 * c**2 * det / (c * z + d) ** 4

    def backward(w):
        w = np.asarray(w, dtype=complex)
        return (inv.a * w + inv.b) / (inv.c * w + inv.d)

    return AnalyticMap(ev, d1, d2, domain_tag, codomain_tag, d3, backward, "mobius")


def power_map(alpha: float) -> AnalyticMap:
    """Principal-branch z^alpha; conformal on any domain avoiding (-inf, 0]."""
    if alpha == 0:
        raise ArgumentError("power(0) is constant, not conformal")
    al = complex(alpha)

    def ev(z):
        z = np.asarray(z, dtype=complex)
        return np.exp(al * np.log(z))

    def d1(z):
        z = np.asarray(z, dtype=complex)
        return al * np.exp((al - 1.0) * np.log(z))

    def d2(z):
        z = np.asarray(z, dtype=complex)
        return al * (al - 1.0) * np.exp((al - 2.0) * np.log(z))

    def d3(z):
        z = np.asarray(z, dtype=complex)
        return al * (al - 1.0) * (al - 2.0) * np.exp((al - 3.0) * np.log(z))

    def backward(w):
        w = np.asarray(w, dtype=complex)
        return np.exp(np.log(w) / al)

    return AnalyticMap(ev, d1, d2, "", "", d3, backward, f"power({alpha})")


def exp_map() -> AnalyticMap:
    e = lambda z: np.exp(np.asarray(z, dtype=complex))
    return AnalyticMap(
        e, e, e, "", "", e, lambda w: np.log(np.asarray(w, dtype=complex)), "exp"
    )


def cosh_pi_map() -> AnalyticMap:
    """cosh(pi zeta): carries the half-strip {xi>0, 0<eta<1} onto the upper half-plane."""
    pi = np.pi

    def ev(z):
        return np.cosh(pi * np.asarray(z, dtype=complex))

    def d1(z):
        return pi * np.sinh(pi * np.asarray(z, dtype=complex))

    def d2(z):
        return pi**2 * np.cosh(pi * np.asarray(z, dtype=complex))

    def d3(z):
        return pi**3 * np.sinh(pi * np.asarray(z, dtype=complex))

    def backward(w):
        # principal arccosh maps the upper half-plane into {Re>0, 0<Im<pi}
        return np.arccosh(np.asarray(w, dtype=complex)) / pi

    return AnalyticMap(ev, d1, d2, "halfstrip", "halfplane", d3, backward, "cosh_pi")


def affine_map(a, b) -> AnalyticMap:
    a, b = complex(a), complex(b)
    if a == 0:
        raise ArgumentError("affine(0, b) is constant, not conformal")

    def ev(z):
        return a * np.asarray(z, dtype=complex) + b

    def d1(z):
        z = np.asarray(z, dtype=complex)
        return np.full_like(z, a)

    def zero(z):
        return np.zeros_like(np.asarray(z, dtype=complex))

    return AnalyticMap(
        ev, d1, zero, "", "", zero, lambda w: (np.asarray(w, dtype=complex) - b) / a,
        f"affine({a}, {b})",
    )


def compose_maps(outer: AnalyticMap, inner: AnalyticMap) -> AnalyticMap:
    """outer after inner, with chain-rule derivatives up to third order."""

    def ev(z):
        return outer.evaluator(inner.evaluator(z))

    def d1(z):
        return outer.derivative(inner.evaluator(z)) * inner.derivative(z)

    def d2(z):
        g, g1, g2 = inner.evaluator(z), inner.derivative(z), inner.second_derivative(z)
        return outer.second_derivative(g) * g1**2 + outer.derivative(g) * g2

    d3 = None
    if outer.third_derivative is not None and inner.third_derivative is not None:
        def d3(z):  # noqa: E306
            g = inner.evaluator(z)
            g1 = inner.derivative(z)
            g2 = inner.second_derivative(z)
            g3 = inner.third_derivative(z)
            return (
                outer.third_derivative(g) * g1**3
                + 3.0 * outer.second_derivative(g) * g1 * g2
                + outer.derivative(g) * g3
            )

    backward = None
    if outer.inverse is not None and inner.inverse is not None:
        def backward(w):  # noqa: E306
            return inner.inverse(outer.inverse(w))

    return AnalyticMap(
        ev,
        d1,
        d2,
        inner.domain_tag,
        outer.codomain_tag,
        d3,
        backward,
        f"{outer.label or '?'} . {inner.label or '?'}",
    )


def chain_map(primitives: Sequence[AnalyticMap], domain_tag="", codomain_tag="") -> AnalyticMap:
    """Compose primitives applied in listed order: chain([f, g]) = g(f(z))."""
    if not primitives:
        return identity_map(domain_tag)
    out = primitives[0]
    for nxt in primitives[1:]:
        out = compose_maps(nxt, out)
    return replace(
        out,
        domain_tag=domain_tag or out.domain_tag,
        codomain_tag=codomain_tag or out.codomain_tag,
    )


def _complex_param(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ArgumentError(f"complex parameter needs [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def primitive_from_config(entry: dict) -> AnalyticMap:
    kind = entry.get("kind")
    if kind == "mobius":
        m = Mobius(*(_complex_param(entry[k]) for k in ("a", "b", "c", "d")))
        return mobius_map(m)
    if kind == "power":
        return power_map(float(entry["alpha"]))
    if kind == "exp":
        return exp_map()
    if kind == "cosh_pi":
        return cosh_pi_map()
    if kind == "affine":
        return affine_map(_complex_param(entry["a"]), _complex_param(entry["b"]))
    raise ArgumentError(f"unknown map primitive kind: {kind!r}")


def chain_from_config(entries, domain_tag="halfplane", codomain_tag="quasidisk") -> AnalyticMap:
    prims = [primitive_from_config(e) for e in entries]
    return chain_map(prims, domain_tag, codomain_tag)


def check_conformal(m: AnalyticMap, samples, rel_tol=1e-6) -> bool:
    """Sampled conformality check: w' nonzero and consistent with finite differences."""
    z = np.asarray(samples, dtype=complex)
    d = m.derivative(z)
    if np.any(np.abs(d) == 0.0):
        bad = z[np.abs(d) == 0.0][0]
        raise CriticalPointError(f"derivative vanishes at sample {bad}")
    h = 1e-6 * (1.0 + np.abs(z))
    fd = (m.evaluator(z + h) - m.evaluator(z - h)) / (2.0 * h)
    rel = np.abs(fd - d) / np.maximum(np.abs(d), 1e-300)
    worst = float(np.max(rel))
    if worst > rel_tol:
        raise CriticalPointError(
            f"analytic derivative disagrees with finite differences (rel {worst:.3e})"
        )
    return True
