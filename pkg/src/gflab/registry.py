"""Named catalogue of test fields and instance parsing for the runner.

Experiments refer to fields by name so that config files stay plain JSON;
every entry is a vectorized evaluator on its domain together with the
weight order it is bounded in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import DISK, HALFPLANE, DomainModel
from .errors import ArgumentError
from .rational import RationalQD

__all__ = ["RegistryEntry", "FUNCTIONS", "lookup", "rational_from_json"]


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    description: str
    domain: DomainModel
    field: object  # evaluator z -> value
    weight_order: int


def _zero(z):
    return np.zeros_like(np.asarray(z, dtype=complex))


def _inv_square_i(z):
    return (np.asarray(z, dtype=complex) + 1j) ** -2


def _inv_square_2i(z):
    return (np.asarray(z, dtype=complex) + 2j) ** -2


def _inv_cube_i(z):
    return 2.0 * (np.asarray(z, dtype=complex) + 1j) ** -3


_ENTRIES = (
    RegistryEntry("zero", "identically zero field", HALFPLANE, _zero, 2),
    RegistryEntry(
        "inv_square_i", "1/(z+i)^2, the standard decaying target", HALFPLANE, _inv_square_i, 2
    ),
    RegistryEntry(
        "inv_square_2i", "1/(z+2i)^2, singularity one step deeper", HALFPLANE, _inv_square_2i, 2
    ),
    RegistryEntry(
        "inv_cube_i", "2/(z+i)^3, faster far-field decay", HALFPLANE, _inv_cube_i, 2
    ),
)

FUNCTIONS = {e.name: e for e in _ENTRIES}


def lookup(name: str) -> RegistryEntry:
    try:
        return FUNCTIONS[name]
    except KeyError:
        known = ", ".join(sorted(FUNCTIONS))
        raise ArgumentError(f"unknown registry function {name!r}; known: {known}") from None


def rational_from_json(data) -> RationalQD:
    """RationalQD from either serialization shape.

    Accepts the dict form {"poles": [{"a": [re, im], "c": [re, im],
    "cp": [re, im]}, ...], "domain": kind} written by to_json_dict, or the
    shorthand {"terms": [[a, c, cp], ...]} with real entries (complex
    entries can be spelled [re, im] pairs).
    """

    def _num(v):
        if isinstance(v, (list, tuple)):
            re, im = v
            return complex(re, im)
        return complex(v)

    if "poles" in data:
        terms = tuple(
            (_num(t["a"]), _num(t["c"]), _num(t.get("cp", 0.0))) for t in data["poles"]
        )
    elif "terms" in data:
        terms = tuple((_num(a), _num(c), _num(cp)) for a, c, cp in data["terms"])
    else:
        raise ArgumentError("rational JSON needs a 'poles' or 'terms' key")
    kind = data.get("domain", "halfplane")
    if kind == "halfplane":
        domain = HALFPLANE
    elif kind == "disk":
        domain = DISK
    else:
        raise ArgumentError(f"rational differentials live on halfplane or disk, not {kind!r}")
    return RationalQD(terms, domain=domain)
