"""gflab: conformal-metric norms, Schwarzian calculus, Grunsky bounds,
and quasiconformal extension experiments on plane domains."""

__version__ = "0.1.0"
