"""PDE data for -div(kappa(x, u) grad u) + g(x, u) = f with u = 0 on the boundary.

Coefficients are drawn from a closed registry of parametric families, each
with an exact derivative in the solution argument eta.  All field
functions take points ``x`` of shape (..., 2) and values ``eta`` broadcastable
to ``x[..., 0]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Family:
    name: str
    params: tuple
    value: Callable
    deriv: Callable | None = None
    validate: Callable | None = None


def _zeros(x, eta):
    return np.zeros(np.broadcast_shapes(np.shape(x)[:-1], np.shape(eta)))


def _const(c, x, eta):
    return np.full(np.broadcast_shapes(np.shape(x)[:-1], np.shape(eta)), float(c))


def _tanh_d(p, x, eta):
    c = p["c"]
    return p["b"] * c / np.cosh(c * np.asarray(eta)) ** 2


def _rational_d(p, x, eta):
    eta = np.asarray(eta)
    return -2.0 * p["b"] * eta / (1.0 + eta ** 2) ** 2


def _require(cond, msg):
    if not cond:
        raise ValueError(msg)


KAPPA_FAMILIES = {
    "constant": Family(
        "constant", ("a",),
        lambda p, x, eta: _const(p["a"], x, eta),
        lambda p, x, eta: _zeros(x, eta),
        lambda p: _require(p["a"] > 0, "constant kappa must be positive")),
    "tanh": Family(
        "tanh", ("a", "b", "c"),
        lambda p, x, eta: p["a"] + p["b"] * np.tanh(p["c"] * np.asarray(eta)) + _zeros(x, eta),
        lambda p, x, eta: _tanh_d(p, x, eta) + _zeros(x, eta)),
    "rational": Family(
        "rational", ("a", "b"),
        lambda p, x, eta: p["a"] + p["b"] / (1.0 + np.asarray(eta) ** 2) + _zeros(x, eta),
        lambda p, x, eta: _rational_d(p, x, eta) + _zeros(x, eta)),
    "quadratic": Family(
        "quadratic", ("a", "b", "c"),
        lambda p, x, eta: p["a"] + p["b"] * np.asarray(eta) + p["c"] * np.asarray(eta) ** 2
        + _zeros(x, eta),
        lambda p, x, eta: p["b"] + 2.0 * p["c"] * np.asarray(eta) + _zeros(x, eta)),
    # x-dependent variant: (a + s x y) + b tanh(c eta)
    "tanh_xy": Family(
        "tanh_xy", ("a", "s", "b", "c"),
        lambda p, x, eta: p["a"] + p["s"] * x[..., 0] * x[..., 1]
        + p["b"] * np.tanh(p["c"] * np.asarray(eta)),
        lambda p, x, eta: _tanh_d(p, x, eta) + _zeros(x, eta)),
}

G_FAMILIES = {
    "zero": Family(
        "zero", (),
        lambda p, x, eta: _zeros(x, eta),
        lambda p, x, eta: _zeros(x, eta)),
    "linear": Family(
        "linear", ("a",),
        lambda p, x, eta: p["a"] * np.asarray(eta) + _zeros(x, eta),
        lambda p, x, eta: _const(p["a"], x, eta),
        lambda p: _require(p["a"] >= 0, "g must be nondecreasing (a >= 0)")),
    "cubic": Family(
        "cubic", ("a",),
        lambda p, x, eta: p["a"] * np.asarray(eta) ** 3 + _zeros(x, eta),
        lambda p, x, eta: 3.0 * p["a"] * np.asarray(eta) ** 2 + _zeros(x, eta),
        lambda p: _require(p["a"] >= 0, "g must be nondecreasing (a >= 0)")),
    # a eta + b atan(c eta): derivative in [a, a + b c]
    "arctan": Family(
        "arctan", ("a", "b", "c"),
        lambda p, x, eta: p["a"] * np.asarray(eta)
        + p["b"] * np.arctan(p["c"] * np.asarray(eta)) + _zeros(x, eta),
        lambda p, x, eta: p["a"] + p["b"] * p["c"] / (1.0 + (p["c"] * np.asarray(eta)) ** 2)
        + _zeros(x, eta),
        lambda p: _require(min(p["a"], p["b"] * p["c"]) >= 0,
                           "g must be nondecreasing (a >= 0, b c >= 0)")),
}

SOURCE_FAMILIES = {
    "constant": Family(
        "constant", ("value",),
        lambda p, x: np.full(np.shape(x)[:-1], float(p["value"]))),
    "poly": Family(
        "poly", ("c0", "cx", "cy", "cxy", "cxx", "cyy"),
        lambda p, x: (p["c0"] + p["cx"] * x[..., 0] + p["cy"] * x[..., 1]
                      + p["cxy"] * x[..., 0] * x[..., 1]
                      + p["cxx"] * x[..., 0] ** 2 + p["cyy"] * x[..., 1] ** 2)),
    "trig": Family(
        "trig", ("a", "kx", "ky"),
        lambda p, x: p["a"] * np.sin(p["kx"] * math.pi * x[..., 0])
        * np.sin(p["ky"] * math.pi * x[..., 1])),
}

_DEFAULTS = {"poly": dict(c0=0.0, cx=0.0, cy=0.0, cxy=0.0, cxx=0.0, cyy=0.0),
             "trig": dict(kx=1.0, ky=1.0)}


def _resolve(registry, kind, family, params):
    if family not in registry:
        raise ValueError(f"unknown {kind} family {family!r}; "
                         f"choose from {sorted(registry)}")
    fam = registry[family]
    merged = dict(_DEFAULTS.get(family, {}) if kind == "f" else {})
    merged.update(params)
    missing = [k for k in fam.params if k not in merged]
    extra = [k for k in merged if k not in fam.params]
    if missing or extra:
        raise ValueError(f"{kind} family {family!r} takes parameters "
                         f"{fam.params}; missing {missing}, unexpected {extra}")
    merged = {k: float(v) for k, v in merged.items()}
    if fam.validate is not None:
        fam.validate(merged)
    return fam, merged


@dataclass(frozen=True)
class Coefficient:
    """A registered coefficient kappa(x, eta) or g(x, eta) with its eta-derivative."""

    kind: str
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        registry = KAPPA_FAMILIES if self.kind == "kappa" else G_FAMILIES
        _, merged = _resolve(registry, self.kind, self.family, self.params)
        object.__setattr__(self, "params", merged)

    @property
    def _family(self) -> Family:
        return (KAPPA_FAMILIES if self.kind == "kappa" else G_FAMILIES)[self.family]

    def __call__(self, x, eta):
        return self._family.value(self.params, np.asarray(x, dtype=float), eta)

    def deriv(self, x, eta):
        return self._family.deriv(self.params, np.asarray(x, dtype=float), eta)

    def to_config(self) -> dict:
        return {"family": self.family, **self.params}


@dataclass(frozen=True)
class SourceField:
    """A registered right-hand side f(x)."""

    family: str = "constant"
    params: dict = field(default_factory=lambda: {"value": 0.0})

    def __post_init__(self):
        _, merged = _resolve(SOURCE_FAMILIES, "f", self.family, self.params)
        object.__setattr__(self, "params", merged)

    def __call__(self, x):
        return SOURCE_FAMILIES[self.family].value(self.params, np.asarray(x, dtype=float))

    def to_config(self) -> dict:
        return {"family": self.family, **self.params}

    @classmethod
    def from_config(cls, cfg) -> "SourceField":
        if isinstance(cfg, cls):
            return cfg
        if isinstance(cfg, (int, float)):
            return cls("constant", {"value": float(cfg)})
        cfg = dict(cfg)
        family = cfg.pop("family", "constant")
        return cls(family, cfg)


@dataclass(frozen=True)
class DataBounds:
    """Declared constants: k_alpha <= kappa <= k_beta, |dkappa| <= K_eta, 0 <= dg <= G_eta."""

    k_alpha: float
    k_beta: float
    K_eta: float
    G_eta: float

    def __post_init__(self):
        for name in ("k_alpha", "k_beta", "K_eta", "G_eta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
        if not 0 < self.k_alpha <= self.k_beta:
            raise ValueError("bounds require 0 < k_alpha <= k_beta")
        if self.K_eta < 0 or self.G_eta < 0:
            raise ValueError("K_eta and G_eta must be nonnegative")

    def to_config(self) -> dict:
        return {"k_alpha": self.k_alpha, "k_beta": self.k_beta,
                "K_eta": self.K_eta, "G_eta": self.G_eta}


@dataclass(frozen=True)
class ProblemSpec:
    kappa: Coefficient
    g: Coefficient
    bounds: DataBounds
    f: SourceField = field(default_factory=SourceField)

    def dkappa_deta(self, x, eta):
        return self.kappa.deriv(x, eta)

    def dg_deta(self, x, eta):
        return self.g.deriv(x, eta)

    @classmethod
    def from_config(cls, cfg: dict) -> "ProblemSpec":
        """Build from ``{"kappa": {...}, "g": {...}, "f": {...}, "bounds": {...}}``."""
        def coef(kind, block, default):
            block = dict(block or default)
            family = block.pop("family")
            return Coefficient(kind, family, block)

        try:
            bounds = DataBounds(**{k: float(v) for k, v in cfg["bounds"].items()})
        except KeyError as exc:
            raise ValueError(f"problem config missing {exc}") from exc
        except TypeError as exc:
            raise ValueError(f"bad bounds block: {exc}") from exc
        return cls(
            kappa=coef("kappa", cfg.get("kappa"), {"family": "constant", "a": 1.0}),
            g=coef("g", cfg.get("g"), {"family": "zero"}),
            bounds=bounds,
            f=SourceField.from_config(cfg.get("f", 0.0)),
        )

    def to_config(self) -> dict:
        return {"kappa": self.kappa.to_config(), "g": self.g.to_config(),
                "f": self.f.to_config(), "bounds": self.bounds.to_config()}


@dataclass
class Violation:
    check: str
    worst: float
    bound: float
    x: tuple
    eta: float
    count: int


@dataclass
class BoundsReport:
    """Extremes seen while sampling; passing is evidence, not proof."""

    kappa_min: float
    kappa_max: float
    dkappa_abs_max: float
    dg_min: float
    dg_max: float
    n_points: int
    violations: list
    note: str = ("sampling-based falsification check: no violation among the "
                 "samples does not prove the declared bounds")

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "kappa_min": self.kappa_min, "kappa_max": self.kappa_max,
            "dkappa_abs_max": self.dkappa_abs_max,
            "dg_min": self.dg_min, "dg_max": self.dg_max,
            "n_points": self.n_points, "ok": self.ok, "note": self.note,
            "violations": [vars(v) for v in self.violations],
        }


def validate_bounds(spec: ProblemSpec, x_samples=None, eta_range=(-1.0, 1.0),
                    n_samples: int = 201, seed: int = 0) -> BoundsReport:
    """Sample kappa and the derivatives and flag violations of the declared bounds.

    The eta samples are an equispaced grid including both ends of
    ``eta_range`` plus ``n_samples`` uniform random draws from ``seed``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    lo, hi = map(float, eta_range)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise ValueError("eta_range must be a finite interval")
    rng = np.random.default_rng(seed)
    if x_samples is None:
        x_samples = rng.uniform(0.0, 1.0, size=(16, 2))
    xs = np.asarray(x_samples, dtype=float).reshape(-1, 2)
    etas = np.concatenate([np.linspace(lo, hi, max(n_samples, 2)),
                           rng.uniform(lo, hi, n_samples)])
    X = np.repeat(xs, len(etas), axis=0)
    E = np.tile(etas, len(xs))

    kap = spec.kappa(X, E)
    dk = np.abs(spec.dkappa_deta(X, E))
    dg = spec.dg_deta(X, E)
    b = spec.bounds
    violations = []

    def flag(check, values, bound, above):
        slack = 1e-12 * max(1.0, abs(bound))
        bad = values > bound + slack if above else values < bound - slack
        if bad.any():
            idx = np.flatnonzero(bad)
            k = idx[np.argmax(values[idx])] if above else idx[np.argmin(values[idx])]
            violations.append(Violation(check, float(values[k]), float(bound),
                                        tuple(float(v) for v in X[k]),
                                        float(E[k]), int(bad.sum())))

    flag("kappa >= k_alpha", kap, b.k_alpha, above=False)
    flag("kappa <= k_beta", kap, b.k_beta, above=True)
    flag("|dkappa/deta| <= K_eta", dk, b.K_eta, above=True)
    flag("dg/deta >= 0", dg, 0.0, above=False)
    flag("dg/deta <= G_eta", dg, b.G_eta, above=True)
    return BoundsReport(
        kappa_min=float(kap.min()), kappa_max=float(kap.max()),
        dkappa_abs_max=float(dk.max()), dg_min=float(dg.min()),
        dg_max=float(dg.max()), n_points=len(E), violations=violations)
