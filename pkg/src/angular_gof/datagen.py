"""Samplers for the data-generating copulas used in the experiments.

Extreme-value copulas (Gumbel/logistic and Hüsler–Reiss) are written as
C(u, v) = exp(-ell(-log u, -log v)) with ell the family stdf and sampled by
conditional inversion: the partial derivative has the closed form
dC/du = C(u, v) * ell_1(-log u, -log v) / u, which is a CDF in v, inverted by
bisection.  The comonotone copula and the max-linear factor copula are
sampled directly; lambda-mixtures draw their component per observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .models import HuslerReissModel, LogisticModel

__all__ = [
    "CopulaSpec",
    "gumbel",
    "husler_reiss",
    "comonotone",
    "maxlinear",
    "mixture",
    "scenario_copula",
    "copula_cdf",
    "conditional_cdf",
    "sample",
]


@dataclass(frozen=True)
class CopulaSpec:
    """A copula description: one of gumbel / hr / comonotone / maxlinear /
    mixture (with nested component specs)."""

    kind: str
    params: tuple = ()
    components: tuple = ()  # (base, alt) for mixtures

    def describe(self) -> str:
        if self.kind == "mixture":
            lam = self.params[0]
            base, alt = self.components
            return f"mixture(lambda={lam}, base={base.describe()}, alt={alt.describe()})"
        inner = ",".join(f"{p:g}" for p in self.params)
        return f"{self.kind}({inner})"


def gumbel(theta_g: float) -> CopulaSpec:
    """Gumbel copula with parameter theta_g >= 1 (stdf exponent r = 1/theta_g)."""
    if theta_g < 1.0:
        raise ValueError("Gumbel parameter must be >= 1")
    return CopulaSpec("gumbel", (float(theta_g),))


def husler_reiss(r: float) -> CopulaSpec:
    return CopulaSpec("hr", (float(r),))


def comonotone() -> CopulaSpec:
    return CopulaSpec("comonotone")


def maxlinear(a11: float, a12: float, a21: float, a22: float) -> CopulaSpec:
    """Max-linear factor copula: X_i = max_j a_ij Z_j with Fréchet(1) factors.

    Rows of the coefficient matrix must sum to 1 so the margins are exactly
    Fréchet(1).
    """
    if not (math.isclose(a11 + a12, 1.0) and math.isclose(a21 + a22, 1.0)):
        raise ValueError("max-linear coefficient rows must each sum to 1")
    return CopulaSpec("maxlinear", (float(a11), float(a12), float(a21), float(a22)))


def mixture(lam: float, base: CopulaSpec, alt: CopulaSpec) -> CopulaSpec:
    if not 0.0 <= lam <= 1.0:
        raise ValueError("mixture weight must lie in [0, 1]")
    return CopulaSpec("mixture", (float(lam),), (base, alt))


def scenario_copula(scenario: int, lam: float, family: str = "logistic") -> CopulaSpec:
    """The two mixture scenarios of the power studies.

    Scenario 1 contaminates with the comonotone copula, scenario 2 with the
    max-linear factor copula; the base is Gumbel(2) (logistic r0 = 0.5) or the
    Hüsler–Reiss copula with r0 = 1.
    """
    base = gumbel(2.0) if family == "logistic" else husler_reiss(1.0)
    if scenario == 1:
        alt = comonotone()
    elif scenario == 2:
        alt = maxlinear(0.7, 0.3, 0.1, 0.9)
    else:
        raise ValueError("scenario must be 1 or 2")
    return mixture(lam, base, alt)


def _ev_model(spec: CopulaSpec):
    if spec.kind == "gumbel":
        return LogisticModel(1.0 / spec.params[0])
    if spec.kind == "hr":
        return HuslerReissModel(spec.params[0])
    raise ValueError(f"{spec.kind} is not an extreme-value copula spec")


def copula_cdf(spec: CopulaSpec, u, v):
    """C(u, v) on the open unit square (vectorized)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if spec.kind == "comonotone":
        out = np.minimum(u, v)
    elif spec.kind == "maxlinear":
        a11, a12, a21, a22 = spec.params
        x, y = -np.log(u), -np.log(v)
        out = np.exp(-(np.maximum(a11 * x, a21 * y) + np.maximum(a12 * x, a22 * y)))
    elif spec.kind == "mixture":
        lam = spec.params[0]
        base, alt = spec.components
        out = (1.0 - lam) * copula_cdf(base, u, v) + lam * copula_cdf(alt, u, v)
    else:
        model = _ev_model(spec)
        out = np.exp(-model.stdf(-np.log(u), -np.log(v)))
    return out[()] if np.ndim(out) == 0 else out


def conditional_cdf(spec: CopulaSpec, u, v):
    """dC/du (u, v): a CDF in v, used by the conditional-inversion sampler.

    Only differentiable-in-u kinds are supported (extreme-value copulas and
    their mixtures); the comonotone and max-linear copulas sample directly.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if spec.kind == "mixture":
        lam = spec.params[0]
        base, alt = spec.components
        out = (1.0 - lam) * conditional_cdf(base, u, v) + lam * conditional_cdf(alt, u, v)
    elif spec.kind in ("gumbel", "hr"):
        model = _ev_model(spec)
        x, y = -np.log(u), -np.log(v)
        d1, _ = model.stdf_partials(x, y)
        out = np.exp(-model.stdf(x, y)) * d1 / u
    else:
        raise ValueError(f"conditional_cdf unsupported for kind {spec.kind!r}")
    return out[()] if np.ndim(out) == 0 else out


def _sample_conditional(spec: CopulaSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Conditional inversion: U uniform, solve dC/du(U, v) = W by bisection."""
    u = rng.uniform(size=n)
    w = rng.uniform(size=n)
    lo = np.full(n, 1e-15)
    hi = np.full(n, 1.0 - 1e-15)
    for _ in range(60):  # interval shrinks below 1e-12 well before 60 halvings
        mid = 0.5 * (lo + hi)
        below = conditional_cdf(spec, u, mid) < w
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    v = 0.5 * (lo + hi)
    return np.column_stack([u, v])


def _sample_direct(spec: CopulaSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if spec.kind == "comonotone":
        u = rng.uniform(size=n)
        return np.column_stack([u, u])
    if spec.kind == "maxlinear":
        a11, a12, a21, a22 = spec.params
        z = -1.0 / np.log(rng.uniform(size=(n, 2)))  # Fréchet(1) factors
        x1 = np.maximum(a11 * z[:, 0], a12 * z[:, 1])
        x2 = np.maximum(a21 * z[:, 0], a22 * z[:, 1])
        return np.column_stack([np.exp(-1.0 / x1), np.exp(-1.0 / x2)])
    raise ValueError(f"no direct sampler for kind {spec.kind!r}")


def sample(spec: CopulaSpec, n: int, seed) -> np.ndarray:
    """n i.i.d. pairs with uniform margins and copula ``spec``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if spec.kind == "mixture":
        lam = spec.params[0]
        base, alt = spec.components
        take_alt = rng.uniform(size=n) < lam
        out = np.empty((n, 2))
        n_base = int(np.count_nonzero(~take_alt))
        n_alt = n - n_base
        # Component draws happen in a fixed order for reproducibility.
        if n_base:
            out[~take_alt] = _dispatch_sample(base, n_base, rng)
        if n_alt:
            out[take_alt] = _dispatch_sample(alt, n_alt, rng)
        return out
    return _dispatch_sample(spec, n, rng)


def _dispatch_sample(spec: CopulaSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if spec.kind in ("gumbel", "hr"):
        return _sample_conditional(spec, n, rng)
    if spec.kind == "mixture":
        return sample(spec, n, rng)
    return _sample_direct(spec, n, rng)
