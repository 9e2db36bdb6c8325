"""Parametric extremal-dependence families and their angular measures.

Two built-in families (logistic and Hüsler–Reiss) implement a common
interface: the stable tail dependence function (stdf) ell_r, the exponent
measure density lambda_r, rectangle masses, stdf partial derivatives, the
extremal-coefficient parameter estimator with its expansion constant g, and
the angular density / CDF on the positive arc of the L_p unit sphere.

The angular CDF has no closed form; it is evaluated once per (family, r, p)
by composite Gauss–Legendre panels under an endpoint substitution that tames
the density singularity (logistic density ~ theta^(1/r - 2) near the axes),
then cached as a monotone interpolant for cheap repeated evaluation.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.stats import norm

from .geometry import PI_2, PI_4, lp_norm

__all__ = [
    "LogisticModel",
    "HuslerReissModel",
    "ParamEstimate",
    "QuadratureError",
    "make_model",
    "estimate_param",
    "expansion_constants",
    "angular_density",
    "get_law",
    "AngularLaw",
]


class QuadratureError(RuntimeError):
    """Raised when the angular-CDF quadrature fails to reach tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved tolerance {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class LogisticModel:
    """Logistic family: ell_r(x, y) = (x^(1/r) + y^(1/r))^r, r in (0, 1]."""

    r: float

    family = "logistic"
    param_bounds = (0.0, 1.0)

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError(f"logistic parameter must lie in (0, 1], got {self.r}")

    def stdf(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        s = 1.0 / self.r
        big = np.maximum(x, y)
        small = np.minimum(x, y)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(big > 0, small / big, 0.0)
            out = big * np.power(1.0 + np.power(ratio, s), self.r)
        out = np.where(big == 0.0, 0.0, out)
        return out[()] if out.ndim == 0 else out

    def exponent_density(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValueError("exponent_density requires x, y > 0")
        s = 1.0 / self.r
        # Scale out the largest component (homogeneity of degree -1) so that
        # the powers below never overflow for large grid coordinates.
        m = np.maximum(x, y)
        a, b = x / m, y / m
        with np.errstate(under="ignore"):
            out = (
                (s - 1.0)
                * np.power(a * b, s - 1.0)
                / np.power(np.power(a, s) + np.power(b, s), 2.0 - self.r)
            ) / m
        return out[()] if out.ndim == 0 else out

    def stdf_partials(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any((x == 0) & (y == 0)):
            raise ValueError("stdf_partials undefined at the origin")
        s = 1.0 / self.r
        big = np.maximum(x, y)
        with np.errstate(invalid="ignore", under="ignore"):
            u = np.power(np.minimum(x, y) / big, s)
            d_big = np.power(1.0 / (1.0 + u), 1.0 - self.r)
            d_small = np.power(u / (1.0 + u), 1.0 - self.r)
        dx = np.where(x >= y, d_big, d_small)
        dy = np.where(x >= y, d_small, d_big)
        if dx.ndim == 0:
            return float(dx), float(dy)
        return dx, dy

    def extremal_coefficient(self) -> float:
        return 2.0 ** self.r

    def rect_mass(self, a, b):
        return _rect_mass(self, a, b)

    def endpoint_kappa(self) -> float:
        """Substitution power for the angular-CDF quadrature.

        The density behaves like theta^(1/r - 2) near the axes; theta = s^kappa
        turns it into s^(kappa (1/r - 1) - 1), bounded and smooth for
        kappa (1/r - 1) >= 2.
        """
        a1 = (1.0 - self.r) / self.r
        if a1 <= 0:
            return 1e4
        return float(max(2.0, min(1e4, 2.0 / a1)))

    def endpoint_tail_mass(self, theta_c: float) -> float:
        """Angular mass of [0, theta_c): integral of (1/r - 1) theta^(1/r - 2).

        Used to account exactly for mass sitting below the floating-point
        range when the parameter is close to the independence boundary.
        """
        return math.exp((1.0 / self.r - 1.0) * math.log(theta_c))


@dataclass(frozen=True)
class HuslerReissModel:
    """Hüsler–Reiss family, r in (0, inf); chi = 2 Phi(r)."""

    r: float

    family = "hr"
    param_bounds = (0.0, math.inf)

    def __post_init__(self):
        if not self.r > 0.0:
            raise ValueError(f"Hüsler–Reiss parameter must be positive, got {self.r}")

    def _z(self, x, y):
        """r + log(x/y)/(2r), with the conventions at the axes."""
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.r + np.log(x / y) / (2.0 * self.r)
        return out

    def stdf(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            a = self._z(x, y)
            b = self._z(y, x)
            term = x * norm.cdf(a) + y * norm.cdf(b)
        # Continuity at the axes: ell(x, 0) = x, ell(0, y) = y.
        term = np.where(x == 0.0, y, term)
        term = np.where(y == 0.0, np.where(x == 0.0, 0.0, x), term)
        return term[()] if np.ndim(term) == 0 else term

    def exponent_density(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValueError("exponent_density requires x, y > 0")
        a = self._z(x, y)
        b = self._z(y, x)
        # The two expressions phi(a)/(2 r y) and phi(b)/(2 r x) agree
        # analytically; averaging keeps the implementation symmetric in x, y.
        out = 0.5 * (norm.pdf(a) / (2.0 * self.r * y) + norm.pdf(b) / (2.0 * self.r * x))
        return out[()] if np.ndim(out) == 0 else out

    def stdf_partials(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any((x == 0) & (y == 0)):
            raise ValueError("stdf_partials undefined at the origin")
        with np.errstate(divide="ignore", invalid="ignore"):
            dx = norm.cdf(self._z(x, y))
            dy = norm.cdf(self._z(y, x))
        dx = np.where(x == 0.0, 0.0, np.where(y == 0.0, 1.0, dx))
        dy = np.where(y == 0.0, 0.0, np.where(x == 0.0, 1.0, dy))
        if np.ndim(dx) == 0:
            return float(dx), float(dy)
        return dx, dy

    def extremal_coefficient(self) -> float:
        return float(2.0 * norm.cdf(self.r))

    def rect_mass(self, a, b):
        return _rect_mass(self, a, b)

    def endpoint_kappa(self) -> float:
        # The HR angular density concentrates near theta ~ exp(-2 r^2) at the
        # endpoints; kappa ~ r^2 places that spike at a moderate value of the
        # substitution variable.
        return max(2.0, self.r * self.r)

    def endpoint_tail_mass(self, theta_c: float) -> float:
        # Super-exponentially small below any representable cutoff.
        return 0.0


Model = LogisticModel | HuslerReissModel


def _rect_mass(model, a, b):
    """Lambda([0,a] x [0,b]) = a + b - ell(a, b) (Lebesgue-margins identity)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = a + b - model.stdf(a, b)
    scale = np.maximum(1.0, a + b)
    if np.any(out < -1e-9 * scale):
        raise RuntimeError("rect_mass produced a substantially negative value")
    out = np.maximum(out, 0.0)
    return out[()] if out.ndim == 0 else out


def make_model(family: str, r: float) -> Model:
    """Instantiate a model by family tag ('logistic' or 'hr')."""
    if family == "logistic":
        return LogisticModel(r)
    if family in ("hr", "husler-reiss", "husler_reiss"):
        return HuslerReissModel(r)
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class ParamEstimate:
    """Result of the extremal-coefficient inversion."""

    r: float
    clamped: bool


def estimate_param(family: str, ell_hat_11: float) -> ParamEstimate:
    """Invert the extremal coefficient chi = ell(1,1) for the parameter.

    Estimates outside the valid range (1, 2) are clamped to near-boundary
    values so that downstream code never receives an invalid parameter; the
    flag records the clamping.
    """
    if family == "logistic":
        if ell_hat_11 <= 1.0:
            return ParamEstimate(1e-3, True)
        if ell_hat_11 >= 2.0:
            return ParamEstimate(1.0 - 1e-9, True)
        return ParamEstimate(math.log2(ell_hat_11), False)
    if family in ("hr", "husler-reiss", "husler_reiss"):
        if ell_hat_11 <= 1.0:
            return ParamEstimate(1e-3, True)
        if ell_hat_11 >= 2.0:
            return ParamEstimate(8.0, True)
        return ParamEstimate(float(norm.ppf(ell_hat_11 / 2.0)), False)
    raise ValueError(f"unknown family {family!r}")


def expansion_constants(model: Model):
    """Constant g and Dirac location for the estimator expansion term I."""
    if model.family == "logistic":
        g = 1.0 / (2.0 ** model.r * math.log(2.0))
    else:
        g = 1.0 / (2.0 * norm.pdf(model.r))
    return g, (1.0, 1.0)


def angular_density(model: Model, p: float, theta):
    """phi_{p,r}(theta) = ||(cos, sin)||_p / (cos sin) * lambda_r(cos, sin).

    Valid for every p in [1, inf] (the radial truncation of the exponent
    measure cancels in the same way for the max norm as for finite p).
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta >= PI_2):
        raise ValueError("angular_density requires theta in (0, pi/2)")
    c, s = np.cos(theta), np.sin(theta)
    out = lp_norm(p, c, s) / (c * s) * model.exponent_density(c, s)
    return out[()] if np.ndim(out) == 0 else out


# Gauss–Legendre nodes/weights on [0, 1], shared by all panel quadratures.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL_NODES = (_GL_NODES + 1.0) / 2.0
_GL_WEIGHTS = _GL_WEIGHTS / 2.0


class _HalfCache:
    """Cumulative integrals of the angular density over one half-arc.

    The half [0, pi/4] (lower=True) is parametrized theta = (pi/4) s^kappa;
    the half [pi/4, pi/2] by the mirror map theta = pi/2 - (pi/4) s^kappa.
    Cumulatives run from the arc endpoint (0 or pi/2) inward, in s.
    Three integrands are accumulated in one density sweep: phi, f*phi, f^2*phi.
    """

    THETA_CUT = 1e-280  # quadrature cutoff; mass below it is added analytically

    def __init__(self, model, p, lower: bool, n_panels: int):
        self.kappa = model.endpoint_kappa()
        self.lower = lower
        tail = model.endpoint_tail_mass(self.THETA_CUT)
        s_cut = 0.0
        if tail > 0.0:
            s_cut = math.exp(math.log(self.THETA_CUT / PI_4) / self.kappa)
        edges = np.linspace(s_cut, 1.0, n_panels + 1)
        widths = np.diff(edges)
        nodes = edges[:-1, None] + widths[:, None] * _GL_NODES[None, :]
        sflat = nodes.ravel()
        # Distance from the arc endpoint; floored so sin(eps) never underflows
        # to an exact zero (large kappa drives s^kappa below the float range).
        eps = np.maximum(PI_4 * np.power(sflat, self.kappa), 1e-300)
        jac = PI_4 * self.kappa * np.power(sflat, self.kappa - 1.0)
        # Evaluate cos/sin of theta via the mirror identity rather than
        # forming theta = pi/2 - eps, which would round eps away near the
        # endpoint and the singular density amplifies that noise.
        if lower:
            cos_t, sin_t = np.cos(eps), np.sin(eps)
        else:
            cos_t, sin_t = np.sin(eps), np.cos(eps)
        dens = lp_norm(p, cos_t, sin_t) / (cos_t * sin_t) * model.exponent_density(cos_t, sin_t) * jac
        f = (sin_t - cos_t) / lp_norm(p, sin_t, cos_t)
        w = (_GL_WEIGHTS[None, :] * widths[:, None]).ravel()
        panel = (dens * w).reshape(n_panels, 8)
        panel_f = (dens * f * w).reshape(n_panels, 8)
        panel_f2 = (dens * f * f * w).reshape(n_panels, 8)
        # Seed the cumulatives with the analytic endpoint atom; f is -1 at
        # theta = 0 and +1 at theta = pi/2.
        f_end = -1.0 if lower else 1.0
        self.s_edges = edges
        self.cum = tail + np.concatenate([[0.0], np.cumsum(panel.sum(axis=1))])
        self.cum_f = f_end * tail + np.concatenate([[0.0], np.cumsum(panel_f.sum(axis=1))])
        self.cum_f2 = tail + np.concatenate([[0.0], np.cumsum(panel_f2.sum(axis=1))])
        self._interp = PchipInterpolator(edges, self.cum, extrapolate=False)
        self._interp_f = PchipInterpolator(edges, self.cum_f, extrapolate=False)

    @property
    def total(self) -> float:
        return float(self.cum[-1])

    @property
    def total_f(self) -> float:
        return float(self.cum_f[-1])

    @property
    def total_f2(self) -> float:
        return float(self.cum_f2[-1])

    def s_of_theta(self, theta):
        dist = theta if self.lower else PI_2 - theta
        s = np.power(np.clip(dist / PI_4, 0.0, 1.0), 1.0 / self.kappa)
        # Below the quadrature cutoff the CDF equals the endpoint atom.
        return np.clip(s, self.s_edges[0], 1.0)

    def eval(self, theta):
        return self._interp(self.s_of_theta(theta))

    def eval_f(self, theta):
        return self._interp_f(self.s_of_theta(theta))


class AngularLaw:
    """Cached angular measure of a model on the L_p arc.

    Exposes the unnormalized CDF Phi, the probability CDF Q, the partial
    moments of f under Q, and the total mass.  Construction runs the panel
    quadrature with doubling refinement until the total-mass estimate is
    stable to ``tol`` (absolute).
    """

    def __init__(self, model: Model, p: float, tol: float = 1e-8):
        self.model = model
        self.p = p
        self.tol = tol
        prev = None
        achieved = math.inf
        for n_panels in (256, 512, 1024, 2048, 4096):
            lower = _HalfCache(model, p, True, n_panels)
            upper = _HalfCache(model, p, False, n_panels)
            totals = np.array(
                [lower.total, upper.total, lower.total_f, upper.total_f]
            )
            if prev is not None:
                achieved = float(np.max(np.abs(totals - prev)))
                if achieved < tol:
                    break
            prev = totals
        else:
            raise QuadratureError(
                f"angular CDF quadrature did not converge for {model}", achieved
            )
        self._lower = lower
        self._upper = upper
        self.total_mass = lower.total + upper.total
        # The total angular mass always lies in [1, 2]; anything outside means
        # the quadrature missed mass sitting below float resolution (the
        # measure is effectively atomic at the endpoints for parameters very
        # close to the independence boundary).
        if not 1.0 - 1e-3 <= self.total_mass <= 2.0 + 1e-3:
            raise QuadratureError(
                f"implausible angular total mass {self.total_mass} for {model}",
                achieved,
            )
        total_f = lower.total_f + upper.total_f
        total_f2 = lower.total_f2 + upper.total_f2
        self.mean_f = total_f / self.total_mass
        self.var_f = max(total_f2 / self.total_mass - self.mean_f**2, 0.0)
        self._total_f = total_f

    def cdf(self, theta):
        """Unnormalized angular CDF Phi_{p,r}(theta), vectorized."""
        theta = np.asarray(theta, dtype=float)
        if np.any(theta < -1e-12) or np.any(theta > PI_2 + 1e-12):
            raise ValueError("theta must lie in [0, pi/2]")
        theta = np.clip(theta, 0.0, PI_2)
        low = theta <= PI_4
        out = np.empty(theta.shape, dtype=float)
        out[low] = self._lower.eval(theta[low])
        out[~low] = self.total_mass - self._upper.eval(theta[~low])
        return out[()] if out.ndim == 0 else out

    def normalized_cdf(self, theta):
        """Angular probability CDF Q_{p,r}(theta)."""
        return self.cdf(theta) / self.total_mass

    def f_integral(self, theta):
        """Cumulative moment int_0^theta f dQ, vectorized."""
        theta = np.asarray(theta, dtype=float)
        theta = np.clip(theta, 0.0, PI_2)
        low = theta <= PI_4
        out = np.empty(theta.shape, dtype=float)
        out[low] = self._lower.eval_f(theta[low])
        out[~low] = self._total_f - self._upper.eval_f(theta[~low])
        out = out / self.total_mass
        return out[()] if out.ndim == 0 else out


@functools.lru_cache(maxsize=256)
def _cached_law(family: str, r: float, p: float, tol: float) -> AngularLaw:
    return AngularLaw(make_model(family, r), p, tol)


def get_law(model: Model, p: float, tol: float = 1e-8) -> AngularLaw:
    """Shared per-(family, r, p) angular-law cache."""
    return _cached_law(model.family, model.r, p, tol)


def angular_cdf(model: Model, p: float, theta, tol: float = 1e-8):
    return get_law(model, p, tol).cdf(theta)


def normalized_cdf(model: Model, p: float, theta, tol: float = 1e-8):
    return get_law(model, p, tol).normalized_cdf(theta)


def _fd_steps(model: Model):
    """Clamped central finite-difference abscissae for the r-gradient."""
    r = model.r
    eps = 1e-4 * max(1.0, abs(r))
    lo, hi = model.param_bounds
    r_lo = max(r - eps, lo + 1e-12 if math.isfinite(lo) else r - eps)
    r_hi = min(r + eps, hi - 1e-12 if math.isfinite(hi) else r + eps)
    clamped = (r_lo != r - eps) or (r_hi != r + eps)
    return r_lo, r_hi, clamped


def grad_normalized_cdf(model: Model, p: float, theta, tol: float = 1e-8):
    """d/dr of Q_{p,r}(theta) by central finite differences (clamped)."""
    r_lo, r_hi, _ = _fd_steps(model)
    law_lo = _cached_law(model.family, r_lo, p, tol)
    law_hi = _cached_law(model.family, r_hi, p, tol)
    return (law_hi.normalized_cdf(theta) - law_lo.normalized_cdf(theta)) / (r_hi - r_lo)
