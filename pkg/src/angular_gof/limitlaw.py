"""Monte-Carlo simulator of the asymptotic null law of the test statistic.

The limit variable is L = int_0^{pi/2} |X(theta)| q(theta) dtheta where X is a
linear transformation of a set-indexed Wiener process W with intensity the
exponent measure Lambda_r.  The simulator discretizes W on an M x M grid of
cells with exact cell masses (rectangle identity Lambda([0,a]x[0,b]) =
a + b - ell(a,b)), evaluates the processes

    alpha(theta) = W(C_{p,theta}) + Z_p(theta)
    beta(theta)  = [alpha(theta) Phi(pi/2) - Phi(theta) alpha(pi/2)] / Phi(pi/2)^2
    gamma(theta) = beta(theta) + (int beta f' / sigma_Q^2(f)) int_0^theta f dQ
    X(theta)     = gamma(theta) - grad_r Q(theta) * I

with I = g (W(A_{(1,1)}) - ell_1(1,1) W_1(1) - ell_2(1,1) W_2(1)), and
Riemann-sums |X| q over an N-point midpoint grid (the cell containing pi/4
uses the exact closed-form integral of the singular weight).

Two index conventions are in play.  Sums over the angular sets C_{p,theta}
include a cell when its lower-left corner lies in the set (the natural
discretization of the indicator).  Marginal strips W_1(x), W_2(y) and the
rectangle blocks instead count the cells wholly contained in [0, x] and add
per-strip overflow cells carrying the Lambda-mass beyond the grid, so that
Var W_1(x) = x exactly at grid multiples.  Without the overflow cells the
marginal variances would be badly truncated for slowly-decaying families
(Hüsler–Reiss loses ~25% of the unit strip at the default coverage).
"""

from __future__ import annotations

import concurrent.futures
import functools
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .geometry import PI_2, PI_4, WeightKind
from .models import (
    Model,
    expansion_constants,
    get_law,
    grad_normalized_cdf,
    make_model,
)

__all__ = [
    "FieldGrid",
    "DESK_GRID",
    "PAPER_GRID",
    "GaussianField",
    "LimitLawDraws",
    "CriticalValueTable",
    "UnsupportedFeatureError",
    "cell_masses",
    "overflow_masses",
    "simulate_field",
    "eval_W_on_Cptheta",
    "eval_marginals",
    "eval_W_on_A",
    "eval_Zp",
    "LimitLawSimulator",
    "draw_L",
    "simulate_L",
    "quantile",
    "p_value",
    "critical_value_table",
    "replicate_rng",
]


class UnsupportedFeatureError(NotImplementedError):
    """Raised for declared-out-of-scope branches (p = inf limit law)."""


@dataclass(frozen=True)
class FieldGrid:
    """Discretization: cell step h, M grid points per axis, N angle points."""

    h: float = 0.05
    M: int = 1000
    N: int = 1000

    def __post_init__(self):
        if self.h <= 0 or self.M < 3 or self.N < 2:
            raise ValueError("invalid grid specification")

    @property
    def coverage(self) -> float:
        return self.h * (self.M - 1)

    def theta_grid(self) -> np.ndarray:
        """Midpoints theta_i = (i - 1/2) * pi / (2N), i = 1..N."""
        return (np.arange(self.N) + 0.5) * (PI_2 / self.N)


DESK_GRID = FieldGrid(h=0.05, M=200, N=500)
PAPER_GRID = FieldGrid(h=0.05, M=1000, N=1000)

GRID_PRESETS = {"desk": DESK_GRID, "paper": PAPER_GRID}


def cell_masses(model: Model, grid: FieldGrid) -> np.ndarray:
    """Lambda(C_ij) for cells [x_i, x_{i+1}) x [y_j, y_{j+1}), exact.

    Four-corner inclusion-exclusion of the rectangle identity; entries are
    clamped at zero against roundoff.
    """
    x = np.arange(grid.M) * grid.h
    R = model.rect_mass(x[:, None], x[None, :])
    masses = R[1:, 1:] - R[:-1, 1:] - R[1:, :-1] + R[:-1, :-1]
    return np.maximum(masses, 0.0)


def overflow_masses(model: Model, grid: FieldGrid, masses: np.ndarray):
    """Per-strip masses beyond the grid: row strips (y > coverage) and
    column strips (x > coverage).  Lebesgue margins make each full strip
    carry mass exactly h."""
    row_of = np.maximum(grid.h - masses.sum(axis=1), 0.0)
    col_of = np.maximum(grid.h - masses.sum(axis=0), 0.0)
    return row_of, col_of


def marg_index(x: float, grid: FieldGrid):
    """Number of complete cells of [0, x] along one axis (capped)."""
    return np.minimum(np.floor(np.asarray(x, dtype=float) / grid.h).astype(np.int64), grid.M - 1)


@dataclass
class GaussianField:
    """One realization of the discretized Wiener field with prefix sums."""

    grid: FieldGrid
    W: np.ndarray  # (M-1, M-1) core cells
    row_of: np.ndarray  # (M-1,) overflow cells (x-strip, y beyond grid)
    col_of: np.ndarray  # (M-1,) overflow cells (y-strip, x beyond grid)
    row_prefix: np.ndarray = field(init=False)  # (M-1, M): cumsum along j, core only
    w1_cum: np.ndarray = field(init=False)  # (M,): prefix of row sums incl. overflow
    w2_cum: np.ndarray = field(init=False)  # (M,): prefix of col sums incl. overflow

    def __post_init__(self):
        m = self.W.shape[0]
        self.row_prefix = np.concatenate(
            [np.zeros((m, 1)), np.cumsum(self.W, axis=1)], axis=1
        )
        rowsum = self.row_prefix[:, -1] + self.row_of
        colsum = self.W.sum(axis=0) + self.col_of
        self.w1_cum = np.concatenate([[0.0], np.cumsum(rowsum)])
        self.w2_cum = np.concatenate([[0.0], np.cumsum(colsum)])


def simulate_field(model: Model, grid: FieldGrid, seed, masses: np.ndarray | None = None) -> GaussianField:
    """Draw W_ij ~ N(0, Lambda(C_ij)) independently (plus overflow cells)."""
    if masses is None:
        masses = cell_masses(model, grid)
    row_of, col_of = overflow_masses(model, grid, masses)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    m = grid.M - 1
    z = rng.standard_normal((m, m + 2))
    return GaussianField(
        grid=grid,
        W=z[:, :m] * np.sqrt(masses),
        row_of=z[:, m] * np.sqrt(row_of),
        col_of=z[:, m + 1] * np.sqrt(col_of),
    )


def _c_bounds(grid: FieldGrid, p: float, theta: float) -> np.ndarray:
    """Per-row inclusive column counts for the C_{p,theta} sum.

    Row m (0-based, corner x = m h) includes columns j = 1..bound with
    bound = min([y_p(x)/h + 1], M-1, floor(m tan(theta)) + 1); a cell is in
    when its corner (x_i, y_j) satisfies y_j <= min(y_p(x_i), x_i tan theta).
    """
    m = np.arange(grid.M - 1)
    x = m * grid.h
    yp = geometry.y_p(p, x)
    with np.errstate(over="ignore"):
        jcap = np.where(
            np.isinf(yp),
            grid.M - 1,
            np.minimum(np.floor(yp / grid.h) + 1, grid.M - 1),
        ).astype(np.int64)
    if theta >= PI_2:
        return jcap
    tan = math.tan(theta)
    jtan = np.minimum(np.floor(m * tan) + 1, grid.M - 1).astype(np.int64)
    return np.minimum(jcap, jtan)


def eval_W_on_Cptheta(field: GaussianField, p: float, theta: float) -> float:
    """W evaluated on the angular set C_{p,theta} (finite p)."""
    if math.isinf(p):
        raise UnsupportedFeatureError("p = inf is not supported by the limit-law simulator")
    bounds = _c_bounds(field.grid, p, theta)
    rows = np.arange(field.grid.M - 1)
    return float(field.row_prefix[rows, bounds].sum())


def eval_marginals(field: GaussianField, x: float) -> tuple[float, float]:
    """(W_1(x), W_2(x)) via prefix-sum lookups (full-cell convention)."""
    idx = int(marg_index(x, field.grid))
    return float(field.w1_cum[idx]), float(field.w2_cum[idx])


def eval_W_on_A(field: GaussianField, x: float, y: float) -> float:
    """W on A_{(x,y)} = {u <= x or v <= y} by inclusion-exclusion."""
    ix = int(marg_index(x, field.grid))
    iy = int(marg_index(y, field.grid))
    w1 = float(field.w1_cum[ix])
    w2 = float(field.w2_cum[iy])
    block = float(field.row_prefix[:ix, iy].sum())
    return w1 + w2 - block


def _z_coefficients(model: Model, grid: FieldGrid, p: float, theta: float):
    """Midpoint-rule coefficients of Z_p(theta) in (W_1(x_m), W_2(.)).

    Returns (coef_w1, coef_w2, idx_w2) with Z = coef_w1 . W1_mid +
    sum_m coef_w2[m] * W2[idx_w2[m]], where W1_mid[m] = W_1 at the m-th cell
    midpoint.  theta = pi/2 keeps only the boundary-curve integral (the
    chordal integrand vanishes in that limit).
    """
    h = grid.h
    m = grid.M - 1
    xm = (np.arange(m) + 0.5) * h
    coef_w1 = np.zeros(m)
    coef_w2 = np.zeros(m)
    y_at = np.zeros(m)

    xp = geometry.x_p_of_theta(p, theta)
    if theta < PI_2:
        tan = math.tan(theta)
        mask1 = xm < xp
        lam1 = model.exponent_density(xm[mask1], xm[mask1] * tan)
        coef_w1[mask1] = h * lam1 * tan
        coef_w2[mask1] = -h * lam1
        y_at[mask1] = xm[mask1] * tan
    mask2 = xm > max(xp, 1.0)
    if np.any(mask2):
        ypx = geometry.y_p(p, xm[mask2])
        lam2 = model.exponent_density(xm[mask2], ypx)
        coef_w1[mask2] = -h * lam2 * geometry.y_p_prime_abs(p, xm[mask2])
        coef_w2[mask2] = -h * lam2
        y_at[mask2] = ypx
    idx_w2 = marg_index(y_at, grid)
    return coef_w1, coef_w2, idx_w2


def eval_Zp(field: GaussianField, model: Model, p: float, theta: float) -> float:
    """Reference (non-precomputed) evaluation of Z_p(theta)."""
    if math.isinf(p):
        raise UnsupportedFeatureError("p = inf is not supported by the limit-law simulator")
    coef_w1, coef_w2, idx_w2 = _z_coefficients(model, field.grid, p, theta)
    w1_mid = field.w1_cum[: field.grid.M - 1]
    return float(coef_w1 @ w1_mid + coef_w2 @ field.w2_cum[idx_w2])


class LimitLawSimulator:
    """Draw-independent precomputation for fast repeated draws of L.

    Everything that does not depend on the Gaussian variates (cell masses,
    gather indices, Z_p coefficient matrices, model CDF values, the gradient
    of Q in r, and the weight-cell integrals) is assembled once; each draw is
    a Gaussian sample plus prefix sums, gathers, and matrix-vector products.
    """

    def __init__(self, model: Model, p: float, grid: FieldGrid, q: WeightKind, tol: float = 1e-8):
        if math.isinf(p):
            raise UnsupportedFeatureError("p = inf is not supported by the limit-law simulator")
        self.model = model
        self.p = p
        self.grid = grid
        self.q = q
        m = grid.M - 1

        masses = cell_masses(model, grid)
        row_of, col_of = overflow_masses(model, grid, masses)
        self._sqrt_mass = np.sqrt(masses)
        self._sqrt_row_of = np.sqrt(row_of)
        self._sqrt_col_of = np.sqrt(col_of)

        law = get_law(model, p, tol)
        self.law = law
        theta = grid.theta_grid()
        self.theta = theta
        self.total_mass = law.total_mass
        self._Q = law.normalized_cdf(theta)
        self._int_f = law.f_integral(theta)
        self._f_prime = geometry.constraint_f_prime(p, theta)
        self._sigma2_f = law.var_f
        self._grad_Q = grad_normalized_cdf(model, p, theta, tol)
        self._dtheta = PI_2 / grid.N

        # C_{p,theta} gather indices into the flattened row-prefix matrix.
        offsets = np.arange(m, dtype=np.int64) * (m + 1)
        bounds = np.empty((grid.N, m), dtype=np.int64)
        for i, th in enumerate(theta):
            bounds[i] = _c_bounds(grid, p, th)
        self._c_idx = bounds + offsets[None, :]
        self._c_idx_full = _c_bounds(grid, p, PI_2) + offsets

        # Z_p coefficient matrices and W2 gather indices.
        A = np.empty((grid.N, m))
        B = np.empty((grid.N, m))
        idx2 = np.empty((grid.N, m), dtype=np.int64)
        for i, th in enumerate(theta):
            A[i], B[i], idx2[i] = _z_coefficients(model, grid, p, th)
        self._z_w1 = A
        self._z_w2 = B
        self._z_idx2 = idx2
        self._zf_w1, self._zf_w2, self._zf_idx2 = _z_coefficients(model, grid, p, PI_2)

        # Estimator-expansion constants and the (1,1) evaluation indices.
        g, (x0, y0) = expansion_constants(model)
        self._g = g
        d1, d2 = model.stdf_partials(x0, y0)
        self._d1, self._d2 = float(d1), float(d2)
        self._i11 = int(marg_index(x0, grid))
        self._j11 = int(marg_index(y0, grid))

        # Exact per-cell integrals of the weight function.
        edges = np.arange(grid.N + 1) * self._dtheta
        self._q_cells = np.asarray(
            geometry.weight_q_cell_integral(q, edges[:-1], edges[1:]), dtype=float
        )

    # -- draws ---------------------------------------------------------------

    def draw_X(self, rng: np.random.Generator) -> np.ndarray:
        """One trajectory of X on the theta grid."""
        m = self.grid.M - 1
        z = rng.standard_normal((m, m + 2))
        core = z[:, :m] * self._sqrt_mass
        row_of = z[:, m] * self._sqrt_row_of
        col_of = z[:, m + 1] * self._sqrt_col_of

        prefix = np.concatenate([np.zeros((m, 1)), np.cumsum(core, axis=1)], axis=1)
        w1_cum = np.concatenate([[0.0], np.cumsum(prefix[:, -1] + row_of)])
        w2_cum = np.concatenate([[0.0], np.cumsum(core.sum(axis=0) + col_of)])
        flat = prefix.ravel()

        c_vals = flat[self._c_idx].sum(axis=1)
        c_full = flat[self._c_idx_full].sum()

        w1_mid = w1_cum[:m]
        z_vals = self._z_w1 @ w1_mid + (self._z_w2 * w2_cum[self._z_idx2]).sum(axis=1)
        z_full = self._zf_w1 @ w1_mid + self._zf_w2 @ w2_cum[self._zf_idx2]

        alpha = c_vals + z_vals
        alpha_full = c_full + z_full
        beta = alpha / self.total_mass - self._Q * (alpha_full / self.total_mass)
        c_beta = self._dtheta * float(beta @ self._f_prime)
        gamma = beta + (c_beta / self._sigma2_f) * self._int_f

        w1_1 = w1_cum[self._i11]
        w2_1 = w2_cum[self._j11]
        block = prefix[: self._i11, self._j11].sum()
        i_term = self._g * (w1_1 + w2_1 - block - self._d1 * w1_1 - self._d2 * w2_1)
        return gamma - self._grad_Q * i_term

    def draw(self, rng: np.random.Generator) -> float:
        """One draw of L (Riemann sum with exact weight-cell integrals)."""
        x = self.draw_X(rng)
        return float(np.abs(x) @ self._q_cells)


@dataclass
class LimitLawDraws:
    """B simulated draws of the null law with full reproduction metadata."""

    values: np.ndarray
    family: str
    r: float
    p: float
    q: WeightKind
    grid: FieldGrid
    base_seed: int
    B: int


def replicate_rng(base_seed: int, b: int) -> np.random.Generator:
    """Independent, scheduling-invariant stream for replicate b."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=base_seed, spawn_key=(b,)))
    )


@functools.lru_cache(maxsize=16)
def _cached_simulator(family: str, r: float, p: float, grid: FieldGrid, q: WeightKind, tol: float):
    return LimitLawSimulator(make_model(family, r), p, grid, q, tol)


def get_simulator(model: Model, p: float, grid: FieldGrid, q: WeightKind, tol: float = 1e-8) -> LimitLawSimulator:
    return _cached_simulator(model.family, model.r, p, grid, q, tol)


def draw_L(model: Model, p: float, grid: FieldGrid, q: WeightKind, seed) -> float:
    """One draw of the limit variable L (convenience wrapper)."""
    sim = get_simulator(model, p, grid, q)
    rng = seed if isinstance(seed, np.random.Generator) else replicate_rng(int(seed), 0)
    return sim.draw(rng)


def simulate_L(
    model: Model,
    p: float,
    grid: FieldGrid,
    q: WeightKind,
    B: int,
    base_seed: int,
    threads: int = 1,
) -> LimitLawDraws:
    """B independent draws; replicate b is seeded from (base_seed, b), so the
    result is identical at any thread count."""
    if B < 1:
        raise ValueError("B must be >= 1")
    sim = get_simulator(model, p, grid, q)
    values = np.empty(B)

    def work(b: int) -> float:
        return sim.draw(replicate_rng(base_seed, b))

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            for b, val in enumerate(pool.map(work, range(B))):
                values[b] = val
    else:
        for b in range(B):
            values[b] = work(b)
    return LimitLawDraws(
        values=values, family=model.family, r=model.r, p=p, q=q,
        grid=grid, base_seed=base_seed, B=B,
    )


def quantile(draws: LimitLawDraws | np.ndarray, alpha: float) -> float:
    """ceil(alpha * B)-th order statistic of the draws."""
    values = draws.values if isinstance(draws, LimitLawDraws) else np.asarray(draws)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    b = values.size
    rank = max(int(math.ceil(alpha * b)), 1)
    return float(np.sort(values)[rank - 1])


def p_value(draws: LimitLawDraws | np.ndarray, t: float) -> float:
    """Exceedance proportion (1/B) #{b : L_b >= t}."""
    values = draws.values if isinstance(draws, LimitLawDraws) else np.asarray(draws)
    return float(np.count_nonzero(values >= t)) / values.size


def _round_sig(x: float, digits: int = 12) -> float:
    """Round to a fixed number of significant digits (table quantization)."""
    return float(f"{x:.{digits}g}")


@dataclass
class CriticalValueTable:
    """Quantiles of L on a parameter grid, linearly interpolated in r.

    Quantile values are quantized to 12 significant digits at construction so
    that a table written to disk and read back reproduces decisions exactly.
    """

    family: str
    p: float
    grid: FieldGrid
    q: WeightKind
    r_grid: np.ndarray
    alphas: tuple
    B: int
    seed: int
    quantiles: np.ndarray  # shape (len(r_grid), len(alphas))

    def interp(self, r: float, alpha: float) -> float:
        try:
            col = self.alphas.index(alpha)
        except ValueError:
            raise KeyError(f"alpha {alpha} not in table (have {self.alphas})") from None
        r_clamped = float(np.clip(r, self.r_grid[0], self.r_grid[-1]))
        return float(np.interp(r_clamped, self.r_grid, self.quantiles[:, col]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    def dumps(self) -> str:
        out = io.StringIO()
        out.write("# angular-gof critical-value table v1\n")
        out.write(f"# family={self.family}\n")
        out.write(f"# p={self.p:.12g}\n")
        out.write(f"# grid_h={self.grid.h:.12g} grid_M={self.grid.M} grid_N={self.grid.N}\n")
        out.write(f"# q={self.q.value}\n")
        out.write(f"# B={self.B}\n")
        out.write(f"# seed={self.seed}\n")
        out.write("# columns: r " + " ".join(f"q{a:.12g}" for a in self.alphas) + "\n")
        for i, r in enumerate(self.r_grid):
            row = " ".join(f"{v:.12g}" for v in self.quantiles[i])
            out.write(f"{r:.12g} {row}\n")
        return out.getvalue()

    @classmethod
    def load(cls, path) -> "CriticalValueTable":
        meta = {}
        rows = []
        alphas = None
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if body.startswith("columns:"):
                        alphas = tuple(
                            float(tok[1:]) for tok in body.split()[2:]
                        )
                    else:
                        for tok in body.split():
                            if "=" in tok:
                                key, val = tok.split("=", 1)
                                meta[key] = val
                    continue
                rows.append([float(tok) for tok in line.split()])
        if alphas is None or not rows:
            raise ValueError(f"malformed critical-value table {path}")
        arr = np.asarray(rows)
        grid = FieldGrid(h=float(meta["grid_h"]), M=int(meta["grid_M"]), N=int(meta["grid_N"]))
        return cls(
            family=meta["family"],
            p=float(meta["p"]),
            grid=grid,
            q=WeightKind.from_name(meta["q"]),
            r_grid=arr[:, 0],
            alphas=alphas,
            B=int(meta["B"]),
            seed=int(meta["seed"]),
            quantiles=arr[:, 1:],
        )


def critical_value_table(
    family: str,
    p: float,
    grid: FieldGrid,
    q: WeightKind,
    r_grid,
    alphas,
    B: int,
    seed: int,
    threads: int = 1,
) -> CriticalValueTable:
    """Simulate L on an r grid and tabulate the requested quantiles.

    Replicate streams are keyed by (seed, r-index, b) so the table is
    deterministic and independent of scheduling.
    """
    r_grid = np.asarray(sorted(float(r) for r in r_grid))
    alphas = tuple(float(a) for a in alphas)
    quants = np.empty((r_grid.size, len(alphas)))
    for i, r in enumerate(r_grid):
        model = make_model(family, float(r))
        draws = simulate_L(model, p, grid, q, B, base_seed=seed * 1_000_003 + i, threads=threads)
        for j, a in enumerate(alphas):
            quants[i, j] = _round_sig(quantile(draws, a))
    return CriticalValueTable(
        family=family, p=p, grid=grid, q=q, r_grid=r_grid,
        alphas=alphas, B=B, seed=seed, quantiles=quants,
    )
