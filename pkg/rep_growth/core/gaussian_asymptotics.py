"""
Gaussian side of the growth problem.

The weights of V, counted with multiplicity and divided by dim V, form the
step law of a lattice random walk; the multiplicity of a weight chi in V^n is
(dim V)^n times the probability that the walk sits at chi after n steps. This
module computes the moments of that law, the leading local-limit estimate of
the hitting probabilities, their root-difference filtered versions (estimates
of a_lambda (dim V)^-n), lattice sums of those (estimates of b_n (dim V)^-n)
and power-law fits of computed growth series.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import floor, ceil, isqrt, lcm
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from rep_growth.core.cartan import RootDatum, Weight, WeightError, is_dominant, weyl_dimension
from rep_growth.core.charring import dimension
from rep_growth.core.schemas import FitReport
from rep_growth.core.tensor_growth import (
    DecompositionTable,
    GrowthSeries,
    RepSpec,
    iter_tables,
    rep_character,
)

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 40.0
MAX_SUBSET_ROOTS = 10
MAX_SUM_POINTS = 20_000_000
MIN_WINDOW_LENGTH = 5


class DegenerateModelError(Exception):
    """Raised when the weights of V do not span the character lattice"""

    def __init__(self, message: str, null_direction: Optional[Tuple[int, ...]] = None):
        super().__init__(message)
        self.null_direction = null_direction


class UnsupportedError(Exception):
    """Raised when a computation is outside what this module supports"""

    pass


class FitError(Exception):
    """Raised when a series cannot be fitted on the requested window"""

    pass


@dataclass(frozen=True, eq=False)
class MomentData:
    """
    Moments and lattice data of the single-step weight distribution.

    ``mean`` and ``covariance`` are exact; ``Q`` is the (pseudo-)inverse of the
    covariance as a float matrix. ``step_lattice`` is a Hermite-reduced basis
    of the lattice spanned by differences of weights of V and ``base_point``
    is one weight of V, so the walk at time n lives on
    ``n * base_point + step_lattice``.
    """

    r: int
    dim: int
    mean: Tuple[Fraction, ...]
    covariance: Tuple[Tuple[Fraction, ...], ...]
    Q: np.ndarray
    step_lattice: Tuple[Tuple[int, ...], ...]
    base_point: Weight
    covolume: Optional[int]
    spanning: bool
    null_direction: Optional[Tuple[int, ...]] = None

    @property
    def mean_vector(self) -> np.ndarray:
        return np.array([float(x) for x in self.mean])

    @property
    def covariance_matrix(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.covariance])

    @property
    def normalizer(self) -> float:
        """Covolume over the Gaussian normalization (2 pi)^{r/2} sqrt(det covariance)"""
        determinant = float(np.linalg.det(self.covariance_matrix))
        return self.covolume / ((2 * math.pi) ** (self.r / 2) * math.sqrt(determinant))

    def quadratic(self, x: Sequence[float]) -> float:
        """Q(x) for a real vector"""
        x = np.asarray(x, dtype=float)
        return float(x @ self.Q @ x)


def hermite_basis(vectors: Sequence[Sequence[int]], r: int) -> List[Tuple[int, ...]]:
    """
    Row-style Hermite normal form of the lattice generated by ``vectors``.

    Rows are in echelon form with positive pivots and entries above each pivot
    reduced into [0, pivot).
    """
    rows = [list(v) for v in vectors if any(v)]
    basis = []
    for col in range(r):
        while True:
            active = [row for row in rows if row[col] != 0]
            if len(active) <= 1:
                break
            pivot = min(active, key=lambda row: abs(row[col]))
            for row in active:
                if row is not pivot:
                    q = row[col] // pivot[col]
                    for k in range(col, r):
                        row[k] -= q * pivot[k]
            rows = [row for row in rows if any(row)]
        active = [row for row in rows if row[col] != 0]
        if active:
            pivot = active[0]
            rows = [row for row in rows if row is not pivot]
            if pivot[col] < 0:
                pivot = [-x for x in pivot]
            basis.append(pivot)
    for i, row in enumerate(basis):
        p = _pivot_column(row)
        for j in range(i):
            q = basis[j][p] // row[p]
            if q:
                basis[j] = [a - q * b for a, b in zip(basis[j], row)]
    return [tuple(row) for row in basis]


def _pivot_column(row: Sequence[int]) -> int:
    return next(k for k, x in enumerate(row) if x != 0)


def _integer_null_direction(covariance: Sequence[Sequence[Fraction]]) -> Optional[Tuple[int, ...]]:
    matrix = sympy.Matrix(
        [[sympy.Rational(x.numerator, x.denominator) for x in row] for row in covariance]
    )
    null = matrix.nullspace()
    if not null:
        return None
    vector = null[0]
    scale = lcm(*(int(sympy.fraction(x)[1]) for x in vector))
    integers = [int(x * scale) for x in vector]
    divisor = math.gcd(*integers)
    if integers[_pivot_column(integers)] < 0:
        divisor = -divisor
    return tuple(x // divisor for x in integers)


def weight_moments(spec: RepSpec) -> MomentData:
    """
    Exact mean and covariance of the step law Pr[X = chi] = mult(chi) / dim V,
    the step lattice with its covolume, and Q.

    A non-spanning (degenerate) model is returned with ``spanning=False`` and an
    integer null direction of the covariance.
    """
    rd = spec.datum
    chi = rep_character(spec)
    d = dimension(chi)
    weights = sorted(chi.terms.items())
    r = rd.r
    mean = tuple(Fraction(sum(c * w[k] for w, c in weights), d) for k in range(r))
    covariance = tuple(
        tuple(
            Fraction(sum(c * w[i] * w[j] for w, c in weights), d) - mean[i] * mean[j]
            for j in range(r)
        )
        for i in range(r)
    )
    base = weights[0][0]
    differences = [tuple(a - b for a, b in zip(w, base)) for w, _ in weights[1:]]
    basis = hermite_basis(differences, r)
    spanning = len(basis) == r
    covolume = math.prod(row[_pivot_column(row)] for row in basis) if spanning else None
    cov_float = np.array([[float(x) for x in row] for row in covariance])
    Q = np.linalg.inv(cov_float) if spanning else np.linalg.pinv(cov_float)
    null_direction = None if spanning else _integer_null_direction(covariance)
    logger.debug(
        f"Moments for {rd.cartan_type}: dim={d}, covolume={covolume}, spanning={spanning}"
    )
    return MomentData(
        r=r,
        dim=d,
        mean=mean,
        covariance=covariance,
        Q=Q,
        step_lattice=tuple(basis),
        base_point=base,
        covolume=covolume,
        spanning=spanning,
        null_direction=null_direction,
    )


def _require_spanning(md: MomentData) -> None:
    if not md.spanning:
        logger.error(f"Degenerate covariance, null direction {md.null_direction}")
        raise DegenerateModelError(
            f"Weights of V do not span the character lattice; null direction {md.null_direction}",
            md.null_direction,
        )


def _coset_mask(md: MomentData, n: int, points: np.ndarray) -> np.ndarray:
    """Which rows of ``points`` lie in n * base_point + step_lattice"""
    v = points.astype(np.int64) - n * np.asarray(md.base_point, dtype=np.int64)
    mask = np.ones(len(v), dtype=bool)
    for row in md.step_lattice:
        p = _pivot_column(row)
        pivot = row[p]
        mask &= v[:, p] % pivot == 0
        v = v - np.outer(v[:, p] // pivot, np.asarray(row, dtype=np.int64))
    mask &= ~np.any(v != 0, axis=1)
    return mask


def _density(md: MomentData, n: int, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    x = points - n * md.mean_vector
    q = np.einsum("ij,jk,ik->i", x, md.Q, x)
    values = md.normalizer * n ** (-md.r / 2) * np.exp(-q / (2 * n))
    values[~_coset_mask(md, n, points)] = 0.0
    return values


def local_clt_weight_estimate(md: MomentData, n: int, chi: Sequence[int]) -> float:
    """
    Leading local-limit estimate of Pr[X_1 + ... + X_n = chi].

    Returns n^{-r/2} P_0 exp(-Q(chi - n mean) / 2n) with P_0 the covolume over
    the Gaussian normalizer, and exactly 0 off the reachable coset.

    Raises:
        DegenerateModelError: If the covariance is singular
    """
    _require_spanning(md)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return float(_density(md, n, np.array([chi], dtype=np.int64))[0])


@lru_cache(maxsize=64)
def _subset_expansion(rd: RootDatum) -> Tuple[np.ndarray, np.ndarray]:
    """Shifts sum(S) and signs (-1)^|S| over all subsets S of positive roots"""
    if rd.u > MAX_SUBSET_ROOTS:
        raise UnsupportedError(
            f"Subset expansion over {rd.u} positive roots exceeds the cap of {MAX_SUBSET_ROOTS}"
        )
    shifts = [rd.zero()]
    signs = [1]
    for alpha in rd.positive_roots:
        shifts += [tuple(a + b for a, b in zip(s, alpha)) for s in shifts]
        signs += [-x for x in signs]
    return np.array(shifts, dtype=np.int64).reshape(-1, rd.r), np.array(signs, dtype=float)


def _filtered(md: MomentData, rd: RootDatum, n: int, points: np.ndarray) -> np.ndarray:
    shifts, signs = _subset_expansion(rd)
    total = np.zeros(len(points))
    for shift, sign in zip(shifts, signs):
        total += sign * _density(md, n, points + shift)
    return total


def approx_a_lambda(md: MomentData, rd: RootDatum, n: int, lam: Sequence[int]) -> float:
    """
    Root-difference filtered Gaussian estimate of a_lambda (dim V)^-n.

    For each positive root alpha the difference f(v) -> f(v) - f(v + alpha) is
    applied to the local-limit estimate; the u nested differences are
    expanded over the 2^u subsets of positive roots.

    Raises:
        WeightError: If ``lam`` is not dominant
        UnsupportedError: If u exceeds MAX_SUBSET_ROOTS
        DegenerateModelError: If the covariance is singular
    """
    _require_spanning(md)
    lam = rd.check_weight(lam)
    if not is_dominant(rd, lam):
        raise WeightError(f"approx_a_lambda needs a dominant weight, got {lam}")
    return float(_filtered(md, rd, n, np.array([lam], dtype=np.int64))[0])


def dominant_coset_points(
    md: MomentData, rd: RootDatum, n: int, truncation: float = DEFAULT_TRUNCATION
) -> np.ndarray:
    """
    Dominant points of the reachable coset with Q(lambda - n mean) / 2n <= truncation.
    """
    center = n * md.mean_vector
    half = np.sqrt(2 * truncation * n * np.diag(md.covariance_matrix))
    low = [ceil(c - h) for c, h in zip(center, half)]
    high = [floor(c + h) for c, h in zip(center, half)]
    for k in range(rd.rank_ss):
        low[k] = max(low[k], 0)
    if any(lo > hi for lo, hi in zip(low, high)):
        return np.zeros((0, md.r), dtype=np.int64)
    size = math.prod(hi - lo + 1 for lo, hi in zip(low, high))
    if size > MAX_SUM_POINTS:
        raise UnsupportedError(
            f"Truncation box has {size} points, above the cap of {MAX_SUM_POINTS}"
        )
    axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in zip(low, high)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, md.r)
    x = grid - center
    q = np.einsum("ij,jk,ik->i", x, md.Q, x)
    keep = (q / (2 * n) <= truncation) & _coset_mask(md, n, grid)
    return grid[keep]


def approx_b_n(
    md: MomentData, rd: RootDatum, n: int, truncation: float = DEFAULT_TRUNCATION
) -> float:
    """
    Estimate of b_n (dim V)^-n: the sum of ``approx_a_lambda`` over the
    dominant coset points inside the truncation radius.
    """
    _require_spanning(md)
    points = dominant_coset_points(md, rd, n, truncation)
    if len(points) == 0:
        logger.warning(f"No dominant coset points within truncation {truncation} at n={n}")
        return 0.0
    return float(_filtered(md, rd, n, points).sum())


def fit_exponent(series: GrowthSeries, window: Tuple[int, int]) -> FitReport:
    """
    Least-squares fit of log(b_n (dim V)^-n) = log C + r log n over a window.

    Also reports A_hat and B_hat, the smallest and largest value of
    b_n n^{u/2} (dim V)^-n on the window.

    Raises:
        FitError: If the window is too short, not covered by the series, or a
            value is not positive
    """
    n_lo, n_hi = int(window[0]), int(window[1])
    if n_hi - n_lo < MIN_WINDOW_LENGTH:
        raise FitError(
            f"Window [{n_lo}, {n_hi}] is too short; need n_hi - n_lo >= {MIN_WINDOW_LENGTH}"
        )
    values = series.normalized()
    missing = [n for n in range(n_lo, n_hi + 1) if n not in values]
    if missing:
        raise FitError(f"Series does not cover window [{n_lo}, {n_hi}]; missing n={missing[0]}")
    ns = np.arange(n_lo, n_hi + 1, dtype=float)
    ys = np.array([values[n] for n in range(n_lo, n_hi + 1)], dtype=float)
    if np.any(ys <= 0):
        bad = int(ns[np.argmax(ys <= 0)])
        raise FitError(f"Normalized value at n={bad} is not positive")
    log_n, log_y = np.log(ns), np.log(ys)
    slope, intercept = np.polyfit(log_n, log_y, 1)
    residual = log_y - (slope * log_n + intercept)
    u = series.spec.datum.u
    scaled = ys * ns ** (u / 2)
    report = FitReport(
        window=(n_lo, n_hi),
        r_hat=float(slope),
        C_hat=float(math.exp(intercept)),
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        target=-u / 2,
        A_hat=float(scaled.min()),
        B_hat=float(scaled.max()),
    )
    logger.info(f"Fit on [{n_lo}, {n_hi}]: r_hat={report.r_hat:.6f}, target={report.target}")
    return report


@dataclass
class CompareRow:
    kind: str
    n: int
    weight: Optional[Weight]
    exact: float
    approx: float

    @property
    def ratio(self) -> float:
        return self.approx / self.exact if self.exact else float("nan")


def _sample_weights(md: MomentData, rd: RootDatum, table: DecompositionTable) -> List[Weight]:
    """Table weights nearest to k * delta (plus the torus drift) for k in 0, sqrt n, 2 sqrt n"""
    if not table.entries:
        return []
    step = isqrt(table.n)
    drift = [round(float(x) * table.n) for x in md.mean]
    keys = sorted(table.entries)
    chosen = []
    for k in (0, step, 2 * step):
        target = [
            k * d + (0 if i < rd.rank_ss else drift[i]) for i, d in enumerate(rd.delta)
        ]
        best = min(keys, key=lambda w: (sum((a - b) ** 2 for a, b in zip(w, target)), w))
        if best not in chosen:
            chosen.append(best)
    return chosen


@dataclass
class Comparison:
    rows: List[CompareRow] = field(default_factory=list)
    profiles: List[Dict[str, float]] = field(default_factory=list)


def compare_report(
    spec: RepSpec,
    n_list: Sequence[int],
    truncation: float = DEFAULT_TRUNCATION,
    backend: str = "auto",
) -> Comparison:
    """
    Join the exact and Gaussian pipelines.

    For every n in ``n_list`` emits a ``b_n`` row (exact normalized b_n against
    ``approx_b_n``) followed by ``a_lambda`` rows at sample dominant weights,
    and records the typical size profile of the exact table.
    """
    comparison = Comparison()
    if not n_list:
        return comparison
    rd = spec.datum
    md = weight_moments(spec)
    _require_spanning(md)
    wanted = sorted(set(int(n) for n in n_list))
    rows = comparison.rows
    for n, table, *_ in iter_tables(spec, wanted[-1], mode="exact", backend=backend):
        if n not in wanted:
            continue
        scale = md.dim**n
        rows.append(CompareRow("b_n", n, None, table.b / scale, approx_b_n(md, rd, n, truncation)))
        for lam in _sample_weights(md, rd, table):
            rows.append(
                CompareRow(
                    "a_lambda",
                    n,
                    lam,
                    table.entries[lam] / scale,
                    approx_a_lambda(md, rd, n, lam),
                )
            )
        comparison.profiles.append(typical_size_profile(md, rd, table))
    logger.info(f"Compared {len(wanted)} tensor powers for {rd.cartan_type}")
    return comparison


def typical_size_profile(
    md: MomentData, rd: RootDatum, table: DecompositionTable
) -> Dict[str, float]:
    """
    Multiplicity-weighted averages over one decomposition: the scaled length
    sqrt(Q(lambda - n mean) / n), which stays of order 1, and
    log(dim lambda) / log n, which approaches u/2.
    """
    n = table.n
    total = sum(table.entries.values())
    if not total or n < 2:
        return {"n": float(n), "mean_scaled_length": 0.0, "mean_dimension_exponent": 0.0}
    center = n * md.mean_vector
    length = 0.0
    exponent = 0.0
    for lam, a in table.entries.items():
        share = a / total
        x = np.asarray(lam, dtype=float) - center
        length += share * math.sqrt(max(md.quadratic(x), 0.0) / n)
        exponent += share * math.log(weyl_dimension(rd, lam)) / math.log(n)
    return {
        "n": float(n),
        "mean_scaled_length": float(length),
        "mean_dimension_exponent": float(exponent),
    }
