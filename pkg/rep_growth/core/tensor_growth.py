"""
Decomposition of tensor powers V^n and the growth series b_n.

``extract_multiplicities`` reads the multiplicities a_lambda off the product of
the character with the root difference operator; ``peel_oracle`` recomputes
the same table by repeatedly subtracting irreducible characters and serves as
an independent check.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from rep_growth.core.cartan import (
    RootDatum,
    Weight,
    WeightError,
    dot_to_dominant,
    is_dominant,
    negative_of_longest,
    weyl_dimension,
)
from rep_growth.core.charring import (
    Coefficient,
    FormalCharacter,
    apply_root_difference,
    char_add,
    char_mul,
    dimension,
    irreducible_character,
    printed_root_difference,
)
from rep_growth.core.dense import DenseCharacter, dense_root_difference, dense_supported

logger = logging.getLogger(__name__)

DEFAULT_MEMORY_BUDGET = 8 * 1024**3

# normalized extraction: values below this are float noise around zero
NEGATIVE_TOLERANCE = 1e-12
# warn when the total of a normalized power drifts this far from 1
MASS_TOLERANCE = 1e-9

MODES = ("exact", "normalized")
BACKENDS = ("auto", "sparse", "dense")


class RepSpecError(Exception):
    """Raised when a RepSpec is invalid"""

    pass


class NotACharacterError(Exception):
    """Raised when extraction or peeling shows the input is not a character"""

    def __init__(self, message: str, witness: Optional[Weight] = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class RepSpec:
    datum: RootDatum
    summands: Tuple[Tuple[Weight, int], ...]

    @property
    def dim(self) -> int:
        return sum(m * weyl_dimension(self.datum, hw) for hw, m in self.summands)

    @property
    def summand_count(self) -> int:
        return sum(m for _, m in self.summands)


def make_rep_spec(datum: RootDatum, summands: Sequence[Tuple[Sequence[int], int]]) -> RepSpec:
    """
    Validate (highest_weight, multiplicity) pairs.

    Raises:
        RepSpecError: If a summand has the wrong length, is not dominant, or has
            a multiplicity below 1; the message names the summand index
    """
    if not summands:
        raise RepSpecError("A representation needs at least one summand")
    checked = []
    for index, (hw, mult) in enumerate(summands):
        try:
            hw = datum.check_weight(hw)
        except WeightError as e:
            raise RepSpecError(f"Summand {index}: {e}")
        if not is_dominant(datum, hw):
            raise RepSpecError(f"Summand {index}: highest weight {hw} is not dominant")
        if int(mult) < 1:
            raise RepSpecError(f"Summand {index}: multiplicity {mult} must be >= 1")
        checked.append((hw, int(mult)))
    return RepSpec(datum, tuple(checked))


def dual_spec(spec: RepSpec) -> RepSpec:
    """The dual representation: highest weights -w0(lambda), torus part negated"""
    return RepSpec(
        spec.datum,
        tuple((negative_of_longest(spec.datum, hw), m) for hw, m in spec.summands),
    )


@dataclass
class DecompositionTable:
    n: int
    entries: Dict[Weight, Coefficient]

    @property
    def b(self) -> Coefficient:
        return sum(self.entries.values())


@dataclass
class GrowthRow:
    n: int
    b_exact: Optional[int]
    b_normalized: float
    support_size: int
    seconds: float
    mass_drift: float = 0.0


@dataclass
class GrowthSeries:
    """Rows for n = 1..n_max; b_0 = 1 is implied and never stored"""

    spec: RepSpec
    mode: str
    rows: List[GrowthRow] = field(default_factory=list)
    truncated: bool = False

    def normalized(self) -> Dict[int, float]:
        return {row.n: row.b_normalized for row in self.rows}

    @property
    def max_mass_drift(self) -> float:
        return max((row.mass_drift for row in self.rows), default=0.0)


class PowerTable(NamedTuple):
    n: int
    table: DecompositionTable
    support_size: int
    estimated_bytes: int
    mass_drift: float


def rep_character(spec: RepSpec) -> FormalCharacter:
    """Sum of multiplicity times irreducible character over the summands"""
    chi = FormalCharacter(spec.datum)
    for hw, mult in spec.summands:
        chi = char_add(chi, irreducible_character(spec.datum, hw).scale(mult))
    return chi


def _table_from_terms(
    rd: RootDatum, n: int, terms: Dict[Weight, Coefficient]
) -> DecompositionTable:
    entries = {}
    for w, c in terms.items():
        if not is_dominant(rd, w):
            continue
        if isinstance(c, int):
            if c < 0:
                logger.error(f"Negative multiplicity {c} at {w}")
                raise NotACharacterError(
                    f"Extracted coefficient {c} at dominant weight {w} is negative", w
                )
            entries[w] = c
        elif c < -NEGATIVE_TOLERANCE:
            logger.error(f"Negative multiplicity {c} at {w}")
            raise NotACharacterError(
                f"Extracted coefficient {c} at dominant weight {w} is negative", w
            )
        elif c > 0:
            entries[w] = c
    return DecompositionTable(n, entries)


def extract_multiplicities(chi: FormalCharacter, n: int = 0) -> DecompositionTable:
    """
    Multiplicities a_lambda of the irreducibles in a character.

    Args:
        chi (FormalCharacter): A W-invariant character of a representation
        n (int): Tensor power recorded in the table

    Returns:
        DecompositionTable: Dominant weights with their nonzero multiplicities

    Raises:
        NotACharacterError: If some extracted coefficient is negative
    """
    difference = apply_root_difference(chi)
    return _table_from_terms(chi.datum, n, dict(difference.terms))


def shifted_coefficients(chi: FormalCharacter) -> Dict[Weight, Coefficient]:
    """
    The coefficients c_lambda = a_{lambda - delta} read off the product with
    prod(1 - [alpha]) at the points lambda in delta + dominant weights, after
    removing the unit (-1)^u [2 delta].
    """
    rd = chi.datum
    printed = printed_root_difference(chi)
    sign = -1 if rd.u % 2 else 1
    shift = tuple(-x for x in rd.delta)
    coefficients = {}
    for w, c in printed.items():
        lam = tuple(a + b for a, b in zip(w, shift))
        if all(lam[k] >= 1 for k in range(rd.rank_ss)):
            coefficients[lam] = sign * c
    return coefficients


def _peel_key(rd: RootDatum, w: Weight):
    # lexicographic in simple-root coordinates refines the dominance order
    return rd.root_coordinates(w) + tuple(w[rd.rank_ss:]) + tuple(w)


def peel_oracle(chi: FormalCharacter, n: int = 0) -> DecompositionTable:
    """
    Decompose by repeatedly removing the irreducible of a maximal weight.

    While the character is nonzero, take the lexicographically largest weight
    in simple-root coordinates, which is maximal for the dominance order; it
    must be dominant with positive coefficient m. Record a_lambda = m and
    subtract m times the irreducible character.

    Raises:
        NotACharacterError: If the selected weight is not dominant or its
            coefficient is not positive
    """
    rd = chi.datum
    remaining = chi
    entries = {}
    while len(remaining):
        top = max(remaining, key=lambda w: _peel_key(rd, w))
        m = remaining[top]
        if not is_dominant(rd, top) or m <= 0:
            logger.error(f"Peeling stopped at {top} with coefficient {m}")
            raise NotACharacterError(
                f"Maximal weight {top} with coefficient {m} cannot start an irreducible", top
            )
        entries[top] = m
        remaining = char_add(remaining, irreducible_character(rd, top).scale(-m))
    return DecompositionTable(n, entries)


def find_anti_invariance_violation(
    difference: FormalCharacter, weights: Optional[Iterable[Weight]] = None
) -> Optional[Weight]:
    """
    Check that a root-difference product is anti-invariant under the dot
    action: the coefficient at w.mu is sgn(w) times the coefficient at mu, and
    nothing sits on a shifted wall. Returns the first violating weight among
    ``weights`` (default: the whole support, in sorted order).
    """
    rd = difference.datum
    for w in sorted(difference) if weights is None else weights:
        nu, sign = dot_to_dominant(rd, w)
        if sign == 0 or difference[w] != sign * difference[nu]:
            return w
    return None


def conservation_total(rd: RootDatum, table: DecompositionTable) -> int:
    """Sum of a_lambda times the Weyl dimension of lambda"""
    return sum(a * weyl_dimension(rd, lam) for lam, a in table.entries.items())


def estimate_sparse_bytes(chi: FormalCharacter) -> int:
    """Approximate footprint of a sparse character: key tuple, coefficient, dict slot"""
    if not len(chi):
        return 0
    r = chi.datum.r
    sample = next(iter(chi.terms.values()))
    if isinstance(sample, int):
        width = 28 + max(abs(c).bit_length() for c in chi.terms.values()) // 8
    else:
        width = 24
    return len(chi) * (56 + 8 * r + 32 * r + width + 48)


def _resolve_backend(datum: RootDatum, backend: str) -> str:
    if backend not in BACKENDS:
        raise ValueError(f"Unknown backend {backend!r}")
    if backend == "auto":
        return "dense" if dense_supported(datum) else "sparse"
    if backend == "dense" and not dense_supported(datum):
        raise ValueError(f"Dense backend supports rank <= 3, got r={datum.r}")
    return backend


def _mass_drift(power) -> float:
    if isinstance(power, DenseCharacter):
        total = float(power.array.sum())
    else:
        total = float(dimension(power))
    return abs(total - 1.0)


def iter_tables(
    spec: RepSpec, n_max: int, mode: str = "exact", backend: str = "auto"
) -> Iterator[PowerTable]:
    """
    Yield a PowerTable for each n = 1..n_max.

    In normalized mode the step character is chi_V / dim V, so the table holds
    a_lambda (dim V)^-n, and the total of each power is re-summed and compared
    with 1. Exact powers carry a drift of 0.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if mode not in MODES:
        raise ValueError(f"Unknown mode {mode!r}")
    backend = _resolve_backend(spec.datum, backend)
    rd = spec.datum
    chi_v = rep_character(spec)
    step = chi_v if mode == "exact" else chi_v.scale(1.0 / dimension(chi_v))
    logger.debug(f"Tensor powers of {rd.cartan_type} with backend {backend}")

    if backend == "dense":
        dense_step = DenseCharacter.from_character(step, object if mode == "exact" else float)
        power = dense_step
    else:
        power = step

    for n in range(1, n_max + 1):
        if n > 1:
            power = power.multiply(dense_step) if backend == "dense" else char_mul(power, step)
        drift = 0.0 if mode == "exact" else _mass_drift(power)
        if drift > MASS_TOLERANCE:
            logger.warning(f"Normalized mass at n={n} is off by {drift:.3e} from 1")
        if backend == "dense":
            table = _table_from_terms(rd, n, dense_root_difference(power).dominant_terms())
            yield PowerTable(n, table, power.support_size(), power.nbytes(), drift)
        else:
            yield PowerTable(
                n, extract_multiplicities(power, n), len(power), estimate_sparse_bytes(power), drift
            )


def growth_series(
    spec: RepSpec,
    n_max: int,
    mode: str = "exact",
    backend: str = "auto",
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET,
    timing: bool = True,
) -> GrowthSeries:
    """
    Compute b_n for n = 1..n_max by repeated multiplication with chi_V.

    The series starts at n = 1; b_0 = 1 is not emitted as a row.

    Args:
        spec (RepSpec): The representation V
        n_max (int): Largest tensor power
        mode (str): ``exact`` or ``normalized``; normalized rows report
            b_n (dim V)^-n only
        backend (str): ``sparse``, ``dense`` (total rank <= 3) or ``auto``
        memory_budget_bytes (int): Stop early, flagging truncation, when the
            running power is estimated to exceed this
        timing (bool): Record wall-clock seconds per row

    Returns:
        GrowthSeries: One row per computed n; normalized rows carry the
            drift of the power's total from 1
    """
    rd = spec.datum
    dim_v = spec.dim
    series = GrowthSeries(spec=spec, mode=mode)
    logger.info(
        f"Growth series for {rd.cartan_type}, dim V = {dim_v}, n_max = {n_max}, "
        f"mode = {mode}, backend = {backend}"
    )
    started = time.perf_counter()
    for n, table, support, used, drift in iter_tables(spec, n_max, mode, backend):
        b = table.b
        if mode == "exact":
            row = GrowthRow(n, b, b / dim_v**n, support, 0.0)
        else:
            row = GrowthRow(n, None, float(b), support, 0.0, drift)
        if timing:
            row.seconds = time.perf_counter() - started
        series.rows.append(row)
        logger.debug(f"n={n}: b={row.b_exact or row.b_normalized}, support={support}")
        if n < n_max and used > memory_budget_bytes:
            logger.warning(
                f"Memory budget exceeded at n={n}: ~{used} bytes > {memory_budget_bytes}; "
                "returning a truncated series"
            )
            series.truncated = True
            break
        started = time.perf_counter()
    logger.info(f"Computed {len(series.rows)} rows for {rd.cartan_type}")
    return series


def synthetic_series(spec: RepSpec, n_max: int, constant: float, exponent: float) -> GrowthSeries:
    """A series with b_n (dim V)^-n = constant * n^exponent, for fit checks"""
    series = GrowthSeries(spec=spec, mode="normalized")
    for n in range(1, n_max + 1):
        series.rows.append(GrowthRow(n, None, constant * n**exponent, 0, 0.0))
    return series


def power_characters(spec: RepSpec, n_max: int):
    """Yield (n, chi_V^n) exactly for n = 1..n_max"""
    chi_v = rep_character(spec)
    power = chi_v
    for n in range(1, n_max + 1):
        if n > 1:
            power = char_mul(power, chi_v)
        yield n, power
