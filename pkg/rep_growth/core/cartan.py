"""
Root data of connected complex reductive groups.

A group is described by a Cartan type such as ``A2xA1xT1``: a product of
simple factors plus central torus factors. Weights are integer tuples whose
first ``rank_ss`` entries are coordinates in the basis of fundamental weights
and whose remaining ``rank_torus`` entries are torus character exponents.

Cartan matrix convention: ``C[i][j] = <alpha_j, alpha_i^vee>``, so the simple
root alpha_j written in fundamental coordinates is column j of C.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import List, Optional, Sequence, Tuple

import sympy

logger = logging.getLogger(__name__)

Weight = Tuple[int, ...]

FAMILIES = "ABCDEFGT"

_FACTOR_PATTERN = re.compile(r"^([A-GT])(\d+)$")


class CartanTypeError(Exception):
    """Raised when a Cartan type string or factor is invalid"""

    pass


class WeightError(Exception):
    """Raised when a weight does not fit the root datum or operation"""

    pass


@dataclass(frozen=True)
class CartanFactor:
    family: str
    rank: int

    def __str__(self) -> str:
        return f"{self.family}{self.rank}"


@dataclass(frozen=True)
class CartanType:
    factors: Tuple[CartanFactor, ...]

    def __str__(self) -> str:
        return "x".join(str(f) for f in self.factors)


def _validate_factor(family: str, rank: int) -> CartanFactor:
    """
    Check one factor and normalize the rank-1 aliases B1 and C1 to A1.

    Raises:
        CartanTypeError: If the family/rank combination does not exist
    """
    name = f"{family}{rank}"
    if family not in FAMILIES:
        raise CartanTypeError(f"Unknown family in factor {name}")
    if rank < 1:
        raise CartanTypeError(f"Rank must be positive in factor {name}")
    if family in "BC" and rank == 1:
        return CartanFactor("A", 1)
    if family == "D" and rank < 2:
        raise CartanTypeError(f"Invalid factor {name}: D requires rank >= 2")
    if family == "E" and rank not in (6, 7, 8):
        raise CartanTypeError(f"Invalid factor {name}: E requires rank 6, 7 or 8")
    if family == "F" and rank != 4:
        raise CartanTypeError(f"Invalid factor {name}: F requires rank 4")
    if family == "G" and rank != 2:
        raise CartanTypeError(f"Invalid factor {name}: G requires rank 2")
    return CartanFactor(family, rank)


def make_cartan_type(factors: Sequence[Tuple[str, int]]) -> CartanType:
    """Build a validated CartanType from (family, rank) pairs"""
    if not factors:
        raise CartanTypeError("A Cartan type needs at least one factor")
    return CartanType(tuple(_validate_factor(f.upper(), int(r)) for f, r in factors))


def parse_cartan_type(text: str) -> CartanType:
    """
    Parse strings of the form ``A2xA1xT1`` (case-insensitive, 'x' separator).

    Args:
        text (str): Cartan type string

    Returns:
        CartanType: The validated type

    Raises:
        CartanTypeError: If a factor cannot be parsed or is invalid
    """
    if not isinstance(text, str) or not text.strip():
        raise CartanTypeError("Empty Cartan type string")
    factors = []
    for token in re.split(r"[xX]", text.strip()):
        match = _FACTOR_PATTERN.match(token.strip().upper())
        if match is None:
            raise CartanTypeError(f"Cannot parse factor '{token}' in '{text}'")
        factors.append((match.group(1), int(match.group(2))))
    return make_cartan_type(factors)


def _edges(family: str, rank: int) -> List[Tuple[int, int]]:
    # Dynkin diagram edges, 0-indexed, Bourbaki numbering
    if family == "D":
        if rank == 2:
            return []
        return [(i, i + 1) for i in range(rank - 2)] + [(rank - 3, rank - 1)]
    if family == "E":
        return [(0, 2), (1, 3)] + [(i, i + 1) for i in range(2, rank - 1)]
    return [(i, i + 1) for i in range(rank - 1)]


def cartan_matrix_for(family: str, rank: int) -> List[List[int]]:
    """
    Cartan matrix of one simple factor, ``C[i][j] = <alpha_j, alpha_i^vee>``.

    For B the last simple root is short, for C it is long, for F4 roots 3
    and 4 are short, and for G2 the second root is short.
    """
    matrix = [[2 if i == j else 0 for j in range(rank)] for i in range(rank)]
    for i, j in _edges(family, rank):
        matrix[i][j] = -1
        matrix[j][i] = -1
    if family == "B":
        matrix[rank - 1][rank - 2] = -2
    elif family == "C":
        matrix[rank - 2][rank - 1] = -2
    elif family == "F":
        matrix[2][1] = -2
    elif family == "G":
        matrix[1][0] = -3
    return matrix


def _block_diagonal(blocks: List[List[List[int]]]) -> List[List[int]]:
    size = sum(len(b) for b in blocks)
    result = [[0] * size for _ in range(size)]
    start = 0
    for block in blocks:
        for i, row in enumerate(block):
            for j, value in enumerate(row):
                result[start + i][start + j] = value
        start += len(block)
    return result


def _positive_root_closure(cartan: List[List[int]]) -> List[Tuple[int, ...]]:
    """
    Positive roots in simple-root coordinates, by closing the simple roots
    under simple reflections and keeping nonnegative results.
    """
    rank = len(cartan)
    simple = [tuple(1 if k == i else 0 for k in range(rank)) for i in range(rank)]
    seen = set(simple)
    frontier = list(simple)
    while frontier:
        beta = frontier.pop()
        for i in range(rank):
            pairing = sum(cartan[i][j] * beta[j] for j in range(rank))
            if pairing == 0:
                continue
            gamma = tuple(b - pairing * (k == i) for k, b in enumerate(beta))
            if all(c >= 0 for c in gamma) and any(gamma) and gamma not in seen:
                seen.add(gamma)
                frontier.append(gamma)
    return sorted(seen, key=lambda b: (sum(b), b))


def _symmetrizer(cartan: List[List[int]]) -> Tuple[int, ...]:
    """
    Half squared lengths d_i of the simple roots, short roots normalized to 1
    on every connected component, so that ``d_i C[i][j]`` is symmetric.
    """
    rank = len(cartan)
    d: List[Optional[Fraction]] = [None] * rank
    for start in range(rank):
        if d[start] is not None:
            continue
        d[start] = Fraction(1)
        component = [start]
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(rank):
                if cartan[i][j] != 0 and i != j and d[j] is None:
                    d[j] = d[i] * cartan[i][j] / cartan[j][i]
                    component.append(j)
                    stack.append(j)
        smallest = min(d[k] for k in component)
        for k in component:
            d[k] = d[k] / smallest
    return tuple(int(x) for x in d)


@dataclass(frozen=True)
class RootDatum:
    """
    Immutable combinatorial skeleton of a connected reductive group.

    ``positive_roots`` are in fundamental-weight (+ torus) coordinates,
    ``positive_roots_simple`` are the same roots in simple-root coordinates
    and ``positive_coroots`` are in simple-coroot coordinates.
    ``gram`` is the fundamental-weight Gram matrix scaled by ``gram_scale`` to
    integers; ``inverse_cartan`` is C^-1 scaled by ``inverse_scale``.
    """

    cartan_type: CartanType
    rank_ss: int
    rank_torus: int
    cartan_matrix: Tuple[Tuple[int, ...], ...]
    positive_roots: Tuple[Weight, ...]
    positive_roots_simple: Tuple[Tuple[int, ...], ...]
    positive_coroots: Tuple[Tuple[int, ...], ...]
    delta: Weight
    symmetrizer: Tuple[int, ...]
    gram: Tuple[Tuple[int, ...], ...]
    gram_scale: int
    inverse_cartan: Tuple[Tuple[int, ...], ...]
    inverse_scale: int

    @property
    def r(self) -> int:
        return self.rank_ss + self.rank_torus

    @property
    def u(self) -> int:
        return len(self.positive_roots)

    def simple_root(self, i: int) -> Weight:
        """Simple root alpha_i (0-based) in fundamental coordinates"""
        return tuple(self.cartan_matrix[k][i] for k in range(self.rank_ss)) + (
            0,
        ) * self.rank_torus

    def zero(self) -> Weight:
        return (0,) * self.r

    def check_weight(self, w: Sequence[int]) -> Weight:
        """Return ``w`` as a weight tuple, rejecting the wrong length"""
        w = tuple(int(x) for x in w)
        if len(w) != self.r:
            raise WeightError(
                f"Weight {w} has length {len(w)}, expected {self.r} for {self.cartan_type}"
            )
        return w

    def inner_product(self, a: Sequence[int], b: Sequence[int]) -> int:
        """Scaled invariant inner product of the semisimple parts of two weights"""
        n = self.rank_ss
        return sum(
            self.gram[i][j] * a[i] * b[j]
            for i in range(n)
            if a[i]
            for j in range(n)
            if b[j]
        )

    def root_coordinates(self, w: Sequence[int]) -> Tuple[int, ...]:
        """Semisimple part of ``w`` in simple-root coordinates, scaled by ``inverse_scale``"""
        n = self.rank_ss
        return tuple(
            sum(self.inverse_cartan[i][j] * w[j] for j in range(n)) for i in range(n)
        )


@lru_cache(maxsize=None)
def build_root_datum(ct: CartanType) -> RootDatum:
    """
    Construct the root datum of a Cartan type.

    Args:
        ct (CartanType): Validated Cartan type

    Returns:
        RootDatum: Roots, coroots, delta and u for the group
    """
    blocks = []
    rank_torus = 0
    for factor in ct.factors:
        if factor.family == "T":
            rank_torus += factor.rank
        else:
            blocks.append(cartan_matrix_for(factor.family, factor.rank))
    cartan = _block_diagonal(blocks)
    rank_ss = len(cartan)

    roots_simple = _positive_root_closure(cartan)
    transpose = [[cartan[j][i] for j in range(rank_ss)] for i in range(rank_ss)]
    coroots = _positive_root_closure(transpose)
    roots = [
        tuple(sum(cartan[k][j] * beta[j] for j in range(rank_ss)) for k in range(rank_ss))
        + (0,) * rank_torus
        for beta in roots_simple
    ]

    d = _symmetrizer(cartan)
    if rank_ss:
        inverse = sympy.Matrix(cartan).inv()
        inverse_scale = lcm(*(int(sympy.fraction(x)[1]) for x in inverse))
        inverse_int = [
            [int(inverse[i, j] * inverse_scale) for j in range(rank_ss)]
            for i in range(rank_ss)
        ]
        gram = sympy.diag(*d) * inverse
        gram_scale = lcm(*(int(sympy.fraction(x)[1]) for x in gram))
        gram_int = [
            [int(gram[i, j] * gram_scale) for j in range(rank_ss)] for i in range(rank_ss)
        ]
    else:
        inverse_scale, inverse_int, gram_scale, gram_int = 1, [], 1, []

    datum = RootDatum(
        cartan_type=ct,
        rank_ss=rank_ss,
        rank_torus=rank_torus,
        cartan_matrix=tuple(tuple(row) for row in cartan),
        positive_roots=tuple(roots),
        positive_roots_simple=tuple(roots_simple),
        positive_coroots=tuple(coroots),
        delta=(1,) * rank_ss + (0,) * rank_torus,
        symmetrizer=d,
        gram=tuple(tuple(row) for row in gram_int),
        gram_scale=gram_scale,
        inverse_cartan=tuple(tuple(row) for row in inverse_int),
        inverse_scale=inverse_scale,
    )
    logger.debug(f"Built root datum for {ct}: r={datum.r}, u={datum.u}")
    return datum


def root_datum(text: str) -> RootDatum:
    """Parse a Cartan type string and build its root datum"""
    return build_root_datum(parse_cartan_type(text))


def _reflect(rd: RootDatum, i: int, w: Weight) -> Weight:
    # s_i(w) = w - w_i * alpha_i, alpha_i = column i of C
    wi = w[i]
    if wi == 0:
        return w
    cartan = rd.cartan_matrix
    return tuple(
        x - wi * cartan[k][i] if k < rd.rank_ss else x for k, x in enumerate(w)
    )


def simple_reflection(rd: RootDatum, i: int, w: Sequence[int]) -> Weight:
    """
    Apply the simple reflection s_i (1-based index) to a weight.

    Raises:
        WeightError: If the index is out of range or the weight has the wrong length
    """
    if not 1 <= i <= rd.rank_ss:
        raise WeightError(f"Reflection index {i} out of range 1..{rd.rank_ss}")
    return _reflect(rd, i - 1, rd.check_weight(w))


def is_dominant(rd: RootDatum, w: Sequence[int]) -> bool:
    """True iff every semisimple coordinate is nonnegative"""
    return all(w[k] >= 0 for k in range(rd.rank_ss))


def dominant_conjugate(rd: RootDatum, w: Sequence[int]) -> Tuple[Weight, List[int]]:
    """
    Reflect at negative coordinates until dominant.

    Returns:
        Tuple[Weight, List[int]]: The dominant representative and the 1-based
        reflection word applied, in application order
    """
    w = tuple(w)
    word = []
    while True:
        for i in range(rd.rank_ss):
            if w[i] < 0:
                w = _reflect(rd, i, w)
                word.append(i + 1)
                break
        else:
            return w, word


def to_dominant(rd: RootDatum, w: Sequence[int], strict: bool = False) -> Tuple[Weight, int]:
    """
    Dominant representative of the W-orbit of ``w`` with the parity of the
    reflections used.

    With ``strict`` the weight is read as already delta-shifted: the sign is 0
    when the orbit meets a wall, i.e. the dominant representative has a zero
    semisimple coordinate.
    """
    dominant, word = dominant_conjugate(rd, w)
    sign = -1 if len(word) % 2 else 1
    if strict and any(dominant[k] == 0 for k in range(rd.rank_ss)):
        sign = 0
    return dominant, sign


def dot_to_dominant(rd: RootDatum, w: Sequence[int]) -> Tuple[Weight, int]:
    """Dominant representative of ``w`` under the dot action w -> s(w + delta) - delta"""
    shifted = tuple(x + d for x, d in zip(w, rd.delta))
    dominant, sign = to_dominant(rd, shifted, strict=True)
    return tuple(x - d for x, d in zip(dominant, rd.delta)), sign


def weyl_orbit(rd: RootDatum, w: Sequence[int]) -> List[Weight]:
    """All weights in the W-orbit of ``w``, by reflection closure"""
    start = tuple(w)
    seen = {start}
    frontier = [start]
    while frontier:
        current = frontier.pop()
        for i in range(rd.rank_ss):
            image = _reflect(rd, i, current)
            if image not in seen:
                seen.add(image)
                frontier.append(image)
    return sorted(seen)


def weyl_dimension(rd: RootDatum, lam: Sequence[int]) -> int:
    """
    Weyl dimension formula: product over positive coroots of
    <lam + delta, a> / <delta, a>, evaluated exactly.

    Raises:
        WeightError: If ``lam`` is not dominant
    """
    lam = rd.check_weight(lam)
    if not is_dominant(rd, lam):
        raise WeightError(f"Weyl dimension needs a dominant weight, got {lam}")
    result = Fraction(1)
    for coroot in rd.positive_coroots:
        numerator = sum(c * (lam[k] + 1) for k, c in enumerate(coroot))
        result *= Fraction(numerator, sum(coroot))
    assert result.denominator == 1
    return int(result)


def negative_of_longest(rd: RootDatum, lam: Sequence[int]) -> Weight:
    """-w0(lam): the highest weight of the dual irreducible"""
    negated = tuple(-x for x in lam)
    dominant, _ = dominant_conjugate(rd, negated)
    return dominant

