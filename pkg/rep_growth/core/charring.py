"""
Exact arithmetic in the character ring Z[X].

A FormalCharacter is a sparse map Weight -> nonzero coefficient. Coefficients
are Python integers (arbitrary precision) in exact mode and floats in
normalized mode.
"""

import logging
from collections import defaultdict
from functools import lru_cache
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

from rep_growth.core.cartan import (
    RootDatum,
    Weight,
    WeightError,
    dominant_conjugate,
    is_dominant,
    simple_reflection,
    weyl_orbit,
)

logger = logging.getLogger(__name__)

Coefficient = Union[int, float]


class CharacterError(Exception):
    """Raised for datum mismatches and malformed character text"""

    pass


class FormalCharacter:
    """Immutable element of Z[X] attached to a root datum."""

    __slots__ = ("_datum", "_terms")

    def __init__(self, datum: RootDatum, terms: Optional[Mapping[Weight, Coefficient]] = None):
        self._datum = datum
        cleaned = {}
        for w, c in (terms or {}).items():
            if c:
                if len(w) != datum.r:
                    raise CharacterError(
                        f"Weight {w} has length {len(w)}, expected {datum.r}"
                    )
                cleaned[tuple(w)] = c
        self._terms = cleaned

    @classmethod
    def _trusted(cls, datum: RootDatum, terms: Dict[Weight, Coefficient]):
        # terms already pruned and keyed by tuples of the right length
        instance = cls.__new__(cls)
        instance._datum = datum
        instance._terms = terms
        return instance

    @classmethod
    def monomial(cls, datum: RootDatum, w: Weight, c: Coefficient = 1):
        return cls(datum, {datum.check_weight(w): c})

    @property
    def datum(self) -> RootDatum:
        return self._datum

    @property
    def terms(self) -> Mapping[Weight, Coefficient]:
        return MappingProxyType(self._terms)

    def __getitem__(self, w: Weight) -> Coefficient:
        return self._terms.get(tuple(w), 0)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Weight]:
        return iter(self._terms)

    def items(self):
        return self._terms.items()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalCharacter):
            return NotImplemented
        return self._datum == other._datum and self._terms == other._terms

    def __hash__(self):
        return hash((self._datum, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        shown = ", ".join(f"{c}[{w}]" for w, c in sorted(self._terms.items())[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} terms)"
        return f"FormalCharacter({shown}{more})"

    def __add__(self, other: "FormalCharacter") -> "FormalCharacter":
        return char_add(self, other)

    def __mul__(self, other: "FormalCharacter") -> "FormalCharacter":
        return char_mul(self, other)

    def __neg__(self) -> "FormalCharacter":
        return self.scale(-1)

    def __sub__(self, other: "FormalCharacter") -> "FormalCharacter":
        return char_add(self, other.scale(-1))

    def scale(self, factor: Coefficient) -> "FormalCharacter":
        """Multiply every coefficient by ``factor``"""
        return FormalCharacter(self._datum, {w: c * factor for w, c in self._terms.items()})

    def shift(self, v: Weight) -> "FormalCharacter":
        """Multiply by the monomial [v]"""
        return FormalCharacter._trusted(
            self._datum,
            {tuple(a + b for a, b in zip(w, v)): c for w, c in self._terms.items()},
        )


def _check_same_datum(f: FormalCharacter, g: FormalCharacter) -> None:
    if f.datum != g.datum:
        logger.error(f"Datum mismatch: {f.datum.cartan_type} vs {g.datum.cartan_type}")
        raise CharacterError(
            f"Characters live on different root data: "
            f"{f.datum.cartan_type} and {g.datum.cartan_type}"
        )


def char_add(f: FormalCharacter, g: FormalCharacter) -> FormalCharacter:
    """Coefficient-wise sum with zero results pruned"""
    _check_same_datum(f, g)
    terms = dict(f.terms)
    for w, c in g.items():
        total = terms.get(w, 0) + c
        if total:
            terms[w] = total
        else:
            terms.pop(w, None)
    return FormalCharacter._trusted(f.datum, terms)


def char_mul(f: FormalCharacter, g: FormalCharacter) -> FormalCharacter:
    """
    Convolution product: the coefficient of w is the sum of f(u)g(v) over u+v=w.

    Raises:
        CharacterError: If the characters belong to different root data
    """
    _check_same_datum(f, g)
    if len(f) < len(g):
        f, g = g, f
    out = defaultdict(int)
    small = list(g.items())
    for u, a in f.items():
        for v, b in small:
            out[tuple(x + y for x, y in zip(u, v))] += a * b
    return FormalCharacter._trusted(f.datum, {w: c for w, c in out.items() if c})


def _difference_pass(terms: Dict[Weight, Coefficient], step: Weight) -> Dict[Weight, Coefficient]:
    # multiply by (1 - [step])
    out = defaultdict(int, terms)
    for w, c in terms.items():
        out[tuple(x + y for x, y in zip(w, step))] -= c
    return {w: c for w, c in out.items() if c}


def apply_root_difference(f: FormalCharacter) -> FormalCharacter:
    """
    Multiply by the product over positive roots of (1 - [-alpha]).

    Each factor is one sparse pass mapping c(w) to c(w) - c(w + alpha). For a
    character of a representation the result has coefficient a_lambda at every
    dominant lambda, with no shift and no global sign.
    """
    terms = dict(f.terms)
    for alpha in f.datum.positive_roots:
        terms = _difference_pass(terms, tuple(-x for x in alpha))
    return FormalCharacter._trusted(f.datum, terms)


def printed_root_difference(f: FormalCharacter) -> FormalCharacter:
    """
    Multiply by the product over positive roots of (1 - [alpha]).

    This equals (-1)^u [2 delta] apply_root_difference(f).
    """
    terms = dict(f.terms)
    for alpha in f.datum.positive_roots:
        terms = _difference_pass(terms, alpha)
    return FormalCharacter._trusted(f.datum, terms)


def _dominant_weights_below(rd: RootDatum, lam: Weight) -> List[Tuple[Weight, int]]:
    """Dominant mu with lam - mu a nonnegative root combination, with their depth"""
    heights = [sum(beta) for beta in rd.positive_roots_simple]
    depth = {lam: 0}
    frontier = [lam]
    while frontier:
        mu = frontier.pop()
        for alpha, height in zip(rd.positive_roots, heights):
            nu = tuple(a - b for a, b in zip(mu, alpha))
            if nu not in depth and is_dominant(rd, nu):
                depth[nu] = depth[mu] + height
                frontier.append(nu)
    return sorted(depth.items(), key=lambda item: (item[1], item[0]))


def dominant_multiplicities(rd: RootDatum, lam: Weight) -> Dict[Weight, int]:
    """
    Freudenthal's recursion on the dominant weights of the irreducible with
    highest weight ``lam`` (semisimple part only, torus coordinates zero).
    """
    delta = rd.delta
    top = tuple(a + d for a, d in zip(lam, delta))
    top_norm = rd.inner_product(top, top)
    ordered = _dominant_weights_below(rd, lam)
    known = {w for w, _ in ordered}
    mult = {lam: 1}
    for mu, _ in ordered[1:]:
        total = 0
        for alpha in rd.positive_roots:
            k = 1
            while True:
                nu = tuple(a + k * b for a, b in zip(mu, alpha))
                conj, _ = dominant_conjugate(rd, nu)
                if conj not in known:
                    break
                total += mult[conj] * rd.inner_product(nu, alpha)
                k += 1
        shifted = tuple(a + d for a, d in zip(mu, delta))
        denominator = top_norm - rd.inner_product(shifted, shifted)
        value, remainder = divmod(2 * total, denominator)
        assert remainder == 0, f"Freudenthal recursion not integral at {mu}"
        mult[mu] = value
    return mult


@lru_cache(maxsize=4096)
def _irreducible_terms(rd: RootDatum, lam: Weight) -> Tuple[Tuple[Weight, int], ...]:
    n = rd.rank_ss
    torus = lam[n:]
    semisimple = lam[:n] + (0,) * rd.rank_torus
    terms = {}
    for mu, m in dominant_multiplicities(rd, semisimple).items():
        for w in weyl_orbit(rd, mu):
            terms[w[:n] + torus] = m
    logger.debug(f"Irreducible character {lam}: {len(terms)} weights")
    return tuple(sorted(terms.items()))


def irreducible_character(rd: RootDatum, lam: Weight) -> FormalCharacter:
    """
    Full W-invariant character of the irreducible with highest weight ``lam``.

    Raises:
        WeightError: If ``lam`` is not dominant
    """
    lam = rd.check_weight(lam)
    if not is_dominant(rd, lam):
        raise WeightError(f"Highest weight must be dominant, got {lam}")
    return FormalCharacter._trusted(rd, dict(_irreducible_terms(rd, lam)))


def dimension(f: FormalCharacter) -> Coefficient:
    """Sum of all coefficients"""
    return sum(f.terms.values())


def weyl_invariance_violation(f: FormalCharacter) -> Optional[Weight]:
    """First weight whose coefficient some simple reflection does not preserve"""
    rd = f.datum
    for w, c in sorted(f.items()):
        for i in range(rd.rank_ss):
            if f[simple_reflection(rd, i + 1, w)] != c:
                return w
    return None


def is_weyl_invariant(f: FormalCharacter) -> bool:
    return weyl_invariance_violation(f) is None


def dumps_character(f: FormalCharacter) -> str:
    """One term per line, ``c : k1 k2 ... kr``, sorted by weight"""
    lines = [
        f"{c!r} : {' '.join(str(k) for k in w)}" for w, c in sorted(f.items())
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def loads_character(rd: RootDatum, text: str) -> FormalCharacter:
    """
    Parse the line format written by ``dumps_character``.

    Raises:
        CharacterError: If a line is malformed or a weight has the wrong length
    """
    terms = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            coefficient_text, weight_text = line.split(":")
            coefficient_text = coefficient_text.strip()
            try:
                coefficient = int(coefficient_text)
            except ValueError:
                coefficient = float(coefficient_text)
            weight = tuple(int(k) for k in weight_text.split())
        except ValueError as e:
            raise CharacterError(f"Malformed character line {number}: {line!r} ({e})")
        if len(weight) != rd.r:
            raise CharacterError(
                f"Line {number}: weight has length {len(weight)}, expected {rd.r}"
            )
        terms[weight] = terms.get(weight, 0) + coefficient
    return FormalCharacter(rd, terms)
