"""
Dense bounding-box backend for characters of small total rank.

A DenseCharacter stores coefficients in a numpy array whose index (0, ..., 0)
corresponds to the weight ``offset``. Exact characters use object arrays of
Python integers, normalized characters use float64.
"""

import logging
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from rep_growth.core.cartan import RootDatum, Weight
from rep_growth.core.charring import Coefficient, FormalCharacter

logger = logging.getLogger(__name__)

MAX_DENSE_RANK = 3


class DenseCharacter:
    """Coefficient array over the bounding box of a character's support."""

    def __init__(self, datum: RootDatum, offset: np.ndarray, array: np.ndarray):
        self.datum = datum
        self.offset = np.asarray(offset, dtype=np.int64)
        self.array = array

    @classmethod
    def from_terms(
        cls,
        datum: RootDatum,
        terms: Mapping[Weight, Coefficient],
        dtype: Optional[type] = None,
    ) -> "DenseCharacter":
        """
        Build from a sparse term map.

        Args:
            datum (RootDatum): Root datum the weights belong to
            terms (Mapping[Weight, Coefficient]): Nonzero coefficients
            dtype (type): ``object`` for exact integers, ``float`` for normalized values;
                inferred from the coefficients when omitted
        """
        if dtype is None:
            dtype = object if all(isinstance(c, int) for c in terms.values()) else float
        if not terms:
            return cls(datum, np.zeros(datum.r), np.zeros((1,) * datum.r, dtype=dtype))
        points = np.array(list(terms.keys()), dtype=np.int64).reshape(-1, datum.r)
        low = points.min(axis=0)
        shape = tuple(int(x) for x in points.max(axis=0) - low + 1)
        array = np.zeros(shape, dtype=dtype)
        for w, c in terms.items():
            array[tuple(int(a - b) for a, b in zip(w, low))] = c
        return cls(datum, low, array)

    @classmethod
    def from_character(cls, chi: FormalCharacter, dtype: Optional[type] = None):
        return cls.from_terms(chi.datum, chi.terms, dtype)

    @property
    def dtype(self):
        return self.array.dtype

    def nonzero_terms(self) -> Dict[Weight, Coefficient]:
        """Sparse term map of the nonzero entries"""
        return self._terms_of(self.array, self.offset)

    def _terms_of(self, array: np.ndarray, offset: np.ndarray) -> Dict[Weight, Coefficient]:
        exact = array.dtype == object
        terms = {}
        for index in zip(*np.nonzero(array)):
            value = array[index]
            weight = tuple(int(o) + int(i) for o, i in zip(offset, index))
            terms[weight] = int(value) if exact else float(value)
        return terms

    def to_character(self) -> FormalCharacter:
        return FormalCharacter(self.datum, self.nonzero_terms())

    def dominant_terms(self) -> Dict[Weight, Coefficient]:
        """Nonzero entries whose semisimple coordinates are all nonnegative"""
        slices = []
        for axis in range(self.datum.r):
            start = max(0, -int(self.offset[axis])) if axis < self.datum.rank_ss else 0
            slices.append(slice(start, None))
        sub = self.array[tuple(slices)]
        offset = self.offset + np.array([s.start for s in slices], dtype=np.int64)
        return self._terms_of(sub, offset)

    def support_size(self) -> int:
        return int(np.count_nonzero(self.array))

    def nbytes(self) -> int:
        """Rough memory footprint of the coefficient array"""
        if self.array.dtype != object:
            return int(self.array.nbytes)
        widest = max((abs(int(x)).bit_length() for x in self.array.flat), default=0)
        return int(self.array.size) * (8 + 28 + widest // 8)

    def multiply(self, other: "DenseCharacter") -> "DenseCharacter":
        """
        Convolution by shift-and-add over the nonzero entries of ``other``.

        The result dtype is object if either factor is exact and float otherwise.
        """
        dtype = object if object in (self.array.dtype, other.array.dtype) else float
        shape = tuple(a + b - 1 for a, b in zip(self.array.shape, other.array.shape))
        out = np.zeros(shape, dtype=dtype)
        source = self.array.astype(dtype) if self.array.dtype != dtype else self.array
        for index in zip(*np.nonzero(other.array)):
            coefficient = other.array[index]
            target = tuple(slice(i, i + s) for i, s in zip(index, self.array.shape))
            out[target] += coefficient * source
        return DenseCharacter(self.datum, self.offset + other.offset, out)


def difference_kernels(datum: RootDatum, dtype: type) -> Sequence[DenseCharacter]:
    """The factors (1 - [-alpha]) as dense two-term arrays"""
    one = 1 if dtype is object else 1.0
    kernels = []
    for alpha in datum.positive_roots:
        negative = tuple(-x for x in alpha)
        kernels.append(
            DenseCharacter.from_terms(datum, {datum.zero(): one, negative: -one}, dtype)
        )
    return kernels


def dense_root_difference(chi: DenseCharacter) -> DenseCharacter:
    """Dense counterpart of ``apply_root_difference``"""
    kind = object if chi.array.dtype == object else float
    result = chi
    for kernel in difference_kernels(chi.datum, kind):
        result = result.multiply(kernel)
    return result


def dense_supported(datum: RootDatum) -> bool:
    return datum.r <= MAX_DENSE_RANK
