"""i.i.d. RDS measures over deterministic maps and the induced Markov chain.

An i.i.d. RDS on n states is a probability measure Q over the n^n maps; the
one-point motion is a Markov chain whose transition matrix is the
Q-expectation of the maps' 0-1 matrices.  The maximum-entropy representation
of a given chain has product-form weights and is handled lazily because its
support is all of map space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

import numpy as np

from .core import (
    EPS_SUM,
    DeterministicMap,
    EnumerationCapError,
    StochasticMatrix,
    ValidationError,
    as_stochastic,
    map_attractor,
    xlogx,
)

#: n^n map enumerations are refused past this many states
MAXENT_ENUMERATION_CAP = 7


@dataclass(frozen=True)
class RDSMeasure:
    """A finitely supported probability measure over deterministic maps."""

    maps: tuple[DeterministicMap, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        if len(self.maps) != len(w):
            raise ValidationError("support and weights differ in length")
        if len(self.maps) == 0:
            raise ValidationError("empty support")
        n = self.maps[0].n
        for a in self.maps:
            if a.n != n:
                raise ValidationError("maps live on different state spaces")
        if np.any(w < 0.0):
            raise ValidationError("negative weight")
        if abs(float(w.sum()) - 1.0) > EPS_SUM:
            raise ValidationError("weights do not sum to 1")
        if len(set(self.maps)) != len(self.maps):
            raise ValidationError("duplicate maps in support")
        w.setflags(write=False)

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[tuple[DeterministicMap, float]]
    ) -> "RDSMeasure":
        """Build a measure, merging duplicate maps by summing their weights."""
        acc: dict[DeterministicMap, float] = {}
        for a, w in pairs:
            acc[a] = acc.get(a, 0.0) + float(w)
        maps = tuple(acc.keys())
        return cls(maps, np.array([acc[a] for a in maps]))

    @property
    def n(self) -> int:
        return self.maps[0].n

    def support(self) -> Iterator[tuple[DeterministicMap, float]]:
        return zip(self.maps, (float(w) for w in self.weights))

    def weight_of(self, alpha: DeterministicMap) -> float:
        for a, w in zip(self.maps, self.weights):
            if a == alpha:
                return float(w)
        return 0.0


@dataclass(frozen=True)
class MaxEntRDS:
    """The maximum-entropy RDS of a chain: Q(alpha) = prod_k M[k, alpha(k)].

    The n^n-map support is never materialized; `support` streams it in
    lexicographic image order.
    """

    base: StochasticMatrix

    @property
    def n(self) -> int:
        return self.base.n

    def weight_of(self, alpha: DeterministicMap) -> float:
        w = 1.0
        for k, v in enumerate(alpha.image):
            w *= self.base.m[k, v]
        return float(w)

    def support(
        self, *, include_zero_weight: bool = False, allow_large: bool = False
    ) -> Iterator[tuple[DeterministicMap, float]]:
        """Stream (map, weight) pairs in lexicographic image order.

        Zero-weight maps are skipped unless `include_zero_weight`; sizes past
        the n^n cap are refused unless the caller opts into streaming with
        `allow_large`.
        """
        n = self.n
        if n > MAXENT_ENUMERATION_CAP and not allow_large:
            raise EnumerationCapError(
                f"maxent support has {n}^{n} maps; pass allow_large=True to stream"
            )
        rows = self.base.m
        for image in itertools.product(range(n), repeat=n):
            w = 1.0
            for k, v in enumerate(image):
                w *= rows[k, v]
            if w == 0.0 and not include_zero_weight:
                continue
            yield DeterministicMap(image), float(w)


AnyRDS = Union[RDSMeasure, MaxEntRDS]


def induce_markov(q: AnyRDS) -> StochasticMatrix:
    """Transition matrix of the one-point motion: M_ij = Q(alpha: alpha(i) = j)."""
    n = q.n
    m = np.zeros((n, n))
    rows = np.arange(n)
    for alpha, w in q.support():
        m[rows, list(alpha.image)] += w
    return StochasticMatrix(m)


def maxent_rds(m) -> MaxEntRDS:
    """The entropy-maximizing RDS representation of a chain."""
    return MaxEntRDS(as_stochastic(m))


def rds_metric_entropy(q: AnyRDS) -> float:
    """Map-draw entropy per step, -sum_alpha Q(alpha) log Q(alpha)."""
    return 0.0 + float(-sum(xlogx(w) for _, w in q.support()))


def expected_attractor_size(q: AnyRDS) -> float:
    """E_Q of the single-attractor size (0 for maps with several cycles)."""
    return float(sum(w * map_attractor(alpha).size for alpha, w in q.support()))


# ---------------------------------------------------------------------------
# RDS file format: `n k` header, then k lines of `weight i_1 ... i_n`
# with 1-indexed images.


def dump_rds(q: RDSMeasure) -> str:
    lines = [f"{q.n} {len(q.maps)}"]
    for alpha, w in q.support():
        lines.append(
            repr(float(w)) + " " + " ".join(str(v + 1) for v in alpha.image)
        )
    return "\n".join(lines) + "\n"


def load_rds(text: str) -> RDSMeasure:
    tokens = text.split()
    if len(tokens) < 2:
        raise ValidationError("empty RDS file")
    n, k = int(tokens[0]), int(tokens[1])
    body = tokens[2:]
    if len(body) != k * (n + 1):
        raise ValidationError(
            f"expected {k} lines of 1 weight + {n} images, found {len(body)} tokens"
        )
    pairs = []
    for r in range(k):
        chunk = body[r * (n + 1) : (r + 1) * (n + 1)]
        w = float(chunk[0])
        image = []
        for tok in chunk[1:]:
            v = int(tok)
            if not (1 <= v <= n):
                raise ValidationError(f"1-indexed image entry {v} outside 1..{n}")
            image.append(v - 1)
        pairs.append((DeterministicMap(tuple(image)), w))
    return RDSMeasure.from_pairs(pairs)
