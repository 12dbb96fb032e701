"""State spaces, probability vectors, stochastic matrices and deterministic maps.

States are 0-indexed everywhere in the library; the file formats and the CLI
speak 1-indexed labels.  All logarithms in the package are natural logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

#: Tolerance for sums that must equal one (probability normalization).
EPS_SUM = 1e-9
#: Tolerance for algebraic identities between two computed quantities.
EPS_ALG = 1e-10


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances used across the package."""

    eps_sum: float = EPS_SUM
    eps_alg: float = EPS_ALG
    eps_stat: float = 4.0  # default statistical band half-width, in sigmas

    def __post_init__(self):
        if self.eps_sum <= 0 or self.eps_alg <= 0 or self.eps_stat <= 0:
            raise ValueError("tolerances must be strictly positive")


class RdsmcError(Exception):
    """Base class for all package errors."""


class ValidationError(RdsmcError):
    """An input object violates one of its invariants."""


class DimensionMismatchError(ValidationError):
    """Operands defined over different state spaces."""


class SupportAsymmetryError(ValidationError):
    """M_ij > 0 but M_ji == 0 somewhere; the offending pair is 0-indexed."""

    def __init__(self, i: int, j: int):
        self.pair = (i, j)
        super().__init__(
            f"transition support is asymmetric: M[{i + 1},{j + 1}] > 0 "
            f"but M[{j + 1},{i + 1}] == 0 (1-indexed)"
        )


class EnumerationCapError(RdsmcError):
    """An exhaustive enumeration would exceed its hard size cap."""


class ReducibleChainError(RdsmcError):
    """The chain is not irreducible (or not aperiodic) where ergodicity is required."""


class CrossCheckError(RdsmcError):
    """Two independent computations of the same quantity disagree."""


class CoalescenceError(RdsmcError):
    """Coupling-from-the-past failed to coalesce within its horizon cap."""


# ---------------------------------------------------------------------------
# scalar conventions


def xlogx(x: float) -> float:
    """x*log(x) with the convention 0*log(0) = 0."""
    return 0.0 if x <= 0.0 else x * math.log(x)


def xlogratio(p: float, q: float) -> float:
    """p*log(p/q) with 0*log(0/q) = 0 and p*log(p/0) = +inf for p > 0."""
    if p <= 0.0:
        return 0.0
    if q <= 0.0:
        return math.inf
    return p * math.log(p / q)


# ---------------------------------------------------------------------------
# probability vectors


def prob_vector(p, *, eps: float = EPS_SUM) -> np.ndarray:
    """Validate and return `p` as a read-only float64 probability vector.

    Entries must be nonnegative and sum to 1 within `eps`.
    """
    v = np.asarray(p, dtype=np.float64)
    if v.ndim != 1:
        raise ValidationError("probability vector must be one-dimensional")
    if v.size < 1:
        raise ValidationError("probability vector must have at least one entry")
    if np.any(v < 0.0):
        raise ValidationError("probability vector has a negative entry")
    s = float(v.sum())
    if abs(s - 1.0) > eps:
        raise ValidationError(f"probability vector sums to {s!r}, not 1")
    v = v.copy()
    v.setflags(write=False)
    return v


def uniform_vector(n: int) -> np.ndarray:
    return prob_vector(np.full(n, 1.0 / n))


def point_mass(n: int, i: int) -> np.ndarray:
    v = np.zeros(n)
    v[i] = 1.0
    return prob_vector(v)


# ---------------------------------------------------------------------------
# deterministic maps


@dataclass(frozen=True)
class DeterministicMap:
    """A total function on {0, ..., n-1}, stored as its image tuple."""

    image: tuple[int, ...]

    def __post_init__(self):
        n = len(self.image)
        if n < 1:
            raise ValidationError("map needs at least one state")
        for v in self.image:
            if not (0 <= v < n):
                raise ValidationError(f"image entry {v} outside 0..{n - 1}")

    @classmethod
    def from_image(cls, image: Iterable[int]) -> "DeterministicMap":
        return cls(tuple(int(v) for v in image))

    @classmethod
    def identity(cls, n: int) -> "DeterministicMap":
        return cls(tuple(range(n)))

    @classmethod
    def constant(cls, n: int, target: int) -> "DeterministicMap":
        return cls((int(target),) * n)

    @property
    def n(self) -> int:
        return len(self.image)

    @property
    def is_permutation(self) -> bool:
        return len(set(self.image)) == self.n

    def __call__(self, i: int) -> int:
        return self.image[i]

    def inverse(self) -> "DeterministicMap":
        if not self.is_permutation:
            raise ValidationError("only permutations are invertible")
        inv = [0] * self.n
        for i, j in enumerate(self.image):
            inv[j] = i
        return DeterministicMap(tuple(inv))


def map_to_matrix(alpha: DeterministicMap) -> "StochasticMatrix":
    """0-1 transition matrix of a map: P_ij = 1 iff j = alpha(i)."""
    n = alpha.n
    m = np.zeros((n, n))
    m[np.arange(n), list(alpha.image)] = 1.0
    return StochasticMatrix(m)


def compose_maps(alpha: DeterministicMap, beta: DeterministicMap) -> DeterministicMap:
    """The map i -> beta(alpha(i)); its matrix is P_alpha @ P_beta."""
    if alpha.n != beta.n:
        raise DimensionMismatchError("maps live on different state spaces")
    return DeterministicMap(tuple(beta.image[v] for v in alpha.image))


@dataclass(frozen=True)
class AttractorInfo:
    """The attractor of a map's functional graph, when it is unique.

    kind is one of "fixed-point", "limit-cycle", "non-single".  A non-single
    attractor (two or more cycles in the functional graph) carries an empty
    cycle and size 0.
    """

    kind: str
    cycle: tuple[int, ...]
    size: int


def canonical_rotation(seq: Sequence[int]) -> tuple[int, ...]:
    """Rotate a sequence of distinct states so its minimum comes first."""
    seq = tuple(seq)
    r = seq.index(min(seq))
    return seq[r:] + seq[:r]


def map_attractor(alpha: DeterministicMap) -> AttractorInfo:
    """Find the cycles of alpha's functional graph.

    Every functional graph decomposes into trees hanging off disjoint cycles.
    The attractor is "single" when there is exactly one cycle.
    """
    n = alpha.n
    color = [0] * n  # 0 unvisited, 1 on current walk, 2 finished
    cycles: list[tuple[int, ...]] = []
    for start in range(n):
        if color[start] != 0:
            continue
        path = []
        v = start
        while color[v] == 0:
            color[v] = 1
            path.append(v)
            v = alpha.image[v]
        if color[v] == 1:  # new cycle: suffix of path starting at v
            k = path.index(v)
            cycles.append(canonical_rotation(path[k:]))
        for u in path:
            color[u] = 2
    if len(cycles) != 1:
        return AttractorInfo("non-single", (), 0)
    cyc = cycles[0]
    kind = "fixed-point" if len(cyc) == 1 else "limit-cycle"
    return AttractorInfo(kind, cyc, len(cyc))


# ---------------------------------------------------------------------------
# stochastic matrices


class StochasticMatrix:
    """A row-stochastic matrix with lazily computed structural flags.

    The underlying array is copied and made read-only, so instances are safe
    to share between threads; the cached flags are computed idempotently.
    """

    def __init__(self, m, *, eps: float = EPS_SUM):
        a = np.array(m, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("transition matrix must be square")
        if a.shape[0] < 1:
            raise ValidationError("transition matrix needs at least one state")
        if np.any(a < 0.0):
            i, j = np.argwhere(a < 0.0)[0]
            raise ValidationError(f"negative entry at ({i + 1},{j + 1}) (1-indexed)")
        rows = a.sum(axis=1)
        bad = np.argwhere(np.abs(rows - 1.0) > eps)
        if bad.size:
            i = int(bad[0][0])
            raise ValidationError(
                f"row {i + 1} sums to {rows[i]!r}, not 1 (1-indexed)"
            )
        a.setflags(write=False)
        self._m = a

    @property
    def m(self) -> np.ndarray:
        return self._m

    @property
    def n(self) -> int:
        return self._m.shape[0]

    def __repr__(self):
        return f"StochasticMatrix(n={self.n})"

    @cached_property
    def support(self) -> np.ndarray:
        """Boolean adjacency of strictly positive entries (read-only)."""
        s = self._m > 0.0
        s.setflags(write=False)
        return s

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Out-neighbor lists of the support digraph."""
        return tuple(
            tuple(int(j) for j in np.flatnonzero(row)) for row in self.support
        )

    @cached_property
    def is_irreducible(self) -> bool:
        fwd = _reachable(self.adjacency, 0)
        rev_adj = _reverse_adjacency(self.adjacency)
        bwd = _reachable(rev_adj, 0)
        return len(fwd) == self.n and len(bwd) == self.n

    @cached_property
    def period(self) -> int:
        """gcd of cycle lengths through state 0 (only meaningful if irreducible)."""
        if not self.is_irreducible:
            raise ReducibleChainError("period is defined for irreducible chains")
        dist = {0: 0}
        queue = [0]
        while queue:
            u = queue.pop(0)
            for v in self.adjacency[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        g = 0
        for u in range(self.n):
            for v in self.adjacency[u]:
                g = math.gcd(g, abs(dist[u] + 1 - dist[v]))
        return g

    @cached_property
    def is_aperiodic(self) -> bool:
        return self.is_irreducible and self.period == 1

    @property
    def is_ergodic(self) -> bool:
        return self.is_irreducible and self.is_aperiodic

    @cached_property
    def is_doubly_stochastic(self) -> bool:
        return bool(np.all(np.abs(self._m.sum(axis=0) - 1.0) <= EPS_SUM))

    @cached_property
    def has_symmetric_support(self) -> bool:
        """M_ij > 0 iff M_ji > 0, with entries below EPS_ALG treated as zero."""
        pos = self._m > EPS_ALG
        return bool(np.all(pos == pos.T))

    def require_symmetric_support(self):
        pos = self._m > EPS_ALG
        bad = np.argwhere(pos & ~pos.T)
        if bad.size:
            i, j = (int(v) for v in bad[0])
            raise SupportAsymmetryError(i, j)

    def cumulative_rows(self) -> np.ndarray:
        """Row-wise cumulative sums used for inverse-CDF sampling."""
        c = np.cumsum(self._m, axis=1)
        c[:, -1] = 1.0
        return np.ascontiguousarray(c)


def as_stochastic(m) -> StochasticMatrix:
    return m if isinstance(m, StochasticMatrix) else StochasticMatrix(m)


def _reachable(adj, start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def _reverse_adjacency(adj):
    rev: list[list[int]] = [[] for _ in adj]
    for u, outs in enumerate(adj):
        for v in outs:
            rev[v].append(u)
    return tuple(tuple(r) for r in rev)


# ---------------------------------------------------------------------------
# file formats (1-indexed at the boundary)


def dump_matrix(m: StochasticMatrix) -> str:
    """Matrix text format: first line n, then n rows of n decimals."""
    lines = [str(m.n)]
    for row in m.m:
        lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def load_matrix(text: str) -> StochasticMatrix:
    tokens = text.split()
    if not tokens:
        raise ValidationError("empty matrix file")
    n = int(tokens[0])
    vals = tokens[1:]
    if len(vals) != n * n:
        raise ValidationError(f"expected {n * n} entries, found {len(vals)}")
    a = np.array([float(v) for v in vals]).reshape(n, n)
    return StochasticMatrix(a)


def dump_map(alpha: DeterministicMap) -> str:
    """Map text format: first line n, second line the 1-indexed images."""
    return f"{alpha.n}\n" + " ".join(str(v + 1) for v in alpha.image) + "\n"


def load_map(text: str) -> DeterministicMap:
    tokens = text.split()
    if not tokens:
        raise ValidationError("empty map file")
    n = int(tokens[0])
    if len(tokens) != n + 1:
        raise ValidationError(f"expected {n} image entries, found {len(tokens) - 1}")
    image = []
    for tok in tokens[1:]:
        v = int(tok)
        if not (1 <= v <= n):
            raise ValidationError(f"1-indexed image entry {v} outside 1..{n}")
        image.append(v - 1)
    return DeterministicMap(tuple(image))
