"""Hypergraphs with ordered (possibly repeating) edges, the pairwise
value-resampling transformation applied to them, and diagnostics for how
fast repeated random transformations mix toward the uniform graph.

Vertices are 0-based everywhere, including file formats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class Hypergraph:
    """n vertices and an (m, d) array of ordered edges.

    In distinct mode every edge must have pairwise distinct entries;
    otherwise repeats inside an edge are allowed.
    """

    n: int
    edges: np.ndarray
    distinct: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one vertex")
        edges = np.asarray(self.edges, dtype=np.int64)
        if edges.ndim != 2:
            raise ValueError("edges must be an (m, d) array")
        if edges.size and (edges.min() < 0 or edges.max() >= self.n):
            raise ValueError("edge entries must lie in [0, n)")
        if self.distinct and edges.shape[1] > 1:
            sorted_rows = np.sort(edges, axis=1)
            if np.any(sorted_rows[:, 1:] == sorted_rows[:, :-1]):
                raise ValueError("distinct-mode edge has a repeated vertex")
        edges = edges.copy()
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    @property
    def d(self) -> int:
        return self.edges.shape[1]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "distinct": self.distinct,
            "edges": self.edges.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Hypergraph":
        edges = np.array(obj["edges"], dtype=np.int64)
        if edges.ndim != 2 or edges.shape[1] != int(obj["d"]):
            raise ValueError("edge array does not match declared d")
        return cls(int(obj["n"]), edges, bool(obj.get("distinct", False)))


# -- sampling ----------------------------------------------------------------


def sample_uniform(n: int, m: int, d: int, rng: np.random.Generator) -> Hypergraph:
    """Every slot of every edge independent uniform over [0, n)."""
    if n < 1 or m < 1 or d < 1:
        raise ValueError("n, m, d must all be positive")
    return Hypergraph(n, rng.integers(0, n, size=(m, d), dtype=np.int64))


def sample_distinct(n: int, m: int, d: int, rng: np.random.Generator) -> Hypergraph:
    """Each edge a uniform ordered d-tuple of distinct vertices."""
    if n < 1 or m < 1 or d < 1:
        raise ValueError("n, m, d must all be positive")
    if d > n:
        raise ValueError("distinct edges need d <= n")
    return Hypergraph(n, _distinct_rows(n, m, d, rng), distinct=True)


def _distinct_rows(n, rows, d, rng):
    # uniform ordered d-subsets via ranking fresh uniforms per row
    order = np.argsort(rng.random((rows, n)), axis=1)
    return order[:, :d].astype(np.int64)


def permute(graph: Hypergraph, pi) -> Hypergraph:
    """Relabel every edge entry j as pi[j]; edge order and shape unchanged."""
    pi = _check_permutation(pi, graph.n)
    return Hypergraph(graph.n, pi[graph.edges], graph.distinct)


def _check_permutation(pi, n) -> np.ndarray:
    pi = np.asarray(pi, dtype=np.int64)
    if pi.shape != (n,) or not np.array_equal(np.sort(pi), np.arange(n)):
        raise ValueError("not a permutation of [0, n)")
    return pi


# -- the randomized transformation -------------------------------------------


def transform(graph: Hypergraph, a: int, b: int,
              rng: np.random.Generator) -> Hypergraph:
    """Resample every slot equal to a or b uniformly over {a, b}.

    Slots holding other values are untouched; a == b is a permitted no-op.
    The uniform distribution over graphs is stable under this map.
    """
    _check_pair(a, b, graph.n)
    edges = graph.edges
    mask = (edges == a) | (edges == b)
    coins = rng.integers(0, 2, size=edges.shape)
    return Hypergraph(graph.n, np.where(mask, np.where(coins == 1, a, b), edges))


def transform_distinct(graph: Hypergraph, a: int, b: int,
                       rng: np.random.Generator) -> Hypergraph:
    """Distinct-mode variant: edges containing both a and b are left alone,
    otherwise slots in {a, b} are resampled as in ``transform``.

    Because a distinct edge holds each value at most once, the output edge
    is again distinct."""
    if not graph.distinct:
        raise ValueError("transform_distinct needs a distinct-mode graph")
    _check_pair(a, b, graph.n)
    edges = graph.edges
    in_pair = (edges == a) | (edges == b)
    has_both = np.any(edges == a, axis=1) & np.any(edges == b, axis=1)
    mask = in_pair & ~has_both[:, None]
    coins = rng.integers(0, 2, size=edges.shape)
    out = np.where(mask, np.where(coins == 1, a, b), edges)
    return Hypergraph(graph.n, out, distinct=True)


def _check_pair(a, b, n):
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError("a and b must be vertices in [0, n)")


@dataclass(frozen=True)
class SwapVector:
    """One keep/swap bit per slot, laid out edge-major: slot (i, k) sits at
    position i*d + k."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or (bits.size and bits.max() > 1):
            raise ValueError("swap vector must be a flat bit vector")
        bits = bits.copy()
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def sample(cls, m: int, d: int, rng: np.random.Generator) -> "SwapVector":
        return cls(rng.integers(0, 2, size=m * d, dtype=np.uint8))

    def to_hex(self) -> str:
        return np.packbits(self.bits, bitorder="little").tobytes().hex()

    @classmethod
    def from_hex(cls, text: str, m: int, d: int) -> "SwapVector":
        raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")[: m * d]
        return cls(bits)


def transform_det(graph: Hypergraph, a: int, b: int, v: SwapVector) -> Hypergraph:
    """Deterministic twin of ``transform``: slot (i, k) keeps its value when
    it is outside {a, b} or its swap bit is 1, and trades a for b (or b for
    a) when the bit is 0.

    Averaging over uniform swap vectors reproduces ``transform`` exactly.
    """
    _check_pair(a, b, graph.n)
    edges = graph.edges
    if v.bits.shape[0] != edges.size:
        raise ValueError("swap vector length must equal m*d")
    swap = (v.bits.reshape(edges.shape) == 0)
    out = edges.copy()
    out[(edges == a) & swap] = b
    out[(edges == b) & swap] = a
    return Hypergraph(graph.n, out, graph.distinct)


def inverse_transform_det(graph: Hypergraph, a: int, b: int,
                          v: SwapVector) -> Hypergraph:
    """Undo ``transform_det`` with the same vector.

    The controlled a/b trade is an involution, so the inverse is the map
    itself; kept as a named operation for callers that read better with it.
    """
    return transform_det(graph, a, b, v)


# -- mixing diagnostics --------------------------------------------------------


@dataclass(frozen=True)
class DeviationTrace:
    """Evolution of a single tracked slot's value distribution under the
    averaging action of the transformations.

    ``dist`` is the current probability vector over vertices; ``history``
    collects the squared L2 deviation from uniform after each step and is
    non-increasing for any step sequence.
    """

    dist: np.ndarray
    history: tuple

    def __post_init__(self):
        dist = np.asarray(self.dist, dtype=np.float64)
        if abs(float(dist.sum()) - 1.0) > 1e-9 or float(dist.min()) < -1e-12:
            raise ValueError("dist must be a probability vector")
        dist = dist.copy()
        dist.setflags(write=False)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "history", tuple(self.history))

    @classmethod
    def point_mass(cls, n: int, at: int = 0) -> "DeviationTrace":
        dist = np.zeros(n)
        dist[at] = 1.0
        return cls(dist, (deviation_value(dist),))

    @property
    def v(self) -> float:
        return self.history[-1]


def deviation_value(dist: np.ndarray) -> float:
    """Squared L2 distance of a value distribution from uniform."""
    n = dist.shape[0]
    return float(((dist - 1.0 / n) ** 2).sum())


def deviation_step(trace: DeviationTrace, a: int, b: int) -> DeviationTrace:
    """Average entries a and b of the tracked distribution and append the
    new deviation; one step drops the deviation by (x_a - x_b)^2 / 2."""
    n = trace.dist.shape[0]
    _check_pair(a, b, n)
    dist = trace.dist.copy()
    avg = (dist[a] + dist[b]) / 2.0
    dist[a] = avg
    dist[b] = avg
    return DeviationTrace(dist, trace.history + (deviation_value(dist),))


def mixing_time(n: int, m: int, d: int, eps: float, multiplier: float = 8.0) -> int:
    """Transformation count after which any start graph is within eps/8 of
    uniform: ceil(multiplier * n * ln(m*d*n / eps)), natural log.

    The default multiplier 8 matches the analysis; smaller values trade the
    guarantee for speed and are exposed for experiments.
    """
    if not (0.0 < eps <= 1.0):
        raise ValueError("eps must lie in (0, 1]")
    if n < 1 or m < 1 or d < 1 or multiplier <= 0:
        raise ValueError("n, m, d, multiplier must be positive")
    return max(1, math.ceil(multiplier * n * math.log(m * d * n / eps)))


# -- batched harness plumbing --------------------------------------------------
#
# Monte Carlo harnesses operate on "edge tensors": (rows, m, d) integer
# arrays holding one graph per row, in the narrowest dtype that fits n.


def slot_dtype(n: int):
    if n <= 0xFF:
        return np.uint8
    if n <= 0xFFFF:
        return np.uint16
    return np.int64


def sample_edge_tensor(n, rows, m, d, rng) -> np.ndarray:
    return rng.integers(0, n, size=(rows, m, d), dtype=slot_dtype(n))


def sample_distinct_edge_tensor(n, rows, m, d, rng) -> np.ndarray:
    if d > n:
        raise ValueError("distinct edges need d <= n")
    order = np.argsort(rng.random((rows * m, n)), axis=1)
    return order[:, :d].astype(slot_dtype(n)).reshape(rows, m, d)


def random_permutations(rows: int, n: int, rng) -> np.ndarray:
    """One uniform permutation of [0, n) per row."""
    return np.argsort(rng.random((rows, n)), axis=1).astype(slot_dtype(n))


def apply_permutations(perms: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Relabel row i's edges through row i's permutation."""
    rows, m, d = edges.shape
    flat = np.take_along_axis(perms, edges.reshape(rows, m * d).astype(np.int64),
                              axis=1)
    return flat.reshape(rows, m, d)


def transform_edges_once(edges, a_vec, b_vec, rng, distinct=False) -> None:
    """Apply one transformation per row, in place.

    ``a_vec``/``b_vec`` give row i's pair. Resampling a slot uniformly over
    {a, b} is realized as an XOR swap taken with probability 1/2, which is
    the same distribution with fewer array temporaries. Distinct mode skips
    edges containing both values, matching ``transform_distinct``.
    """
    rows = edges.shape[0]
    a = np.asarray(a_vec, dtype=edges.dtype).reshape(rows, 1, 1)
    b = np.asarray(b_vec, dtype=edges.dtype).reshape(rows, 1, 1)
    is_a = edges == a
    is_b = edges == b
    mask = is_a | is_b
    if distinct:
        has_both = is_a.any(axis=2) & is_b.any(axis=2)
        mask &= ~has_both[:, :, None]
    flip = rng.integers(0, 2, size=edges.shape, dtype=edges.dtype)
    np.multiply(flip, mask, out=flip, casting="unsafe")
    np.multiply(flip, a ^ b, out=flip, casting="unsafe")
    edges ^= flip


def chain_random_transforms(edges, steps, n, rng, distinct=False) -> np.ndarray:
    """Apply ``steps[i]`` uniformly random transformations to row i.

    Rows are processed sorted by step count so each round touches only the
    still-active suffix; the result is returned in the original row order.
    """
    steps = np.asarray(steps, dtype=np.int64)
    rows = edges.shape[0]
    if steps.shape != (rows,):
        raise ValueError("need one step count per row")
    order = np.argsort(steps, kind="stable")
    work = np.ascontiguousarray(edges[order])
    sorted_steps = steps[order]
    max_steps = int(sorted_steps[-1]) if rows else 0
    for step in range(max_steps):
        start = int(np.searchsorted(sorted_steps, step, side="right"))
        active = work[start:]
        if active.shape[0] == 0:
            break
        a = rng.integers(0, n, size=active.shape[0])
        b = rng.integers(0, n, size=active.shape[0])
        transform_edges_once(active, a, b, rng, distinct=distinct)
    out = np.empty_like(work)
    out[order] = work
    return out


def encode_edge_tensor(edges: np.ndarray, n: int) -> np.ndarray:
    """Collapse each row's graph to one base-n integer key (for histograms).

    Only valid while n^(m*d) fits in 63 bits."""
    rows, m, d = edges.shape
    width = m * d
    if width * math.log2(n) > 62:
        raise ValueError("graph state space too large to encode in int64")
    flat = edges.reshape(rows, width).astype(np.int64)
    weights = n ** np.arange(width, dtype=np.int64)
    return flat @ weights


def deviation_decay_curve(n: int, steps: int, trials: int,
                          rng: np.random.Generator, workers: int = 1):
    """Monte Carlo mean of the L2 deviation over random transformation
    sequences, starting from a point mass.

    Returns (means, standard_errors), arrays of length steps+1. The mean
    contracts by a factor (1 - 1/n) per step.
    """
    from .parallel import map_chunks  # local import avoids a cycle at import time

    def chunk(count, crng):
        dist = np.zeros((count, n))
        dist[:, 0] = 1.0
        sums = np.empty(steps + 1)
        sq_sums = np.empty(steps + 1)
        v = ((dist - 1.0 / n) ** 2).sum(axis=1)
        sums[0], sq_sums[0] = v.sum(), (v * v).sum()
        rows = np.arange(count)
        for step in range(1, steps + 1):
            a = crng.integers(0, n, size=count)
            b = crng.integers(0, n, size=count)
            avg = (dist[rows, a] + dist[rows, b]) / 2.0
            dist[rows, a] = avg
            dist[rows, b] = avg
            v = ((dist - 1.0 / n) ** 2).sum(axis=1)
            sums[step], sq_sums[step] = v.sum(), (v * v).sum()
        return sums, sq_sums

    parts = map_chunks(trials, chunk, rng, workers=workers)
    total = np.sum([p[0] for p in parts], axis=0)
    total_sq = np.sum([p[1] for p in parts], axis=0)
    means = total / trials
    variances = np.maximum(total_sq / trials - means ** 2, 0.0)
    stderr = np.sqrt(variances / trials)
    return means, stderr


def mixing_tv_samples(n: int, m: int, d: int, checkpoints, samples: int,
                      rng: np.random.Generator, workers: int = 1,
                      start: Optional[np.ndarray] = None) -> dict:
    """Histogram the transformed-graph distribution at chosen step counts.

    All chains start from one fixed graph (worst case for mixing; default
    all-zero slots). Returns {step: counts over the n^(m*d) graph keys}.
    Only usable while the support is enumerable.
    """
    from .parallel import map_chunks

    width = m * d
    if width * math.log2(n) > 20:  # support capped at ~10^6 states
        raise ValueError("graph support too large to histogram")
    space = n ** width
    checkpoints = sorted(set(int(c) for c in checkpoints))
    if start is None:
        start = np.zeros((m, d), dtype=slot_dtype(n))

    def chunk(count, crng):
        edges = np.broadcast_to(start, (count, m, d)).copy()
        counts = {}
        top = checkpoints[-1]
        for step in range(top + 1):
            if step in checkpoints:
                keys = encode_edge_tensor(edges, n)
                counts[step] = np.bincount(keys, minlength=space)
            if step < top:
                a = crng.integers(0, n, size=count)
                b = crng.integers(0, n, size=count)
                transform_edges_once(edges, a, b, crng)
        return counts

    parts = map_chunks(samples, chunk, rng, workers=workers)
    merged = {}
    for step in checkpoints:
        merged[step] = np.sum([p[step] for p in parts], axis=0)
    return merged
