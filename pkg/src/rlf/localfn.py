"""Local functions: every output bit applies one fixed predicate to the
secret bits selected by one hyperedge.

Holds planted/null instance samplers, secret utilities, verification, and
the oracle abstraction that feeds the search algorithm a stream of fresh
instances sharing a single hidden secret.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import OracleExhaustedError
from .hypergraph import (
    Hypergraph,
    sample_distinct_edge_tensor,
    sample_edge_tensor,
    sample_uniform,
    sample_distinct,
    _check_permutation,
)
from .predicate import NoisyPredicate, Predicate, output_bias


@dataclass(frozen=True)
class Secret:
    """The hidden input bit vector."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or (bits.size and bits.max() > 1):
            raise ValueError("secret must be a flat bit vector")
        bits = bits.copy()
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    @property
    def weight(self) -> int:
        return int(self.bits.sum())

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Secret":
        return cls(rng.integers(0, 2, size=n, dtype=np.uint8))

    @classmethod
    def from_string(cls, text: str) -> "Secret":
        return cls(np.array([int(c) for c in text], dtype=np.uint8))

    def to_string(self) -> str:
        return "".join(str(int(b)) for b in self.bits)


@dataclass(frozen=True)
class Instance:
    """A (hypergraph, outputs) pair.

    The kind tag is bookkeeping for harnesses; decision procedures never
    receive it (their interface takes the graph and outputs only).
    """

    graph: Hypergraph
    outputs: np.ndarray
    kind: str = "unknown"

    def __post_init__(self):
        outputs = np.asarray(self.outputs, dtype=np.uint8)
        if outputs.shape != (self.graph.m,):
            raise ValueError("outputs length must equal the edge count")
        if outputs.size and outputs.max() > 1:
            raise ValueError("outputs must be bits")
        if self.kind not in ("planted", "null", "unknown"):
            raise ValueError("kind must be planted, null, or unknown")
        outputs = outputs.copy()
        outputs.setflags(write=False)
        object.__setattr__(self, "outputs", outputs)

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "outputs": "".join(str(int(b)) for b in self.outputs),
            "kind": self.kind,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Instance":
        outputs = np.array([int(c) for c in obj["outputs"]], dtype=np.uint8)
        return cls(Hypergraph.from_json(obj["graph"]), outputs,
                   obj.get("kind", "unknown"))


# -- evaluation ---------------------------------------------------------------


def evaluate(graph: Hypergraph, pred: Predicate, s: Secret) -> np.ndarray:
    """Output i is the predicate applied to the secret bits at edge i's
    slots, in slot order."""
    if pred.arity != graph.d:
        raise ValueError("predicate arity must equal the edge width")
    if s.n != graph.n:
        raise ValueError("secret length must equal the vertex count")
    return evaluate_edge_tensor(pred.table, graph.edges[None, :, :], s.bits)[0]


def evaluate_noisy(graph: Hypergraph, pred: NoisyPredicate, s: Secret,
                   rng: np.random.Generator) -> np.ndarray:
    """Base evaluation XOR one independent Bernoulli noise bit per output."""
    clean = evaluate(graph, pred.base, s)
    noise = (rng.random(graph.m) < pred.noise_rate).astype(np.uint8)
    return clean ^ noise


def evaluate_edge_tensor(table: np.ndarray, edges: np.ndarray,
                         secret_bits) -> np.ndarray:
    """Batched evaluation over a (rows, m, d) edge tensor.

    ``secret_bits`` is one shared (n,) vector or a per-row (rows, n) matrix.
    """
    rows, m, d = edges.shape
    secret_bits = np.asarray(secret_bits, dtype=np.uint8)
    idx = edges.astype(np.int64)
    if secret_bits.ndim == 1:
        bits = secret_bits[idx]
    else:
        bits = secret_bits[np.arange(rows)[:, None, None], idx]
    weights = (1 << np.arange(d, dtype=np.int64)).reshape(1, 1, d)
    table_index = (bits.astype(np.int64) * weights).sum(axis=2)
    return table[table_index].astype(np.uint8)


# -- sampling -----------------------------------------------------------------


def sample_planted(pred, n: int, m: int, rng: np.random.Generator,
                   distinct: bool = False):
    """Uniform graph, uniform secret, outputs from the local function.

    Returns (instance, secret); accepts noisy predicates, in which case the
    per-output noise bit is drawn after the base evaluation.
    """
    graph = sample_distinct(n, m, pred.arity, rng) if distinct \
        else sample_uniform(n, m, pred.arity, rng)
    secret = Secret.random(n, rng)
    if isinstance(pred, NoisyPredicate):
        outputs = evaluate_noisy(graph, pred, secret, rng)
    else:
        outputs = evaluate(graph, pred, secret)
    return Instance(graph, outputs, kind="planted"), secret


def sample_null(pred, n: int, m: int, rng: np.random.Generator,
                distinct: bool = False) -> Instance:
    """Uniform graph with outputs i.i.d. Bernoulli at the predicate's output
    bias, independent of the graph."""
    graph = sample_distinct(n, m, pred.arity, rng) if distinct \
        else sample_uniform(n, m, pred.arity, rng)
    eta = output_bias(pred)
    outputs = (rng.random(m) < eta).astype(np.uint8)
    return Instance(graph, outputs, kind="null")


# -- secret utilities -----------------------------------------------------------


def balance_halfwidth(n: int, eps: float) -> float:
    """Half-width of the accepted weight window: 2 sqrt(n) ln(1/eps).

    Natural log; a wider window only weakens the test conservatively."""
    if not (0.0 < eps <= 1.0):
        raise ValueError("eps must lie in (0, 1]")
    return 2.0 * math.sqrt(n) * math.log(1.0 / eps)


def is_fairly_balanced(s: Secret, eps: float) -> bool:
    """True when the weight lies within n/2 plus/minus the window."""
    w = balance_halfwidth(s.n, eps)
    return abs(s.weight - s.n / 2.0) <= w


def fairly_balanced_weights(n: int, eps: float) -> list[int]:
    """Integer weights inside the window, ordered center outward.

    The outward order front-loads the likeliest weights when a caller
    iterates until one works."""
    w = balance_halfwidth(n, eps)
    lo = max(0, math.ceil(n / 2.0 - w))
    hi = min(n, math.floor(n / 2.0 + w))
    center = n / 2.0
    eligible = list(range(lo, hi + 1))
    return sorted(eligible, key=lambda k: (abs(k - center), k))


def sample_secret_with_weight(n: int, w: int,
                              rng: np.random.Generator) -> Secret:
    """Uniform over all weight-w strings."""
    if not (0 <= w <= n):
        raise ValueError("weight must lie in [0, n]")
    bits = np.zeros(n, dtype=np.uint8)
    bits[rng.choice(n, size=w, replace=False)] = 1
    return Secret(bits)


def sample_weight_secret_matrix(n: int, w: int, rows: int, rng) -> np.ndarray:
    """(rows, n) matrix of independent uniform weight-w secrets."""
    order = np.argsort(rng.random((rows, n)), axis=1)
    bits = np.zeros((rows, n), dtype=np.uint8)
    np.put_along_axis(bits, order[:, :w], 1, axis=1)
    return bits


def permuted_secret(s: Secret, pi) -> Secret:
    """Relabeled secret s' with s'[pi[j]] = s[j].

    This is the unique convention under which evaluating the relabeled
    graph on the relabeled secret reproduces the original outputs."""
    pi = _check_permutation(pi, s.n)
    out = np.empty(s.n, dtype=np.uint8)
    out[pi] = s.bits
    return Secret(out)


def verify(graph: Hypergraph, pred: Predicate, candidate: Secret,
           outputs) -> bool:
    """True iff the candidate reproduces the outputs exactly (noiseless)."""
    outputs = np.asarray(outputs, dtype=np.uint8)
    return bool(np.array_equal(evaluate(graph, pred, candidate), outputs))


# -- the instance oracle ---------------------------------------------------------


class SecretOracle:
    """Source of fresh planted instances sharing one hidden secret.

    Each draw uses an independent uniform graph; the secret is fixed for
    the oracle's lifetime. The optional budget makes exhaustion an explicit
    error instead of silently unbounded sampling.
    """

    def __init__(self, pred, n: int, m: int, rng: np.random.Generator,
                 secret: Optional[Secret] = None, distinct: bool = False,
                 max_draws: Optional[int] = None):
        self.pred = pred
        self.n = n
        self.m = m
        self.distinct = distinct
        self.max_draws = max_draws
        self.draws_used = 0
        self._rng = rng
        if secret is None:
            secret = Secret.random(n, rng)
        if secret.n != n:
            raise ValueError("secret length must equal n")
        self._secret = secret

    @property
    def d(self) -> int:
        return self.pred.arity

    @property
    def noisy(self) -> bool:
        return isinstance(self.pred, NoisyPredicate)

    @property
    def secret(self) -> Secret:
        """Harness-side access for scoring and reporting; never handed to
        decision procedures."""
        return self._secret

    def _spend(self, count: int, phase: str):
        if self.max_draws is not None and self.draws_used + count > self.max_draws:
            raise OracleExhaustedError(self.draws_used, self.max_draws, phase)
        self.draws_used += count

    def draw(self, phase: str = "draw") -> Instance:
        self._spend(1, phase)
        graph = sample_distinct(self.n, self.m, self.d, self._rng) \
            if self.distinct else sample_uniform(self.n, self.m, self.d, self._rng)
        if self.noisy:
            outputs = evaluate_noisy(graph, self.pred, self._secret, self._rng)
        else:
            outputs = evaluate(graph, self.pred, self._secret)
        return Instance(graph, outputs, kind="planted")

    def draw_edge_tensor(self, count: int, phase: str = "draw"):
        """Batched draws: (count, m, d) edge tensor plus (count, m) outputs."""
        self._spend(count, phase)
        if self.distinct:
            edges = sample_distinct_edge_tensor(self.n, count, self.m, self.d,
                                                self._rng)
        else:
            edges = sample_edge_tensor(self.n, count, self.m, self.d, self._rng)
        if self.noisy:
            clean = evaluate_edge_tensor(self.pred.base.table, edges,
                                         self._secret.bits)
            noise = (self._rng.random(clean.shape) < self.pred.noise_rate)
            outputs = clean ^ noise.astype(np.uint8)
        else:
            outputs = evaluate_edge_tensor(self.pred.table, edges,
                                           self._secret.bits)
        return edges, outputs
