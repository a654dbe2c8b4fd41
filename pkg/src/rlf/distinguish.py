"""Decision procedures over (hypergraph, outputs) instances and Monte Carlo
estimation of their planted-versus-null advantage.

A decision procedure sees only the graph and the output bits (never an
instance's kind tag) plus a private random stream, and returns one bit.
Built-ins include collision-based tests usable at any scale and an
exhaustive-enumeration likelihood-ratio test for desk-scale ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import InfeasibleParameterError
from .hypergraph import Hypergraph, sample_distinct_edge_tensor, sample_edge_tensor
from .localfn import evaluate_edge_tensor, sample_weight_secret_matrix
from .parallel import map_chunks
from .predicate import NoisyPredicate, Predicate, base_of, output_bias
from .stats import Z95, proportion_ci_halfwidth


@dataclass(frozen=True)
class Distinguisher:
    """A named decision procedure.

    ``decide(graph, outputs, rng) -> int`` handles one instance;
    ``decide_tensor(edges, outputs, n, rng) -> uint8 array`` optionally
    handles a batch of instances laid out as a (rows, m, d) edge tensor.
    Both must be deterministic given the stream state and thread-safe.
    """

    name: str
    decide: Callable
    decide_tensor: Optional[Callable] = None
    cost_note: str = ""

    def __call__(self, graph, outputs, rng) -> int:
        return self.decide(graph, outputs, rng)


def decide_many(D: Distinguisher, edges: np.ndarray, outputs: np.ndarray,
                n: int, rng: np.random.Generator) -> np.ndarray:
    """Run a distinguisher over an edge tensor, batched when it supports it."""
    if D.decide_tensor is not None:
        return np.asarray(D.decide_tensor(edges, outputs, n, rng), dtype=np.uint8)
    rows = edges.shape[0]
    out = np.empty(rows, dtype=np.uint8)
    for i in range(rows):
        graph = Hypergraph(n, edges[i].astype(np.int64))
        out[i] = D.decide(graph, outputs[i], rng)
    return out


def negate(D: Distinguisher) -> Distinguisher:
    """The complemented test; its advantage is exactly the negation."""
    tensor = None
    if D.decide_tensor is not None:
        tensor = lambda e, y, n, rng: 1 - np.asarray(
            D.decide_tensor(e, y, n, rng), dtype=np.uint8)
    return Distinguisher(
        name=f"not-{D.name}",
        decide=lambda g, y, rng: 1 - D.decide(g, y, rng),
        decide_tensor=tensor,
        cost_note=D.cost_note,
    )


# -- trivial baselines ---------------------------------------------------------


def coin_distinguisher() -> Distinguisher:
    """Fair coin, blind to the instance; advantage 0 by construction."""
    return Distinguisher(
        name="coin",
        decide=lambda g, y, rng: int(rng.integers(0, 2)),
        decide_tensor=lambda e, y, n, rng: rng.integers(
            0, 2, size=e.shape[0], dtype=np.uint8),
        cost_note="O(1)",
    )


def constant_distinguisher(bit: int = 1) -> Distinguisher:
    bit = int(bit)
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    return Distinguisher(
        name=f"constant-{bit}",
        decide=lambda g, y, rng: bit,
        decide_tensor=lambda e, y, n, rng: np.full(e.shape[0], bit, dtype=np.uint8),
        cost_note="O(1)",
    )


# -- repeated-edge collision test ------------------------------------------------


def _edge_keys(edges: np.ndarray, n: int) -> np.ndarray:
    """Per-edge integer key, equal keys iff equal ordered tuples."""
    rows, m, d = edges.shape
    if d * math.log2(max(n, 2)) > 62:
        raise InfeasibleParameterError("edge tuples too wide to key in int64")
    weights = (n ** np.arange(d, dtype=np.int64)).reshape(1, 1, d)
    return (edges.astype(np.int64) * weights).sum(axis=2)


def repeated_edge_distinguisher() -> Distinguisher:
    """Accepts iff some pair of identical edges exists and every such pair
    has equal output bits.

    Planted noiseless instances can never be rejected by a collision, while
    colliding null outputs agree only by chance.
    """

    def decide_tensor(edges, outputs, n, rng):
        keys = _edge_keys(edges, n)
        order = np.argsort(keys, axis=1, kind="stable")
        sk = np.take_along_axis(keys, order, axis=1)
        so = np.take_along_axis(outputs, order, axis=1)
        same = sk[:, 1:] == sk[:, :-1]
        collision = same.any(axis=1)
        conflict = (same & (so[:, 1:] != so[:, :-1])).any(axis=1)
        return (collision & ~conflict).astype(np.uint8)

    def decide(graph, outputs, rng):
        edges = graph.edges[None, :, :]
        y = np.asarray(outputs, dtype=np.uint8)[None, :]
        return int(decide_tensor(edges, y, graph.n, rng)[0])

    return Distinguisher(
        name="repeated-edge",
        decide=decide,
        decide_tensor=decide_tensor,
        cost_note="O(m log m) per instance",
    )


# -- likelihood-ratio test (exhaustive, desk scale) -------------------------------


@lru_cache(maxsize=8)
def _all_secrets(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def _preimage_counts(pred: Predicate, edges: np.ndarray,
                     outputs: np.ndarray, n: int) -> np.ndarray:
    """Number of secrets mapping to each row's outputs, by enumeration."""
    secrets = _all_secrets(n)
    rows = edges.shape[0]
    counts = np.zeros(rows, dtype=np.int64)
    # chunk the secret axis to keep the intermediate tensor small
    chunk = max(1, (1 << 22) // max(1, rows * edges.shape[1] * edges.shape[2]))
    idx = edges.astype(np.int64)
    weights = (1 << np.arange(edges.shape[2], dtype=np.int64)).reshape(1, 1, 1, -1)
    for start in range(0, secrets.shape[0], chunk):
        block = secrets[start:start + chunk]
        bits = block[:, idx]  # (chunk, rows, m, d)
        table_index = (bits.astype(np.int64) * weights).sum(axis=3)
        values = pred.table[table_index]
        counts += (values == outputs[None, :, :]).all(axis=2).sum(axis=0)
    return counts


def likelihood_ratio_distinguisher(pred, max_n: int = 20) -> Distinguisher:
    """Exact Neyman-Pearson test by exhaustive secret enumeration.

    Accepts iff the planted likelihood |{s : outputs of s match}| / 2^n
    strictly exceeds the null likelihood eta^w (1-eta)^(m-w); ties go to
    null. Exact dyadic arithmetic keeps the tie rule deterministic.
    Deterministic predicates only; refuses n above the cap.
    """
    if isinstance(pred, NoisyPredicate):
        raise ValueError("likelihood-ratio test enumerates deterministic "
                         "predicates only")
    if not (1 <= max_n <= 20):
        raise ValueError("max_n must lie in [1, 20]")
    eta = pred.bias()
    p, q = eta.numerator, eta.denominator

    def _null_rhs(n: int, m: int):
        # decision is count * q^m > 2^n * p^w * (q-p)^(m-w), all integers
        scale = q ** m
        base = 1 << n
        return scale, [base * (p ** w) * ((q - p) ** (m - w))
                       for w in range(m + 1)]

    def decide_tensor(edges, outputs, n, rng):
        if n > max_n:
            raise InfeasibleParameterError(
                f"likelihood-ratio enumeration capped at n={max_n}, got {n}")
        counts = _preimage_counts(pred, edges, outputs, n)
        scale, rhs = _null_rhs(n, edges.shape[1])
        w = outputs.sum(axis=1)
        out = np.fromiter(
            (1 if int(c) * scale > rhs[int(wi)] else 0
             for c, wi in zip(counts, w)),
            dtype=np.uint8, count=edges.shape[0])
        return out

    def decide(graph, outputs, rng):
        y = np.asarray(outputs, dtype=np.uint8)[None, :]
        return int(decide_tensor(graph.edges[None, :, :], y, graph.n, rng)[0])

    return Distinguisher(
        name="likelihood-ratio",
        decide=decide,
        decide_tensor=decide_tensor,
        cost_note=f"O(2^n m) per instance, n <= {max_n}",
    )


# -- parity-collision test --------------------------------------------------------


def parity_collision_distinguisher(pred, threshold: Optional[float] = None,
                                   witness: Optional[tuple] = None) -> Distinguisher:
    """Collision test on the correlated input positions.

    Collects pairs of edges whose vertex multisets agree on the witness
    positions; on such a pair the correlated parity cancels, so planted
    output pairs agree more often than the null rate eta^2 + (1-eta)^2.
    Accepts iff the agreeing fraction exceeds the threshold (default:
    midpoint between the null rate and perfect agreement); no qualifying
    pair means reject. Noise-tolerant, so it remains useful on noisy
    predicates where exact-consistency tests break.
    """
    base = base_of(pred)
    if base.is_constant():
        raise ValueError("parity-collision needs a non-constant predicate")
    if witness is None:
        witness = base.correlation_witnesses()[0]
    witness = tuple(witness)
    eta = output_bias(pred)
    null_rate = eta * eta + (1.0 - eta) * (1.0 - eta)
    if threshold is None:
        threshold = (null_rate + 1.0) / 2.0

    def decide_tensor(edges, outputs, n, rng):
        rows, m, d = edges.shape
        sub = np.sort(edges[:, :, list(witness)], axis=2)
        c = len(witness)
        if c * math.log2(max(n, 2)) > 62:
            raise InfeasibleParameterError("witness key too wide for int64")
        weights = (n ** np.arange(c, dtype=np.int64)).reshape(1, 1, c)
        keys = (sub.astype(np.int64) * weights).sum(axis=2)
        space = n ** c
        if rows * space <= 1 << 26:
            return _collision_fraction_dense(keys, outputs, space, threshold)
        return _collision_fraction_sorted(keys, outputs, threshold)

    def decide(graph, outputs, rng):
        y = np.asarray(outputs, dtype=np.uint8)[None, :]
        return int(decide_tensor(graph.edges[None, :, :], y, graph.n, rng)[0])

    return Distinguisher(
        name="parity-collision",
        decide=decide,
        decide_tensor=decide_tensor,
        cost_note="O(m log m) per instance",
    )


def _collision_fraction_dense(keys, outputs, space, threshold):
    rows, m = keys.shape
    flat = (keys + np.arange(rows, dtype=np.int64)[:, None] * space).ravel()
    counts = np.bincount(flat, minlength=rows * space).reshape(rows, space)
    ones = np.bincount(flat, weights=outputs.ravel().astype(np.float64),
                       minlength=rows * space).reshape(rows, space)
    zeros = counts - ones
    pairs = (counts * (counts - 1) / 2.0).sum(axis=1)
    agree = (ones * (ones - 1) / 2.0 + zeros * (zeros - 1) / 2.0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(pairs > 0, agree / np.maximum(pairs, 1), 0.0)
    return ((pairs > 0) & (frac > threshold)).astype(np.uint8)


def _collision_fraction_sorted(keys, outputs, threshold):
    rows, m = keys.shape
    order = np.argsort(keys, axis=1, kind="stable")
    sk = np.take_along_axis(keys, order, axis=1)
    so = np.take_along_axis(outputs.astype(np.int64), order, axis=1)
    out = np.zeros(rows, dtype=np.uint8)
    for i in range(rows):
        pairs = agree = 0
        j = 0
        while j < m:
            k = j
            while k < m and sk[i, k] == sk[i, j]:
                k += 1
            size = k - j
            if size >= 2:
                ones = int(so[i, j:k].sum())
                zeros = size - ones
                pairs += size * (size - 1) // 2
                agree += ones * (ones - 1) // 2 + zeros * (zeros - 1) // 2
            j = k
        out[i] = 1 if pairs > 0 and agree / pairs > threshold else 0
    return out


# -- advantage estimation ----------------------------------------------------------


@dataclass(frozen=True)
class AdvantageReport:
    """Monte Carlo acceptance frequencies on planted and null instances.

    ``advantage`` is signed (planted minus null); the 95% CI half-width
    covers the difference of the two proportions.
    """

    p_planted: float
    p_null: float
    advantage: float
    ci_halfwidth: float
    trials: int

    def as_dict(self) -> dict:
        return {
            "p_planted": self.p_planted,
            "p_null": self.p_null,
            "advantage": self.advantage,
            "ci_halfwidth": self.ci_halfwidth,
            "trials": self.trials,
        }


def _sample_planted_arm(pred, n, m, count, rng, distinct):
    d = pred.arity
    edges = sample_distinct_edge_tensor(n, count, m, d, rng) if distinct \
        else sample_edge_tensor(n, count, m, d, rng)
    secrets = rng.integers(0, 2, size=(count, n), dtype=np.uint8)
    if isinstance(pred, NoisyPredicate):
        outputs = evaluate_edge_tensor(pred.base.table, edges, secrets)
        outputs ^= (rng.random(outputs.shape) < pred.noise_rate).astype(np.uint8)
    else:
        outputs = evaluate_edge_tensor(pred.table, edges, secrets)
    return edges, outputs


def _sample_null_arm(pred, n, m, count, rng, distinct):
    d = pred.arity
    edges = sample_distinct_edge_tensor(n, count, m, d, rng) if distinct \
        else sample_edge_tensor(n, count, m, d, rng)
    outputs = (rng.random((count, m)) < output_bias(pred)).astype(np.uint8)
    return edges, outputs


def estimate_advantage(D: Distinguisher, pred, n: int, m: int, trials: int,
                       rng: np.random.Generator, workers: int = 1,
                       distinct: bool = False) -> AdvantageReport:
    """Acceptance frequency of D on fresh planted versus null instances.

    Each arm gets ``trials`` independent instances.
    """
    if trials < 1:
        raise ValueError("need at least one trial")

    def chunk(count, crng):
        edges, outputs = _sample_planted_arm(pred, n, m, count, crng, distinct)
        ones_p = int(decide_many(D, edges, outputs, n, crng).sum())
        edges, outputs = _sample_null_arm(pred, n, m, count, crng, distinct)
        ones_n = int(decide_many(D, edges, outputs, n, crng).sum())
        return ones_p, ones_n

    parts = map_chunks(trials, chunk, rng, workers=workers)
    ones_p = sum(p for p, _ in parts)
    ones_n = sum(q for _, q in parts)
    p_planted = ones_p / trials
    p_null = ones_n / trials
    se = math.sqrt(p_planted * (1 - p_planted) / trials
                   + p_null * (1 - p_null) / trials)
    return AdvantageReport(
        p_planted=p_planted,
        p_null=p_null,
        advantage=p_planted - p_null,
        ci_halfwidth=Z95 * se,
        trials=trials,
    )


def good_weight_scan(D: Distinguisher, pred, n: int, m: int, eps: float,
                     trials_per_weight: int, rng: np.random.Generator,
                     weights=None, workers: int = 1,
                     distinct: bool = False) -> dict:
    """Per-weight acceptance gap scan.

    For each weight, estimates the acceptance on planted instances whose
    secret is uniform of that weight, minus the (weight-independent) null
    acceptance, and flags weights whose estimated gap reaches eps/2. The
    gap depends on the secret only through its weight, so one estimate per
    weight covers every secret of that weight.
    """
    if weights is None:
        weights = range(n + 1)
    d = pred.arity

    def null_chunk(count, crng):
        edges, outputs = _sample_null_arm(pred, n, m, count, crng, distinct)
        return int(decide_many(D, edges, outputs, n, crng).sum())

    p_null = sum(map_chunks(trials_per_weight, null_chunk, rng,
                            workers=workers)) / trials_per_weight

    rows = []
    for w in weights:
        def planted_chunk(count, crng, w=w):
            edges = sample_distinct_edge_tensor(n, count, m, d, crng) \
                if distinct else sample_edge_tensor(n, count, m, d, crng)
            secrets = sample_weight_secret_matrix(n, w, count, crng)
            if isinstance(pred, NoisyPredicate):
                outputs = evaluate_edge_tensor(pred.base.table, edges, secrets)
                outputs ^= (crng.random(outputs.shape)
                            < pred.noise_rate).astype(np.uint8)
            else:
                outputs = evaluate_edge_tensor(pred.table, edges, secrets)
            return int(decide_many(D, edges, outputs, n, crng).sum())

        p0 = sum(map_chunks(trials_per_weight, planted_chunk, rng,
                            workers=workers)) / trials_per_weight
        gap = p0 - p_null
        ci = math.sqrt(proportion_ci_halfwidth(p0, trials_per_weight) ** 2
                       + proportion_ci_halfwidth(p_null, trials_per_weight) ** 2)
        rows.append({
            "weight": int(w),
            "p_planted": p0,
            "gap": gap,
            "ci_halfwidth": ci,
            "flagged": bool(gap >= eps / 2.0),
        })
    return {
        "p_null": p_null,
        "p_null_ci": proportion_ci_halfwidth(p_null, trials_per_weight),
        "trials_per_weight": trials_per_weight,
        "rows": rows,
    }


# -- registry ------------------------------------------------------------------


def by_name(name: str, pred=None, max_n: int = 20,
            threshold: Optional[float] = None) -> Distinguisher:
    """Build a named distinguisher; predicate-dependent ones require pred."""
    if name == "coin":
        return coin_distinguisher()
    if name == "constant-1":
        return constant_distinguisher(1)
    if name == "constant-0":
        return constant_distinguisher(0)
    if name == "repeated-edge":
        return repeated_edge_distinguisher()
    if name == "likelihood-ratio":
        if pred is None:
            raise ValueError("likelihood-ratio needs a predicate")
        return likelihood_ratio_distinguisher(pred, max_n=max_n)
    if name == "parity-collision":
        if pred is None:
            raise ValueError("parity-collision needs a predicate")
        return parity_collision_distinguisher(pred, threshold=threshold)
    raise ValueError(f"unknown distinguisher {name!r}; known: "
                     "coin, constant-0, constant-1, repeated-edge, "
                     "likelihood-ratio, parity-collision")
