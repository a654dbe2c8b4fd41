"""Search-to-decision reduction.

Given a distinguisher with advantage eps on planted-versus-null instances,
recover the hidden secret of an instance oracle: hybrid distributions that
interpolate between planted and null by applying random transformations to
a permuted graph, a per-bit predictor whose acceptance gap reveals whether
bit i equals bit 0, and Hoeffding amplification of that gap. Variants cover
noisy predicates (candidate sets instead of verified secrets) and
distinct-edge graphs.

Every hidden constant is explicit here: the transformation budget comes
from ``mixing_time`` through a configurable multiplier, and repetition
counts come from the exact Hoeffding closed form, so desk-scale runs can
use the smallest counts that still carry the guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .distinguish import Distinguisher, decide_many, negate
from .hypergraph import (
    Hypergraph,
    apply_permutations,
    chain_random_transforms,
    mixing_time,
    permute,
    random_permutations,
    sample_distinct,
    sample_distinct_edge_tensor,
    sample_edge_tensor,
    sample_uniform,
    transform,
    transform_distinct,
    transform_edges_once,
)
from .localfn import (
    Instance,
    Secret,
    SecretOracle,
    evaluate,
    evaluate_edge_tensor,
    evaluate_noisy,
    fairly_balanced_weights,
    sample_weight_secret_matrix,
    verify,
)
from .parallel import map_chunks, map_slices
from .predicate import NoisyPredicate, base_of
from .seeding import generator, substream
from .stats import hoeffding_repetitions, proportion_ci_halfwidth


# -- hybrids -------------------------------------------------------------------


@dataclass(frozen=True)
class HybridParams:
    """The sampled randomness of one hybrid draw: a permutation and the
    first r of a budget of t transformation pairs."""

    t: int
    r: int
    pi: np.ndarray
    pairs: np.ndarray  # (r, 2)

    def __post_init__(self):
        if not (0 <= self.r <= self.t):
            raise ValueError("need 0 <= r <= t")
        if self.pairs.shape != (self.r, 2):
            raise ValueError("need one (a, b) pair per applied step")

    @classmethod
    def draw(cls, t: int, r: int, n: int, rng: np.random.Generator):
        pi = rng.permutation(n)
        pairs = rng.integers(0, n, size=(r, 2))
        return cls(t=t, r=r, pi=pi, pairs=pairs)


def apply_hybrid(graph: Hypergraph, params: HybridParams,
                 rng: np.random.Generator) -> Hypergraph:
    """Permute the graph, then apply the r selected transformations."""
    step = transform_distinct if graph.distinct else transform
    out = permute(graph, params.pi)
    for a, b in params.pairs:
        out = step(out, int(a), int(b), rng)
    return out


def hybrid_sample(pred, s: Secret, r: int, t: int, n: int, m: int,
                  rng: np.random.Generator, distinct: bool = False) -> Instance:
    """One draw from the r-th hybrid: fresh uniform graph, outputs of the
    local function on ``s``, then a permutation and r random
    transformations applied to the graph only.

    At r=0 this is the planted distribution with a weight-matched secret;
    at r=t (the mixing budget) it is close to the null distribution.
    """
    if not (0 <= r <= t):
        raise ValueError("need 0 <= r <= t")
    graph = sample_distinct(n, m, pred.arity, rng) if distinct \
        else sample_uniform(n, m, pred.arity, rng)
    if isinstance(pred, NoisyPredicate):
        outputs = evaluate_noisy(graph, pred, s, rng)
    else:
        outputs = evaluate(graph, pred, s)
    params = HybridParams.draw(t=t, r=r, n=n, rng=rng)
    return Instance(apply_hybrid(graph, params, rng), outputs, kind="unknown")


def _hybrid_tensor(pred, secret_bits, r_counts, n, m, rng, distinct):
    """Batched hybrid draws over local secrets.

    ``secret_bits`` is (rows, n); returns (chained edge tensor, outputs).
    """
    rows = secret_bits.shape[0]
    d = pred.arity
    edges = sample_distinct_edge_tensor(n, rows, m, d, rng) if distinct \
        else sample_edge_tensor(n, rows, m, d, rng)
    if isinstance(pred, NoisyPredicate):
        outputs = evaluate_edge_tensor(pred.base.table, edges, secret_bits)
        outputs ^= (rng.random(outputs.shape) < pred.noise_rate).astype(np.uint8)
    else:
        outputs = evaluate_edge_tensor(pred.table, edges, secret_bits)
    perms = random_permutations(rows, n, rng)
    chained = chain_random_transforms(apply_permutations(perms, edges),
                                      r_counts, n, rng, distinct=distinct)
    return chained, outputs


# -- the per-bit predictor -------------------------------------------------------


def predictor(i: int, instance: Instance, D: Distinguisher, t: int,
              rng: np.random.Generator) -> int:
    """One predictor invocation for bit i against the reference bit 0.

    Draws a uniform depth r in [0, t), hybridizes the instance's graph,
    applies one extra transformation on the permuted images of vertices 0
    and i, and returns the distinguisher's verdict. When secret bits 0 and
    i agree the extra step cannot change any output, so acceptance matches
    the depth-r hybrid; when they differ it pushes the instance one hybrid
    step toward null, which is what the amplifier detects.
    """
    n = instance.graph.n
    if not (1 <= i < n):
        raise ValueError("bit index must lie in [1, n); bit 0 is the reference")
    r = int(rng.integers(0, t))
    params = HybridParams.draw(t=t, r=r, n=n, rng=rng)
    hybridized = apply_hybrid(instance.graph, params, rng)
    step = transform_distinct if instance.graph.distinct else transform
    final = step(hybridized, int(params.pi[0]), int(params.pi[i]), rng)
    return int(D.decide(final, instance.outputs, rng))


def _predictor_sums(edges, outputs, D, t, n, rng, distinct=False, workers=1):
    """Sum of predictor outputs per bit index over shared instances.

    The permutation and hybrid chain are drawn once per instance and shared
    across bit indices (each index still gets fresh coins for its final
    transformation), which leaves every index's marginal acceptance law
    unchanged while avoiding n-1 redundant chains.
    """
    total = edges.shape[0]

    def work(start, stop, crng):
        sub_edges = edges[start:stop]
        sub_out = outputs[start:stop]
        rows = stop - start
        r = crng.integers(0, t, size=rows)
        perms = random_permutations(rows, n, crng)
        chained = chain_random_transforms(
            apply_permutations(perms, sub_edges), r, n, crng, distinct=distinct)
        sums = np.zeros(n - 1, dtype=np.int64)
        a = perms[:, 0]
        for i in range(1, n):
            final = chained.copy()
            transform_edges_once(final, a, perms[:, i], crng, distinct=distinct)
            sums[i - 1] = int(decide_many(D, final, sub_out, n, crng).sum())
        return sums

    parts = map_slices(total, work, rng, workers=workers)
    return np.sum(parts, axis=0)


# -- equal-branch acceptance estimation --------------------------------------------


def estimate_eq(pred, weight: int, D: Distinguisher, t: int, n: int, m: int,
                trials: int, rng: np.random.Generator, distinct: bool = False,
                workers: int = 1):
    """Estimate the distinguisher's acceptance on depth-averaged hybrids of
    locally generated secrets with the given weight.

    Acceptance depends on the secret only through its weight (the hybrid
    permutes the secret first), so one estimate serves the weight class.
    Returns (estimate, 95% CI half-width).
    """
    if not (0 <= weight <= n):
        raise ValueError("weight must lie in [0, n]")

    def chunk(count, crng):
        secrets = sample_weight_secret_matrix(n, weight, count, crng)
        r = crng.integers(0, t, size=count)
        chained, outputs = _hybrid_tensor(pred, secrets, r, n, m, crng, distinct)
        return int(decide_many(D, chained, outputs, n, crng).sum())

    ones = sum(map_chunks(trials, chunk, rng, workers=workers))
    eq = ones / trials
    return eq, proportion_ci_halfwidth(eq, trials)


def estimate_equal_branch(pred, weight: int, s0: int, D: Distinguisher,
                          t: int, n: int, m: int, trials: int,
                          rng: np.random.Generator, distinct: bool = False,
                          workers: int = 1):
    """Estimate the predictor's acceptance on its equal branch directly.

    Runs the full predictor path on locally generated weight-w secrets,
    with the final transformation applied to a pair of positions holding
    the bit value ``s0`` (the reference-bit guess). This is the quantity
    the amplifier's threshold needs: applying the final step to an
    equal-bit pair provably cannot change any output value, but it does
    perturb the graph's conditional law once chain steps precede it, so
    the acceptance can drift measurably from the plain depth-averaged
    hybrid acceptance at small scale. Falls back to ``estimate_eq`` when
    the requested bit class has fewer than two members.

    Acceptance depends on the secret only through its weight and on the
    pair only through its class, so a canonical secret and pair suffice.
    """
    if not (0 <= weight <= n):
        raise ValueError("weight must lie in [0, n]")
    if s0 == 1:
        class_size, pair = weight, (0, 1)
    else:
        class_size, pair = n - weight, (n - 2, n - 1)
    if class_size < 2:
        return estimate_eq(pred, weight, D, t, n, m, trials, rng,
                           distinct=distinct, workers=workers)
    canonical = np.zeros(n, dtype=np.uint8)
    canonical[:weight] = 1  # positions [0, w) hold ones, the rest zeros

    def chunk(count, crng):
        secrets = np.broadcast_to(canonical, (count, n))
        r = crng.integers(0, t, size=count)
        d_arity = pred.arity
        edges = sample_distinct_edge_tensor(n, count, m, d_arity, crng) \
            if distinct else sample_edge_tensor(n, count, m, d_arity, crng)
        if isinstance(pred, NoisyPredicate):
            outputs = evaluate_edge_tensor(pred.base.table, edges, secrets)
            outputs ^= (crng.random(outputs.shape)
                        < pred.noise_rate).astype(np.uint8)
        else:
            outputs = evaluate_edge_tensor(pred.table, edges, secrets)
        perms = random_permutations(count, n, crng)
        chained = chain_random_transforms(
            apply_permutations(perms, edges), r, n, crng, distinct=distinct)
        transform_edges_once(chained, perms[:, pair[0]], perms[:, pair[1]],
                             crng, distinct=distinct)
        return int(decide_many(D, chained, outputs, n, crng).sum())

    ones = sum(map_chunks(trials, chunk, rng, workers=workers))
    est = ones / trials
    return est, proportion_ci_halfwidth(est, trials)


@dataclass(frozen=True)
class EqTable:
    """Threshold references per fairly balanced weight.

    Each weight maps to one reference per reference-bit guess. With the
    default equal-branch reference the two guesses can differ (the final
    pair sits in the ones or the zeros class); the plain hybrid reference
    is guess-independent and stored twice.
    """

    entries: dict  # weight -> {0: (eq, ci), 1: (eq, ci)}
    trials: int
    reference: str

    def as_rows(self) -> list[dict]:
        return [
            {
                "weight": w,
                "eq_if_s0_0": entry[0][0],
                "ci_if_s0_0": entry[0][1],
                "eq_if_s0_1": entry[1][0],
                "ci_if_s0_1": entry[1][1],
                "trials": self.trials,
                "reference": self.reference,
            }
            for w, entry in sorted(self.entries.items())
        ]


def build_eq_table(pred, D, weights, t, n, m, trials, rng, reference,
                   distinct=False, workers=1) -> EqTable:
    entries = {}
    for w in weights:
        if reference == "hybrid":
            est = estimate_eq(pred, w, D, t, n, m, trials, rng,
                              distinct=distinct, workers=workers)
            entries[w] = {0: est, 1: est}
        else:
            entries[w] = {
                0: estimate_equal_branch(pred, w, 0, D, t, n, m, trials, rng,
                                         distinct=distinct, workers=workers),
                1: estimate_equal_branch(pred, w, 1, D, t, n, m, trials, rng,
                                         distinct=distinct, workers=workers),
            }
    return EqTable(entries=entries, trials=trials, reference=reference)


# -- configuration ----------------------------------------------------------------


@dataclass(frozen=True)
class ReductionConfig:
    """Every constant of the reduction, explicit and overridable.

    ``eps`` is the claimed distinguisher advantage. Left at None, the
    repetition counts fall back to the exact Hoeffding closed forms:
    ``l`` with gap eps/(8t) and per-bit failure eps/(4n), ``eq_trials``
    with gap eps/(16t) and failure eps/8.
    """

    eps: float
    t_multiplier: float = 8.0
    distinct_multiplier: float = 10.0
    l: Optional[int] = None
    eq_trials: Optional[int] = None
    reuse_instances: bool = True
    try_negated_distinguisher: bool = True
    eq_reference: str = "equal-branch"
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.eps <= 1.0):
            raise ValueError("eps must lie in (0, 1]")
        if self.t_multiplier <= 0 or self.distinct_multiplier <= 0:
            raise ValueError("multipliers must be positive")
        if self.eq_reference not in ("equal-branch", "hybrid"):
            raise ValueError("eq_reference must be equal-branch or hybrid")
        for name in ("l", "eq_trials"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be at least 1")

    def with_overrides(self, **kwargs) -> "ReductionConfig":
        return replace(self, **kwargs)

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "t_multiplier": self.t_multiplier,
            "distinct_multiplier": self.distinct_multiplier,
            "l": self.l,
            "eq_trials": self.eq_trials,
            "reuse_instances": self.reuse_instances,
            "try_negated_distinguisher": self.try_negated_distinguisher,
            "eq_reference": self.eq_reference,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ResolvedParams:
    t: int
    l: int
    eq_trials: int
    weights: tuple
    eps: float

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "l": self.l,
            "eq_trials": self.eq_trials,
            "weights": list(self.weights),
            "eps": self.eps,
        }


def resolve_params(config: ReductionConfig, n: int, m: int, d: int,
                   distinct: bool = False) -> ResolvedParams:
    """Make every derived count concrete for a given problem size."""
    if n < 2:
        raise ValueError("secret recovery needs n >= 2")
    t = mixing_time(n, m, d, config.eps, multiplier=config.t_multiplier)
    if distinct:
        t = math.ceil(t * config.distinct_multiplier)
    l = config.l if config.l is not None else hoeffding_repetitions(
        config.eps / (8.0 * t), config.eps / (4.0 * n))
    eq_trials = config.eq_trials if config.eq_trials is not None else \
        hoeffding_repetitions(config.eps / (16.0 * t), config.eps / 8.0)
    weights = tuple(fairly_balanced_weights(n, config.eps))
    return ResolvedParams(t=t, l=l, eq_trials=eq_trials, weights=weights,
                          eps=config.eps)


def declare_equal(sums, l: int, eq: float, eps: float, t: int) -> np.ndarray:
    """Threshold rule: bit i is declared equal to bit 0 iff its predictor
    sum strictly exceeds l (eq - eps/(8t)); boundary sums declare unequal."""
    return np.asarray(sums) > l * (eq - eps / (8.0 * t))


def recover_relative_bits(oracle: SecretOracle, D: Distinguisher, eq: float,
                          config: ReductionConfig,
                          rng: Optional[np.random.Generator] = None,
                          workers: int = 1) -> np.ndarray:
    """Declare, for each i in [1, n), whether secret bit i equals bit 0.

    Runs l predictor repetitions per bit on fresh oracle instances (shared
    across bits unless ``reuse_instances`` is off) and thresholds the sums
    against the estimated equal-branch acceptance.
    """
    params = resolve_params(config, oracle.n, oracle.m, oracle.d,
                            oracle.distinct)
    if rng is None:
        rng = generator(substream(config.seed, "recover"))
    sums = _amplified_sums(oracle, D, params, rng, config.reuse_instances,
                           workers)
    return declare_equal(sums, params.l, eq, params.eps, params.t)


def _amplified_sums(oracle, D, params, rng, reuse_instances, workers):
    n = oracle.n
    if reuse_instances:
        edges, outputs = oracle.draw_edge_tensor(params.l, phase="amplification")
        return _predictor_sums(edges, outputs, D, params.t, n, rng,
                               distinct=oracle.distinct, workers=workers)
    sums = np.zeros(n - 1, dtype=np.int64)
    for i in range(1, n):
        edges, outputs = oracle.draw_edge_tensor(
            params.l, phase=f"amplification bit {i}")

        def work(start, stop, crng, i=i):
            rows = stop - start
            r = crng.integers(0, params.t, size=rows)
            perms = random_permutations(rows, n, crng)
            chained = chain_random_transforms(
                apply_permutations(perms, edges[start:stop]), r, n, crng,
                distinct=oracle.distinct)
            transform_edges_once(chained, perms[:, 0], perms[:, i], crng,
                                 distinct=oracle.distinct)
            return int(decide_many(D, chained, outputs[start:stop], n,
                                   crng).sum())

        sums[i - 1] = sum(map_slices(params.l, work, rng, workers=workers))
    return sums


# -- full search --------------------------------------------------------------------


@dataclass(frozen=True)
class SearchOutcome:
    success: bool
    secret: Optional[Secret]
    report: dict


def _assemble_candidate(s0: int, declarations: np.ndarray) -> Secret:
    n = declarations.shape[0] + 1
    bits = np.empty(n, dtype=np.uint8)
    bits[0] = s0
    bits[1:] = np.where(declarations, s0, 1 - s0)
    return Secret(bits)


def search(oracle: SecretOracle, D: Distinguisher, config: ReductionConfig,
           workers: int = 1) -> SearchOutcome:
    """Recover a verifying secret from the oracle, or report failure.

    Builds the equal-branch acceptance table over all fairly balanced
    weights, amplifies the per-bit predictor once per distinguisher variant
    (the sums do not depend on the weight hypothesis, only the thresholds
    do), and returns the first candidate that reproduces a fresh instance
    exactly. Failure is a normal outcome; a returned secret always
    verifies.
    """
    pred = oracle.pred
    if base_of(pred).is_constant():
        raise ValueError("search is undefined for constant predicates")
    if oracle.noisy:
        raise ValueError("noisy oracles have no exact verifier; "
                         "use search_noisy")
    params = resolve_params(config, oracle.n, oracle.m, oracle.d,
                            oracle.distinct)
    base = substream(config.seed, "search")
    n = oracle.n
    variants = [D] + ([negate(D)] if config.try_negated_distinguisher else [])
    report = {
        "params": params.as_dict(),
        "config": config.as_dict(),
        "variants": [],
        "success": False,
        "candidate": None,
    }
    for vi, Dv in enumerate(variants):
        eq_table = build_eq_table(
            pred, Dv, params.weights, params.t, n, oracle.m, params.eq_trials,
            generator(substream(base, "eq", vi)), config.eq_reference,
            distinct=oracle.distinct, workers=workers)
        sums = _amplified_sums(oracle, Dv, params,
                               generator(substream(base, "amplify", vi)),
                               config.reuse_instances, workers)
        ventry = {
            "distinguisher": Dv.name,
            "eq_table": eq_table.as_rows(),
            "predictor_sums": sums.tolist(),
            "attempts": [],
        }
        report["variants"].append(ventry)
        for w in params.weights:
            for s0 in (0, 1):
                eq, _ = eq_table.entries[w][s0]
                threshold = params.l * (eq - params.eps / (8.0 * params.t))
                declarations = declare_equal(sums, params.l, eq, params.eps,
                                             params.t)
                candidate = _assemble_candidate(s0, declarations)
                check = oracle.draw(phase="verification")
                ok = verify(check.graph, pred, candidate, check.outputs)
                ventry["attempts"].append({
                    "weight": w,
                    "s0": s0,
                    "threshold": threshold,
                    "candidate": candidate.to_string(),
                    "verified": ok,
                })
                if ok:
                    report["success"] = True
                    report["candidate"] = candidate.to_string()
                    report["oracle_draws"] = oracle.draws_used
                    return SearchOutcome(True, candidate, report)
    report["oracle_draws"] = oracle.draws_used
    return SearchOutcome(False, None, report)


@dataclass(frozen=True)
class NoisySearchOutcome:
    candidates: list
    scores: list
    report: dict


def candidate_agreement(oracle: SecretOracle, candidate: Secret,
                        draws: int = 16) -> float:
    """Fraction of output bits the candidate reproduces over fresh draws.

    Near 1 - beta for the true secret of a noisy oracle, near the collision
    rate of independent bits otherwise; used to rank noisy candidates."""
    edges, outputs = oracle.draw_edge_tensor(draws, phase="scoring")
    table = base_of(oracle.pred).table
    predicted = evaluate_edge_tensor(table, edges, candidate.bits)
    return float((predicted == outputs).mean())


def search_noisy(oracle: SecretOracle, D: Distinguisher,
                 config: ReductionConfig, workers: int = 1,
                 score_draws: int = 16) -> NoisySearchOutcome:
    """Noisy-predicate variant: no exact verification exists, so return the
    candidate set (at most 2n secrets: one per reference-bit guess per
    fairly balanced weight, weights capped at n) ranked by how well each
    candidate explains fresh outputs."""
    pred = oracle.pred
    if not isinstance(pred, NoisyPredicate):
        raise ValueError("search_noisy expects a noisy predicate oracle")
    if pred.base.is_constant():
        raise ValueError("search is undefined for constant base predicates")
    params = resolve_params(config, oracle.n, oracle.m, oracle.d,
                            oracle.distinct)
    base = substream(config.seed, "search-noisy")
    n = oracle.n
    weights = params.weights[:n]  # 2 candidates per weight keeps the set <= 2n
    variants = [D] + ([negate(D)] if config.try_negated_distinguisher else [])
    report = {
        "params": params.as_dict(),
        "config": config.as_dict(),
        "variants": [],
    }
    seen = set()
    candidates = []
    for vi, Dv in enumerate(variants):
        eq_table = build_eq_table(
            pred, Dv, weights, params.t, n, oracle.m, params.eq_trials,
            generator(substream(base, "eq", vi)), config.eq_reference,
            distinct=oracle.distinct, workers=workers)
        sums = _amplified_sums(oracle, Dv, params,
                               generator(substream(base, "amplify", vi)),
                               config.reuse_instances, workers)
        report["variants"].append({
            "distinguisher": Dv.name,
            "eq_table": eq_table.as_rows(),
            "predictor_sums": sums.tolist(),
        })
        for w in weights:
            for s0 in (0, 1):
                eq, _ = eq_table.entries[w][s0]
                declarations = declare_equal(sums, params.l, eq, params.eps,
                                             params.t)
                candidate = _assemble_candidate(s0, declarations)
                key = candidate.to_string()
                if key not in seen and len(candidates) < 2 * n:
                    seen.add(key)
                    candidates.append(candidate)
    scores = [candidate_agreement(oracle, c, draws=score_draws)
              for c in candidates]
    order = sorted(range(len(candidates)), key=lambda k: -scores[k])
    candidates = [candidates[k] for k in order]
    scores = [scores[k] for k in order]
    report["candidates"] = [
        {"candidate": c.to_string(), "agreement": s}
        for c, s in zip(candidates, scores)
    ]
    report["oracle_draws"] = oracle.draws_used
    return NoisySearchOutcome(candidates, scores, report)


def predictor_gap_table(pred, secret: Secret, D: Distinguisher, t: int,
                        m: int, trials: int, rng: np.random.Generator,
                        distinct: bool = False, workers: int = 1) -> dict:
    """Coupled Monte Carlo estimate of the predictor's acceptance gap.

    For a fixed secret, draws fresh planted instances, hybridizes each once
    (shared across bit indices), and compares the distinguisher's verdict
    before the final bit-pair transformation (the equal-branch acceptance)
    against its verdict after it, for every bit index. Sharing the chain
    couples the two sides, so the per-index gap CI reflects only the final
    step's effect.
    """
    n = secret.n

    def work(count, crng):
        secrets = np.broadcast_to(secret.bits, (count, n))
        r = crng.integers(0, t, size=count)
        d_arity = pred.arity
        edges = sample_distinct_edge_tensor(n, count, m, d_arity, crng) \
            if distinct else sample_edge_tensor(n, count, m, d_arity, crng)
        if isinstance(pred, NoisyPredicate):
            outputs = evaluate_edge_tensor(pred.base.table, edges, secrets)
            outputs ^= (crng.random(outputs.shape)
                        < pred.noise_rate).astype(np.uint8)
        else:
            outputs = evaluate_edge_tensor(pred.table, edges, secrets)
        perms = random_permutations(count, n, crng)
        chained = chain_random_transforms(
            apply_permutations(perms, edges), r, n, crng, distinct=distinct)
        eq_bits = decide_many(D, chained, outputs, n, crng).astype(np.int64)
        acc = np.zeros(n - 1, dtype=np.int64)
        diff = np.zeros(n - 1, dtype=np.int64)
        diff_sq = np.zeros(n - 1, dtype=np.int64)
        for i in range(1, n):
            final = chained.copy()
            transform_edges_once(final, perms[:, 0], perms[:, i], crng,
                                 distinct=distinct)
            bits = decide_many(D, final, outputs, n, crng).astype(np.int64)
            delta = eq_bits - bits
            acc[i - 1] = bits.sum()
            diff[i - 1] = delta.sum()
            diff_sq[i - 1] = (delta * delta).sum()
        return eq_bits.sum(), acc, diff, diff_sq

    parts = map_chunks(trials, work, rng, workers=workers)
    eq_total = sum(p[0] for p in parts)
    acc = np.sum([p[1] for p in parts], axis=0)
    diff = np.sum([p[2] for p in parts], axis=0)
    diff_sq = np.sum([p[3] for p in parts], axis=0)
    eq = eq_total / trials
    gap = diff / trials
    var = np.maximum(diff_sq / trials - gap ** 2, 0.0)
    gap_ci = 1.959963984540054 * np.sqrt(var / trials)
    rows = []
    for i in range(1, n):
        rows.append({
            "i": i,
            "equal_truth": bool(secret.bits[i] == secret.bits[0]),
            "acceptance": acc[i - 1] / trials,
            "gap": float(gap[i - 1]),
            "gap_ci": float(gap_ci[i - 1]),
        })
    return {
        "eq": eq,
        "eq_ci": proportion_ci_halfwidth(eq, trials),
        "t": t,
        "trials": trials,
        "rows": rows,
    }


# -- wide-arity feasibility check ------------------------------------------------------


@dataclass(frozen=True)
class SparsityReport:
    """Finite-size stand-ins for the two asymptotic conditions that admit
    polylog arity: the output-closeness condition
    (m/n^c) (log^r n * log(1/eps))^(2c) < eps^2 and the balance condition
    log^r n * log(1/eps) < sqrt(n). Base-2 logs; margins are lhs/rhs, so a
    condition holds while its margin stays below 1."""

    ok: bool
    output_lhs: float
    output_rhs: float
    output_margin: float
    balance_lhs: float
    balance_rhs: float
    balance_margin: float

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "output_condition": {
                "lhs": self.output_lhs,
                "rhs": self.output_rhs,
                "margin": self.output_margin,
                "ok": self.output_lhs < self.output_rhs,
            },
            "balance_condition": {
                "lhs": self.balance_lhs,
                "rhs": self.balance_rhs,
                "margin": self.balance_margin,
                "ok": self.balance_lhs < self.balance_rhs,
            },
        }


def check_large_sparsity(n: int, m: int, r: float, c: int,
                         eps: float) -> SparsityReport:
    """Evaluate both finite-n surrogate inequalities with margins."""
    if n < 2 or m < 1 or c < 1 or r < 0:
        raise ValueError("need n >= 2, m >= 1, c >= 1, r >= 0")
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    growth = (math.log2(n) ** r) * math.log2(1.0 / eps)
    output_lhs = (m / float(n) ** c) * growth ** (2 * c)
    output_rhs = eps * eps
    balance_lhs = growth
    balance_rhs = math.sqrt(n)
    return SparsityReport(
        ok=(output_lhs < output_rhs) and (balance_lhs < balance_rhs),
        output_lhs=output_lhs,
        output_rhs=output_rhs,
        output_margin=output_lhs / output_rhs,
        balance_lhs=balance_lhs,
        balance_rhs=balance_rhs,
        balance_margin=balance_lhs / balance_rhs,
    )
