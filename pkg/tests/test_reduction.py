"""Hybrids, the per-bit predictor, amplification, and full search."""

import itertools
import math

import numpy as np
import pytest
from scipy import stats as scipy_stats

import rlf
from rlf.distinguish import (
    coin_distinguisher,
    constant_distinguisher,
    Distinguisher,
    parity_collision_distinguisher,
    repeated_edge_distinguisher,
)
from rlf.hypergraph import Hypergraph, mixing_time
from rlf.localfn import Secret, SecretOracle, evaluate, sample_secret_with_weight
from rlf.predicate import NoisyPredicate, builtin
from rlf.reduction import (
    HybridParams,
    ReductionConfig,
    check_large_sparsity,
    declare_equal,
    estimate_eq,
    estimate_equal_branch,
    hybrid_sample,
    predictor,
    predictor_gap_table,
    recover_relative_bits,
    resolve_params,
    search,
    search_noisy,
)
from rlf.seeding import generator

from oracles import enumerate_graphs, graph_key, transform_kernel


def _rng(seed=0):
    return np.random.default_rng(seed)


def _mean_step_kernel(n, width):
    M = np.zeros((n ** width, n ** width))
    for a in range(n):
        for b in range(n):
            M += transform_kernel(n, width, a, b) / n ** 2
    return M


def _initial_joint(pi, pred, secret, n, width):
    """Exact law of (permuted graph, output) over uniform graphs."""
    p = np.zeros((n ** width, 1 << (width // pred.arity)))
    for slots in enumerate_graphs(n, width):
        graph = Hypergraph(n, np.array(slots).reshape(-1, pred.arity))
        y = evaluate(graph, pred, secret)
        code = int((y * (1 << np.arange(y.shape[0]))).sum())
        permuted = tuple(int(pi[v]) for v in slots)
        p[graph_key(permuted, n), code] += 1.0 / n ** width
    return p


class TestHybridSample:
    def test_depth_zero_equals_weight_matched_planted_exactly(self):
        # law of (permuted graph, outputs) at depth 0 coincides with a
        # planted instance whose secret is uniform in the weight class
        n, m, d = 4, 1, 2
        pred = builtin("xor2")
        s = Secret.from_string("0110")
        width = m * d
        hybrid = np.zeros((n ** width, 2))
        perms = list(itertools.permutations(range(n)))
        for pi in perms:
            hybrid += _initial_joint(np.array(pi), pred, s, n, width) / len(perms)
        planted = np.zeros((n ** width, 2))
        weight_class = [np.array(bits, dtype=np.uint8)
                        for bits in itertools.product((0, 1), repeat=n)
                        if sum(bits) == s.weight]
        for bits in weight_class:
            planted += _initial_joint(np.arange(n), pred, Secret(bits), n,
                                      width) / len(weight_class)
        assert np.abs(hybrid - planted).max() < 1e-12

    def test_graph_marginal_stays_uniform(self):
        # stability: the hybrid's graph marginal is uniform at any depth
        rng = _rng(1)
        pred = builtin("xor2")
        s = Secret.from_string("0101")
        counts = np.zeros(81, dtype=np.int64)
        for _ in range(20000):
            inst = hybrid_sample(pred, Secret.from_string("011"), 3, 8, 3, 2,
                                 rng)
            counts[graph_key(inst.graph.edges.ravel(), 3)] += 1
        assert scipy_stats.chisquare(counts).pvalue > 0.01

    def test_depth_bounds_checked(self):
        with pytest.raises(ValueError):
            hybrid_sample(builtin("xor2"), Secret.from_string("0101"), 5, 4,
                          4, 2, _rng(2))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            HybridParams(t=3, r=4, pi=np.arange(4), pairs=np.zeros((4, 2)))


class TestPredictorDistribution:
    """Exact small-scale law of the predictor's input.

    At depth budget t=1 the final equal-pair transformation provably leaves
    the joint law untouched. For t >= 2 the equal-branch law drifts from
    the depth-averaged hybrid by a small but genuinely nonzero amount
    (chain steps can couple one of the swapped vertices to a third value),
    which is why the amplifier's threshold reference estimates the equal
    branch itself rather than assuming the two laws coincide.
    """

    def _exact_laws(self, t, i):
        n, m, d = 4, 1, 2
        pred = builtin("xor2")
        s = Secret.from_string("0110")
        width = m * d
        M = _mean_step_kernel(n, width)
        Mpow = [np.linalg.matrix_power(M, r) for r in range(t)]
        perms = list(itertools.permutations(range(n)))
        d_hybrid = np.zeros((n ** width, 2))
        d_final = np.zeros((n ** width, 2))
        for pi in perms:
            p0 = _initial_joint(np.array(pi), pred, s, n, width)
            final_kernel = transform_kernel(n, width, pi[0], pi[i])
            for r in range(t):
                q = Mpow[r].T @ p0
                d_hybrid += q / (t * len(perms))
                d_final += (final_kernel.T @ q) / (t * len(perms))
        return d_hybrid, d_final

    def test_equal_pair_exact_at_unit_budget(self):
        d_hybrid, d_final = self._exact_laws(t=1, i=3)  # s_0 == s_3
        assert np.abs(d_final - d_hybrid).max() < 1e-12

    def test_equal_pair_drift_is_small_but_nonzero_at_larger_budget(self):
        d_hybrid, d_final = self._exact_laws(t=3, i=3)
        tv = 0.5 * np.abs(d_final - d_hybrid).sum()
        assert 0.001 < tv < 0.05

    def test_unequal_pair_moves_further(self):
        _, d_equal = self._exact_laws(t=3, i=3)
        d_hybrid, d_unequal = self._exact_laws(t=3, i=1)  # s_0 != s_1
        tv_equal = 0.5 * np.abs(d_equal - d_hybrid).sum()
        tv_unequal = 0.5 * np.abs(d_unequal - d_hybrid).sum()
        assert tv_unequal > 4 * tv_equal

    def test_mixture_decomposition_exact(self):
        # one more uniform transformation is exactly the balance-weighted
        # mixture of the equal-conditioned and unequal-conditioned steps
        n, m, d, t = 4, 1, 2, 3
        pred = builtin("xor2")
        s = Secret.from_string("0110")
        width = m * d
        M = _mean_step_kernel(n, width)
        perms = list(itertools.permutations(range(n)))
        Mpow = [np.linalg.matrix_power(M, r) for r in range(t)]
        lhs = np.zeros((n ** width, 2))
        equal_part = np.zeros((n ** width, 2))
        unequal_part = np.zeros((n ** width, 2))
        for pi in perms:
            p0 = _initial_joint(np.array(pi), pred, s, n, width)
            # conditioned kernels given the permuted secret bits
            s_perm = np.empty(n, dtype=int)
            s_perm[list(pi)] = s.bits
            pairs_eq = [(a, b) for a in range(n) for b in range(n)
                        if s_perm[a] == s_perm[b]]
            pairs_ne = [(a, b) for a in range(n) for b in range(n)
                        if s_perm[a] != s_perm[b]]
            K_eq = sum(transform_kernel(n, width, a, b)
                       for a, b in pairs_eq) / len(pairs_eq)
            K_ne = sum(transform_kernel(n, width, a, b)
                       for a, b in pairs_ne) / len(pairs_ne)
            w_eq = len(pairs_eq) / n ** 2
            for r in range(t):
                q = Mpow[r].T @ p0
                lhs += (M.T @ q) / (t * len(perms))
                equal_part += w_eq * (K_eq.T @ q) / (t * len(perms))
                unequal_part += (1 - w_eq) * (K_ne.T @ q) / (t * len(perms))
        assert np.abs(lhs - (equal_part + unequal_part)).max() < 1e-12

    def test_library_predictor_matches_exact_law(self):
        # histogram the single-instance predictor path against enumeration
        n, m, d, t, i = 4, 1, 2, 2, 3
        pred = builtin("xor2")
        s = Secret.from_string("0110")
        _, d_final = self._exact_laws(t=t, i=i)
        rng = _rng(3)
        recorded = []

        def record(graph, outputs, r):
            recorded.append((graph_key(graph.edges.ravel(), n),
                             int(outputs[0])))
            return 0

        D = Distinguisher(name="recorder", decide=record)
        draws = 40000
        for _ in range(draws):
            inst, _ = rlf.sample_planted(pred, n, m, rng)
            inst = rlf.Instance(inst.graph, evaluate(inst.graph, pred, s),
                                kind="unknown")
            predictor(i, inst, D, t, rng)
        counts = np.zeros((16, 2))
        for key, y in recorded:
            counts[key, y] += 1
        expected = d_final * draws
        keep = expected.ravel() > 0
        assert counts.ravel()[~keep].sum() == 0
        p = scipy_stats.chisquare(counts.ravel()[keep],
                                  expected.ravel()[keep]).pvalue
        assert p > 0.005

    def test_not_equal_ordering_within_ci(self):
        # acceptance after an unequal-pair step never beats the next hybrid
        n, m, t = 6, 24, 12
        pred = builtin("identity")
        s = Secret.from_string("000111")
        D = repeated_edge_distinguisher()
        rng = _rng(4)
        trials = 30000
        acc_h = acc_next = 0
        for _ in range(trials):
            r = int(rng.integers(0, t))
            inst = hybrid_sample(pred, s, r, t, n, m, rng)
            pi = rng.permutation(n)
            from rlf.hypergraph import permute, transform
            g = permute(inst.graph, pi)
            final = transform(g, int(pi[0]), int(pi[1]), rng)  # s_0 != s_1
            acc_h += D.decide(final, inst.outputs, rng)
            nxt = hybrid_sample(pred, s, r + 1, t + 1, n, m, rng)
            acc_next += D.decide(nxt.graph, nxt.outputs, rng)
        gap = (acc_next - acc_h) / trials
        ci = 2 * 1.96 * math.sqrt(0.25 / trials)
        assert gap >= -ci

    def test_predictor_rejects_reference_index(self):
        rng = _rng(5)
        inst, _ = rlf.sample_planted(builtin("xor2"), 5, 4, rng)
        with pytest.raises(ValueError):
            predictor(0, inst, coin_distinguisher(), 4, rng)


class TestTelescoping:
    def test_average_step_gap_matches_endpoints(self):
        # mean over r of (acceptance at r minus at r+1) equals the endpoint
        # difference divided by t, estimated from independent draws
        n, m, t = 6, 24, 10
        pred = builtin("identity")
        s = Secret.from_string("010101")
        D = repeated_edge_distinguisher()
        rng = _rng(6)
        trials = 40000

        def accept_at(depths):
            total = 0
            for _ in range(trials):
                r = int(depths[int(rng.integers(0, len(depths)))])
                inst = hybrid_sample(pred, s, r, t + 1, n, m, rng)
                total += D.decide(inst.graph, inst.outputs, rng)
            return total / trials

        lhs = accept_at(range(0, t)) - accept_at(range(1, t + 1))
        acc0 = accept_at([0])
        acct = accept_at([t])
        rhs = (acc0 - acct) / t
        ci = 3 * math.sqrt(0.25 / trials) * (1 + 2 / t)
        assert abs(lhs - rhs) < ci


class TestEqualCaseExactness:
    def test_outputs_invariant_under_equal_bit_transformation(self):
        rng = _rng(7)
        pred = builtin("maj3")
        failures = 0
        for _ in range(2000):
            graph = rlf.sample_uniform(8, 6, 3, rng)
            s = Secret.random(8, rng)
            a = int(rng.integers(0, 8))
            same = np.flatnonzero(s.bits == s.bits[a])
            b = int(same[rng.integers(0, same.size)])
            before = evaluate(graph, pred, s)
            after = evaluate(rlf.transform(graph, a, b, rng), pred, s)
            failures += not np.array_equal(before, after)
        assert failures == 0


class TestEstimateEq:
    def test_constant_one_is_exactly_one(self):
        eq, ci = estimate_eq(builtin("xor2"), 2, constant_distinguisher(1),
                             8, 5, 6, 2000, _rng(8))
        assert eq == 1.0 and ci == 0.0

    def test_coin_is_half(self):
        eq, ci = estimate_eq(builtin("xor2"), 2, coin_distinguisher(),
                             8, 5, 6, 20000, _rng(9))
        assert abs(eq - 0.5) < 2.5 * ci

    def test_ci_shrinks_with_sqrt_trials(self):
        _, ci1 = estimate_eq(builtin("xor2"), 2, coin_distinguisher(),
                             8, 5, 6, 10000, _rng(10))
        _, ci2 = estimate_eq(builtin("xor2"), 2, coin_distinguisher(),
                             8, 5, 6, 40000, _rng(11))
        assert 1.7 < ci1 / ci2 < 2.3

    def test_equal_branch_falls_back_when_class_too_small(self):
        eq_plain, _ = estimate_eq(builtin("identity"), 0,
                                  constant_distinguisher(1), 4, 6, 8, 500,
                                  _rng(12))
        eq_branch, _ = estimate_equal_branch(builtin("identity"), 0, 1,
                                             constant_distinguisher(1), 4, 6,
                                             8, 500, _rng(12))
        assert eq_plain == eq_branch == 1.0


class TestDeclareEqual:
    def test_strict_threshold_tie_goes_unequal(self):
        # threshold = 10 (0.6 - 0.1) = 5.0; a sum of exactly 5 is unequal
        decls = declare_equal(np.array([5, 6, 4]), l=10, eq=0.6, eps=0.8, t=1)
        assert decls.tolist() == [False, True, False]


class TestRecoverRelativeBits:
    def test_all_zero_secret_all_equal(self):
        pred = builtin("identity")
        D = repeated_edge_distinguisher()
        oracle = SecretOracle(pred, 12, 64, generator(20, "oracle"),
                              secret=Secret(np.zeros(12, dtype=np.uint8)))
        config = ReductionConfig(eps=1.0, t_multiplier=0.5, l=4000,
                                 eq_trials=4000, seed=21)
        eq, _ = estimate_equal_branch(pred, 0, 0, D, 40, 12, 64, 4000,
                                      generator(22))
        decls = recover_relative_bits(oracle, D, eq, config)
        assert decls.all()

    def test_independent_instances_mode(self):
        # reuse off: every bit index amplifies on its own fresh draws
        pred = builtin("identity")
        D = repeated_edge_distinguisher()
        config = ReductionConfig(eps=1.0, t_multiplier=0.4, l=2500,
                                 eq_trials=2500, reuse_instances=False,
                                 seed=40)
        oracle = SecretOracle(pred, 6, 32, generator(41, "oracle"),
                              secret=Secret.from_string("010101"))
        eq, _ = estimate_equal_branch(pred, 3, 0, D, 17, 6, 32, 4000,
                                      generator(42))
        decls = recover_relative_bits(oracle, D, eq, config)
        truth = oracle.secret.bits[1:] == oracle.secret.bits[0]
        assert np.array_equal(decls, truth)
        assert oracle.draws_used == 5 * 2500

    def test_per_bit_error_rate_within_bound(self):
        # l derived from the closed form at failure 0.1 per bit; the strong
        # distinguisher keeps the observed rate far below it
        pred = builtin("identity")
        D = repeated_edge_distinguisher()
        eps, t_mult = 1.0, 0.3
        n, m = 6, 32
        t = mixing_time(n, m, 1, eps, multiplier=t_mult)
        delta = 0.1
        l = rlf.hoeffding_repetitions(eps / (8 * t), delta)
        config = ReductionConfig(eps=eps, t_multiplier=t_mult, l=l,
                                 eq_trials=8000, seed=0)
        errors = bits = 0
        for k in range(12):
            oracle = SecretOracle(pred, n, m, generator(400 + k, "oracle"),
                                  secret=sample_secret_with_weight(
                                      n, 3, generator(30 + k)))
            s0 = int(oracle.secret.bits[0])
            eq, _ = estimate_equal_branch(pred, 3, s0, D, t, n, m, 8000,
                                          generator(500 + k))
            decls = recover_relative_bits(
                oracle, D, eq, config.with_overrides(seed=600 + k))
            truth = oracle.secret.bits[1:] == oracle.secret.bits[0]
            errors += int((decls != truth).sum())
            bits += n - 1
        rate = errors / bits
        ci = 1.96 * math.sqrt(max(rate * (1 - rate), 1e-9) / bits)
        assert rate <= delta + ci


class TestSearch:
    def test_end_to_end_identity(self):
        pred = builtin("identity")
        D = repeated_edge_distinguisher()
        config = ReductionConfig(eps=1.0, t_multiplier=0.5, l=6000,
                                 eq_trials=6000, seed=100)
        oracle = SecretOracle(pred, 10, 48, generator(101, "oracle"),
                              secret=sample_secret_with_weight(10, 5,
                                                               generator(102)))
        out = search(oracle, D, config)
        assert out.success
        assert np.array_equal(out.secret.bits, oracle.secret.bits)
        check = oracle.draw()
        assert rlf.verify(check.graph, pred, out.secret, check.outputs)

    def test_weak_distinguisher_reports_failure_soundly(self):
        pred = builtin("identity")
        config = ReductionConfig(eps=0.5, t_multiplier=0.5, l=200,
                                 eq_trials=200, seed=103)
        oracle = SecretOracle(pred, 10, 96, generator(104, "oracle"))
        out = search(oracle, coin_distinguisher(), config)
        if out.success:  # sound even in the unlikely verified-by-luck case
            check = oracle.draw()
            assert rlf.verify(check.graph, pred, out.secret, check.outputs)
        else:
            assert out.secret is None
            assert out.report["success"] is False

    def test_likelihood_ratio_search_hits_floor(self):
        # success frequency at least an eighth of the measured advantage
        pred = builtin("xor2")
        lr = rlf.likelihood_ratio_distinguisher(pred)
        adv = rlf.estimate_advantage(lr, pred, 8, 24, 1000, generator(105))
        eps_hat = adv.advantage
        config = ReductionConfig(eps=eps_hat, t_multiplier=0.25, l=6000,
                                 eq_trials=30000, seed=0,
                                 try_negated_distinguisher=False)
        runs, wins = 4, 0
        for k in range(runs):
            oracle = SecretOracle(pred, 8, 24, generator(300 + k, "oracle"))
            out = search(oracle, lr, config.with_overrides(seed=500 + k))
            wins += out.success
        assert wins >= max(1, math.ceil(eps_hat / 8 * runs))

    def test_distinct_mode_end_to_end(self):
        pred = builtin("xor2")
        lr = rlf.likelihood_ratio_distinguisher(pred)
        config = ReductionConfig(eps=1.0, t_multiplier=0.125,
                                 distinct_multiplier=2.0, l=6000,
                                 eq_trials=30000, seed=611,
                                 try_negated_distinguisher=False)
        oracle = SecretOracle(pred, 8, 24, generator(601, "oracle"),
                              distinct=True)
        out = search(oracle, lr, config)
        assert out.success
        check = oracle.draw()
        assert check.graph.distinct
        assert rlf.verify(check.graph, pred, out.secret, check.outputs)

    def test_negated_distinguisher_recovers_from_flipped_sign(self):
        pred = builtin("identity")
        D = rlf.negate(repeated_edge_distinguisher())  # advantage -1
        config = ReductionConfig(eps=1.0, t_multiplier=0.5, l=5000,
                                 eq_trials=5000, seed=106,
                                 try_negated_distinguisher=True)
        oracle = SecretOracle(pred, 10, 48, generator(107, "oracle"),
                              secret=sample_secret_with_weight(10, 5,
                                                               generator(108)))
        out = search(oracle, D, config)
        assert out.success
        assert out.report["variants"][1]["distinguisher"].startswith("not-")

    def test_constant_predicate_rejected(self):
        from rlf.predicate import Predicate
        pred = Predicate.from_table([1, 1])
        oracle = SecretOracle(pred, 6, 8, generator(109))
        with pytest.raises(ValueError):
            search(oracle, coin_distinguisher(),
                   ReductionConfig(eps=0.5, seed=0))

    def test_noisy_oracle_routed_to_noisy_search(self):
        noisy = NoisyPredicate(builtin("identity"), 0.1)
        oracle = SecretOracle(noisy, 6, 8, generator(110))
        with pytest.raises(ValueError):
            search(oracle, coin_distinguisher(),
                   ReductionConfig(eps=0.5, seed=0))


class TestSearchNoisy:
    def test_zero_noise_contains_plain_search_result(self):
        base = builtin("identity")
        noisy = NoisyPredicate(base, 0.0)
        D = repeated_edge_distinguisher()
        config = ReductionConfig(eps=1.0, t_multiplier=0.5, l=5000,
                                 eq_trials=5000, seed=111,
                                 try_negated_distinguisher=False)
        secret = sample_secret_with_weight(10, 5, generator(112))
        plain_oracle = SecretOracle(base, 10, 48, generator(113, "oracle"),
                                    secret=secret)
        plain = search(plain_oracle, D, config)
        noisy_oracle = SecretOracle(noisy, 10, 48, generator(113, "oracle"),
                                    secret=secret)
        noisy_out = search_noisy(noisy_oracle, D, config)
        assert plain.success
        assert any(np.array_equal(c.bits, secret.bits)
                   for c in noisy_out.candidates)

    def test_candidate_set_capped_at_two_n(self):
        noisy = NoisyPredicate(builtin("identity"), 0.05)
        D = parity_collision_distinguisher(noisy)
        # wide window: every weight is fairly balanced at small eps
        config = ReductionConfig(eps=0.05, t_multiplier=0.2, l=300,
                                 eq_trials=300, seed=114)
        oracle = SecretOracle(noisy, 6, 32, generator(115, "oracle"))
        out = search_noisy(oracle, D, config)
        assert len(out.candidates) <= 12
        assert len(out.scores) == len(out.candidates)
        assert all(b >= a for a, b in zip(out.scores[1:], out.scores[:-1]))

    def test_requires_noisy_predicate(self):
        oracle = SecretOracle(builtin("identity"), 6, 8, generator(116))
        with pytest.raises(ValueError):
            search_noisy(oracle, coin_distinguisher(),
                         ReductionConfig(eps=0.5, seed=0))


class TestPermutationEquivariance:
    def test_declaration_frequencies_match_under_relabeling(self):
        # relabeled oracles produce the same declaration distribution once
        # indices are mapped back through the relabeling
        pred = builtin("identity")
        D = repeated_edge_distinguisher()
        n, m, runs = 6, 32, 12
        rho = np.array([0, 3, 4, 1, 5, 2])  # fixes index 0
        rho_inv = np.argsort(rho)
        secret = Secret.from_string("011010")
        relabeled = rlf.permuted_secret(secret, rho)
        config = ReductionConfig(eps=1.0, t_multiplier=0.3, l=2500,
                                 eq_trials=2500, seed=0)
        t = mixing_time(n, m, 1, 1.0, multiplier=0.3)

        def frequencies(sec):
            freq = np.zeros(n - 1)
            for k in range(runs):
                oracle = SecretOracle(pred, n, m, generator(800 + k, "oracle"),
                                      secret=sec)
                eq, _ = estimate_equal_branch(
                    pred, sec.weight, int(sec.bits[0]), D, t, n, m, 2500,
                    generator(900 + k))
                decls = recover_relative_bits(
                    oracle, D, eq, config.with_overrides(seed=700 + k))
                freq += decls
            return freq / runs

        f1 = frequencies(secret)
        f2 = frequencies(relabeled)
        # map world-2 declarations back: bit j of the relabeled secret is
        # bit rho_inv[j] of the original
        mapped = np.array([f2[j - 1] for j in range(1, n)])
        back = np.array([mapped[0]] * (n - 1))
        for j in range(1, n):
            back[rho_inv[j] - 1] = f2[j - 1]
        assert np.abs(f1 - back).max() <= 0.35  # frequencies sit near 0 or 1
        truth = (secret.bits[1:] == secret.bits[0]).astype(float)
        assert np.abs(f1 - truth).max() <= 0.35


class TestResolveParams:
    def test_counts_come_from_closed_forms(self):
        config = ReductionConfig(eps=1.0, t_multiplier=0.5, seed=0)
        params = resolve_params(config, 12, 64, 1)
        assert params.t == 40
        assert params.l == rlf.hoeffding_repetitions(1.0 / (8 * 40),
                                                     1.0 / 48)
        assert params.eq_trials == rlf.hoeffding_repetitions(1.0 / (16 * 40),
                                                             1.0 / 8)
        assert params.weights == (6,)

    def test_distinct_multiplier_inflates_budget(self):
        config = ReductionConfig(eps=0.5, t_multiplier=0.5, l=10,
                                 eq_trials=10, seed=0)
        plain = resolve_params(config, 8, 16, 2, distinct=False)
        dist = resolve_params(config, 8, 16, 2, distinct=True)
        assert dist.t == 10 * plain.t

    def test_overrides_respected(self):
        config = ReductionConfig(eps=0.5, l=123, eq_trials=456, seed=0)
        params = resolve_params(config, 8, 16, 2)
        assert params.l == 123 and params.eq_trials == 456

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ReductionConfig(eps=0.0)
        with pytest.raises(ValueError):
            ReductionConfig(eps=0.5, l=0)
        with pytest.raises(ValueError):
            ReductionConfig(eps=0.5, eq_reference="other")


class TestCheckLargeSparsity:
    def test_comfortable_regime_holds(self):
        report = check_large_sparsity(n=10 ** 4, m=10 ** 4, r=0, c=3, eps=0.1)
        assert report.ok
        assert report.output_margin < 1e-2
        assert report.balance_margin < 0.1

    def test_shrinking_eps_eventually_fails(self):
        assert not check_large_sparsity(n=10 ** 4, m=10 ** 4, r=0, c=3,
                                        eps=1e-40).ok

    def test_marginal_balance_condition(self):
        report = check_large_sparsity(n=16, m=16, r=1, c=2, eps=0.5)
        assert abs(report.balance_margin - 1.0) < 1e-12

    def test_domain(self):
        with pytest.raises(ValueError):
            check_large_sparsity(n=1, m=1, r=0, c=1, eps=0.5)
        with pytest.raises(ValueError):
            check_large_sparsity(n=4, m=1, r=0, c=1, eps=1.0)


class TestPredictorGapTable:
    def test_all_zero_secret_marks_every_index_equal(self):
        table = predictor_gap_table(builtin("identity"),
                                    Secret(np.zeros(8, dtype=np.uint8)),
                                    repeated_edge_distinguisher(), 20, 32,
                                    4000, _rng(13))
        assert len(table["rows"]) == 7
        assert all(row["equal_truth"] for row in table["rows"])

    def test_unequal_gaps_exceed_equal_gaps(self):
        secret = Secret.from_string("00001111")
        table = predictor_gap_table(builtin("identity"), secret,
                                    repeated_edge_distinguisher(), 20, 32,
                                    30000, _rng(14))
        eq_rows = [r["gap"] for r in table["rows"] if r["equal_truth"]]
        ne_rows = [r["gap"] for r in table["rows"] if not r["equal_truth"]]
        assert min(ne_rows) > max(eq_rows)
