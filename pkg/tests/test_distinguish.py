"""Built-in distinguishers and advantage estimation."""

import numpy as np
import pytest

from rlf.errors import InfeasibleParameterError
from rlf.distinguish import (
    by_name,
    coin_distinguisher,
    constant_distinguisher,
    decide_many,
    Distinguisher,
    estimate_advantage,
    good_weight_scan,
    likelihood_ratio_distinguisher,
    negate,
    parity_collision_distinguisher,
    repeated_edge_distinguisher,
)
from rlf.hypergraph import Hypergraph, sample_uniform
from rlf.localfn import Secret, evaluate, sample_planted
from rlf.predicate import NoisyPredicate, builtin


def _rng(seed=0):
    return np.random.default_rng(seed)


class TestBaselines:
    def test_constant_has_zero_advantage_exactly(self):
        report = estimate_advantage(constant_distinguisher(1), builtin("xor2"),
                                    6, 8, 2000, _rng(1))
        assert report.p_planted == 1.0 and report.p_null == 1.0
        assert report.advantage == 0.0

    def test_coin_advantage_within_ci(self):
        report = estimate_advantage(coin_distinguisher(), builtin("xor2"),
                                    6, 8, 5000, _rng(2))
        assert abs(report.advantage) <= report.ci_halfwidth
        assert abs(report.p_planted - 0.5) < 0.03

    def test_negation_flips_advantage(self):
        D = repeated_edge_distinguisher()
        fwd = estimate_advantage(D, builtin("identity"), 12, 48, 4000, _rng(3))
        rev = estimate_advantage(negate(D), builtin("identity"), 12, 48, 4000,
                                 _rng(3))
        assert abs(fwd.advantage + rev.advantage) <= \
            fwd.ci_halfwidth + rev.ci_halfwidth
        assert rev.advantage < 0

    def test_interface_receives_graph_and_outputs_only(self):
        seen = {}

        def probe(graph, outputs, rng):
            seen["types"] = (type(graph).__name__, hasattr(graph, "kind"))
            return 0

        D = Distinguisher(name="probe", decide=probe)
        estimate_advantage(D, builtin("xor2"), 4, 3, 3, _rng(4))
        assert seen["types"] == ("Hypergraph", False)


class TestRepeatedEdge:
    def test_deterministic_cases(self):
        D = repeated_edge_distinguisher()
        rng = _rng(5)
        collide = Hypergraph(4, np.array([[0, 1], [0, 1], [2, 3]]))
        assert D.decide(collide, np.array([1, 1, 0], dtype=np.uint8), rng) == 1
        assert D.decide(collide, np.array([1, 0, 0], dtype=np.uint8), rng) == 0
        no_pair = Hypergraph(4, np.array([[0, 1], [1, 0], [2, 3]]))
        assert D.decide(no_pair, np.array([1, 0, 1], dtype=np.uint8), rng) == 0

    def test_planted_never_rejected_by_collision(self):
        D = repeated_edge_distinguisher()
        rng = _rng(6)
        for _ in range(200):
            inst, _ = sample_planted(builtin("identity"), 4, 12, rng)
            has_collision = len(set(map(tuple, inst.graph.edges.tolist()))) < 12
            assert D.decide(inst.graph, inst.outputs, rng) == int(has_collision)

    def test_monovertex_advantage(self):
        report = estimate_advantage(repeated_edge_distinguisher(),
                                    builtin("identity"), 16, 64, 10000, _rng(7))
        assert report.advantage > 0.3

    def test_batch_matches_single(self):
        D = repeated_edge_distinguisher()
        rng = _rng(8)
        edges = np.stack([sample_uniform(5, 6, 2, rng).edges
                          for _ in range(40)]).astype(np.uint8)
        outputs = rng.integers(0, 2, size=(40, 6), dtype=np.uint8)
        batch = D.decide_tensor(edges, outputs, 5, rng)
        for i in range(40):
            single = D.decide(Hypergraph(5, edges[i].astype(np.int64)),
                              outputs[i], rng)
            assert batch[i] == single


class TestLikelihoodRatio:
    def test_empty_output_ties_to_null(self):
        D = likelihood_ratio_distinguisher(builtin("xor2"))
        graph = Hypergraph(4, np.empty((0, 2), dtype=np.int64))
        assert D.decide(graph, np.empty(0, dtype=np.uint8), _rng(9)) == 0

    def test_planted_likelihood_positive(self):
        D = likelihood_ratio_distinguisher(builtin("xor2"))
        rng = _rng(10)
        hits = sum(
            D.decide(*_planted_pair(rng)) for _ in range(100))
        assert hits > 80  # at m=24 the planted side is nearly always accepted

    def test_refuses_above_cap(self):
        D = likelihood_ratio_distinguisher(builtin("xor2"), max_n=10)
        rng = _rng(11)
        graph = sample_uniform(11, 4, 2, rng)
        with pytest.raises(InfeasibleParameterError):
            D.decide(graph, np.zeros(4, dtype=np.uint8), rng)

    def test_rejects_noisy_predicates(self):
        with pytest.raises(ValueError):
            likelihood_ratio_distinguisher(
                NoisyPredicate(builtin("xor2"), 0.1))

    def test_optimal_among_builtins(self):
        # the exact-likelihood test maximizes planted-minus-null acceptance,
        # so every other test's advantage is bounded by it (within CIs)
        pred = builtin("xor2")
        lr = likelihood_ratio_distinguisher(pred)
        best = estimate_advantage(lr, pred, 8, 24, 3000, _rng(12))
        for other in (repeated_edge_distinguisher(),
                      parity_collision_distinguisher(pred),
                      coin_distinguisher(),
                      constant_distinguisher(1)):
            report = estimate_advantage(other, pred, 8, 24, 3000, _rng(13))
            assert report.advantage <= best.advantage + \
                report.ci_halfwidth + best.ci_halfwidth


def _planted_pair(rng):
    inst, _ = sample_planted(builtin("xor2"), 8, 24, rng)
    return inst.graph, inst.outputs, rng


class TestParityCollision:
    def test_no_qualifying_pair_rejects(self):
        pred = builtin("xor2")
        D = parity_collision_distinguisher(pred)
        graph = Hypergraph(6, np.array([[0, 1], [2, 3]]))
        assert D.decide(graph, np.array([1, 0], dtype=np.uint8), _rng(14)) == 0

    def test_equal_vertex_sets_cancel_parity(self):
        # two edges with the same vertex multiset give equal parity outputs
        rng = _rng(15)
        pred = builtin("xor2")
        for _ in range(200):
            s = Secret.random(8, rng)
            u, v = rng.integers(0, 8, size=2)
            graph = Hypergraph(8, np.array([[u, v], [v, u]]))
            y = evaluate(graph, pred, s)
            assert y[0] == y[1]

    def test_advantage_at_moderate_scale(self):
        pred = builtin("xor2")
        report = estimate_advantage(parity_collision_distinguisher(pred),
                                    pred, 12, 300, 10000, _rng(16))
        assert report.advantage - 1.96 * report.ci_halfwidth > 0

    def test_noisy_identity_strong(self):
        noisy = NoisyPredicate(builtin("identity"), 0.05)
        report = estimate_advantage(parity_collision_distinguisher(noisy),
                                    noisy, 10, 64, 3000, _rng(17))
        assert report.advantage > 0.8

    def test_constant_predicate_rejected(self):
        from rlf.predicate import Predicate
        with pytest.raises(ValueError):
            parity_collision_distinguisher(Predicate.from_table([1, 1]))


class TestDecideMany:
    def test_fallback_loop_matches_batch(self):
        D_batch = repeated_edge_distinguisher()
        D_loop = Distinguisher(name="loop", decide=D_batch.decide)
        rng = _rng(18)
        edges = np.stack([sample_uniform(4, 5, 2, rng).edges
                          for _ in range(20)]).astype(np.uint8)
        outputs = rng.integers(0, 2, size=(20, 5), dtype=np.uint8)
        a = decide_many(D_batch, edges, outputs, 4, _rng(19))
        b = decide_many(D_loop, edges, outputs, 4, _rng(19))
        assert np.array_equal(a, b)


class TestGoodWeightScan:
    def test_output_blind_distinguisher_has_zero_gaps(self):
        scan = good_weight_scan(constant_distinguisher(1), builtin("xor2"),
                                6, 8, 0.5, 500, _rng(20))
        for row in scan["rows"]:
            assert row["gap"] == 0.0
            assert not row["flagged"]

    def test_coin_gaps_within_ci(self):
        scan = good_weight_scan(coin_distinguisher(), builtin("xor2"),
                                6, 8, 0.5, 4000, _rng(21))
        for row in scan["rows"]:
            assert abs(row["gap"]) <= 2 * row["ci_halfwidth"]

    def test_rows_keyed_by_weight(self):
        scan = good_weight_scan(constant_distinguisher(0), builtin("xor2"),
                                5, 4, 0.5, 50, _rng(22))
        assert [row["weight"] for row in scan["rows"]] == list(range(6))


class TestRegistry:
    def test_known_names(self):
        pred = builtin("xor2")
        for name in ("coin", "constant-0", "constant-1", "repeated-edge",
                     "likelihood-ratio", "parity-collision"):
            assert by_name(name, pred=pred).name == name

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            by_name("oracle-of-delphi")

    def test_predicate_required_for_dependent_tests(self):
        with pytest.raises(ValueError):
            by_name("likelihood-ratio")


class TestWorkers:
    def test_results_worker_count_independent(self):
        pred = builtin("identity")
        D = repeated_edge_distinguisher()
        a = estimate_advantage(D, pred, 10, 40, 4000, _rng(23), workers=1)
        b = estimate_advantage(D, pred, 10, 40, 4000, _rng(23), workers=3)
        assert a == b
