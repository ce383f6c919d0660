import itertools
import math

import numpy as np
import pytest

from helpers_naive import brute_force_best, random_product_chain, random_reversible_chain
from mcselect.chain_core import GuardError, SubsetMask, ValidationError
from mcselect.objectives import (
    Partition,
    Workspace,
    build_partition_objective,
    build_subset_objective,
)
from mcselect.optimizers import (
    batch_certificate,
    batch_greedy,
    brute_force_opt,
    certify,
    distorted_greedy,
    generalized_distorted_greedy,
    greedy,
    local_search,
)
from mcselect.oracle import ratios


def coords1(mask):
    return sorted(i + 1 for i in mask)


class TestGreedy:
    def test_curie_weiss_entropy_pair(self, cw10, cw10_ws):
        P, pi = cw10
        dec = build_subset_objective("entropy", P, pi, workspace=cw10_ws)
        result = greedy(dec.f, dec.ground, 2, dec.constraint)
        assert coords1(result.chosen) == [1, 10]
        assert abs(result.objective_value - 0.57371) <= 1e-4

    def test_zero_budget(self, cw4):
        P, pi = cw4
        dec = build_subset_objective("entropy", P, pi)
        result = greedy(dec.f, dec.ground, 0, dec.constraint)
        assert result.chosen.size == 0 and result.objective_value == 0.0

    def test_never_beats_brute_force(self, rng):
        for _ in range(5):
            P, pi = random_reversible_chain(rng, (2, 2, 2, 2))
            dec = build_subset_objective("entropy", P, pi)
            for m in (1, 2, 3):
                got = greedy(dec.f, dec.ground, m, "le").objective_value
                _, opt = brute_force_opt(dec.f, dec.ground, m, "le")
                assert got <= opt + 1e-12

    def test_budget_trajectory_never_decreases(self, rng):
        P, pi = random_reversible_chain(rng, (2, 2, 2))
        dec = build_subset_objective("dist2fact", P, pi)
        result = greedy(dec.f, dec.ground, 3, "le")
        for step in result.trajectory:
            if step.accepted:
                assert step.score > 0.0

    def test_exact_constraint_forces_cardinality(self, rng):
        P, pi = random_reversible_chain(rng, (2, 2, 2, 2))
        dec = build_subset_objective("dist2indp", P, pi)
        result = greedy(dec.f, dec.ground, 3, dec.constraint)
        assert result.chosen.size == 3

    def test_budget_exceeding_ground_rejected(self, rng):
        P, pi = random_reversible_chain(rng, (2, 2))
        dec = build_subset_objective("entropy", P, pi)
        with pytest.raises(ValidationError, match="exceeds"):
            greedy(dec.f, dec.ground, 3, "le")


class TestDistortedGreedy:
    def test_curie_weiss_entropy_m8(self, cw10, cw10_ws):
        P, pi = cw10
        dec = build_subset_objective("entropy", P, pi, workspace=cw10_ws)
        result = distorted_greedy(dec, 8)
        assert abs(result.objective_value - 1.98458) <= 1e-4

    def test_zero_budget(self, cw4):
        P, pi = cw4
        dec = build_subset_objective("entropy", P, pi)
        result = distorted_greedy(dec, 0)
        assert result.chosen.size == 0 and result.objective_value == 0.0
        assert result.trajectory == ()

    def test_certificate_on_dist2fact(self, rng):
        for _ in range(3):
            P, pi = random_reversible_chain(rng, (2, 2, 2, 2))
            dec = build_subset_objective("dist2fact", P, pi)
            for m in (1, 2, 3):
                result = distorted_greedy(dec, m)
                cert = certify(dec, m, result)
                assert cert.satisfied

    def test_telescoping_identity(self, rng):
        # Phi_i(S) = (1 - 1/m)^(m-i) g(S) - c(S); each iteration's increment
        # equals max(0, score_i) + (1/m)(1 - 1/m)^(m-(i+1)) g(S_i).
        P, pi = random_reversible_chain(rng, (2, 2, 2, 2))
        dec = build_subset_objective("dist2fact", P, pi)
        m = 4
        result = distorted_greedy(dec, m)
        phi = lambda i, S: (1 - 1 / m) ** (m - i) * dec.g(S) - dec.c(S)
        S = SubsetMask.empty(4)
        total = 0.0
        by_iteration = {step.iteration: step for step in result.trajectory}
        for i in range(m):
            step = by_iteration.get(i)
            S_next = S.add(step.element) if step is not None and step.accepted else S
            increment = phi(i + 1, S_next) - phi(i, S)
            psi = max(0.0, step.score) if step is not None else 0.0
            lemma = psi + (1 / m) * (1 - 1 / m) ** (m - (i + 1)) * dec.g(S)
            assert abs(increment - lemma) <= 1e-9
            total += increment
            S = S_next
        assert abs(total - (dec.gc(S) - phi(0, SubsetMask.empty(4)))) <= 1e-9
        assert S == result.chosen


class TestGeneralizedDistortedGreedy:
    CAPS10 = (SubsetMask.of(10, (0, 1, 2, 3)), SubsetMask.of(10, (4, 5, 6)),
              SubsetMask.of(10, (7, 8, 9)))

    def test_curie_weiss_k_entropy_m3(self, cw10, cw10_ws):
        P, pi = cw10
        dec = build_partition_objective("k-entropy", P, pi, self.CAPS10, workspace=cw10_ws)
        result = generalized_distorted_greedy(dec, 3)
        assert [coords1(p) for p in result.chosen.parts] == [[1], [7], [10]]
        assert abs(result.objective_value - 0.86152) <= 1e-4

    def test_zero_budget_all_empty(self, cw4):
        P, pi = cw4
        caps = (SubsetMask.of(4, (0, 1)), SubsetMask.of(4, (2, 3)))
        dec = build_partition_objective("k-entropy", P, pi, caps)
        result = generalized_distorted_greedy(dec, 0)
        assert all(p.size == 0 for p in result.chosen.parts)

    def test_exhausted_ceiling_is_noop(self, rng):
        P, pi = random_reversible_chain(rng, (2, 2, 2))
        caps = (SubsetMask.of(3, (0,)), SubsetMask.of(3, (1,)))
        dec = build_partition_objective("k-entropy", P, pi, caps)
        result = generalized_distorted_greedy(dec, 2)
        assert Partition(result.chosen.parts).support().size <= 2

    def test_certificate_on_k_dist2indp(self, rng):
        for _ in range(2):
            P, pi = random_reversible_chain(rng, (2, 2, 2, 2, 2))
            caps = (SubsetMask.of(5, (0, 1, 2)), SubsetMask.of(5, (3, 4)))
            dec = build_partition_objective("k-dist2indp", P, pi, caps)
            for m in (3, 4):
                result = generalized_distorted_greedy(dec, m)
                cert = certify(dec, m, result)
                assert cert.satisfied

    @pytest.mark.parametrize(
        "subset_id,partition_id",
        [
            ("entropy", "k-entropy"),
            ("dist2fact", "k-dist2fact"),
            ("dist2indp", "k-dist2indp"),
            ("dist2indp-complement", "k-dist2indp-complement"),
        ],
    )
    def test_k1_full_ceiling_reproduces_subset_algorithm(self, rng, subset_id, partition_id):
        P, pi = random_reversible_chain(rng, (2, 2, 2, 2))
        ws = Workspace(P, pi)
        sub = build_subset_objective(subset_id, P, pi, workspace=ws)
        part = build_partition_objective(partition_id, P, pi, (SubsetMask.full(4),), workspace=ws)
        for m in (1, 2):
            if sub.min_support is not None and m < sub.min_support:
                continue
            if sub.max_support is not None and m > sub.max_support:
                continue
            a = distorted_greedy(sub, m)
            b = generalized_distorted_greedy(part, m)
            assert [(s.iteration, s.element, s.accepted) for s in a.trajectory] == [
                (s.iteration, s.element, s.accepted) for s in b.trajectory
            ]
            assert {e for e in a.chosen} == {e for e in b.chosen.parts[0]}
            scores_a = [s.score for s in a.trajectory]
            scores_b = [s.score for s in b.trajectory]
            assert np.allclose(scores_a, scores_b, atol=1e-12)

    def test_k1_product_form_pairs(self, rng):
        Pp, pip = random_product_chain(rng, (2, 2, 2, 2))
        ws = Workspace(Pp, pip)
        for subset_id, partition_id in [
            ("entropy-product", "k-entropy-product"),
            ("dist2stat-product", "k-dist2stat"),
            ("dist2stat-complement", "k-dist2stat-complement"),
        ]:
            sub = build_subset_objective(subset_id, Pp, pip, workspace=ws)
            part = build_partition_objective(partition_id, Pp, pip, (SubsetMask.full(4),),
                                             workspace=ws)
            a = distorted_greedy(sub, 2)
            b = generalized_distorted_greedy(part, 2)
            assert [(s.element, s.accepted) for s in a.trajectory] == [
                (s.element, s.accepted) for s in b.trajectory
            ]


class TestLocalSearch:
    def test_modular_returns_full_ground(self):
        ground = SubsetMask.full(4)
        f = lambda S: float(S.size)
        result = local_search(f, ground, 0.1)
        assert result.chosen == ground

    def test_unique_singleton_maximizer(self):
        ground = SubsetMask.full(4)
        weights = {0: 0.5, 1: 2.0, 2: 0.5, 3: 0.5}
        f = lambda S: max((weights[e] for e in S), default=0.0)
        result = local_search(f, ground, 0.1)
        assert result.chosen.indices() == (1,)
        assert result.objective_value == 2.0

    def test_symmetric_guarantee_curie_weiss_d6(self):
        from mcselect.models import CurieWeissParams, curie_weiss_chain

        P, pi = curie_weiss_chain(CurieWeissParams(6, 10.0, 1.0))
        dec = build_subset_objective("dist2fact", P, pi)
        eps = 0.1
        result = local_search(dec.f, dec.ground, eps)
        _, opt = brute_force_opt(dec.f, dec.ground, 6, "le")
        assert result.objective_value >= (0.5 - eps / 6) * opt - 1e-12

    def test_symmetric_guarantee_random_chains(self, rng):
        for _ in range(3):
            P, pi = random_reversible_chain(rng, (2, 2, 2, 2))
            dec = build_subset_objective("dist2fact", P, pi)
            eps = 0.1
            result = local_search(dec.f, dec.ground, eps)
            _, opt = brute_force_opt(dec.f, dec.ground, 4, "le")
            assert result.objective_value >= (0.5 - eps / 4) * opt - 1e-12

    def test_requires_positive_epsilon(self):
        with pytest.raises(ValidationError):
            local_search(lambda S: 0.0, SubsetMask.full(2), 0.0)


class TestBatchGreedy:
    def test_curie_weiss_dist2stat_goldens(self, cw10, cw10_ws):
        P, pi = cw10
        dec = build_subset_objective("dist2stat", P, pi, workspace=cw10_ws)
        one = batch_greedy(dec.f, dec.ground, 1, [1])
        assert coords1(one.chosen) == [6]
        assert abs(one.objective_value - 0.40245) <= 1e-4
        two = batch_greedy(dec.f, dec.ground, 2, [2])
        assert coords1(two.chosen) == [5, 6]
        assert abs(two.objective_value - 0.80739) <= 1e-4

    def test_singleton_batches_match_plain_greedy(self, rng):
        for _ in range(4):
            P, pi = random_reversible_chain(rng, (2, 2, 2, 2))
            dec = build_subset_objective("dist2stat", P, pi)
            for m in (1, 2, 3):
                a = batch_greedy(dec.f, dec.ground, m, [1] * m)
                b = greedy(dec.f, dec.ground, m, "eq")
                assert a.chosen == b.chosen

    def test_size_mismatch_rejected(self, rng):
        P, pi = random_reversible_chain(rng, (2, 2))
        dec = build_subset_objective("dist2stat", P, pi)
        with pytest.raises(ValidationError, match="sum"):
            batch_greedy(dec.f, dec.ground, 2, [1])

    def test_requires_zero_at_empty(self, rng):
        P, pi = random_reversible_chain(rng, (2, 2))
        with pytest.raises(ValidationError, match="empty"):
            batch_greedy(lambda S: 1.0 + S.size, SubsetMask.full(2), 1, [1])

    def test_bound_with_exact_ratios(self, rng):
        for _ in range(3):
            P, pi = random_reversible_chain(rng, (2, 2, 2, 2, 2))
            dec = build_subset_objective("dist2stat", P, pi)
            m, sizes = 3, [2, 1]
            result = batch_greedy(dec.f, dec.ground, m, sizes)
            gamma = ratios(dec.f, dec.ground, m).gamma
            eta_by_batch = {q: ratios(dec.f, dec.ground, q).eta for q in set(sizes)}
            cert = batch_certificate(dec.f, dec.ground, m, sizes, eta_by_batch, gamma, result)
            assert cert.satisfied


class TestBruteForce:
    def test_two_coordinate_enumeration(self, rng):
        P, pi = random_reversible_chain(rng, (2, 2))
        dec = build_subset_objective("entropy", P, pi)
        best, value = brute_force_opt(dec.f, dec.ground, 2, "le")
        values = {bits: dec.f(SubsetMask(bits, 2)) for bits in range(4)}
        assert value == max(values.values())
        assert values[best.bits] == value

    def test_matches_greedy_on_modular(self):
        ground = SubsetMask.full(4)
        weights = [0.4, 0.1, 0.3, 0.2]
        f = lambda S: sum(weights[e] for e in S)
        got, value = brute_force_opt(f, ground, 2, "le")
        assert got.indices() == (0, 2)
        assert abs(value - 0.7) <= 1e-15

    def test_enumeration_orders_agree(self, rng):
        P, pi = random_reversible_chain(rng, (2, 2, 2))
        dec = build_subset_objective("dist2fact", P, pi)
        a = brute_force_opt(dec.f, dec.ground, 2, "le", order="index")
        b = brute_force_opt(dec.f, dec.ground, 2, "le", order="size")
        assert abs(a[1] - b[1]) <= 1e-15

    def test_matches_itertools_oracle(self, rng):
        P, pi = random_reversible_chain(rng, (2, 2, 2))
        dec = build_subset_objective("entropy", P, pi)
        for m, constraint in ((2, "le"), (2, "eq")):
            got_set, got_val = brute_force_opt(dec.f, dec.ground, m, constraint)
            want_set, want_val = brute_force_best(
                lambda fs: dec.f(SubsetMask.of(3, fs)), range(3), m, constraint
            )
            assert abs(got_val - want_val) <= 1e-12

    def test_partition_domain(self, rng):
        P, pi = random_reversible_chain(rng, (2, 2, 2, 2))
        caps = (SubsetMask.of(4, (0, 1)), SubsetMask.of(4, (2, 3)))
        dec = build_partition_objective("k-entropy", P, pi, caps)
        parts, value = brute_force_opt(dec.gc, caps, 2, "le")
        # independent enumeration over all feasible partitions
        best = -math.inf
        for bits in range(16):
            subset = SubsetMask(bits, 4)
            if subset.size > 2:
                continue
            cand = tuple(cap & subset for cap in caps)
            best = max(best, dec.gc(cand))
        assert abs(value - best) <= 1e-12

    def test_guard(self):
        with pytest.raises(GuardError):
            brute_force_opt(lambda S: 0.0, SubsetMask.full(25), 2, "le")
