import random
from fractions import Fraction

import pytest

from helpers import random_fps
from pathbisim.fps import first_hit_set, parse_fps, prob_reach
from pathbisim.paths import Action, class_of, path
from pathbisim.valuation import (
    LAWS,
    UpperSet,
    ValuationReport,
    alpha_measure,
    audit_valuation,
    class_future_measure,
    class_future_measure_truncated,
    separation_closure,
    upset_intersect,
    upset_normalize,
    upset_union,
    valuation,
)

TAU = Action("tau", True)
A, B = Action("a"), Action("b")

P1 = path("x0", TAU, "x1")
P1_PRIME = path("x0", TAU, "x1", TAU, "x1'")
P2 = path("x0", TAU, "x2")


# ---------------------------------------------------------------------------
# separation closure and upper sets


class TestSeparationClosure:
    def test_drops_extensions(self):
        assert separation_closure({P1, P1_PRIME, P2}) == {P1, P2}

    def test_antichain_is_unchanged(self):
        assert separation_closure({P1, P2}) == {P1, P2}

    def test_chain_keeps_the_shortest(self):
        assert separation_closure({P1, P1_PRIME}) == {P1}

    def test_idempotent(self):
        once = separation_closure({P1, P1_PRIME, P2})
        assert separation_closure(once) == once

    def test_empty(self):
        assert separation_closure(set()) == set()


class TestUpperSets:
    def test_normalize_minimises(self):
        u = upset_normalize({P1, P1_PRIME, P2})
        assert u.kind == "path"
        assert u.generators == frozenset({P1, P2})

    def test_constructor_rejects_redundant_generators(self):
        with pytest.raises(ValueError, match="antichain"):
            UpperSet("path", frozenset({P1, P1_PRIME}))

    def test_constructor_rejects_bad_kind(self):
        with pytest.raises(ValueError, match="kind"):
            UpperSet("verse", frozenset())

    def test_contains(self):
        u = upset_normalize({P1})
        assert u.contains(P1) and u.contains(P1_PRIME)
        assert not u.contains(P2) and not u.contains(path("x0"))

    def test_union(self):
        u = upset_union(upset_normalize({P1_PRIME}), upset_normalize({P1, P2}))
        assert u.generators == frozenset({P1, P2})

    def test_intersect_comparable_keeps_the_larger(self):
        u = upset_intersect(upset_normalize({P1}), upset_normalize({P1_PRIME}))
        assert u.generators == frozenset({P1_PRIME})

    def test_intersect_incomparable_is_empty(self):
        assert upset_intersect(upset_normalize({P1}), upset_normalize({P2})).is_empty()

    def test_kind_mismatch(self):
        classes = upset_normalize({class_of(P1)})
        assert classes.kind == "class"
        with pytest.raises(ValueError, match="kind mismatch"):
            upset_union(upset_normalize({P1}), classes)

    def test_empty_sets_join_with_either_kind(self):
        empty = upset_normalize(set(), kind="class")
        joined = upset_union(empty, upset_normalize({P1}))
        assert joined.kind == "path" and joined.generators == frozenset({P1})

    def test_class_level_normalization(self):
        u = upset_normalize({class_of(P1), class_of(P1_PRIME)})
        assert u.kind == "class" and u.generators == frozenset({class_of(P1)})


# ---------------------------------------------------------------------------
# weights


class TestValuation:
    def test_single_generator(self, silent_tree):
        assert valuation(silent_tree, upset_normalize({P1})) == Fraction(1, 2)

    def test_full_cover(self, silent_tree):
        assert valuation(silent_tree, upset_normalize({P1, P2})) == 1

    def test_empty_set(self, silent_tree):
        assert valuation(silent_tree, upset_normalize(set(), kind="path")) == 0

    def test_off_system_generator(self, silent_tree):
        assert valuation(silent_tree, upset_normalize({path("x0", A, "x1")})) == 0

    def test_class_kind_is_rejected(self, silent_tree):
        with pytest.raises(ValueError, match="path-level"):
            valuation(silent_tree, upset_normalize({class_of(P1)}))

    def test_modularity_instance(self, three_copies):
        u = upset_normalize({path("x1", TAU, "x2")})
        v = upset_normalize({path("x1", A, "x3")})
        lhs = valuation(three_copies, upset_union(u, v)) + valuation(three_copies, upset_intersect(u, v))
        rhs = valuation(three_copies, u) + valuation(three_copies, v)
        assert lhs == rhs == Fraction(2, 3)

    def test_separated_family_weighs_at_most_one(self, silent_tree):
        closed = separation_closure({P1, P1_PRIME, P2})
        assert valuation(silent_tree, upset_normalize(closed)) <= 1


class TestClassFutureMeasure:
    def test_loop_discounting(self, three_copies):
        c = class_of(path("x1", TAU, "x2", B, "x4"))
        assert class_future_measure(three_copies, c) == Fraction(1, 2)

    def test_loop_free_copy(self, three_copies):
        c = class_of(path("x1'", TAU, "x2'", B, "x4'"))
        assert class_future_measure(three_copies, c) == Fraction(1, 2)

    def test_empty_path_class(self, three_copies):
        assert class_future_measure(three_copies, class_of(path("x1"))) == 1

    def test_off_system_class_is_zero(self, three_copies):
        assert class_future_measure(three_copies, class_of(path("x1", B, "x4"))) == 0

    def test_self_steps_do_not_change_the_class(self, three_copies):
        plain = class_of(path("x1", TAU, "x2", B, "x4"))
        padded = class_of(path("x1", TAU, "x1", TAU, "x2", B, "x4"))
        assert plain == padded
        assert class_future_measure(three_copies, padded) == Fraction(1, 2)


class TestTruncation:
    def test_depth_twelve_value(self, three_copies):
        c = class_of(path("x1", TAU, "x2", B, "x4"))
        t = class_future_measure_truncated(three_copies, c, 12)
        assert t == Fraction(88573, 177147)

    def test_tail_bound(self, three_copies):
        c = class_of(path("x1", TAU, "x2", B, "x4"))
        full = class_future_measure(three_copies, c)
        n = len(c.canonical.steps)
        loop = Fraction(1, 3)
        for depth in range(n, 16):
            t = class_future_measure_truncated(three_copies, c, depth)
            m = depth - n
            bound = n * full * loop ** (m // n + 1)
            assert 0 <= full - t <= bound

    def test_exact_when_loop_free(self, three_copies):
        c = class_of(path("x1'", TAU, "x2'", B, "x4'"))
        assert class_future_measure_truncated(three_copies, c, 2) == class_future_measure(three_copies, c)

    def test_exact_for_empty_path(self, three_copies):
        c = class_of(path("x1"))
        assert class_future_measure_truncated(three_copies, c, 0) == 1

    def test_monotone_in_depth(self, three_copies):
        c = class_of(path("x1", TAU, "x2", B, "x4"))
        values = [class_future_measure_truncated(three_copies, c, d) for d in range(2, 10)]
        assert values == sorted(values)


class TestAlphaMeasure:
    def test_first_hit_classes_recover_reachability(self, three_copies):
        hits = first_hit_set(three_copies, "x1", "b", {"x4"}, 10)
        u = upset_normalize({class_of(p) for p in hits})
        assert len(u.generators) == 1  # loop iterations collapse onto one class
        assert alpha_measure(three_copies, "x1", u) == prob_reach(three_copies, "x1", "b", {"x4"})

    def test_empty_class_generator_gives_everything(self, three_copies):
        assert alpha_measure(three_copies, "x1", upset_normalize({class_of(path("x1"))})) == 1

    def test_generators_rooted_elsewhere_do_not_count(self, three_copies):
        u = upset_normalize({class_of(path("y1", TAU, "y2"))})
        assert alpha_measure(three_copies, "x1", u) == 0

    def test_empty_set(self, three_copies):
        assert alpha_measure(three_copies, "x1", upset_normalize(set(), kind="class")) == 0

    def test_path_kind_is_rejected(self, three_copies):
        with pytest.raises(ValueError, match="class-level"):
            alpha_measure(three_copies, "x1", upset_normalize({path("x1")}))


# ---------------------------------------------------------------------------
# the audit harness


class TestAudit:
    def test_example_system_is_clean(self, three_copies):
        reports = audit_valuation(three_copies, seed=42, trials=60)
        assert tuple(r.law for r in reports) == LAWS
        assert all(r.trials == 60 and r.failures == 0 for r in reports)
        assert all(r.witness is None for r in reports)

    def test_random_systems_are_clean(self):
        rng = random.Random(4242)
        for _ in range(5):
            reports = audit_valuation(random_fps(rng), seed=rng.randrange(10**6), trials=40)
            assert all(r.failures == 0 for r in reports)

    def test_deterministic_for_a_seed(self, three_copies):
        a = [r.as_dict() for r in audit_valuation(three_copies, seed=7, trials=25)]
        b = [r.as_dict() for r in audit_valuation(three_copies, seed=7, trials=25)]
        assert a == b

    def test_report_dict_shape(self):
        assert ValuationReport("strictness", 10, 0).as_dict() == {
            "law": "strictness",
            "trials": 10,
            "failures": 0,
        }
        assert ValuationReport("strictness", 10, 2, witness="p").as_dict()["witness"] == "p"


def test_divergent_loop_has_zero_future():
    fps = parse_fps("s tau 1 s\nstate t")
    c = class_of(path("s", TAU, "t"))
    assert class_future_measure(fps, c) == 0


def test_certain_loop_then_exit():
    # A 1/2 self-loop halves nothing: the geometric factor restores the mass.
    fps = parse_fps("s tau 1/2 s\ns a 1/2 t")
    c = class_of(path("s", A, "t"))
    assert class_future_measure(fps, c) == 1
    assert class_future_measure_truncated(fps, c, 20) < 1
