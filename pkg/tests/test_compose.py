"""Composition algebra tests: pointwise identities on random probes, the
negation slice-swap property, agreement with a direct task solve, and
greedy-policy optimality against BFS distances."""
import numpy as np
import pytest

from gridlang.boolexpr import And, Not, Or, Var, denotation, parse
from gridlang.compose import (
    INVALID,
    CompositeWVF,
    compose_from_map,
    greedy_action,
    rollout_success,
    run_episode,
)
from gridlang.dp import GoalTaskValues
from gridlang.env import reset
from gridlang.objects import ALL_OBJECTS, Color, ObjectSpec, Shape
from gridlang.wvf import min_max_for_layout

from test_dp import bfs_distances

GREY_BALL = ObjectSpec(Color.GREY, Shape.BALL)
RED_KEY = ObjectSpec(Color.RED, Shape.KEY)


@pytest.fixture
def probe(config, rng):
    """A layout, its min/max pair, and a batch of probe states."""
    layout = reset(config, set(ALL_OBJECTS), rng)
    pair = min_max_for_layout(layout, config)
    from gridlang.wvf import randomize_agent

    states = [randomize_agent(layout, rng) for _ in range(25)]
    return pair, states


def composite(expr, pair, identity_map):
    return compose_from_map(expr, identity_map, pair)


class TestAlgebraIdentities:
    """Each identity checked pointwise over every (goal, action) on random
    probe states; 25 states x 18 goals x 7 actions > 1000 probes each."""

    def test_double_negation(self, probe, identity_map):
        pair, states = probe
        a = Var(3)
        lhs = composite(Not(Not(a)), pair, identity_map)
        rhs = composite(a, pair, identity_map)
        for s in states:
            np.testing.assert_allclose(lhs.values(s), rhs.values(s), atol=1e-9)

    def test_and_idempotent(self, probe, identity_map):
        pair, states = probe
        a = Var(7)
        lhs = composite(And(a, a), pair, identity_map)
        rhs = composite(a, pair, identity_map)
        for s in states:
            np.testing.assert_allclose(lhs.values(s), rhs.values(s), atol=1e-9)

    def test_or_idempotent(self, probe, identity_map):
        pair, states = probe
        a = Var(1)
        lhs = composite(Or(a, a), pair, identity_map)
        rhs = composite(a, pair, identity_map)
        for s in states:
            np.testing.assert_allclose(lhs.values(s), rhs.values(s), atol=1e-9)

    def test_de_morgan(self, probe, identity_map):
        pair, states = probe
        a, b = Var(0), Var(8)
        lhs = composite(Not(And(a, b)), pair, identity_map)
        rhs = composite(Or(Not(a), Not(b)), pair, identity_map)
        for s in states:
            np.testing.assert_allclose(lhs.values(s), rhs.values(s), atol=1e-9)

    def test_commutativity_and_associativity(self, probe, identity_map):
        pair, states = probe
        a, b, c = Var(2), Var(6), Not(Var(4))
        pairs = [
            (And(a, b), And(b, a)),
            (Or(a, b), Or(b, a)),
            (And(And(a, b), c), And(a, And(b, c))),
            (Or(Or(a, b), c), Or(a, Or(b, c))),
        ]
        for lhs_e, rhs_e in pairs:
            lhs = composite(lhs_e, pair, identity_map)
            rhs = composite(rhs_e, pair, identity_map)
            for s in states:
                np.testing.assert_allclose(lhs.values(s), rhs.values(s), atol=1e-9)

    def test_negation_swaps_max_and_min_slices(self, probe, identity_map):
        # ~a at goals satisfying a yields the min-task slice and vice versa:
        # (q_max + q_min) - q swaps the two branches of the basis selection
        pair, states = probe
        a = Var(5)
        neg = composite(Not(a), pair, identity_map)
        mask = neg.symbol_masks[5]
        for s in states:
            q_min, q_max = pair.matrices(s)
            expected = np.where(mask[:, None], q_min, q_max)
            np.testing.assert_allclose(neg.values(s), expected, atol=1e-9)


class TestAgainstDirectSolve:
    def test_conjunction_matches_goal_task_values(self, config, rng, identity_map):
        # "red key" as a composed expression vs solving that task directly
        expr = And(Var(int(Color.RED)), Var(6 + int(Shape.KEY)))
        target = denotation(expr, identity_map)
        assert target == frozenset({RED_KEY})
        layout = reset(config, target, rng)
        pair = min_max_for_layout(layout, config)
        comp = composite(expr, pair, identity_map)

        rewards = {o: (2.0 if o in target else 0.0) for o in ALL_OBJECTS}
        direct = GoalTaskValues(layout, rewards, config)
        pose = direct.tables.pose_index(layout)
        q = comp.values(layout)
        # at goals inside the denotation, the composite equals the direct
        # extended-reward solve for this task
        for g in target:
            np.testing.assert_allclose(
                q[g.index], direct.q(pose, g, layout.remaining_steps), atol=1e-9
            )

    def test_greedy_value_is_max_over_denotation_goals(self, config, rng, identity_map):
        expr = Or(Var(int(Color.BLUE)), Var(6 + int(Shape.BOX)))
        target = denotation(expr, identity_map)
        layout = reset(config, target, rng)
        pair = min_max_for_layout(layout, config)
        comp = composite(expr, pair, identity_map)
        q = comp.values(layout)
        best_goal = ALL_OBJECTS[int(np.argmax(q.max(axis=1)))]
        assert best_goal in target


class TestGreedyPolicy:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_episode_length_is_shortest_path(self, config, identity_map, seed):
        # greedy on the composed values reaches the nearest satisfying object
        # in exactly BFS-distance + 1 steps
        rng = np.random.default_rng(seed)
        expr = parse("Symbol_6")  # any ball
        target = denotation(expr, identity_map)
        layout = reset(config, target, rng)
        pair = min_max_for_layout(layout, config)
        comp = composite(expr, pair, identity_map)
        picked, length = run_episode(comp, layout, config)
        assert picked in target

        from gridlang.env import DIR_VEC, Direction

        dist = bfs_distances(layout, config)
        best = None
        for (x, y), obj in layout.objects:
            if obj not in target:
                continue
            for d_enum, (dx, dy) in zip(Direction, DIR_VEC):
                pose = ((x - dx, y - dy), d_enum)
                if pose in dist:
                    d = dist[pose]
                    best = d if best is None else min(best, d)
        assert length == best + 1

    def test_argmax_invariant_under_constant_shift(self, config, rng, identity_map):
        layout = reset(config, set(ALL_OBJECTS), rng)
        pair = min_max_for_layout(layout, config)
        comp = composite(parse("Symbol_0 | ~Symbol_7"), pair, identity_map)
        base = greedy_action(comp, layout)

        class Shifted(CompositeWVF):
            def values(self, state):
                return super().values(state) + 123.456

        shifted = Shifted(comp.expr, comp.pair, comp.symbol_masks)
        assert greedy_action(shifted, layout) == base


class TestRolloutSuccess:
    def test_truth_expression_scores_high(self, config, rng, identity_map):
        expr = parse("Symbol_2")
        target = denotation(expr, identity_map)
        verdict = rollout_success(expr, target, identity_map, 30, config, rng)
        assert verdict.kind == "evaluated"
        assert verdict.success_rate == 1.0
        assert verdict.env_steps == sum(verdict.episode_lengths)
        assert len(verdict.episode_lengths) == 30

    def test_wrong_expression_scores_low(self, config, rng, identity_map):
        # candidate denotes keys, truth denotes balls: disjoint pickups
        wrong = parse("Symbol_7")
        truth = denotation(parse("Symbol_6"), identity_map)
        verdict = rollout_success(wrong, truth, identity_map, 30, config, rng)
        assert verdict.success_rate <= 0.2

    def test_fixed_layout_mode_reuses_objects(self, config, rng, identity_map):
        expr = parse("Symbol_4")
        target = denotation(expr, identity_map)
        verdict = rollout_success(
            expr, target, identity_map, 10, config, rng, resample_layouts=False
        )
        assert verdict.episodes == 10
        assert verdict.success_rate == 1.0

    def test_invalid_sentinel_shape(self):
        assert INVALID.kind == "invalid_syntax"
        assert INVALID.success_rate is None
        assert not INVALID.passed_threshold

    def test_empty_denotation_never_succeeds(self, config, rng, identity_map):
        # contradiction: reset needs a nonempty goal set, so the caller is
        # expected to reject it; rollout_success surfaces the error
        expr = And(Var(0), Var(1))  # red and blue: empty
        assert denotation(expr, identity_map) == frozenset()
        from gridlang.env import ConfigError

        with pytest.raises(ConfigError):
            rollout_success(
                expr, frozenset(), identity_map, 5, config, rng
            )
