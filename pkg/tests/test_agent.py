"""Propose/verify/retain loop tests with a scripted chat model."""
import pytest

from gridlang.agent import Agent, AgentConfig
from gridlang.boolexpr import to_text
from gridlang.chat import ChatPrompt, TransportError
from gridlang.env import EnvConfig
from gridlang.tasks import generate_tasks


class ScriptedModel:
    """Returns pre-scripted beams in order; records every prompt."""

    def __init__(self, beams):
        self.beams = list(beams)
        self.prompts = []

    def complete(self, prompt: ChatPrompt, n: int, temperature: float):
        self.prompts.append((prompt, n, temperature))
        if not self.beams:
            return [""] * n
        beam = self.beams.pop(0)
        if beam is TransportError:
            raise TransportError("scripted outage")
        beam = list(beam)[:n]
        return beam + [""] * (n - len(beam))


@pytest.fixture
def suite(identity_map):
    return generate_tasks(identity_map)


@pytest.fixture
def red_key_task(suite):
    return next(t for t in suite if t.instruction == "pick up a red key")


def make_agent(model, identity_map, **overrides):
    defaults = dict(verify_rollouts=20, accept_threshold=0.92)
    defaults.update(overrides)
    return Agent(
        model, identity_map, EnvConfig(), AgentConfig(**defaults)
    )


TRUTH = "Symbol_0 & Symbol_6"                       # red key
LONG_TRUTH = "Symbol_0 & Symbol_6 & Symbol_0"       # equivalent, 5 tokens
WRONG = "Symbol_1"                                  # blue


class TestLearnStep:
    def test_truth_candidate_accepted_and_stored(self, identity_map, red_key_task, rng):
        model = ScriptedModel([[TRUTH]])
        agent = make_agent(model, identity_map)
        report = agent.learn_step(red_key_task, rng)
        assert report.retained == TRUTH
        assert agent.tasks_solved == 1
        assert agent.store.get(red_key_task.instruction).expression == TRUTH
        assert agent.env_steps_consumed == report.env_steps > 0

    def test_wrong_candidate_rejected(self, identity_map, red_key_task, rng):
        model = ScriptedModel([[WRONG]])
        agent = make_agent(model, identity_map)
        report = agent.learn_step(red_key_task, rng)
        assert report.retained is None
        assert agent.tasks_solved == 0
        assert report.verdicts[0].success_rate < 0.92

    def test_invalid_beam_costs_no_env_steps(self, identity_map, red_key_task, rng):
        model = ScriptedModel([["Symbol_0 &", "???", ""]])
        agent = make_agent(model, identity_map)
        report = agent.learn_step(red_key_task, rng)
        assert report.retained is None
        assert all(v.kind == "invalid_syntax" for v in report.verdicts)
        assert report.env_steps == 0

    def test_beam_deduplicated_before_rollouts(self, identity_map, red_key_task, rng):
        model = ScriptedModel([[TRUTH] * 10])
        agent = make_agent(model, identity_map)
        report = agent.learn_step(red_key_task, rng)
        assert report.candidates == (TRUTH,)
        assert len(report.verdicts) == 1

    def test_first_passing_candidate_wins_beam_order(
        self, identity_map, red_key_task, rng
    ):
        model = ScriptedModel([[LONG_TRUTH, TRUTH]])
        agent = make_agent(model, identity_map)
        report = agent.learn_step(red_key_task, rng)
        # beam order decides acceptance; the shorter later candidate is
        # never verified because the first already passed
        assert report.retained == LONG_TRUTH
        assert len(report.verdicts) == 1

    def test_transport_outage_degrades_gracefully(
        self, identity_map, red_key_task, rng
    ):
        model = ScriptedModel([TransportError, [TRUTH]])
        agent = make_agent(model, identity_map)
        report = agent.learn_step(red_key_task, rng)
        assert report.retained is None
        assert report.env_steps == 0
        report = agent.learn_step(red_key_task, rng)  # next attempt recovers
        assert report.retained == TRUTH


class TestRetention:
    def test_shorter_replacement_after_longer(self, identity_map, red_key_task, rng):
        model = ScriptedModel([[LONG_TRUTH], [TRUTH]])
        agent = make_agent(model, identity_map)
        agent.learn_step(red_key_task, rng)
        assert agent.store.get(red_key_task.instruction).expression == LONG_TRUTH
        agent.learn_step(red_key_task, rng)
        assert agent.store.get(red_key_task.instruction).expression == TRUTH
        assert agent.tasks_solved == 1  # replaced, not duplicated

    def test_longer_does_not_displace_shorter(self, identity_map, red_key_task, rng):
        model = ScriptedModel([[TRUTH], [LONG_TRUTH]])
        agent = make_agent(model, identity_map)
        agent.learn_step(red_key_task, rng)
        agent.learn_step(red_key_task, rng)
        assert agent.store.get(red_key_task.instruction).expression == TRUTH

    def test_equal_length_keeps_incumbent(self, identity_map, red_key_task, rng):
        other = "Symbol_6 & Symbol_0"  # same denotation, same token count
        model = ScriptedModel([[TRUTH], [other]])
        agent = make_agent(model, identity_map)
        agent.learn_step(red_key_task, rng)
        agent.learn_step(red_key_task, rng)
        assert agent.store.get(red_key_task.instruction).expression == TRUTH


class TestEval:
    def test_eval_uses_greedy_single_sample(self, identity_map, red_key_task, rng):
        model = ScriptedModel([[TRUTH]])
        agent = make_agent(model, identity_map)
        rate, steps = agent.eval_task(red_key_task, 10, rng)
        assert rate == 1.0
        assert steps > 0
        prompt, n, temp = model.prompts[0]
        assert n == 1
        assert temp == 0.0

    def test_train_uses_beam_at_temperature(self, identity_map, red_key_task, rng):
        model = ScriptedModel([[TRUTH]])
        agent = make_agent(model, identity_map, beam_width=10)
        agent.learn_step(red_key_task, rng)
        prompt, n, temp = model.prompts[0]
        assert n == 10
        assert temp == 1.0

    def test_invalid_eval_scores_zero(self, identity_map, red_key_task, rng):
        model = ScriptedModel([["not an expression"]])
        agent = make_agent(model, identity_map)
        assert agent.eval_task(red_key_task, 10, rng) == (0.0, 0)

    def test_solved_examples_feed_retrieval(self, identity_map, suite, rng):
        red_key = next(t for t in suite if t.instruction == "pick up a red key")
        model = ScriptedModel([[TRUTH]])
        agent = make_agent(model, identity_map)
        agent.learn_step(red_key, rng)
        agent.eval_task(red_key, 5, rng)
        prompt, _, _ = model.prompts[-1]
        assert ("pick up a red key", TRUTH) in prompt.examples


class TestMonotonicity:
    def test_store_size_never_decreases(self, identity_map, suite, rng):
        tasks = [t for t in suite if t.task_id.startswith("single-")]
        beams = []
        for t in tasks:
            beams.append([to_text(t.truth_expr)])
        model = ScriptedModel(beams)
        agent = make_agent(model, identity_map, verify_rollouts=5)
        sizes = []
        for t in tasks:
            agent.learn_step(t, rng)
            sizes.append(agent.tasks_solved)
        assert sizes == sorted(sizes)
        assert sizes[-1] == len(tasks)
