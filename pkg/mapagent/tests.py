import json

from django.test import SimpleTestCase, TestCase

from agents.backends import ScriptedBackend
from agents.episode import Episode
from agents.oracle import OracleBackend
from agents.protocol import AgentTask, EpisodeTranscript
from domain.answers import Distance, EntitySet, answer_equal, answer_from_dict
from domain.geo import GeoPoint
from domain.synthesis import RuleKind, SynthesisRule
from geostore.coordinates import extract_coordinates
from qagen.testing import build_test_dataset
from toolcache.calls import RESULT_COLUMNS
from toolcache.providers import SyntheticProvider
from toolcache.service import ToolCache
from .agent import MapAgent, invoke_and_synthesize
from .decisions import MapPlan, ToolDecision, parse_decision, resolve_coordinates
from .exceptions import MISSING_COORDINATES_REPORT, DecisionParseError, MissingCoordinatesError
from .tools import load_tool_descriptions, render_tool_descriptions


SCHOOL = GeoPoint(23.13, 113.32)
CONTEXT = {
    "Lotus Garden": GeoPoint(23.1, 113.3),
    "Jade Court": GeoPoint(23.11, 113.3),
    "Pine Villa": GeoPoint(23.12, 113.3),
    "Tianhe No.1 Primary School": SCHOOL,
}


class FixedDurations:
    """Длительность задаётся широтой точки отправления"""

    name = "fixed"

    def __init__(self, durations: dict[float, int]) -> None:
        self.durations = durations

    def recorded_at(self, request) -> str:
        return "2025-03-12T00:00:00+08:00"

    def resolve(self, request) -> dict:
        latitude = request.params["origin"][0]
        return {"columns": list(RESULT_COLUMNS[request.function]), "rows": [[self.durations[latitude]]]}


def drive(origin: str) -> ToolDecision:
    return ToolDecision(
        "time_query",
        {"origin": origin, "destination": "Tianhe No.1 Primary School", "mode": "driving"},
        origin,
    )


def episode_for(backend=None, gold=None, injections=frozenset()):
    return Episode(EpisodeTranscript(instance_id="t"), backend or ScriptedBackend(), gold, injections)


class ToolDescriptionTests(SimpleTestCase):
    def test_four_functions_described(self):
        names = [tool["name"] for tool in load_tool_descriptions()]
        self.assertEqual(sorted(names), ["distance_query", "rush_hour_query", "surrounding_pois_query", "time_query"])

    def test_rendered_with_parameters_and_output(self):
        text = render_tool_descriptions()
        self.assertIn("surrounding_pois_query:", text)
        self.assertIn("  - radius (", text)
        self.assertIn("output: columns [duration_s]", text)


class ParseDecisionTests(SimpleTestCase):
    def test_calls_and_rule(self):
        text = "\n".join(
            [
                "Compare the drives.",
                "CALL " + json.dumps(drive("Lotus Garden").to_dict()),
                "CALL " + json.dumps(drive("Jade Court").to_dict()),
                'RULE {"kind": "argmin"}',
            ]
        )
        plan = parse_decision(text)
        self.assertEqual([decision.label for decision in plan.decisions], ["Lotus Garden", "Jade Court"])
        self.assertEqual(plan.rule, SynthesisRule(RuleKind.ARGMIN))
        self.assertEqual(plan.decisions[0].rationale, "Compare the drives.")

    def test_no_tool(self):
        plan = parse_decision("NO_TOOL: the answer is in the database")
        self.assertEqual(plan.decisions, ())
        self.assertEqual(plan.no_tool, "the answer is in the database")

    def test_prose_only(self):
        with self.assertRaises(DecisionParseError):
            parse_decision("I would look at a map.")

    def test_unknown_function(self):
        with self.assertRaises(DecisionParseError):
            parse_decision('CALL {"function": "teleport", "params": {}}')

    def test_malformed_rule(self):
        with self.assertRaises(DecisionParseError):
            parse_decision('CALL {"function": "time_query", "params": {}}\nRULE {"kind": "median"}')


class ResolveCoordinatesTests(SimpleTestCase):
    def test_names_and_literals(self):
        params = resolve_coordinates(
            {"origin": "Lotus Garden", "destination": "23.13,113.32", "mode": "walking"}, CONTEXT
        )
        self.assertEqual(params, {"origin": [23.1, 113.3], "destination": [23.13, 113.32], "mode": "walking"})

    def test_lists_pass_through(self):
        params = {"center": [23.1, 113.3], "radius": 1000, "label": "park"}
        self.assertEqual(resolve_coordinates(params, {}), params)

    def test_unknown_name(self):
        with self.assertRaises(MissingCoordinatesError) as caught:
            resolve_coordinates({"origin": "Nowhere Court"}, CONTEXT)
        self.assertEqual(caught.exception.name, "Nowhere Court")


class InvokeTests(TestCase):
    def test_argmin_picks_least_time(self):
        cache = ToolCache(provider=FixedDurations({23.1: 600, 23.11: 900, 23.12: 450}))
        plan = MapPlan(
            (drive("Lotus Garden"), drive("Jade Court"), drive("Pine Villa")), SynthesisRule(RuleKind.ARGMIN)
        )
        episode = episode_for()
        result = invoke_and_synthesize(plan, cache, context=CONTEXT, episode=episode)
        self.assertEqual(result.status, "success")
        self.assertEqual([item.kind for item in result.evidence], ["tool_result"] * 3 + ["derived"])
        self.assertEqual(answer_from_dict(result.evidence[-1].payload["answer"]), EntitySet(("Pine Villa",)))
        self.assertEqual(len(episode.transcript.tool_calls), 3)
        self.assertEqual(episode.transcript.tool_calls[0]["params"]["origin"], [23.1, 113.3])

    def test_argmin_is_order_independent(self):
        cache = ToolCache(provider=FixedDurations({23.1: 450, 23.11: 900, 23.12: 450}))
        forward = MapPlan((drive("Lotus Garden"), drive("Pine Villa")), SynthesisRule(RuleKind.ARGMIN))
        backward = MapPlan((drive("Pine Villa"), drive("Lotus Garden")), SynthesisRule(RuleKind.ARGMIN))
        answers = [
            invoke_and_synthesize(plan, cache, context=CONTEXT).evidence[-1].payload["answer"]
            for plan in (forward, backward)
        ]
        self.assertEqual(answers[0], answers[1])
        self.assertEqual(answer_from_dict(answers[0]), EntitySet(("Lotus Garden",)))

    def test_single_distance_passes_through(self):
        cache = ToolCache(provider=SyntheticProvider())
        plan = MapPlan(
            (
                ToolDecision(
                    "distance_query",
                    {"origin": "Lotus Garden", "destination": "Jade Court", "kind": "straight"},
                    "Lotus Garden",
                ),
            )
        )
        result = invoke_and_synthesize(plan, cache, context=CONTEXT)
        answer = answer_from_dict(result.evidence[-1].payload["answer"])
        self.assertIsInstance(answer, Distance)
        self.assertEqual(answer.meters, result.evidence[0].payload["result"]["rows"][0][0])

    def test_cache_misses_exhaust_attempts(self):
        plan = MapPlan((drive("Lotus Garden"), drive("Jade Court")), SynthesisRule(RuleKind.ARGMIN))
        episode = episode_for()
        result = invoke_and_synthesize(plan, ToolCache(), context=CONTEXT, attempt_cap=3, episode=episode)
        self.assertEqual(result.status, "error")
        self.assertIn("cannot derive a conclusive answer within 3 attempts", result.error_report)
        self.assertIn("cache_miss_no_provider", result.error_report)
        self.assertEqual([call["attempt"] for call in episode.transcript.tool_calls], [1, 2, 3])

    def test_missing_coordinates_is_unable(self):
        plan = MapPlan((drive("Nowhere Court"),))
        result = invoke_and_synthesize(plan, ToolCache(), context=CONTEXT)
        self.assertEqual(result.status, "unable")
        self.assertIn(MISSING_COORDINATES_REPORT, result.error_report)

    def test_insufficient_results_fail(self):
        cache = ToolCache(provider=FixedDurations({23.1: 600}))
        plan = MapPlan((drive("Lotus Garden"),), SynthesisRule(RuleKind.PASSTHROUGH, limit=3))
        result = invoke_and_synthesize(plan, cache, context=CONTEXT, attempt_cap=1)
        self.assertEqual(result.status, "error")
        self.assertIn("3 values requested, 1 returned", result.error_report)


class MapAgentBackendTests(TestCase):
    def task(self):
        return AgentTask(
            "Call the geospatial functions",
            "Which of Lotus Garden and Jade Court has the shortest drive to Tianhe No.1 Primary School?",
            context=CONTEXT,
        )

    def test_redecides_after_unparseable_reply(self):
        calls = "\n".join("CALL " + json.dumps(drive(name).to_dict()) for name in ("Lotus Garden", "Jade Court"))
        backend = ScriptedBackend({"map.decide": ["Let me think.", calls + '\nRULE {"kind": "argmin"}']})
        cache = ToolCache(provider=FixedDurations({23.1: 600, 23.11: 500}))
        episode = episode_for(backend)
        result = MapAgent(cache, templates={}).handle(self.task(), episode)
        self.assertEqual(result.status, "success")
        self.assertEqual(answer_from_dict(result.evidence[-1].payload["answer"]), EntitySet(("Jade Court",)))
        self.assertEqual(len(backend.calls), 2)
        self.assertIn("Attempt 1 failed: no CALL line", backend.calls[1][1])
        self.assertEqual({call["attempt"] for call in episode.transcript.tool_calls}, {2})

    def test_no_tool_is_unable(self):
        backend = ScriptedBackend({"map.decide": ["NO_TOOL: nothing to compute"]})
        result = MapAgent(ToolCache(), templates={}).handle(self.task(), episode_for(backend))
        self.assertEqual(result.status, "unable")
        self.assertIn("nothing to compute", result.error_report)

    def test_backend_failure_is_error(self):
        result = MapAgent(ToolCache(), templates={}).handle(self.task(), episode_for())
        self.assertEqual(result.status, "error")
        self.assertIn("backend failure", result.error_report)

    def test_known_entities_are_listed(self):
        backend = ScriptedBackend({"map.decide": ["NO_TOOL: done"]})
        MapAgent(ToolCache(), templates={}).handle(self.task(), episode_for(backend))
        self.assertIn("Jade Court: 23.11, 113.3", backend.calls[0][1])


class GoldDatasetTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        cls.store, cls.templates, cls.instances, cls.report = build_test_dataset(cities=("Guangzhou",), attempts=4)

    def tool_instances(self):
        return [
            instance
            for instance in self.instances
            if instance.tool_trace and self.templates[instance.template_id].answer.source == "tools"
        ]

    def task_for(self, instance):
        gold_sql = instance.sql_trace[0]
        return AgentTask(
            "Call the geospatial functions for these entities and derive the answer",
            instance.question,
            intents=instance.intents,
            slots=instance.slots,
            context=extract_coordinates(gold_sql.columns, gold_sql.expected_result),
        )

    def assert_reproduces_gold(self, make_episode):
        instances = self.tool_instances()
        self.assertTrue(instances)
        agent = MapAgent(ToolCache(), templates=self.templates)
        for instance in instances:
            episode = make_episode(instance)
            result = agent.handle(self.task_for(instance), episode)
            self.assertEqual(result.status, "success", f"{instance.id}: {result.error_report}")
            answer = answer_from_dict(result.evidence[-1].payload["answer"])
            self.assertTrue(answer_equal(answer, instance.answer), instance.id)
            calls = episode.transcript.tool_calls
            self.assertEqual(
                [(call["function"], call["params"]) for call in calls],
                [(step.function, step.params) for step in instance.tool_trace],
                instance.id,
            )

    def test_oracle_decisions_reproduce_gold(self):
        backend = OracleBackend(self.templates)
        self.assert_reproduces_gold(lambda instance: episode_for(backend, instance))

    def test_injected_calls_reproduce_gold_without_backend(self):
        backend = ScriptedBackend()
        self.assert_reproduces_gold(lambda instance: episode_for(backend, instance, {"api"}))
        self.assertEqual(backend.calls, [])
