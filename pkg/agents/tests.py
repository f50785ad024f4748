import json
import os
from unittest import mock

import requests
from django.test import SimpleTestCase, TestCase, override_settings

from dbagent.agent import DbAgent
from domain.answers import Distance, EntitySet, Number, Text, answer_equal
from domain.instances import SlotAnnotation
from mapagent.agent import MapAgent
from qagen.testing import build_test_dataset
from toolcache.service import ToolCache
from .backends import HttpChatBackend, ScriptedBackend, backend_from_settings, parse_chat_response
from .envelopes import parse_answer, parse_directives, parse_sufficiency, render_answer_envelope
from .episode import Episode
from .exceptions import BackendError, ConfigurationError, PlanParseError
from .oracle import FailingStageBackend, OracleBackend
from .protocol import AgentResult, Directive, EpisodeTranscript, Evidence
from .standard import StandardAgent
from .supervisor import Supervisor, evidence_of, rule_finalize


ROWS = Evidence("rows", "db_agent", {"statement": "SELECT 1", "columns": ["name"], "rows": [["Lotus Garden"]]})
COORDINATES = Evidence("coordinates", "db_agent", {"Lotus Garden": [23.1, 113.3]})


class StubSpecialist:
    def __init__(self, name, handler):
        self.name = name
        self.handler = handler
        self.tasks = []

    def handle(self, task, episode):
        self.tasks.append(task)
        return self.handler(task)


def always_error(task):
    return AgentResult.error("SQL execution failed: no such table")


class EnvelopeTests(SimpleTestCase):
    def test_directives_after_reasoning(self):
        text = "First the database.\nDISPATCH db_agent: find the community\nDISPATCH map_agent: compute the drive"
        self.assertEqual(
            parse_directives(text),
            [Directive("db_agent", "find the community"), Directive("map_agent", "compute the drive")],
        )

    def test_no_directive(self):
        with self.assertRaises(PlanParseError):
            parse_directives("I will look it up.")

    def test_unknown_specialist(self):
        with self.assertRaises(PlanParseError):
            parse_directives("DISPATCH web_agent: search")

    def test_sufficiency(self):
        self.assertTrue(parse_sufficiency("Looks complete. SUFFICIENT"))
        self.assertFalse(parse_sufficiency("CONTINUE"))
        self.assertIsNone(parse_sufficiency("maybe"))

    def test_answer_envelope(self):
        answer = EntitySet(("Jade Court", "Lotus Garden"))
        self.assertEqual(parse_answer("Reasoning.\n" + render_answer_envelope(answer)), (answer, True))
        self.assertEqual(parse_answer(render_answer_envelope(None)), (None, True))

    def test_answer_without_envelope_is_text(self):
        self.assertEqual(parse_answer("Lotus Garden is cheaper"), (Text("Lotus Garden is cheaper"), False))
        self.assertEqual(parse_answer("ANSWER: {broken"), (Text("ANSWER: {broken"), False))


class ProtocolTests(SimpleTestCase):
    def test_result_invariants(self):
        with self.assertRaises(ValueError):
            AgentResult("success")
        with self.assertRaises(ValueError):
            AgentResult("error")
        self.assertEqual(AgentResult.unable("no rows").status, "unable")

    def test_transcript_json(self):
        transcript = EpisodeTranscript(instance_id="least_drive-0001", answer=Distance(1200), step_count=3)
        transcript.event("plan", directives=["DISPATCH db_agent: x"])
        restored = EpisodeTranscript.from_json(transcript.to_json())
        self.assertEqual(restored.to_dict(), transcript.to_dict())
        self.assertEqual(json.loads(transcript.to_json())["verdict"], "answered")

    def test_episode_injection_checks(self):
        with self.assertRaises(ValueError):
            Episode(EpisodeTranscript("t"), ScriptedBackend(), injections={"sql"})
        with self.assertRaises(ValueError):
            Episode(EpisodeTranscript("t"), ScriptedBackend(), injections={"plan"})


class BackendTests(SimpleTestCase):
    def session(self, content="DISPATCH db_agent: x"):
        response = mock.Mock()
        response.json.return_value = {"choices": [{"message": {"content": content}}]}
        response.raise_for_status.return_value = None
        session = mock.Mock()
        session.post.return_value = response
        return session

    def test_http_payload_and_headers(self):
        session = self.session()
        backend = HttpChatBackend("http://llm.local/v1/chat/completions", "qwen", api_key="k-1", session=session)
        reply = backend.complete("system", [{"role": "user", "content": "q"}], role="supervisor.plan")
        self.assertEqual(reply, "DISPATCH db_agent: x")
        _, kwargs = session.post.call_args
        self.assertEqual(kwargs["headers"]["Authorization"], "Bearer k-1")
        self.assertEqual(kwargs["json"]["temperature"], 0)
        self.assertEqual(kwargs["json"]["messages"][0], {"role": "system", "content": "system"})

    def test_http_retries_then_fails(self):
        session = mock.Mock()
        session.post.side_effect = requests.ConnectionError("down")
        backend = HttpChatBackend("http://llm.local", "qwen", session=session, max_retries=2)
        with self.assertRaises(BackendError) as caught:
            backend.complete("system", [], role="db.sql")
        self.assertEqual(caught.exception.role, "db.sql")
        self.assertEqual(session.post.call_count, 3)

    def failing_session(self, status_code):
        response = mock.Mock(status_code=status_code)
        response.raise_for_status.side_effect = requests.HTTPError(f"{status_code} error", response=response)
        session = mock.Mock()
        session.post.return_value = response
        return session

    def test_client_error_is_not_retried(self):
        for status_code in (400, 401, 404):
            session = self.failing_session(status_code)
            backend = HttpChatBackend("http://llm.local", "qwen", session=session, max_retries=2)
            with self.assertRaises(BackendError):
                backend.complete("system", [], role="map.decide")
            self.assertEqual(session.post.call_count, 1)

    def test_server_error_and_rate_limit_are_retried(self):
        for status_code in (429, 500, 503):
            session = self.failing_session(status_code)
            backend = HttpChatBackend("http://llm.local", "qwen", session=session, max_retries=2)
            with self.assertRaises(BackendError):
                backend.complete("system", [], role="map.decide")
            self.assertEqual(session.post.call_count, 3)

    def test_recovers_after_server_error(self):
        failing = mock.Mock(status_code=502)
        failing.raise_for_status.side_effect = requests.HTTPError("502", response=failing)
        ok = self.session("SUFFICIENT").post.return_value
        session = mock.Mock()
        session.post.side_effect = [failing, ok]
        backend = HttpChatBackend("http://llm.local", "qwen", session=session, max_retries=2)
        self.assertEqual(backend.complete("system", [], role="supervisor.sufficiency"), "SUFFICIENT")
        self.assertEqual(session.post.call_count, 2)

    def test_malformed_body_is_not_retried(self):
        session = self.session()
        session.post.return_value.json.return_value = {"choices": []}
        backend = HttpChatBackend("http://llm.local", "qwen", session=session, max_retries=2)
        with self.assertRaises(BackendError):
            backend.complete("system", [], role="db.sql")
        self.assertEqual(session.post.call_count, 1)

    def test_malformed_chat_response(self):
        with self.assertRaises(ValueError):
            parse_chat_response({"choices": []})

    def test_scripted_queue_then_handler(self):
        backend = ScriptedBackend({"db.sql": ["first"]}, handler=lambda role, *_: f"handled {role}")
        self.assertEqual(backend.complete("", [], role="db.sql"), "first")
        self.assertEqual(backend.complete("", [], role="db.sql"), "handled db.sql")
        with self.assertRaises(BackendError):
            ScriptedBackend().complete("", [], role="db.sql")

    @override_settings(LLM_ENDPOINT="", LLM_MODEL="")
    def test_settings_without_endpoint(self):
        with self.assertRaises(ConfigurationError):
            backend_from_settings()

    @override_settings(LLM_ENDPOINT="http://llm.local", LLM_MODEL="qwen", LLM_API_KEY_ENV="ESTATEQA_TEST_KEY")
    def test_key_comes_from_environment(self):
        with mock.patch.dict(os.environ, {"ESTATEQA_TEST_KEY": "secret"}):
            self.assertEqual(backend_from_settings().headers["Authorization"], "Bearer secret")
        with mock.patch.dict(os.environ, {}, clear=True):
            with self.assertRaises(ConfigurationError):
                backend_from_settings()


class RuleFinalizeTests(SimpleTestCase):
    def rows(self, rows):
        return Evidence("rows", "db_agent", {"statement": "", "columns": ["c"] * len(rows[0]), "rows": rows})

    def test_single_number(self):
        self.assertEqual(rule_finalize([self.rows([[42000]])]), Number(42000))

    def test_single_column(self):
        self.assertEqual(rule_finalize([self.rows([["A"], ["B"]])]), EntitySet(("A", "B")))

    def test_wide_rows(self):
        self.assertIsNone(rule_finalize([self.rows([["A", 1]])]))

    def test_derived_wins(self):
        derived = Evidence("derived", "map_agent", {"answer": Distance(900).to_dict(), "rule": {"kind": "passthrough"}})
        self.assertEqual(rule_finalize([self.rows([["A"]]), derived]), Distance(900))


class SupervisorTests(SimpleTestCase):
    def test_always_error_terminates_within_cap(self):
        backend = ScriptedBackend(handler=lambda role, *_: "DISPATCH db_agent: look it up")
        supervisor = Supervisor(backend, [StubSpecialist("db_agent", always_error)], step_cap=25)
        for index in range(200):
            transcript = supervisor.run_episode(f"Question {index}?", instance_id=f"q{index}")
            self.assertIsNone(transcript.answer)
            self.assertEqual(transcript.verdict, "unanswerable")
            self.assertEqual(transcript.failure, "step_cap")
            self.assertLessEqual(transcript.step_count, 25)

    def test_wrong_first_specialist_is_replanned(self):
        def map_handler(task):
            if "Lotus Garden" not in task.context:
                return AgentResult.unable("geographical coordinates required for the task are missing")
            derived = Evidence("derived", "map_agent", {"answer": Distance(1500).to_dict(), "rule": {"kind": "passthrough"}})
            return AgentResult.success([derived])

        db = StubSpecialist("db_agent", lambda task: AgentResult.success([ROWS, COORDINATES]))
        maps = StubSpecialist("map_agent", map_handler)
        backend = ScriptedBackend(
            {
                "supervisor.plan": ["DISPATCH map_agent: compute the distance"],
                "supervisor.replan": ["DISPATCH db_agent: find coordinates\nDISPATCH map_agent: compute the distance"],
                "supervisor.finalize": [render_answer_envelope(Distance(1500))],
            }
        )
        transcript = Supervisor(backend, [db, maps]).run_episode("How far is Lotus Garden from the park?")
        self.assertEqual(transcript.route, ("map_agent", "db_agent", "map_agent"))
        self.assertEqual(transcript.answer, Distance(1500))
        self.assertEqual([event["event"] for event in transcript.events], ["plan", "replan"])
        self.assertEqual(transcript.step_count, 5)
        self.assertIn("map_agent unable", maps.tasks[1].history[0])
        self.assertEqual(len(evidence_of(transcript)), 3)

    def test_plan_reprompted_once(self):
        backend = ScriptedBackend(
            {
                "supervisor.plan": ["Let me think.", "DISPATCH db_agent: count"],
                "supervisor.finalize": [render_answer_envelope(Number(3, "count"))],
            }
        )
        db = StubSpecialist("db_agent", lambda task: AgentResult.success([ROWS]))
        transcript = Supervisor(backend, [db]).run_episode("How many?")
        self.assertEqual(transcript.answer, Number(3, "count"))
        self.assertEqual(transcript.events[0], {"event": "plan_parse_failure", "role": "supervisor.plan", "attempt": 1})

    def test_unparseable_plan_fails_episode(self):
        backend = ScriptedBackend({"supervisor.plan": ["no plan", "still no plan"]})
        transcript = Supervisor(backend, []).run_episode("How many?")
        self.assertEqual(transcript.failure, "plan_parse_failure")
        self.assertIsNone(transcript.answer)

    def test_finalize_falls_back_to_rule(self):
        backend = ScriptedBackend({"supervisor.plan": ["DISPATCH db_agent: list"]})
        db = StubSpecialist("db_agent", lambda task: AgentResult.success([ROWS]))
        transcript = Supervisor(backend, [db]).run_episode("Which communities?")
        self.assertEqual(transcript.answer, EntitySet(("Lotus Garden",)))
        self.assertEqual(transcript.events[-1], {"event": "finalize_fallback"})

    def test_sufficiency_judge_can_stop_early(self):
        backend = ScriptedBackend(
            {
                "supervisor.plan": ["DISPATCH db_agent: list\nDISPATCH map_agent: unnecessary"],
                "supervisor.sufficiency": ["SUFFICIENT"],
                "supervisor.finalize": [render_answer_envelope(EntitySet(("Lotus Garden",)))],
            }
        )
        db = StubSpecialist("db_agent", lambda task: AgentResult.success([ROWS]))
        maps = StubSpecialist("map_agent", always_error)
        transcript = Supervisor(backend, [db, maps], judge_sufficiency=True).run_episode("Which?")
        self.assertEqual(transcript.route, ("db_agent",))
        self.assertEqual(maps.tasks, [])

    def test_slots_reach_specialists(self):
        slots = (SlotAnnotation("community_name", "Lotus Garden", (8, 20)),)
        backend = ScriptedBackend({"supervisor.plan": ["DISPATCH db_agent: price"]})
        db = StubSpecialist("db_agent", lambda task: AgentResult.success([ROWS]))
        Supervisor(backend, [db]).run_episode("Price of Lotus Garden?", ("price_lookup",), slots)
        self.assertEqual(db.tasks[0].slots, slots)
        self.assertEqual(db.tasks[0].intents, ("price_lookup",))


class OracleClosureTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        cls.store, cls.templates, cls.instances, cls.report = build_test_dataset(cities=("Guangzhou",), attempts=4)

    def supervisor(self, backend):
        return Supervisor(backend, [DbAgent(self.store), MapAgent(ToolCache(), templates=self.templates)])

    def test_supervisor_reproduces_every_answer(self):
        supervisor = self.supervisor(OracleBackend(self.templates))
        types = set()
        for instance in self.instances:
            transcript = supervisor.run_episode(
                instance.question, instance.intents, instance.slots, instance_id=instance.id, gold=instance
            )
            self.assertTrue(answer_equal(transcript.answer, instance.answer), f"{instance.id}: {transcript.failure}")
            self.assertEqual(transcript.route, instance.agent_route, instance.id)
            self.assertEqual(transcript.sql_attempts[0]["statement"], instance.sql_trace[0].statement)
            types.add(instance.question_type)
        self.assertEqual(types, {1, 2, 3})

    def test_standard_agent_reproduces_every_answer(self):
        agent = StandardAgent(OracleBackend(self.templates), self.store, ToolCache())
        for instance in self.instances:
            transcript = agent.run_episode(instance.question, instance_id=instance.id, gold=instance)
            self.assertTrue(answer_equal(transcript.answer, instance.answer), f"{instance.id}: {transcript.failure}")
            self.assertEqual(transcript.method, "standard")
            self.assertLessEqual(transcript.step_count, 3)

    def test_failing_sql_stage_hits_step_cap(self):
        instance = self.instances[0]
        supervisor = self.supervisor(FailingStageBackend(self.templates, "db.sql"))
        transcript = supervisor.run_episode(instance.question, instance_id=instance.id, gold=instance)
        self.assertEqual(transcript.failure, "step_cap")
        self.assertLessEqual(transcript.step_count, 25)

    def test_injected_sql_recovers_failing_stage(self):
        instance = self.instances[0]
        supervisor = self.supervisor(FailingStageBackend(self.templates, "db.sql"))
        transcript = supervisor.run_episode(
            instance.question, instance_id=instance.id, gold=instance, injections={"sql"}
        )
        self.assertTrue(answer_equal(transcript.answer, instance.answer))
        self.assertEqual(transcript.sql_attempts[0]["source"], "gt_injected")

    def test_labelled_slots_drive_the_query(self):
        by_template = {}
        for instance in self.instances:
            if instance.question_type == 1:
                by_template.setdefault(instance.template_id, []).append(instance)
        pairs = [
            (first, other)
            for group in by_template.values()
            for first in group[:1]
            for other in group[1:]
            if other.sql_trace[0].statement != first.sql_trace[0].statement
        ]
        self.assertTrue(pairs)
        supervisor = self.supervisor(OracleBackend(self.templates))
        for gold, other in pairs:
            transcript = supervisor.run_episode(
                gold.question, other.intents, other.slots, instance_id=gold.id, gold=gold
            )
            self.assertEqual(transcript.sql_attempts[0]["statement"], other.sql_trace[0].statement)
            self.assertTrue(answer_equal(transcript.answer, other.answer), other.id)

    def test_wrong_intents_change_the_route(self):
        supervisor = self.supervisor(OracleBackend(self.templates))
        plain = next(instance for instance in self.instances if instance.question_type == 1)
        transcript = supervisor.run_episode(
            plain.question, ("commute_time",), plain.slots, instance_id=plain.id, gold=plain
        )
        self.assertEqual(transcript.failure, "step_cap")
        self.assertIsNone(transcript.answer)

        spatial = next(instance for instance in self.instances if instance.question_type == 2)
        transcript = supervisor.run_episode(
            spatial.question, ("price_inquiry",), spatial.slots, instance_id=spatial.id, gold=spatial
        )
        self.assertEqual(list(transcript.route), ["db_agent"])
        self.assertEqual(transcript.failure, "unanswerable_verdict")

    def test_failing_slu_reply_keeps_slots(self):
        backend = FailingStageBackend(self.templates, "slu.fewshot")
        for question_type in (1, 2):
            instance = next(item for item in self.instances if item.question_type == question_type)
            reply = json.loads(
                backend.complete("", [{"role": "user", "content": instance.question}], role="slu.fewshot",
                                 context={"instance": instance})
            )
            self.assertEqual([slot["value"] for slot in reply["slots"]], [slot.value for slot in instance.slots])
            wrong = set(reply["intents"])
            self.assertTrue(wrong)
            self.assertEqual(bool(wrong & backend.tool_intents), question_type == 1)
