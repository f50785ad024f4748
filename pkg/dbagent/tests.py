import math
from collections import Counter

from django.test import SimpleTestCase, TestCase

from agents.backends import ScriptedBackend
from agents.episode import Episode
from agents.oracle import OracleBackend
from agents.protocol import AgentTask, EpisodeTranscript
from geostore.testing import build_test_store
from qagen.testing import build_test_dataset
from .agent import DbAgent, SqlCandidate, execute_and_package, extract_sql, load_examples
from .bm25 import Bm25Index, tokenize
from .exceptions import RetrievalError, SqlExtractionError


def task_for(instance):
    return AgentTask(
        task_description="Look up the entities named in the question",
        question=instance.question,
        intents=instance.intents,
        slots=instance.slots,
    )


class TokenizeTests(SimpleTestCase):
    def test_lowercase_and_punctuation(self):
        self.assertEqual(tokenize("Table for POIs, in Guangzhou!"), ["table", "for", "pois", "in", "guangzhou"])

    def test_cjk_bigrams(self):
        self.assertEqual(tokenize("广州小区"), ["广州", "州小", "小区"])


class Bm25Tests(SimpleTestCase):
    def test_score_matches_hand_computation(self):
        index = Bm25Index(["a b", "a c", "d"], k1=1.2, b=0.75)
        idf = math.log((3 - 1 + 0.5) / (1 + 0.5) + 1)
        norm = 1.2 * (1 - 0.75 + 0.75 * 2 / (5 / 3))
        self.assertAlmostEqual(index.score("b", 0), idf * 2.2 / (1 + norm))
        self.assertEqual(index.score("b", 1), 0.0)
        self.assertEqual(index.retrieve("b")[0][0], "a b")

    def test_common_term_has_positive_idf(self):
        index = Bm25Index(["a", "a", "a"])
        self.assertGreater(index.idf("a"), 0)

    def test_zero_overlap_orders_by_text(self):
        index = Bm25Index(["zeta", "alpha", "mu"])
        self.assertEqual(index.retrieve("unrelated", k=3), [("alpha", 0.0), ("mu", 0.0), ("zeta", 0.0)])

    def test_empty_index(self):
        with self.assertRaises(RetrievalError):
            Bm25Index([]).retrieve("anything")

    def test_k_caps_result(self):
        index = Bm25Index(["a", "b", "c"])
        self.assertEqual(len(index.retrieve("a", k=2)), 2)
        self.assertEqual(len(index.retrieve("a", k=0)), 1)


class ExtractSqlTests(SimpleTestCase):
    def test_first_fence_without_semicolon(self):
        text = "Here:\n```sql\nSELECT 1;\n```\nand\n```sql\nSELECT 2\n```"
        self.assertEqual(extract_sql(text), "SELECT 1")

    def test_missing_fence(self):
        with self.assertRaises(SqlExtractionError) as caught:
            extract_sql("SELECT 1")
        self.assertEqual(caught.exception.raw, "SELECT 1")

    def test_fewshot_examples_carry_sql(self):
        examples = load_examples()
        self.assertGreaterEqual(len(examples), 5)
        for example in examples:
            self.assertTrue(example["sql"].upper().startswith("SELECT"))


class StoreBackedTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        cls.store = build_test_store(cities=("Guangzhou", "Shenzhen"), communities=8, pois=13)

    def episode(self, backend=None):
        return Episode(EpisodeTranscript(instance_id="t"), backend or ScriptedBackend())

    def test_every_caption_retrieves_itself(self):
        captions = [entry.caption for entry in self.store.list_captions()]
        self.assertEqual(len(captions), 8)
        index = Bm25Index(captions)
        for caption in captions:
            self.assertEqual(index.retrieve(caption)[0][0], caption)

    def test_package_rows_and_coordinates(self):
        episode = self.episode()
        result = execute_and_package(
            SqlCandidate("SELECT name, latitude, longitude FROM community_guangzhou ORDER BY name LIMIT 2"),
            self.store,
            episode,
        )
        self.assertEqual(result.status, "success")
        kinds = [item.kind for item in result.evidence]
        self.assertEqual(kinds, ["rows", "coordinates"])
        names = [row[0] for row in result.evidence[0].payload["rows"]]
        self.assertEqual(sorted(result.evidence[1].payload), sorted(names))
        self.assertTrue(episode.transcript.sql_attempts[0]["ok"])

    def test_rows_without_coordinates(self):
        result = execute_and_package(SqlCandidate("SELECT COUNT(*) FROM poi_guangzhou"), self.store)
        self.assertEqual([item.kind for item in result.evidence], ["rows"])
        self.assertEqual(result.evidence[0].payload["rows"], [[13]])

    def test_empty_result_is_unable(self):
        result = execute_and_package(
            SqlCandidate("SELECT name FROM community_guangzhou WHERE name = 'Nowhere'"), self.store
        )
        self.assertEqual(result.status, "unable")

    def test_engine_error_is_reported(self):
        episode = self.episode()
        result = execute_and_package(SqlCandidate("SELECT missing FROM community_guangzhou"), self.store, episode)
        self.assertEqual(result.status, "error")
        self.assertIn("no such column", result.error_report)
        self.assertFalse(episode.transcript.sql_attempts[0]["ok"])

    def test_write_is_refused(self):
        result = execute_and_package(SqlCandidate("DELETE FROM geostore_poi"), self.store)
        self.assertEqual(result.status, "error")
        self.assertEqual(self.store.execute_sql("SELECT COUNT(*) FROM poi_guangzhou").rows, ((13,),))

    def test_reprompt_after_unfenced_reply(self):
        backend = ScriptedBackend(
            {
                "db.caption": ["Table for POIs in Shenzhen"],
                "db.sql": ["I would count them.", "```sql\nSELECT COUNT(*) FROM poi_shenzhen;\n```"],
            }
        )
        episode = self.episode(backend)
        result = DbAgent(self.store).handle(
            AgentTask("Count facilities", "How many facilities are there in Shenzhen?"), episode
        )
        self.assertEqual(result.status, "success")
        self.assertEqual([role for role, _ in backend.calls], ["db.caption", "db.sql", "db.sql"])
        self.assertIn("poi_shenzhen(", backend.calls[1][1])

    def test_two_unfenced_replies_give_error(self):
        backend = ScriptedBackend({"db.caption": ["Table for POIs in Shenzhen"], "db.sql": ["no", "still no"]})
        result = DbAgent(self.store).handle(AgentTask("Count", "How many?"), self.episode(backend))
        self.assertEqual(result.status, "error")
        self.assertIn("no fenced SQL", result.error_report)

    def test_backend_failure_gives_error(self):
        result = DbAgent(self.store).handle(AgentTask("Count", "How many?"), self.episode())
        self.assertEqual(result.status, "error")
        self.assertIn("backend failure", result.error_report)


class OracleDrivenTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        cls.store, cls.templates, cls.instances, cls.report = build_test_dataset(cities=("Guangzhou",), attempts=4)

    def test_oracle_reproduces_gold_rows(self):
        agent = DbAgent(self.store)
        backend = OracleBackend(self.templates)
        for instance in self.instances:
            episode = Episode(EpisodeTranscript(instance_id=instance.id), backend, instance)
            result = agent.handle(task_for(instance), episode)
            gold = instance.sql_trace[0]
            if not gold.expected_result:
                self.assertEqual(result.status, "unable", instance.id)
                continue
            self.assertEqual(result.status, "success", instance.id)
            rows = result.evidence[0].payload["rows"]
            self.assertEqual(Counter(map(tuple, rows)), Counter(gold.expected_result), instance.id)

    def test_oracle_caption_is_retrieved(self):
        agent = DbAgent(self.store)
        backend = OracleBackend(self.templates)
        instance = self.instances[0]
        episode = Episode(EpisodeTranscript(instance_id=instance.id), backend, instance)
        agent.handle(task_for(instance), episode)
        caption_reply = episode.transcript.backend_calls[0]["reply"]
        self.assertEqual(agent.index.retrieve(caption_reply)[0][0], caption_reply)

    def test_injected_sql_skips_backend(self):
        instance = self.instances[0]
        backend = ScriptedBackend()
        episode = Episode(EpisodeTranscript(instance_id=instance.id), backend, instance, {"sql"})
        result = DbAgent(self.store).handle(task_for(instance), episode)
        self.assertEqual(backend.calls, [])
        self.assertEqual(episode.transcript.sql_attempts[0]["source"], "gt_injected")
        self.assertEqual(episode.transcript.sql_attempts[0]["statement"], instance.sql_trace[0].statement)
        self.assertIn(result.status, ("success", "unable"))
