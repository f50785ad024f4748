import json
import random
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

from agents.backends import ScriptedBackend
from agents.exceptions import ConfigurationError
from agents.oracle import FailingStageBackend, OracleBackend
from agents.protocol import EpisodeTranscript
from domain.answers import Distance, EntitySet, Number, answer_equal, answer_items
from domain.dataset import write_jsonl
from qagen.testing import build_test_dataset
from toolcache.calls import make_request
from .config import RunConfig, build_backend
from .exceptions import AlignmentError, RunDirectoryError
from .metrics import accuracy, item_f1
from .report import build_report
from .rundir import RunDirectory
from .runner import LADDER, run_ladder, run_suite


class AnswerMetricTests(SimpleTestCase):
    def test_partial_overlap_scores_two_thirds(self):
        gold = EntitySet(("A", "B", "C"))
        pred = EntitySet(("A", "B", "D"))
        self.assertAlmostEqual(item_f1(pred, gold), 2 / 3, delta=1e-9)
        self.assertEqual(accuracy(pred, gold), 0)

    def test_identical_and_reordered(self):
        gold = EntitySet(("Lotus Garden", "Jade Court"))
        self.assertEqual(item_f1(gold, gold), 1.0)
        self.assertEqual(accuracy(EntitySet(("Jade Court", "Lotus Garden")), gold), 1)

    def test_enumeration_does_not_answer_a_count(self):
        self.assertEqual(accuracy(EntitySet(("Lotus Garden", "Jade Court")), Number(2)), 0)
        self.assertEqual(item_f1(EntitySet(("Lotus Garden", "Jade Court")), Number(2)), 0.0)

    def test_unanswerable_scores_zero(self):
        self.assertEqual(accuracy(None, Number(2)), 0)
        self.assertEqual(item_f1(None, Number(2)), 0.0)

    def test_single_items_agree_with_accuracy(self):
        for pred, gold in [(Distance(1200), Distance(1200)), (Distance(1200), Distance(1300)), (Number(5), Number(5.0))]:
            self.assertEqual(item_f1(pred, gold), float(accuracy(pred, gold)))

    def test_exact_match_implies_full_f1(self):
        rng = random.Random(3)
        names = ["Lotus Garden", "Jade Court", "Pine Villa", "Cedar Court"]
        for _ in range(300):
            pred = EntitySet(tuple(rng.choice(names) for _ in range(rng.randint(1, 4))))
            gold = EntitySet(tuple(rng.choice(names) for _ in range(rng.randint(1, 4))))
            f1 = item_f1(pred, gold)
            self.assertTrue(0.0 <= f1 <= 1.0)
            if accuracy(pred, gold):
                self.assertEqual(f1, 1.0)


class RunConfigTests(SimpleTestCase):
    def test_validation(self):
        with self.assertRaises(ValueError):
            RunConfig(step_cap=0)
        with self.assertRaises(ValueError):
            RunConfig(injections={"plan"})
        with self.assertRaises(ValueError):
            RunConfig(backend="telepathy")
        with self.assertRaises(ValueError):
            RunConfig(slu="bert")

    def test_document_round_trip(self):
        config = RunConfig(backend="failing:db.sql", injections={"sql", "slu"}, parallelism=4, method="standard")
        data = json.loads(json.dumps(config.to_dict()))
        self.assertEqual(data["injections"], ["slu", "sql"])
        self.assertEqual(RunConfig.from_dict(data), config)

    @override_settings(EVAL_METHOD="standard", EVAL_SLU_STRATEGY="none", AGENT_STEP_CAP=9)
    def test_defaults_from_settings(self):
        config = RunConfig.from_settings(seed=5)
        self.assertEqual((config.method, config.slu, config.step_cap, config.seed), ("standard", "none", 9, 5))
        self.assertEqual(config.backend, "http")

    def test_backend_specs(self):
        self.assertIsInstance(build_backend("oracle", {}), OracleBackend)
        failing = build_backend("failing:map.decide", {})
        self.assertIsInstance(failing, FailingStageBackend)
        self.assertEqual(failing.failing_role, "map.decide")

    @override_settings(LLM_ENDPOINT="", LLM_MODEL="")
    def test_http_backend_needs_configuration(self):
        with self.assertRaises(ConfigurationError):
            build_backend("http", {})


def tally(transcripts, golds):
    """Независимый подсчёт метрик по каждому экземпляру"""

    by_id = {gold.id: gold for gold in golds}
    counts = {name: [0, 0] for name in ("accuracy", "f1", "ecr", "pass_at_1", "api_label_accuracy", "planning_accuracy")}
    for transcript in transcripts:
        gold = by_id[transcript.instance_id]
        counts["accuracy"][0] += int(answer_equal(transcript.answer, gold.answer))
        counts["accuracy"][1] += 1

        predicted, expected = answer_items(transcript.answer), list(answer_items(gold.answer))
        hits = 0
        for item in predicted:
            if item in expected:
                expected.remove(item)
                hits += 1
        counts["f1"][0] += 2 * hits / (len(predicted) + len(answer_items(gold.answer))) if hits else 0.0
        counts["f1"][1] += 1

        first = transcript.sql_attempts[0] if transcript.sql_attempts else None
        counts["ecr"][0] += int(bool(first and first["ok"]))
        counts["ecr"][1] += 1
        same_rows = bool(first and first["ok"]) and sorted(map(json.dumps, first["rows"])) == sorted(
            json.dumps(list(row)) for row in gold.sql_trace[0].expected_result
        )
        counts["pass_at_1"][0] += int(same_rows)
        counts["pass_at_1"][1] += 1

        if gold.tool_trace:
            calls = transcript.tool_calls
            if calls:
                last = calls[-1]
                calls = [call for call in calls if call["dispatch"] == last["dispatch"] and call["attempt"] == last["attempt"]]
            generated = [make_request(call["function"], call["params"]).key for call in calls]
            expected_calls = [make_request(step.function, step.params).key for step in gold.tool_trace]
            counts["api_label_accuracy"][0] += int(generated == expected_calls)
            counts["api_label_accuracy"][1] += 1

        route = tuple(dispatch["specialist"] for dispatch in transcript.dispatches)
        counts["planning_accuracy"][0] += int(route == tuple(gold.agent_route))
        counts["planning_accuracy"][1] += 1
    return {name: (hits / total if total else None) for name, (hits, total) in counts.items()}


class SuiteTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        cls.store, cls.templates, cls.instances, cls.report = build_test_dataset(cities=("Guangzhou",), attempts=4)

    def run_oracle(self, **overrides):
        config = RunConfig(**{"backend": "oracle", "slu": "none", **overrides})
        return run_suite(config, self.instances, store=self.store, templates=self.templates)

    def test_oracle_closure(self):
        result = self.run_oracle()
        report = result.report
        self.assertEqual(report.count, len(self.instances))
        self.assertEqual(report.counts["1"] + report.counts["2"] + report.counts["3"], report.count)
        for name in ("accuracy", "f1", "ecr", "pass_at_1", "api_label_accuracy", "planning_accuracy"):
            self.assertEqual(report.metric(name), 1.0, name)
        for scope in ("1", "2", "3", "2+3"):
            self.assertEqual(report.metric("accuracy", scope), 1.0, scope)
        self.assertIsNone(report.trace["api_label_accuracy"].get("1"))
        self.assertEqual(report.failures, {})

    def test_standard_method_closure(self):
        report = self.run_oracle(method="standard").report
        self.assertEqual(report.metric("accuracy"), 1.0)
        self.assertEqual(report.metric("pass_at_1"), 1.0)
        self.assertIsNone(report.metric("planning_accuracy"))

    def test_gold_slu_scores_perfectly(self):
        report = self.run_oracle(injections={"slu"}).report
        self.assertEqual(report.slu["slot"]["f1"], 1.0)
        self.assertEqual(report.slu["intent_accuracy"], 1.0)

    def test_report_is_order_independent(self):
        result = self.run_oracle()
        config = result.config
        forward = build_report(config, result.transcripts, self.instances).to_dict()
        backward = build_report(config, list(reversed(result.transcripts)), list(reversed(self.instances))).to_dict()
        self.assertEqual(forward, backward)

    def test_missing_transcript_is_rejected(self):
        result = self.run_oracle()
        with self.assertRaises(AlignmentError):
            build_report(result.config, result.transcripts[1:], self.instances)

    def test_metrics_match_brute_force_tally(self):
        base = {transcript.instance_id: transcript for transcript in self.run_oracle().transcripts}
        rng = random.Random(17)
        for _ in range(100):
            golds = rng.sample(self.instances, rng.randint(1, min(20, len(self.instances))))
            transcripts = []
            for gold in golds:
                transcript = EpisodeTranscript.from_json(base[gold.id].to_json())
                if rng.random() < 0.25:
                    transcript.answer = None
                elif rng.random() < 0.25:
                    transcript.answer = EntitySet(("Nowhere Court",))
                first = transcript.sql_attempts[0]
                if rng.random() < 0.2:
                    transcript.sql_attempts[0] = {**first, "ok": False, "rows": [], "error": "no such column: x"}
                elif rng.random() < 0.2:
                    transcript.sql_attempts[0] = {**first, "rows": first["rows"][:-1] + [["Nowhere Court", 0]]}
                if rng.random() < 0.25:
                    transcript.tool_calls = transcript.tool_calls[:-1]
                if rng.random() < 0.25:
                    transcript.dispatches = transcript.dispatches[:1]
                transcripts.append(transcript)

            report = build_report(RunConfig(), transcripts, golds)
            expected = tally(transcripts, golds)
            for name, value in expected.items():
                if value is None:
                    self.assertIsNone(report.metric(name), name)
                else:
                    self.assertAlmostEqual(report.metric(name), value, delta=1e-9, msg=name)

    def test_ladder_injection_recovers_failing_stage(self):
        instances = sorted(self.instances, key=lambda instance: (instance.question_type, instance.id))
        sample = [instances[0], instances[len(instances) // 2], instances[-1]]
        results = run_ladder(
            RunConfig(backend="failing:db.sql", slu="none", step_cap=8),
            sample,
            store=self.store,
            templates=self.templates,
        )
        self.assertEqual(list(results), [rung for rung, _ in LADDER])
        self.assertEqual(results["none"].report.metric("accuracy"), 0.0)
        self.assertEqual(results["none"].report.failures, {"step_cap": len(sample)})
        self.assertEqual(results["slu+sql"].report.metric("accuracy"), 1.0)
        self.assertEqual(results["slu+sql+api"].report.metric("accuracy"), 1.0)
        self.assertEqual(results["slu+sql+api"].config.injections, {"slu", "sql", "api"})

    def test_ladder_only_api_injection_recovers_map_decisions(self):
        spatial = sorted(
            (instance for instance in self.instances if instance.question_type != 1),
            key=lambda instance: (instance.question_type, instance.id),
        )
        sample = [spatial[0], spatial[len(spatial) // 2], spatial[-1]]
        self.assertEqual({instance.question_type for instance in sample}, {2, 3})
        results = run_ladder(
            RunConfig(backend="failing:map.decide", slu="none", step_cap=8),
            sample,
            store=self.store,
            templates=self.templates,
        )
        for rung in ("none", "slu", "slu+sql"):
            self.assertEqual(results[rung].report.metric("accuracy"), 0.0, rung)
            self.assertEqual(results[rung].report.failures, {"step_cap": len(sample)}, rung)
        self.assertEqual(results["slu+sql+api"].report.metric("accuracy"), 1.0)
        self.assertEqual(results["slu+sql+api"].report.failures, {})

    def test_ladder_measures_slu_errors(self):
        instances = sorted(self.instances, key=lambda instance: (instance.question_type, instance.id))
        sample = [instances[0], instances[len(instances) // 2], instances[-1]]
        results = run_ladder(
            RunConfig(backend="failing:slu.fewshot", slu="fewshot", step_cap=8),
            sample,
            store=self.store,
            templates=self.templates,
        )
        none = results["none"].report
        self.assertEqual(none.metric("accuracy"), 0.0)
        self.assertLess(none.slu["intent_accuracy"], 1.0)
        self.assertEqual(sum(none.failures.values()), len(sample))
        self.assertLessEqual(set(none.failures), {"step_cap", "unanswerable_verdict"})
        for rung in ("slu", "slu+sql", "slu+sql+api"):
            self.assertEqual(results[rung].report.metric("accuracy"), 1.0, rung)

    def test_unreachable_backend_gives_partial_report(self):
        config = RunConfig(backend="oracle", slu="fewshot")
        result = run_suite(config, self.instances[:5], store=self.store, templates=self.templates, backend=ScriptedBackend())
        self.assertTrue(result.all_backend_errors)
        self.assertEqual(result.report.failures, {"backend_error": 5})
        self.assertEqual(result.report.metric("accuracy"), 0.0)


class LargeDatasetClosureTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        cls.store, cls.templates, cls.instances, cls.report = build_test_dataset(
            cities=("Guangzhou", "Shenzhen"), attempts=90, communities=200, pois=150
        )

    def test_dataset_size_and_types(self):
        self.assertGreaterEqual(len(self.instances), 1000)
        self.assertEqual({instance.question_type for instance in self.instances}, {1, 2, 3})
        self.assertEqual({instance.city for instance in self.instances}, {"Guangzhou", "Shenzhen"})

    def test_oracle_answers_every_instance(self):
        report = run_suite(
            RunConfig(backend="oracle", slu="none"), self.instances, store=self.store, templates=self.templates
        ).report
        self.assertEqual(report.count, len(self.instances))
        for name in ("accuracy", "f1", "ecr", "pass_at_1"):
            self.assertEqual(report.metric(name), 1.0, name)
        for scope in ("1", "2", "3"):
            self.assertEqual(report.metric("accuracy", scope), 1.0, scope)
        self.assertEqual(report.failures, {})


class RunDirectoryTests(SimpleTestCase):
    def test_existing_run_needs_overwrite(self):
        with tempfile.TemporaryDirectory() as directory:
            run_dir = RunDirectory(Path(directory) / "first")
            run_dir.prepare()
            run_dir.write_config(RunConfig())
            with self.assertRaises(RunDirectoryError):
                run_dir.prepare()
            run_dir.prepare(overwrite=True)
            self.assertFalse((run_dir.path / "config.json").exists())

    def test_run_names_stay_inside_runs_dir(self):
        for name in ("", "../elsewhere", ".hidden"):
            with self.assertRaises(ValueError):
                RunDirectory.named(name)


class CommandTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        cls.store, cls.templates, cls.instances, cls.report = build_test_dataset(cities=("Guangzhou",), attempts=3)

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)
        write_jsonl(self.path / "test.jsonl", self.instances)
        write_jsonl(self.path / "train.jsonl", self.instances)
        self.settings_override = override_settings(QA_DATASET_DIR=self.path, QA_RUNS_DIR=self.path / "runs")
        self.settings_override.enable()

    def tearDown(self):
        self.settings_override.disable()
        self.directory.cleanup()

    def test_run_then_eval(self):
        call_command("run", "--name", "smoke", "--oracle", "--slu", "none", "--limit", "10", stdout=StringIO())
        run_path = self.path / "runs" / "smoke"
        for name in ("config.json", "transcripts.jsonl", "report.json", "report.txt"):
            self.assertTrue((run_path / name).exists(), name)
        report = json.loads((run_path / "report.json").read_text(encoding="utf-8"))
        self.assertEqual(report["answers"]["accuracy"]["overall"], 1.0)
        transcripts = (run_path / "transcripts.jsonl").read_bytes()

        with self.assertRaises(CommandError) as caught:
            call_command("run", "--name", "smoke", "--oracle", "--slu", "none", "--limit", "10", stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 2)
        call_command("run", "--name", "smoke", "--oracle", "--slu", "none", "--limit", "10", "--overwrite", stdout=StringIO())
        self.assertEqual((run_path / "transcripts.jsonl").read_bytes(), transcripts)

        out = StringIO()
        call_command("eval", "--name", "smoke", "--json", stdout=out)
        self.assertEqual(json.loads(out.getvalue()), report)

    @override_settings(LLM_ENDPOINT="", LLM_MODEL="")
    def test_run_without_backend_is_configuration_error(self):
        with self.assertRaises(CommandError) as caught:
            call_command("run", "--name", "nobackend", stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 2)
        self.assertFalse((self.path / "runs" / "nobackend").exists())

    def test_backend_failing_everywhere_exits_three(self):
        with mock.patch("evaluation.management.commands.run.build_backend", return_value=ScriptedBackend()):
            with self.assertRaises(CommandError) as caught:
                call_command("run", "--name", "down", "--oracle", "--limit", "3", stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 3)
        report = json.loads((self.path / "runs" / "down" / "report.json").read_text(encoding="utf-8"))
        self.assertEqual(report["failures"], {"backend_error": 3})

    def test_ablate_writes_four_rungs(self):
        out = StringIO()
        call_command("ablate", "--name", "ladder", "--oracle", "--slu", "none", "--limit", "6", stdout=out)
        ladder = json.loads((self.path / "runs" / "ladder" / "ladder.json").read_text(encoding="utf-8"))
        self.assertEqual(sorted(ladder), sorted(rung for rung, _ in LADDER))
        for rung, scores in ladder.items():
            self.assertEqual(scores["accuracy"], 1.0, rung)
            self.assertTrue((self.path / "runs" / "ladder" / rung / "report.json").exists())
