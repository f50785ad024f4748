import dataclasses
import json
import random
import re
import tempfile
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from agents.backends import ScriptedBackend
from agents.exceptions import BackendError
from domain.answers import EntitySet, Number
from domain.dataset import read_jsonl
from domain.instances import QAInstance, SqlStep, ToolStep
from geostore.testing import build_test_store
from toolcache.providers import SyntheticProvider
from toolcache.service import ToolCache
from .exceptions import Rejection, SamplingExhausted, TemplateError
from .generation import generate_dataset
from .instantiate import instantiate, plausibility_filter
from .paraphrase import paraphrase_hook, relocate_slots
from .sampling import sample_bindings
from .split import SplitSpec, stratified_split
from .stats import dataset_stats
from .templates import binding_from_slots, fill_question, load_catalog, render_sql, template_from_dict
from .testing import build_test_dataset
from .validation import revalidate, validate_dataset


COORDINATE_SQL = "SELECT name, latitude, longitude FROM {table:community} WHERE name = {community_name}"

FAR_WALK = {
    "template_id": "far_walk",
    "question_type": 2,
    "intents": ["commute_time"],
    "question": "How long is the walk from {community_name} to the northern reservoir in {city}?",
    "placeholders": {"community_name": {}},
    "sql": COORDINATE_SQL,
    "tools": [
        {
            "function": "time_query",
            "params": {"origin": "@community_name", "destination": [23.40, 113.2644], "mode": "walking"},
        }
    ],
    "answer": {"source": "tools", "rule": {"kind": "passthrough"}},
}

SCARCE_NEAREST = {
    "template_id": "scarce_nearest",
    "question_type": 2,
    "intents": ["amenity_proximity"],
    "question": "What are the nearest {X} {poi_label} facilities to {community_name} in {city}?",
    "placeholders": {"X": {"choices": [3]}, "poi_label": {}, "community_name": {}},
    "sql": COORDINATE_SQL,
    "tools": [
        {
            "function": "surrounding_pois_query",
            "params": {"center": "@community_name", "radius": 50000, "label": "$poi_label"},
        }
    ],
    "answer": {"source": "tools", "rule": {"kind": "passthrough", "limit": "$X"}},
}

PAIR_IN_DISTRICT = {
    "template_id": "pair_in_district",
    "question_type": 1,
    "intents": ["cross_property_comparison"],
    "question": "Which is more expensive, {community_name.0} or {community_name.1} in {district} district of {city}?",
    "placeholders": {"district": {}, "community_name": {"count": 2, "within": "district"}},
    "sql": "SELECT name, avg_price FROM {table:community} WHERE name IN ({community_name.0}, {community_name.1})",
    "answer": {"source": "sql", "label": "name", "value": "avg_price", "value_kind": "number", "rule": {"kind": "argmax"}},
}


def bare_instance(template_id, number):
    return QAInstance(
        id=f"{template_id}-{number:04d}",
        template_id=template_id,
        city="Guangzhou",
        question=f"Question {number} of {template_id}?",
        question_type=1,
        intents=("price_inquiry",),
        slots=(),
        sql_trace=(SqlStep("SELECT 1", ("1",), ((1,),)),),
        tool_trace=(),
        agent_route=("db_agent",),
        answer=Number(1),
    )


def walking_instance(meters_north, mode="walking"):
    destination = [round(23.0 + meters_north / 111_194.93, 6), 113.0]
    step = ToolStep(
        "time_query",
        {"origin": [23.0, 113.0], "destination": destination, "mode": mode, "time_bucket": "midnight_00"},
        {"columns": ["duration_s"], "rows": [[100]]},
    )
    return QAInstance(
        id="walk-0000",
        template_id="walk",
        city="Guangzhou",
        question="How long is the walk?",
        question_type=2,
        intents=("commute_time",),
        slots=(),
        sql_trace=(SqlStep("SELECT 1", ("1",), ((1,),)),),
        tool_trace=(step,),
        agent_route=("db_agent", "map_agent"),
        answer=Number(1),
    )


class CatalogTests(SimpleTestCase):
    def setUp(self):
        self.catalog = load_catalog(settings.QA_TEMPLATE_DIR)

    def test_default_catalog_coverage(self):
        self.assertEqual(len(self.catalog), 17)
        per_type = [sum(1 for t in self.catalog.values() if t.question_type == kind) for kind in (1, 2, 3)]
        self.assertEqual(per_type, [6, 5, 6])
        functions = {pattern.function for t in self.catalog.values() for pattern in t.tools}
        self.assertEqual(
            functions, {"time_query", "distance_query", "surrounding_pois_query", "rush_hour_query"}
        )
        kinds = {t.answer.rule["kind"] for t in self.catalog.values()}
        self.assertEqual(kinds, {"passthrough", "argmin", "argmax", "count", "threshold_filter", "compare"})
        slot_types = {slot for t in self.catalog.values() for slot in t.slot_types}
        self.assertEqual(slot_types, set(settings.QA_SLOT_TYPES))
        intents = {intent for t in self.catalog.values() for intent in t.intents}
        self.assertEqual(intents, set(settings.QA_INTENTS))

    def test_count_limit_is_at_most_three(self):
        choices = self.catalog["nearest_pois"].placeholders["X"].choices
        self.assertTrue(set(choices) <= {1, 2, 3})
        bad = dict(SCARCE_NEAREST, placeholders={"X": {"choices": [4]}, "poi_label": {}, "community_name": {}})
        with self.assertRaises(TemplateError):
            template_from_dict(bad)

    def test_schema_errors(self):
        with self.assertRaises(TemplateError):
            template_from_dict(dict(FAR_WALK, question_type=1))
        with self.assertRaises(TemplateError):
            template_from_dict(dict(FAR_WALK, question="Walk from {poi_name} in {city}?"))
        with self.assertRaises(TemplateError):
            template_from_dict(dict(FAR_WALK, question="How long is the walk in {city}?"))
        with self.assertRaises(TemplateError):
            template_from_dict(dict(FAR_WALK, sql="SELECT * FROM {table:houses}"))
        with self.assertRaises(TemplateError):
            template_from_dict(dict(FAR_WALK, intents=["weather"]))

    def test_duplicate_ids_and_bad_yaml(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory)
            (path / "a.yaml").write_text(
                json.dumps({"templates": [FAR_WALK, FAR_WALK]}), encoding="utf-8"
            )
            with self.assertRaises(TemplateError):
                load_catalog(path)
            (path / "a.yaml").write_text("templates: [unclosed", encoding="utf-8")
            with self.assertRaises(TemplateError):
                load_catalog(path)
            with self.assertRaises(TemplateError):
                load_catalog(path / "empty")

    def test_spans_track_placeholder_positions(self):
        template = self.catalog["price_compare"]
        binding = {"city": ("Guangzhou",), "community_name": ("Lotus Garden Phase 2", "Lotus Garden")}
        question, slots = fill_question(template, binding)
        self.assertEqual(question, "Which is more expensive, Lotus Garden Phase 2 or Lotus Garden in Guangzhou?")
        self.assertEqual([slot.span for slot in slots], [(25, 45), (49, 61), (65, 74)])
        self.assertTrue(all(slot.matches(question) for slot in slots))
        self.assertEqual(binding_from_slots(template, "Guangzhou", slots), binding)

    def test_sql_rendering_quotes_values(self):
        template = self.catalog["affordable_in_district"]
        statement = render_sql(template, {"city": ("Shenzhen",), "district": ("Bao'an",), "price": (40000,)})
        self.assertEqual(
            statement, "SELECT name, avg_price FROM community_shenzhen WHERE district = 'Bao''an'"
        )

    def test_numeric_slots_restore_their_type(self):
        template = self.catalog["pois_in_radius"]
        binding = {
            "city": ("Guangzhou",),
            "poi_label": ("bus stop",),
            "radius": (1500,),
            "community_name": ("Jade Court",),
        }
        _, slots = fill_question(template, binding)
        self.assertEqual(binding_from_slots(template, "Guangzhou", slots)["radius"], (1500,))


class PlausibilityTests(SimpleTestCase):
    def test_thresholds(self):
        self.assertEqual(plausibility_filter(walking_instance(20_000)), "implausible_walking")
        self.assertIsNone(plausibility_filter(walking_instance(9_900)))
        self.assertIsNone(plausibility_filter(walking_instance(30_000, mode="driving")))
        self.assertEqual(plausibility_filter(walking_instance(25_000, mode="cycling")), "implausible_cycling")
        self.assertIsNone(plausibility_filter(walking_instance(19_000, mode="cycling")))


class SamplingTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        # пять комплексов и по одному POI на метку: один комплекс на район
        cls.store = build_test_store(cities=("Guangzhou",), communities=5, pois=13)

    def test_district_with_one_community_is_exhausted(self):
        template = template_from_dict(PAIR_IN_DISTRICT)
        with self.assertRaises(SamplingExhausted) as caught:
            sample_bindings(template, self.store, "Guangzhou", random.Random(1))
        self.assertEqual(caught.exception.reason, "sampling_exhausted")

    def test_same_seed_same_bindings(self):
        template = load_catalog(settings.QA_TEMPLATE_DIR)["least_drive"]
        first = sample_bindings(template, self.store, "Guangzhou", random.Random("s"))
        second = sample_bindings(template, self.store, "Guangzhou", random.Random("s"))
        self.assertEqual(first, second)
        self.assertEqual(len(set(first["community_name"])), 3)

    def test_fewer_results_than_requested(self):
        template = template_from_dict(SCARCE_NEAREST)
        cache = ToolCache(provider=SyntheticProvider())
        binding = sample_bindings(template, self.store, "Guangzhou", random.Random(3))
        with self.assertRaises(Rejection) as caught:
            instantiate(template, binding, self.store, cache)
        self.assertEqual(caught.exception.reason, "insufficient_tool_result")

    def test_far_walk_is_always_rejected(self):
        template = template_from_dict(FAR_WALK)
        instances, report = generate_dataset(
            [template],
            self.store,
            ToolCache(provider=SyntheticProvider()),
            cities=("Guangzhou",),
            seed=1,
            attempts=10,
        )
        self.assertEqual(instances, [])
        self.assertEqual(report.rejected["implausible_walking"], 10)


class GeneratedDatasetTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        cls.store, cls.templates, cls.instances, cls.report = build_test_dataset()

    def test_accounting(self):
        self.assertEqual(self.report.attempted, 17 * 12)
        self.assertEqual(self.report.attempted, self.report.accepted + sum(self.report.rejected.values()))
        self.assertEqual(self.report.accepted, len(self.instances))

    def test_all_question_types_present(self):
        self.assertEqual({instance.question_type for instance in self.instances}, {1, 2, 3})

    def test_ids_and_routes(self):
        ids = [instance.id for instance in self.instances]
        self.assertEqual(len(ids), len(set(ids)))
        for instance in self.instances:
            self.assertRegex(instance.id, rf"^{re.escape(instance.template_id)}-\d{{4}}$")
            expected = ("db_agent",) if instance.question_type == 1 else ("db_agent", "map_agent")
            self.assertEqual(instance.agent_route, expected)

    def test_no_implausible_or_duplicate_questions(self):
        self.assertTrue(all(plausibility_filter(instance) is None for instance in self.instances))
        questions = [instance.question for instance in self.instances]
        self.assertEqual(len(questions), len(set(questions)))

    def test_nearest_answers_have_requested_size(self):
        for instance in self.instances:
            if instance.template_id == "nearest_pois":
                requested = int(next(slot.value for slot in instance.slots if slot.slot_type == "count_limit"))
                self.assertIsInstance(instance.answer, EntitySet)
                self.assertEqual(len(instance.answer.items), requested)

    def test_every_instance_revalidates_against_frozen_cache(self):
        self.assertEqual(validate_dataset(self.instances, self.templates, self.store, ToolCache()), {})

    def test_tampered_answer_is_reported(self):
        instance = next(i for i in self.instances if i.question_type == 1)
        tampered = dataclasses.replace(instance, answer=EntitySet(("Nowhere",)))
        self.assertTrue(revalidate(tampered, self.templates, self.store, ToolCache()))

    def test_serialization_round_trip(self):
        for instance in self.instances:
            self.assertEqual(QAInstance.from_json(instance.to_json()).to_json(), instance.to_json())

    def test_generation_is_deterministic(self):
        again, _ = generate_dataset(
            self.templates.values(),
            self.store,
            ToolCache(),
            cities=("Guangzhou", "Shenzhen"),
            seed=2024,
            attempts=12,
        )
        self.assertEqual([i.to_json() for i in again], [i.to_json() for i in self.instances])

    def test_stats(self):
        stats = dataset_stats(self.instances)
        self.assertEqual(stats["utterances"], len(self.instances))
        self.assertEqual(sum(stats["per_type"].values()), len(self.instances))
        self.assertEqual(stats["single_table"] + stats["multi_table"], len(self.instances))
        self.assertEqual(stats["single_intent"] + stats["multi_intent"], len(self.instances))
        travel = [i for i in self.instances if i.template_id == "travel_time"]
        if travel:
            self.assertEqual(dataset_stats(travel[:1])["multi_table"], 1)


class SplitTests(SimpleTestCase):
    def test_strata_ratios(self):
        instances = [bare_instance("big", n) for n in range(100)] + [bare_instance("small", n) for n in range(10)]
        splits = stratified_split(instances, SplitSpec(seed=5))
        counts = {
            name: {tid: sum(1 for i in members if i.template_id == tid) for tid in ("big", "small")}
            for name, members in splits.items()
        }
        self.assertEqual(counts["train"], {"big": 80, "small": 8})
        self.assertEqual(counts["val"], {"big": 10, "small": 1})
        self.assertEqual(counts["test"], {"big": 10, "small": 1})
        ids = sorted(i.id for members in splits.values() for i in members)
        self.assertEqual(ids, sorted(i.id for i in instances))

    def test_small_stratum_goes_to_train(self):
        with self.assertLogs("qagen.split", level="WARNING"):
            splits = stratified_split([bare_instance("tiny", 0), bare_instance("tiny", 1)], SplitSpec())
        self.assertEqual(len(splits["train"]), 2)

    def test_same_seed_same_split(self):
        instances = [bare_instance("t", n) for n in range(37)]
        first = stratified_split(instances, SplitSpec(seed=9))
        second = stratified_split(list(reversed(instances)), SplitSpec(seed=9))
        self.assertEqual(
            {k: [i.id for i in v] for k, v in first.items()}, {k: [i.id for i in v] for k, v in second.items()}
        )

    def test_ratios_are_normalized(self):
        self.assertAlmostEqual(sum(SplitSpec(ratios=(80, 10, 10)).ratios), 1.0)
        with self.assertRaises(ValueError):
            SplitSpec(ratios=(1, -1, 1))


class ParaphraseTests(SimpleTestCase):
    def setUp(self):
        template = load_catalog(settings.QA_TEMPLATE_DIR)["price_compare"]
        question, slots = fill_question(
            template, {"city": ("Guangzhou",), "community_name": ("Lotus Garden", "Jade Court")}
        )
        self.instance = dataclasses.replace(bare_instance("price_compare", 0), question=question, slots=slots)

    def test_no_backend_is_identity(self):
        self.assertIs(paraphrase_hook(self.instance, None), self.instance)

    def test_rewrite_keeps_slots(self):
        backend = ScriptedBackend(
            {"qagen.paraphrase": ["In Guangzhou, does Jade Court cost more than Lotus Garden?"]}
        )
        rewritten = paraphrase_hook(self.instance, backend)
        self.assertEqual(rewritten.question, "In Guangzhou, does Jade Court cost more than Lotus Garden?")
        self.assertEqual([slot.value for slot in rewritten.slots], ["Lotus Garden", "Jade Court", "Guangzhou"])
        self.assertTrue(all(slot.matches(rewritten.question) for slot in rewritten.slots))

    def test_dropped_value_keeps_original(self):
        backend = ScriptedBackend({"qagen.paraphrase": ["Which of the two costs more in Guangzhou?"]})
        self.assertIs(paraphrase_hook(self.instance, backend), self.instance)

    def test_backend_failure_keeps_original(self):
        def fail(role, system_prompt, messages, context):
            raise BackendError("unreachable")

        with self.assertLogs("qagen.paraphrase", level="WARNING"):
            self.assertIs(paraphrase_hook(self.instance, ScriptedBackend(handler=fail)), self.instance)

    def test_relocation_prefers_longest_values(self):
        slots = list(
            fill_question(
                load_catalog(settings.QA_TEMPLATE_DIR)["price_compare"],
                {"city": ("Guangzhou",), "community_name": ("Lotus Garden", "Lotus Garden Phase 2")},
            )[1]
        )
        located = relocate_slots("Lotus Garden Phase 2 or Lotus Garden, Guangzhou?", slots)
        self.assertEqual([slot.span for slot in located], [(24, 36), (0, 20), (38, 47)])


class CommandTests(TestCase):
    def setUp(self):
        build_test_store(cities=("Guangzhou",), communities=40, pois=130)
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def test_generate_validate_split_stats(self):
        out = StringIO()
        call_command("generate", "--output", str(self.path), "--attempts", "4", "--cities", "Guangzhou", "--iob", stdout=out)
        dataset = self.path / "dataset.jsonl"
        self.assertTrue(dataset.exists())
        self.assertTrue((self.path / "iob" / "dataset.jsonl").exists())
        report = json.loads((self.path / "generation_report.json").read_text(encoding="utf-8"))
        self.assertEqual(report["attempted"], 17 * 4)

        call_command("validate", "--dataset", str(dataset), stdout=StringIO(), stderr=StringIO())
        call_command("split", "--dataset", str(dataset), stdout=StringIO())
        total = sum(len(read_jsonl(self.path / f"{name}.jsonl")) for name in ("train", "val", "test"))
        self.assertEqual(total, len(read_jsonl(dataset)))

        stats_out = StringIO()
        call_command("dataset_stats", "--dataset", str(dataset), "--json", stdout=stats_out)
        self.assertEqual(json.loads(stats_out.getvalue())["utterances"], total)

    def test_validate_reports_mismatch(self):
        call_command("generate", "--output", str(self.path), "--attempts", "3", "--cities", "Guangzhou", stdout=StringIO())
        dataset = self.path / "dataset.jsonl"
        instances = read_jsonl(dataset)
        broken = dataclasses.replace(instances[0], answer=EntitySet(("Nowhere",)))
        dataset.write_text("\n".join([broken.to_json()] + [i.to_json() for i in instances[1:]]) + "\n", encoding="utf-8")
        with self.assertRaises(CommandError) as caught:
            call_command("validate", "--dataset", str(dataset), stdout=StringIO(), stderr=StringIO())
        self.assertEqual(caught.exception.returncode, 1)

    def test_generate_requires_ingested_city(self):
        with self.assertRaises(CommandError) as caught:
            call_command("generate", "--output", str(self.path), "--cities", "Beijing", stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 2)
