import json
import random
import tempfile
from collections import Counter
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from agents.backends import ScriptedBackend
from agents.oracle import OracleBackend
from domain.instances import SlotAnnotation
from qagen.templates import load_catalog
from qagen.testing import build_test_dataset
from .exceptions import GazetteerError, UnknownStrategyError
from .fewshot import FewShotStrategy, parse_prediction, render_examples, sample_examples
from .gazetteer import Gazetteer, build_gazetteer
from .lexicon import LexiconStrategy, signatures_from_catalog, tag_slots
from .metrics import slu_metrics
from .prediction import UNKNOWN_INTENT, GoldStrategy, SluPrediction
from .strategies import build_strategy


GAZETTEER = Gazetteer(
    {
        "city": ("Guangzhou",),
        "district": ("Tianhe",),
        "community_name": ("Jade Court", "Lotus Garden", "Lotus Garden Phase 2"),
        "poi_name": ("Tianhe No.1 Primary School",),
        "poi_label": ("primary school",),
        "transport_mode": ("driving", "walking"),
    }
)


def slot(slot_type, value):
    return SlotAnnotation(slot_type, value, (0, len(value)))


class LexiconTaggingTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.templates = load_catalog(settings.QA_TEMPLATE_DIR)
        cls.strategy = LexiconStrategy(GAZETTEER, signatures_from_catalog(cls.templates.values()))

    def test_single_community_is_tagged(self):
        question = "What is the average price of Jade Court in Guangzhou?"
        prediction = self.strategy.predict(question)
        self.assertEqual(
            [(item.slot_type, item.value) for item in prediction.slots],
            [("community_name", "Jade Court"), ("city", "Guangzhou")],
        )
        prediction.check(question)
        self.assertEqual(prediction.intents, ("price_inquiry",))

    def test_no_hits_fall_back_to_unknown(self):
        prediction = self.strategy.predict("Is it going to rain tomorrow?")
        self.assertEqual(prediction.slots, ())
        self.assertEqual(prediction.intents, (UNKNOWN_INTENT,))

    def test_longest_name_wins(self):
        slots = tag_slots("What is the greening rate of Lotus Garden Phase 2 in Guangzhou?", GAZETTEER)
        self.assertIn(("community_name", "Lotus Garden Phase 2"), [(item.slot_type, item.value) for item in slots])
        self.assertNotIn("Lotus Garden", [item.value for item in slots])

    def test_poi_name_shadows_district(self):
        slots = tag_slots("How far is Tianhe No.1 Primary School?", GAZETTEER)
        self.assertEqual([(item.slot_type, item.value) for item in slots], [("poi_name", "Tianhe No.1 Primary School")])

    def test_patterns_run_before_gazetteer(self):
        question = "What is the walking distance from Lotus Garden to Tianhe No.1 Primary School in Guangzhou?"
        slots = tag_slots(question, GAZETTEER)
        self.assertEqual(slots[0], SlotAnnotation("distance_kind", "walking", (12, 19)))
        self.assertNotIn("transport_mode", [item.slot_type for item in slots])

    def test_numbers_need_their_context(self):
        question = "Which primary school facilities are within 1500 meters of Jade Court in Guangzhou?"
        slots = {(item.slot_type, item.value) for item in tag_slots(question, GAZETTEER)}
        self.assertIn(("radius", "1500"), slots)
        self.assertNotIn(("duration_limit", "1500"), slots)

    def test_word_boundaries(self):
        self.assertEqual(tag_slots("Jade Courtyard is new", GAZETTEER), ())

    def test_rush_hour_signature_beats_plain_travel_time(self):
        question = (
            "How long is the driving trip from Jade Court to Tianhe No.1 Primary School "
            "during the morning rush hour in Guangzhou?"
        )
        self.assertEqual(self.strategy.predict(question).intents, ("rush_hour_commute",))


class GazetteerFileTests(SimpleTestCase):
    def test_dump_and_load(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "gazetteer.json"
            GAZETTEER.dump(path)
            loaded = Gazetteer.load(path)
        self.assertEqual(loaded.entries, GAZETTEER.entries)
        self.assertEqual(len(loaded), 9)

    def test_unknown_slot_type_is_rejected(self):
        with self.assertRaises(GazetteerError):
            Gazetteer.from_dict({"version": 1, "entries": {"weather": ["rain"]}})

    def test_wrong_version_is_rejected(self):
        with self.assertRaises(GazetteerError):
            Gazetteer.from_dict({"version": 2, "entries": {}})

    def test_unreadable_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "broken.json"
            path.write_text("{not json", encoding="utf-8")
            with self.assertRaises(GazetteerError):
                Gazetteer.load(path)


class SluMetricsTests(SimpleTestCase):
    def test_identical_predictions_score_one(self):
        golds = [SluPrediction(("price_inquiry",), (slot("city", "Guangzhou"),))]
        scores = slu_metrics(golds, golds)
        self.assertEqual((scores.intent.f1, scores.slot.f1, scores.intent_accuracy), (1.0, 1.0, 1.0))

    def test_empty_predictions(self):
        golds = [SluPrediction(("price_inquiry",), (slot("city", "Guangzhou"),))]
        scores = slu_metrics([SluPrediction()], golds)
        self.assertEqual((scores.slot.precision, scores.slot.recall, scores.slot.f1), (0.0, 0.0, 0.0))
        self.assertEqual(scores.intent_accuracy, 0.0)

    def test_half_of_slots_correct(self):
        gold = SluPrediction(("price_inquiry",), (slot("city", "Guangzhou"), slot("community_name", "Lotus Garden")))
        predicted = SluPrediction(("price_inquiry",), (slot("city", "Guangzhou"), slot("community_name", "Jade Court")))
        scores = slu_metrics([predicted], [gold])
        self.assertEqual(scores.slot.recall, 0.5)
        self.assertEqual(scores.slot.precision, 0.5)
        self.assertEqual(scores.intent.f1, 1.0)

    def test_spans_are_ignored(self):
        gold = SluPrediction((), (SlotAnnotation("city", "Guangzhou", (30, 39)),))
        predicted = SluPrediction((), (SlotAnnotation("city", "Guangzhou", (0, 9)),))
        self.assertEqual(slu_metrics([predicted], [gold]).slot.f1, 1.0)

    def test_length_mismatch(self):
        with self.assertRaises(ValueError):
            slu_metrics([SluPrediction()], [])

    def test_matches_brute_force_tally(self):
        rng = random.Random(11)
        intents = settings.QA_INTENTS[:4]
        values = [("city", "Guangzhou"), ("city", "Shenzhen"), ("community_name", "Lotus Garden"), ("radius", "500")]

        def sample():
            return SluPrediction(
                tuple(rng.sample(intents, rng.randint(0, 2))),
                tuple(slot(*rng.choice(values)) for _ in range(rng.randint(0, 3))),
            )

        for _ in range(100):
            size = rng.randint(1, 8)
            predictions = [sample() for _ in range(size)]
            golds = [sample() for _ in range(size)]
            hits = predicted_total = gold_total = exact = 0
            intent_hits = intent_predicted = intent_gold = 0
            for prediction, gold in zip(predictions, golds):
                remaining = [(item.slot_type, item.value) for item in gold.slots]
                for item in prediction.slots:
                    if (item.slot_type, item.value) in remaining:
                        remaining.remove((item.slot_type, item.value))
                        hits += 1
                predicted_total += len(prediction.slots)
                gold_total += len(gold.slots)
                intent_hits += sum(1 for intent in set(prediction.intents) if intent in gold.intents)
                intent_predicted += len(set(prediction.intents))
                intent_gold += len(set(gold.intents))
                exact += int(sorted(set(prediction.intents)) == sorted(set(gold.intents)))
            scores = slu_metrics(predictions, golds)
            precision = hits / predicted_total if predicted_total else 0.0
            recall = hits / gold_total if gold_total else 0.0
            self.assertAlmostEqual(scores.slot.precision, precision, delta=1e-9)
            self.assertAlmostEqual(scores.slot.recall, recall, delta=1e-9)
            if intent_predicted:
                self.assertAlmostEqual(scores.intent.precision, intent_hits / intent_predicted, delta=1e-9)
            if intent_gold:
                self.assertAlmostEqual(scores.intent.recall, intent_hits / intent_gold, delta=1e-9)
            self.assertAlmostEqual(scores.intent_accuracy, exact / size, delta=1e-9)


class FewShotParsingTests(SimpleTestCase):
    question = "What is the average price of Jade Court in Guangzhou?"

    def test_fenced_json_is_parsed(self):
        text = '```json\n{"intents": ["price_inquiry"], "slots": [{"slot_type": "community_name", "value": "Jade Court"}]}\n```'
        prediction = parse_prediction(self.question, text)
        self.assertEqual(prediction.intents, ("price_inquiry",))
        self.assertEqual(prediction.slots, (SlotAnnotation("community_name", "Jade Court", (29, 39)),))

    def test_unknown_labels_are_dropped(self):
        text = json.dumps(
            {
                "intents": ["price_inquiry", "weather"],
                "slots": [{"slot_type": "mood", "value": "Jade Court"}, {"slot_type": "city", "value": "Guangzhou"}],
            }
        )
        prediction = parse_prediction(self.question, text)
        self.assertEqual(prediction.intents, ("price_inquiry",))
        self.assertEqual([item.value for item in prediction.slots], ["Guangzhou"])

    def test_value_missing_from_question(self):
        text = json.dumps({"intents": [], "slots": [{"slot_type": "city", "value": "Shenzhen"}]})
        self.assertIsNone(parse_prediction(self.question, text))

    def test_malformed_reply_gives_empty_prediction(self):
        strategy = FewShotStrategy(ScriptedBackend({"slu.fewshot": ["I think it is about prices."]}), ())
        with self.assertLogs("slu.fewshot", "WARNING"):
            prediction = strategy.predict(self.question)
        self.assertEqual(prediction, SluPrediction())


class StrategyFactoryTests(SimpleTestCase):
    def test_unknown_name(self):
        with self.assertRaises(UnknownStrategyError):
            build_strategy("bert")

    def test_missing_dependencies(self):
        with self.assertRaises(ValueError):
            build_strategy("lexicon")
        with self.assertRaises(ValueError):
            build_strategy("fewshot")

    def test_gold_needs_instance(self):
        with self.assertRaises(ValueError):
            GoldStrategy().predict("What is the average price of Jade Court in Guangzhou?")


class GeneratedDatasetTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        cls.store, cls.templates, cls.instances, cls.report = build_test_dataset(cities=("Guangzhou",), attempts=4)
        cls.gazetteer = build_gazetteer()

    def test_gazetteer_covers_gold_values(self):
        known = {(slot_type, value) for slot_type, values in self.gazetteer.entries.items() for value in values}
        numeric = {slot_type for slot_type, _ in settings.SLU_PATTERNS}
        for instance in self.instances:
            for item in instance.slots:
                if item.slot_type not in numeric:
                    self.assertIn((item.slot_type, item.value), known, instance.id)

    def test_lexicon_meets_baseline(self):
        strategy = build_strategy("lexicon", gazetteer=self.gazetteer, templates=self.templates)
        predictions = []
        for instance in self.instances:
            prediction = strategy.predict(instance.question)
            prediction.check(instance.question)
            predictions.append(prediction)
        scores = slu_metrics(predictions, self.instances)
        self.assertGreaterEqual(scores.slot.f1, 0.95)
        self.assertGreaterEqual(scores.intent_accuracy, 0.95)

    def test_fewshot_echo_equals_gold(self):
        examples = sample_examples(self.instances, seed=3)
        strategy = build_strategy("fewshot", backend=OracleBackend(self.templates), examples=examples)
        for instance in self.instances:
            prediction = strategy.predict(instance.question, instance)
            self.assertEqual(prediction.intents, instance.intents, instance.id)
            self.assertEqual(prediction.slots, tuple(sorted(instance.slots, key=lambda item: item.span)), instance.id)

    def test_examples_cover_every_intent(self):
        examples = sample_examples(self.instances, k=12, seed=5)
        pool_intents = {intent for instance in self.instances for intent in instance.intents}
        self.assertEqual({intent for example in examples for intent in example.intents}, pool_intents)
        self.assertGreaterEqual(len(examples), min(12, len(self.instances)))
        self.assertEqual(examples, sample_examples(self.instances, k=12, seed=5))
        self.assertIn(examples[0].question, render_examples(examples))

    def test_examples_default_size(self):
        examples = sample_examples(self.instances)
        self.assertEqual(len(examples), min(len(self.instances), settings.SLU_FEWSHOT_EXAMPLES))
        self.assertEqual(len(Counter(example.id for example in examples)), len(examples))

    def test_gazetteer_command(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "gazetteer.json"
            out = StringIO()
            call_command("gazetteer", dump=path, stdout=out)
            self.assertEqual(Gazetteer.load(path).entries, self.gazetteer.entries)
            call_command("gazetteer", load=path, stdout=out)
            self.assertIn(f"{len(self.gazetteer)} entries", out.getvalue())
            broken = Path(directory) / "broken.json"
            broken.write_text('{"version": 9}', encoding="utf-8")
            with self.assertRaises(CommandError) as caught:
                call_command("gazetteer", load=broken, stdout=StringIO())
            self.assertEqual(caught.exception.returncode, 1)

    def test_score_command(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "test.jsonl"
            path.write_text("".join(instance.to_json() + "\n" for instance in self.instances), encoding="utf-8")
            out = StringIO()
            call_command("slu_score", dataset=path, stdout=out)
        scores = json.loads(out.getvalue())
        self.assertGreaterEqual(scores["slot"]["f1"], 0.95)
