from math import acos, cos, pi, radians, sin

from django.test import SimpleTestCase

from .answers import (
    Boolean,
    Distance,
    Duration,
    EntitySet,
    Number,
    Text,
    answer_equal,
    answer_from_dict,
    answer_items,
    render_answer,
)
from .dataset import iob_tags, tokenize
from .geo import AVERAGE_EARTH_RADIUS, GeoPoint, haversine
from .instances import QAInstance, SlotAnnotation, SqlStep, ToolStep
from .synthesis import InconclusiveError, Item, RuleKind, SynthesisRule, synthesize


def cosine_law(a: GeoPoint, b: GeoPoint) -> float:
    lat1, lon1, lat2, lon2 = map(radians, [a.latitude, a.longitude, b.latitude, b.longitude])
    value = sin(lat1) * sin(lat2) + cos(lat1) * cos(lat2) * cos(lon2 - lon1)
    return AVERAGE_EARTH_RADIUS * acos(max(-1.0, min(1.0, value)))


def make_instance(**overrides) -> QAInstance:
    question = "What is the average price of Lotus Garden in Guangzhou?"
    fields = dict(
        id="price_lookup-0000",
        template_id="price_lookup",
        city="Guangzhou",
        question=question,
        question_type=1,
        intents=("price_inquiry",),
        slots=(
            SlotAnnotation("community_name", "Lotus Garden", (29, 41)),
            SlotAnnotation("city", "Guangzhou", (45, 54)),
        ),
        sql_trace=(
            SqlStep(
                "SELECT avg_price FROM community_guangzhou WHERE name = 'Lotus Garden'",
                ("avg_price",),
                ((41250,),),
            ),
        ),
        tool_trace=(),
        agent_route=("db_agent",),
        answer=Number(41250, "cny_per_sqm"),
        nl_answer="41250",
    )
    fields.update(overrides)
    return QAInstance(**fields)


class GeoTests(SimpleTestCase):
    def test_identical_points(self):
        point = GeoPoint(23.13, 113.26)
        self.assertEqual(haversine(point, point), 0)

    def test_one_degree_of_longitude_on_equator(self):
        distance = haversine(GeoPoint(0, 0), GeoPoint(0, 1))
        self.assertAlmostEqual(distance, AVERAGE_EARTH_RADIUS * pi / 180, places=6)
        self.assertAlmostEqual(distance, 111_195, delta=1)

    def test_matches_spherical_cosine_law(self):
        a, b = GeoPoint(23.13, 113.26), GeoPoint(23.14, 113.27)
        self.assertAlmostEqual(haversine(a, b), cosine_law(a, b), delta=0.1)
        self.assertEqual(haversine(a, b), haversine(b, a))

    def test_invalid_latitude(self):
        with self.assertRaises(ValueError):
            GeoPoint(95.0, 10.0)

    def test_from_value(self):
        self.assertEqual(GeoPoint.from_value("23.1,113.2"), GeoPoint(23.1, 113.2))
        self.assertEqual(GeoPoint.from_value([23.1, 113.2]), GeoPoint(23.1, 113.2))
        with self.assertRaises(ValueError):
            GeoPoint.from_value("nowhere")


class AnswerTests(SimpleTestCase):
    def test_entity_set_is_order_insensitive(self):
        self.assertTrue(answer_equal(EntitySet(("A", "B")), EntitySet(("B", "A"))))
        self.assertTrue(answer_equal(EntitySet((" A  Park",)), EntitySet(("A Park",))))

    def test_entity_set_cardinality(self):
        self.assertFalse(answer_equal(EntitySet(("A", "B")), EntitySet(("A",))))
        self.assertFalse(answer_equal(EntitySet(("A", "A")), EntitySet(("A",))))

    def test_cross_variant_is_false(self):
        self.assertFalse(answer_equal(Number(3, "count"), EntitySet(("A", "B", "C"))))
        self.assertFalse(answer_equal(Duration(60), Distance(60)))

    def test_units_are_normalized(self):
        self.assertTrue(answer_equal(Number(1.5, "km"), Number(1500, "m")))
        self.assertTrue(answer_equal(Number(3, "count"), Number(3.0, "items")))
        self.assertFalse(answer_equal(Number(3, "count"), Number(3, "percent")))

    def test_unanswerable(self):
        self.assertFalse(answer_equal(None, Boolean(True)))

    def test_reflexive_and_symmetric(self):
        answers = [EntitySet(("A",)), Number(2, "count"), Duration(5), Distance(7), Boolean(False), Text("x")]
        for left in answers:
            self.assertTrue(answer_equal(left, left))
            for right in answers:
                self.assertEqual(answer_equal(left, right), answer_equal(right, left))

    def test_nan_is_equal_to_itself(self):
        nan = float("nan")
        self.assertTrue(answer_equal(Number(nan, "count"), Number(nan, "count")))
        self.assertTrue(answer_equal(Duration(nan), Duration(nan)))
        self.assertFalse(answer_equal(Number(nan, "count"), Number(3, "count")))
        self.assertFalse(answer_equal(Number(nan, "count"), Number(nan, "percent")))
        self.assertEqual(answer_items(Number(nan, "count")), answer_items(Number(nan, "count")))

    def test_invariants(self):
        with self.assertRaises(ValueError):
            EntitySet(())
        with self.assertRaises(ValueError):
            Duration(-1)

    def test_from_dict(self):
        self.assertEqual(answer_from_dict({"kind": "distance", "meters": 10}), Distance(10))
        with self.assertRaises(ValueError):
            answer_from_dict({"kind": "colour"})

    def test_render(self):
        self.assertEqual(render_answer(Duration(936)), "15 min 36 s")
        self.assertEqual(render_answer(EntitySet(("A", "B"))), "A, B")


class InstanceTests(SimpleTestCase):
    def test_serialization_is_bit_identical(self):
        instance = make_instance()
        line = instance.to_json()
        restored = QAInstance.from_json(line)
        self.assertEqual(restored, instance)
        self.assertEqual(restored.to_json(), line)

    def test_tool_instance_round_trip(self):
        step = ToolStep(
            "time_query",
            {"origin": [23.1, 113.2], "destination": [23.2, 113.3], "mode": "walking", "time_bucket": "midnight_00"},
            {"columns": ["duration_s"], "rows": [[936]]},
        )
        instance = make_instance(question_type=2, tool_trace=(step,), agent_route=("db_agent", "map_agent"))
        self.assertEqual(QAInstance.from_json(instance.to_json()).to_json(), instance.to_json())

    def test_type_one_has_no_tools(self):
        step = ToolStep("rush_hour_query", {}, {"columns": ["duration_s"], "rows": [[1]]})
        with self.assertRaises(ValueError):
            make_instance(tool_trace=(step,))

    def test_type_two_needs_tools(self):
        with self.assertRaises(ValueError):
            make_instance(question_type=2)

    def test_sql_trace_required(self):
        with self.assertRaises(ValueError):
            make_instance(sql_trace=())

    def test_slot_must_match_question(self):
        with self.assertRaises(ValueError):
            make_instance(slots=(SlotAnnotation("city", "Shenzhen", (45, 53)),))

    def test_slots_must_not_overlap(self):
        with self.assertRaises(ValueError):
            make_instance(
                slots=(
                    SlotAnnotation("community_name", "Lotus Garden", (29, 41)),
                    SlotAnnotation("poi_name", "Garden", (35, 41)),
                )
            )


class IobTests(SimpleTestCase):
    def test_tags(self):
        instance = make_instance()
        tagged = dict(iob_tags(instance.question, instance.slots))
        self.assertEqual(tagged["Lotus"], "B-community_name")
        self.assertEqual(tagged["Garden"], "I-community_name")
        self.assertEqual(tagged["Guangzhou"], "B-city")
        self.assertEqual(tagged["price"], "O")

    def test_tokenize_offsets(self):
        text = "Bao'an, 3 km?"
        for token, start, end in tokenize(text):
            self.assertEqual(text[start:end], token)


class SynthesisTests(SimpleTestCase):
    def durations(self):
        return [Item("A", 600, "duration"), Item("B", 900, "duration"), Item("C", 450, "duration")]

    def test_argmin(self):
        rule = SynthesisRule(RuleKind.ARGMIN)
        self.assertEqual(synthesize(rule, self.durations()), EntitySet(("C",)))
        self.assertEqual(synthesize(rule, list(reversed(self.durations()))), EntitySet(("C",)))

    def test_ties_by_label(self):
        items = [Item("B", 5, "distance"), Item("A", 5, "distance")]
        self.assertEqual(synthesize(SynthesisRule("argmax"), items), EntitySet(("A",)))

    def test_passthrough_scalar(self):
        self.assertEqual(synthesize(SynthesisRule("passthrough"), [Item("x", 1234, "distance")]), Distance(1234))

    def test_passthrough_limit(self):
        items = [Item("P1", 10, "distance"), Item("P2", 20, "distance")]
        self.assertEqual(synthesize(SynthesisRule("passthrough", limit=1), items), EntitySet(("P1",)))
        with self.assertRaises(InconclusiveError):
            synthesize(SynthesisRule("passthrough", limit=3), items)

    def test_count_and_threshold(self):
        self.assertEqual(synthesize(SynthesisRule("count"), self.durations()), Number(3, "count"))
        rule = SynthesisRule("threshold_filter", op="<=", bound=600)
        self.assertEqual(synthesize(rule, self.durations()), EntitySet(("A", "C")))
        with self.assertRaises(InconclusiveError):
            synthesize(SynthesisRule("threshold_filter", op="<", bound=1), self.durations())

    def test_compare(self):
        rule = SynthesisRule("compare", op="difference")
        items = [Item("peak", 1500, "duration"), Item("offpeak", 900, "duration")]
        self.assertEqual(synthesize(rule, items), Duration(600))
        rule = SynthesisRule("compare", op="<=", bound=900)
        self.assertEqual(synthesize(rule, [Item("walk", 936, "duration")]), Boolean(False))

    def test_empty_is_inconclusive(self):
        with self.assertRaises(InconclusiveError):
            synthesize(SynthesisRule("argmin"), [])

    def test_rule_round_trip(self):
        rule = SynthesisRule("threshold_filter", op="<=", bound=900.0)
        self.assertEqual(SynthesisRule.from_dict(rule.to_dict()), rule)
