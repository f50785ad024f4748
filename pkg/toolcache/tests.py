import random
import tempfile
from pathlib import Path

from django.test import TestCase
from rest_framework import status
from rest_framework.test import APITestCase

from domain.answers import Distance, Duration
from domain.geo import GeoPoint, haversine
from geostore.models import Poi
from geostore.testing import build_test_store
from .calls import make_request
from .exceptions import CacheMissError, InvalidParamsError
from .models import CacheEntry
from .population import populate_cache
from .providers import SyntheticProvider
from .service import ToolCache, dump_cache, load_cache


ORIGIN = GeoPoint(23.1291, 113.2644)
# 1000 м к северу от ORIGIN
NORTH_KM = GeoPoint(round(23.1291 + 1000 / 111_194.93, 6), 113.2644)


def random_pairs(count, seed=11, min_distance=100.0):
    rng = random.Random(seed)
    pairs = []
    while len(pairs) < count:
        a = GeoPoint(round(rng.uniform(22.4, 23.4), 6), round(rng.uniform(113.0, 114.3), 6))
        b = GeoPoint(round(rng.uniform(22.4, 23.4), 6), round(rng.uniform(113.0, 114.3), 6))
        if haversine(a, b) >= min_distance:
            pairs.append((a, b))
    return pairs


class RequestNormalizationTests(TestCase):
    def test_coordinates_rounded_and_modes_lowercased(self):
        request = make_request(
            "time_query",
            {"origin": [23.12345678, 113.1], "destination": "23.2,113.2", "mode": " Walking "},
        )
        self.assertEqual(request.params["origin"], [23.123457, 113.1])
        self.assertEqual(request.params["mode"], "walking")
        self.assertEqual(request.time_bucket, "midnight_00")

    def test_transit_at_midnight_is_rekeyed(self):
        request = make_request(
            "time_query", {"origin": [23.1, 113.1], "destination": [23.2, 113.2], "mode": "transit"}
        )
        self.assertEqual(request.time_bucket, "offpeak_15")

    def test_rush_hour_forces_peak(self):
        request = make_request(
            "rush_hour_query",
            {"origin": [23.1, 113.1], "destination": [23.2, 113.2], "mode": "driving", "time_bucket": "midnight_00"},
        )
        self.assertEqual(request.time_bucket, "peak_08")

    def test_equivalent_params_share_a_key(self):
        first = make_request("surrounding_pois_query", {"center": [23.1, 113.1], "radius": 3000, "label": "Bus Stop"})
        second = make_request("surrounding_pois_query", {"center": "23.1000000001,113.1", "radius": 3000.0, "label": "bus stop"})
        self.assertEqual(first.key, second.key)

    def test_invalid_params(self):
        with self.assertRaises(InvalidParamsError):
            make_request("rush_hour_query", {"origin": [23.1, 113.1], "destination": [23.2, 113.2], "mode": "walking"})
        with self.assertRaises(InvalidParamsError):
            make_request("surrounding_pois_query", {"center": [23.1, 113.1], "radius": 500, "label": "volcano"})
        with self.assertRaises(InvalidParamsError):
            make_request("surrounding_pois_query", {"center": [23.1, 113.1], "radius": 0, "label": "bus stop"})
        with self.assertRaises(InvalidParamsError):
            make_request("time_query", {"origin": [95, 113.1], "destination": [23.2, 113.2], "mode": "walking"})
        with self.assertRaises(InvalidParamsError):
            make_request("teleport_query", {})


class SyntheticProviderTests(TestCase):
    def setUp(self):
        self.cache = ToolCache(provider=SyntheticProvider())

    def test_zero_distance(self):
        for mode in ("walking", "cycling", "driving", "transit"):
            self.assertEqual(self.cache.time_query(ORIGIN, ORIGIN, mode), Duration(0))
        for kind in ("straight", "walking", "driving"):
            self.assertEqual(self.cache.distance_query(ORIGIN, ORIGIN, kind), Distance(0))
        self.assertEqual(self.cache.rush_hour_query(ORIGIN, ORIGIN, "driving"), Duration(0))

    def test_walking_1300m_path(self):
        self.assertEqual(self.cache.time_query(ORIGIN, NORTH_KM, "walking"), Duration(936))

    def test_replay_is_byte_identical(self):
        _, first = self.cache.call("time_query", {"origin": ORIGIN.as_list(), "destination": NORTH_KM.as_list(), "mode": "driving"})
        _, second = ToolCache().call("time_query", {"origin": ORIGIN.as_list(), "destination": NORTH_KM.as_list(), "mode": "driving"})
        self.assertEqual(first, second)
        self.assertEqual(CacheEntry.objects.count(), 1)

    def test_straight_is_haversine(self):
        distance = self.cache.distance_query(ORIGIN, NORTH_KM, "straight")
        self.assertEqual(distance.meters, round(haversine(ORIGIN, NORTH_KM)))

    def test_path_distances_not_shorter_than_straight(self):
        provider = SyntheticProvider()
        for a, b in random_pairs(1000):
            rows = {}
            for kind in ("straight", "walking", "driving"):
                request = make_request("distance_query", {"origin": a.as_list(), "destination": b.as_list(), "kind": kind})
                rows[kind] = provider.resolve(request)["rows"][0][0]
            self.assertGreaterEqual(rows["walking"], rows["straight"])
            self.assertGreaterEqual(rows["driving"], rows["straight"])

    def test_peak_driving_is_slower(self):
        provider = SyntheticProvider()
        for a, b in random_pairs(1000, seed=5):
            params = {"origin": a.as_list(), "destination": b.as_list(), "mode": "driving"}
            peak = provider.resolve(make_request("rush_hour_query", params))["rows"][0][0]
            offpeak = provider.resolve(make_request("time_query", params))["rows"][0][0]
            self.assertGreater(peak, offpeak)

    def test_transit_overhead(self):
        self.assertGreater(self.cache.time_query(ORIGIN, NORTH_KM, "transit").seconds, 300)

    def test_recorded_at_is_bucket_time(self):
        self.cache.rush_hour_query(ORIGIN, NORTH_KM, "transit")
        entry = CacheEntry.objects.get()
        self.assertEqual(entry.recorded_at, "2025-03-12T08:00:00+08:00")
        self.assertEqual(entry.provider_name, "synthetic-v1")

    def test_frozen_cache_miss(self):
        with self.assertRaises(CacheMissError):
            ToolCache().time_query(ORIGIN, NORTH_KM, "cycling")


class SurroundingPoisTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        build_test_store(cities=("Guangzhou",), communities=20, pois=52)

    def setUp(self):
        self.cache = ToolCache(provider=SyntheticProvider())

    def test_tiny_radius_in_empty_area(self):
        self.assertEqual(self.cache.surrounding_pois_query(GeoPoint(0.5, -30.0), 0.5, "bus stop"), [])

    def test_matches_brute_force_scan(self):
        center = GeoPoint(23.1291, 113.2644)
        for label in ("primary school", "bus stop", "city park"):
            found = self.cache.surrounding_pois_query(center, 7000, label)
            expected = sorted(
                (round(haversine(center, GeoPoint(poi.latitude, poi.longitude))), poi.name)
                for poi in Poi.objects.filter(label=label)
                if round(haversine(center, GeoPoint(poi.latitude, poi.longitude))) <= 7000
            )
            self.assertEqual([(item.straight_distance, item.name) for item in found], expected)
            self.assertTrue(all(item.label == label for item in found))
            self.assertTrue(all(item.straight_distance <= 7000 for item in found))


class PopulationTests(TestCase):
    def corpus(self):
        requests = []
        for a, b in random_pairs(7, seed=3):
            requests.append(("time_query", {"origin": a.as_list(), "destination": b.as_list(), "mode": "walking"}))
        return requests + requests[:3]

    def test_duplicates_resolved_once(self):
        report = populate_cache(SyntheticProvider(), self.corpus())
        self.assertEqual(report.requested, 10)
        self.assertEqual(report.unique, 7)
        self.assertEqual(report.created, 7)
        self.assertEqual(CacheEntry.objects.count(), 7)

        again = populate_cache(SyntheticProvider(), self.corpus())
        self.assertEqual(again.created, 0)
        self.assertEqual(again.existing, 7)
        self.assertEqual(CacheEntry.objects.count(), 7)

    def test_from_scratch_populations_are_byte_identical(self):
        with tempfile.TemporaryDirectory() as directory:
            first, second = Path(directory) / "a.jsonl", Path(directory) / "b.jsonl"
            populate_cache(SyntheticProvider(), self.corpus())
            dump_cache(first)
            CacheEntry.objects.all().delete()
            populate_cache(SyntheticProvider(), list(reversed(self.corpus())))
            dump_cache(second)
            self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_reload_yields_identical_lookups(self):
        populate_cache(SyntheticProvider(), self.corpus())
        before = [ToolCache().call(*item)[1] for item in self.corpus()]
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "cache.jsonl"
            dump_cache(path)
            CacheEntry.objects.all().delete()
            self.assertEqual(load_cache(path), 7)
        after = [ToolCache().call(*item)[1] for item in self.corpus()]
        self.assertEqual(before, after)

    def test_invalid_request_is_reported(self):
        report = populate_cache(SyntheticProvider(), [("time_query", {"mode": "walking"})])
        self.assertEqual(len(report.failed), 1)
        self.assertFalse(report.complete)

    def test_frozen_replay_is_stable(self):
        corpus = self.corpus()
        populate_cache(SyntheticProvider(), corpus)
        cache = ToolCache()
        expected = [cache.call(*item)[1] for item in corpus]
        for index in range(10_000):
            item = corpus[index % len(corpus)]
            self.assertEqual(cache.call(*item)[1], expected[index % len(corpus)])

    def test_memo_keeps_only_recent_entries(self):
        corpus = self.corpus()
        populate_cache(SyntheticProvider(), corpus)
        cache = ToolCache(memo_size=3)
        expected = [ToolCache().call(*item)[1] for item in corpus]
        for _ in range(3):
            for item, payload in zip(corpus, expected):
                self.assertEqual(cache.call(*item)[1], payload)
                self.assertLessEqual(cache.memo_len, 3)
        self.assertEqual(cache.memo_len, 3)
        self.assertEqual(cache.misses, 0)

    def test_recently_used_entry_survives_eviction(self):
        corpus = self.corpus()[:7]
        populate_cache(SyntheticProvider(), corpus)
        cache = ToolCache(memo_size=2)
        first, _ = cache.call(*corpus[0])
        cache.call(*corpus[1])
        cache.call(*corpus[0])
        cache.call(*corpus[2])
        self.assertIn(first.key, cache._memo)
        self.assertNotIn(make_request(*corpus[1]).key, cache._memo)

    def test_providers_agree_without_configuration(self):
        for a, b in random_pairs(20, seed=5):
            request = make_request("time_query", {"origin": a.as_list(), "destination": b.as_list(), "mode": "driving"})
            self.assertEqual(SyntheticProvider().resolve(request), SyntheticProvider().resolve(request))
        with self.assertRaises(TypeError):
            SyntheticProvider(seed=1)


class ToolApiTests(APITestCase):
    def setUp(self):
        ToolCache(provider=SyntheticProvider()).time_query(ORIGIN, NORTH_KM, "walking")

    def test_replay(self):
        response = self.client.get(
            "/tools/time/",
            {"origin": "23.1291,113.2644", "destination": f"{NORTH_KM.latitude},{NORTH_KM.longitude}", "mode": "walking"},
        )
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data["rows"], [[936]])
        self.assertEqual(response.data["columns"], ["duration_s"])

    def test_miss(self):
        response = self.client.get(
            "/tools/rush-hour/", {"origin": "23.1,113.2", "destination": "23.2,113.3", "mode": "transit"}
        )
        self.assertEqual(response.status_code, status.HTTP_404_NOT_FOUND)

    def test_invalid(self):
        response = self.client.get("/tools/distance/", {"origin": "23.1,113.2", "kind": "straight"})
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
