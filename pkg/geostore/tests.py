import csv
import random
import tempfile
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase
from rest_framework import status
from rest_framework.test import APITestCase

from domain.geo import GeoPoint, haversine
from .config import StoreConfig
from .coordinates import extract_coordinates
from .exceptions import IngestionError, SqlExecutionError, WriteProtectionError
from .fixtures import COMMUNITY_COLUMNS, POI_COLUMNS, fixture_path, make_fixture
from .ingestion import build_proximity_pairs, ingest_fixture
from .models import CommunityPair, PoiCommunityPair
from .store import GeoStore
from .testing import build_test_store


def community_row(identifier, name, latitude, longitude, **extra):
    row = {
        "id": identifier,
        "name": name,
        "district": "Tianhe",
        "address": "1 Zhongshan Road",
        "latitude": latitude,
        "longitude": longitude,
        "greening_rate": 30.0,
        "avg_price": 40000,
        "property_type": "residential",
        "sales_status": "on_sale",
    }
    row.update(extra)
    return row


def write_rows(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="") as stream:
        writer = csv.DictWriter(stream, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


class HandPlacedFixtureTests(TestCase):
    """Маленькие фикстуры с известной геометрией"""

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name)
        self.config = StoreConfig(cities=("Guangzhou",))

    def tearDown(self):
        self.directory.cleanup()

    def write(self, communities, pois=()):
        write_rows(fixture_path(self.path, "community", "Guangzhou"), COMMUNITY_COLUMNS, communities)
        write_rows(fixture_path(self.path, "poi", "Guangzhou"), POI_COLUMNS, list(pois))

    def test_two_communities_500m_apart(self):
        # 500 м к северу: 500 / 111195 градуса широты
        self.write(
            [
                community_row("c1", "Lotus Garden", 23.1, 113.3),
                community_row("c2", "Jade Court", 23.1 + 500 / 111_195, 113.3),
            ]
        )
        store = ingest_fixture(self.config, self.path)
        counts = build_proximity_pairs(self.config)
        self.assertEqual(counts["community_community"], 2)
        self.assertEqual(CommunityPair.objects.count(), 2)
        result = store.execute_sql(
            "SELECT community_name, neighbor_name, straight_distance FROM community_community_guangzhou "
            "ORDER BY community_name"
        )
        self.assertEqual(result.columns, ("community_name", "neighbor_name", "straight_distance"))
        self.assertEqual([row[:2] for row in result.rows], [("Jade Court", "Lotus Garden"), ("Lotus Garden", "Jade Court")])
        self.assertEqual(result.rows[0][2], 500)

    def test_poi_beyond_radius_is_excluded(self):
        self.write(
            [community_row("c1", "Lotus Garden", 23.1, 113.3)],
            [
                {
                    "id": "p1",
                    "name": "Tianhe No.1 City Park",
                    "category": "park",
                    "label": "city park",
                    "latitude": 23.1 + 3001 / 111_195,
                    "longitude": 113.3,
                }
            ],
        )
        ingest_fixture(self.config, self.path)
        counts = build_proximity_pairs(self.config)
        self.assertEqual(counts["poi_community"], 0)

    def test_empty_poi_file(self):
        self.write([community_row("c1", "Lotus Garden", 23.1, 113.3)])
        store = ingest_fixture(self.config, self.path)
        self.assertEqual(store.execute_sql("SELECT * FROM poi_guangzhou").rows, ())
        self.assertEqual(store.execute_sql("SELECT * FROM poi_community_guangzhou").rows, ())
        self.assertEqual(len(store.list_captions()), 4)

    def test_malformed_latitude(self):
        self.write([community_row("c1", "Lotus Garden", 95.0, 113.3)])
        with self.assertRaises(IngestionError) as caught:
            ingest_fixture(self.config, self.path)
        self.assertEqual(caught.exception.line, 2)
        self.assertIn("community_guangzhou.csv", str(caught.exception))

    def test_label_outside_category(self):
        self.write(
            [community_row("c1", "Lotus Garden", 23.1, 113.3)],
            [{"id": "p1", "name": "X", "category": "park", "label": "bus stop", "latitude": 23.1, "longitude": 113.3}],
        )
        with self.assertRaises(IngestionError):
            ingest_fixture(self.config, self.path)

    def test_duplicate_id(self):
        self.write(
            [
                community_row("c1", "Lotus Garden", 23.1, 113.3),
                community_row("c1", "Jade Court", 23.2, 113.3),
            ]
        )
        with self.assertRaises(IngestionError) as caught:
            ingest_fixture(self.config, self.path)
        self.assertEqual(caught.exception.line, 3)


class SyntheticStoreTests(TestCase):
    @classmethod
    def setUpTestData(cls):
        cls.store = build_test_store()

    def test_catalog(self):
        captions = self.store.list_captions()
        self.assertEqual(len(captions), 8)
        self.assertEqual(captions[0].caption, "Table for Communities in Guangzhou")
        self.assertEqual(captions[2].caption, "Table for Communities around POIs in Guangzhou")
        self.assertEqual([caption.city for caption in captions], ["Guangzhou"] * 4 + ["Shenzhen"] * 4)
        self.assertEqual(captions, self.store.list_captions())
        self.assertEqual(len({caption.caption for caption in captions}), 8)

    def test_count_matches_ingestion(self):
        result = self.store.execute_sql("SELECT COUNT(*) FROM community_shenzhen")
        self.assertEqual(result.rows, ((60,),))

    def test_missing_table(self):
        with self.assertRaises(SqlExecutionError) as caught:
            self.store.execute_sql("SELECT * FROM community_atlantis")
        self.assertIn("no such table", caught.exception.message)

    def test_write_protection(self):
        for statement in (
            "DELETE FROM geostore_community",
            "DROP VIEW community_guangzhou",
            "SELECT 1; SELECT 2",
            "INSERT INTO geostore_poi (poi_id) VALUES ('x')",
        ):
            with self.assertRaises(WriteProtectionError):
                self.store.execute_sql(statement)
        self.assertEqual(self.store.execute_sql("SELECT COUNT(*) FROM community_guangzhou").rows, ((60,),))

    def test_pairs_match_brute_force(self):
        config = StoreConfig(cities=("Guangzhou",))
        communities = self.store.execute_sql("SELECT id, latitude, longitude FROM community_guangzhou").rows
        pois = self.store.execute_sql("SELECT id, latitude, longitude FROM poi_guangzhou").rows
        expected_poi = {
            (poi[0], community[0])
            for poi in pois
            for community in communities
            if haversine(GeoPoint(poi[1], poi[2]), GeoPoint(community[1], community[2])) <= config.poi_pairing_radius
        }
        expected_neighbors = {
            (left[0], right[0])
            for left in communities
            for right in communities
            if left[0] != right[0]
            and haversine(GeoPoint(left[1], left[2]), GeoPoint(right[1], right[2])) <= config.community_pairing_radius
        }
        actual_poi = set(
            self.store.execute_sql("SELECT poi_id, community_id FROM poi_community_guangzhou").rows
        )
        actual_neighbors = set(
            self.store.execute_sql("SELECT community_id, neighbor_id FROM community_community_guangzhou").rows
        )
        self.assertEqual(actual_poi, expected_poi)
        self.assertEqual(actual_neighbors, expected_neighbors)
        self.assertEqual(
            PoiCommunityPair.objects.filter(city="Guangzhou").count(), len(expected_poi)
        )

    def test_coordinate_extraction(self):
        result = self.store.execute_sql("SELECT name, latitude, longitude FROM community_guangzhou LIMIT 2")
        coordinates = extract_coordinates(result.columns, result.rows)
        self.assertEqual(len(coordinates), 2)
        self.assertEqual(set(coordinates), {row[0] for row in result.rows})

    def test_no_coordinate_columns(self):
        result = self.store.execute_sql("SELECT name, avg_price FROM community_guangzhou LIMIT 2")
        self.assertEqual(extract_coordinates(result.columns, result.rows), {})


class FixtureTests(TestCase):
    def test_fixture_is_deterministic(self):
        config = StoreConfig(cities=("Guangzhou",), communities_per_city=30, pois_per_city=20)
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
            make_fixture(config, Path(first))
            make_fixture(config, Path(second))
            for family in ("community", "poi"):
                self.assertEqual(
                    fixture_path(Path(first), family, "Guangzhou").read_bytes(),
                    fixture_path(Path(second), family, "Guangzhou").read_bytes(),
                )

    def test_hundred_entity_fixture_against_brute_force(self):
        rng = random.Random(100)
        config = StoreConfig(cities=("Guangzhou",))
        with tempfile.TemporaryDirectory() as directory:
            rows = [
                community_row(f"c{index}", f"Community {index}", 23.1 + rng.uniform(-0.02, 0.02), 113.3 + rng.uniform(-0.02, 0.02))
                for index in range(100)
            ]
            write_rows(fixture_path(Path(directory), "community", "Guangzhou"), COMMUNITY_COLUMNS, rows)
            write_rows(fixture_path(Path(directory), "poi", "Guangzhou"), POI_COLUMNS, [])
            ingest_fixture(config, Path(directory))
        counts = build_proximity_pairs(config)
        points = [GeoPoint(float(row["latitude"]), float(row["longitude"])) for row in rows]
        expected = sum(
            1
            for i, left in enumerate(points)
            for j, right in enumerate(points)
            if i != j and haversine(left, right) <= 1000
        )
        self.assertEqual(counts["community_community"], expected)


class CommandTests(TestCase):
    def test_ingest_missing_directory(self):
        with self.assertRaises(CommandError) as caught:
            call_command("ingest", source="/nonexistent/fixtures")
        self.assertEqual(caught.exception.returncode, 2)

    def test_fixture_ingest_pairs(self):
        with tempfile.TemporaryDirectory() as directory:
            call_command("make_fixture", output=directory, cities="Shenzhen", communities=10, pois=13)
            call_command("ingest", source=directory, cities="Shenzhen")
        call_command("pairs", cities="Shenzhen")
        self.assertEqual(GeoStore().execute_sql("SELECT COUNT(*) FROM poi_shenzhen").rows, ((13,),))


class StoreApiTests(APITestCase):
    @classmethod
    def setUpTestData(cls):
        build_test_store(cities=("Guangzhou",), communities=10, pois=13)

    def test_captions(self):
        response = self.client.get("/store/captions/")
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data), 4)
        self.assertEqual(response.data[1]["caption"], "Table for POIs in Guangzhou")

    def test_sql(self):
        response = self.client.post("/store/sql/", {"statement": "SELECT COUNT(*) AS n FROM poi_guangzhou"}, format="json")
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data, {"columns": ["n"], "rows": [[13]]})

    def test_sql_rejects_writes(self):
        response = self.client.post("/store/sql/", {"statement": "DELETE FROM geostore_poi"}, format="json")
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn("detail", response.data)
