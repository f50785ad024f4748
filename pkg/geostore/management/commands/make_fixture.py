from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from geostore.config import StoreConfig
from geostore.fixtures import make_fixture


def parse_cities(value):
    if not value:
        return None
    return tuple(city.strip() for city in value.split(",") if city.strip())


class Command(BaseCommand):
    help = "Пишет синтетические CSV-фикстуры комплексов и POI для каждого города"

    def add_arguments(self, parser):
        parser.add_argument("--cities", help="Города через запятую (по умолчанию QA_CITIES)")
        parser.add_argument("--output", type=Path, default=None, help="Каталог фикстур")
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--communities", type=int, default=None, help="Комплексов на город")
        parser.add_argument("--pois", type=int, default=None, help="POI на город")

    def handle(self, *args, **options):
        try:
            config = StoreConfig.from_settings(
                cities=parse_cities(options["cities"]),
                fixture_seed=options["seed"],
                communities_per_city=options["communities"],
                pois_per_city=options["pois"],
            )
            counts = make_fixture(config, options["output"] or settings.QA_FIXTURE_DIR)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=2)
        for city, (communities, pois) in counts.items():
            self.stdout.write(f"{city}: {communities} communities, {pois} POIs")
        self.stdout.write(self.style.SUCCESS("Fixture written"))
