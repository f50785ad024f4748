from django.core.management.base import BaseCommand, CommandError

from geostore.config import StoreConfig
from geostore.ingestion import build_proximity_pairs

from .make_fixture import parse_cities


class Command(BaseCommand):
    help = "Пересчитывает пары близости POI - комплекс и соседних комплексов"

    def add_arguments(self, parser):
        parser.add_argument("--cities", help="Города через запятую (по умолчанию QA_CITIES)")
        parser.add_argument("--poi-radius", type=float, default=None, help="Метры, по умолчанию 3000")
        parser.add_argument("--community-radius", type=float, default=None, help="Метры, по умолчанию 1000")

    def handle(self, *args, **options):
        try:
            config = StoreConfig.from_settings(
                cities=parse_cities(options["cities"]),
                poi_pairing_radius=options["poi_radius"],
                community_pairing_radius=options["community_radius"],
            )
        except ValueError as exc:
            raise CommandError(str(exc), returncode=2)
        counts = build_proximity_pairs(config)
        for kind, count in counts.items():
            self.stdout.write(f"{kind}: {count}")
        self.stdout.write(self.style.SUCCESS("Pairs rebuilt"))
