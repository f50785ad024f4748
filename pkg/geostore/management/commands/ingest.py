from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from geostore.config import StoreConfig
from geostore.exceptions import IngestionError
from geostore.ingestion import ingest_fixture

from .make_fixture import parse_cities


class Command(BaseCommand):
    help = "Загружает CSV-фикстуры в хранилище и строит каталог подписей"

    def add_arguments(self, parser):
        parser.add_argument("--cities", help="Города через запятую (по умолчанию QA_CITIES)")
        parser.add_argument("--source", type=Path, default=None, help="Каталог фикстур")

    def handle(self, *args, **options):
        source = options["source"] or settings.QA_FIXTURE_DIR
        if not Path(source).is_dir():
            raise CommandError(f"fixture directory {source} does not exist", returncode=2)
        try:
            config = StoreConfig.from_settings(cities=parse_cities(options["cities"]))
            store = ingest_fixture(config, source)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=2)
        except IngestionError as exc:
            raise CommandError(f"ingestion failed: {exc}", returncode=1)
        captions = store.list_captions()
        for caption in captions:
            self.stdout.write(f"{caption.table_id}: {caption.caption}")
        self.stdout.write(self.style.SUCCESS(f"Ingested {len(config.cities)} cities, {len(captions)} captions"))
