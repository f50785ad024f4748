import json
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from agents.backends import backend_from_settings
from agents.exceptions import ConfigurationError
from domain.dataset import export_iob, write_jsonl
from geostore.management.commands.make_fixture import parse_cities
from geostore.store import GeoStore
from qagen.exceptions import TemplateError
from qagen.generation import generate_dataset
from qagen.paraphrase import paraphrase_hook
from qagen.templates import load_catalog
from toolcache.providers import SyntheticProvider
from toolcache.service import ToolCache


class Command(BaseCommand):
    help = "Генерирует QA-экземпляры по каталогу шаблонов и пишет отчёт о генерации"

    def add_arguments(self, parser):
        parser.add_argument("--templates", type=Path, default=None, help="Каталог YAML-шаблонов")
        parser.add_argument("--cities", help="Города через запятую (по умолчанию QA_CITIES)")
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--attempts", type=int, default=None, help="Попыток на шаблон")
        parser.add_argument("--output", type=Path, default=None, help="Каталог датасета")
        parser.add_argument("--paraphrase", action="store_true", help="Перефразировать вопросы через чат-бэкенд")
        parser.add_argument("--iob", action="store_true", help="Дополнительно выгрузить IOB-разметку")

    def handle(self, *args, **options):
        cities = parse_cities(options["cities"]) or tuple(settings.QA_CITIES)
        seed = settings.GENERATION_SEED if options["seed"] is None else options["seed"]
        attempts = options["attempts"] or settings.GENERATION_ATTEMPTS_PER_TEMPLATE
        output = options["output"] or settings.QA_DATASET_DIR
        try:
            templates = load_catalog(options["templates"] or settings.QA_TEMPLATE_DIR)
        except TemplateError as exc:
            raise CommandError(str(exc), returncode=2)

        store = GeoStore()
        ingested = {caption.city for caption in store.list_captions()}
        missing = [city for city in cities if city not in ingested]
        if missing:
            raise CommandError(f"cities {missing} are not ingested, run ingest first", returncode=2)

        backend = None
        if options["paraphrase"]:
            try:
                backend = backend_from_settings()
            except ConfigurationError as exc:
                raise CommandError(str(exc), returncode=2)

        instances, report = generate_dataset(
            templates.values(),
            store,
            ToolCache(provider=SyntheticProvider()),
            cities=cities,
            seed=seed,
            attempts=attempts,
        )
        if backend is not None:
            instances = [paraphrase_hook(instance, backend) for instance in instances]

        output = Path(output)
        write_jsonl(output / "dataset.jsonl", instances)
        (output / "generation_report.json").write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        if options["iob"]:
            export_iob(output / "iob" / "dataset.jsonl", instances)

        self.stdout.write(f"attempted={report.attempted} accepted={report.accepted}")
        for reason, count in sorted(report.rejected.items()):
            self.stdout.write(f"  {reason}: {count}")
        if not instances:
            raise CommandError("no instance was accepted", returncode=1)
        self.stdout.write(self.style.SUCCESS(f"Dataset written to {output}"))
