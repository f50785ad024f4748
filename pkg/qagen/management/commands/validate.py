from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from domain.dataset import read_jsonl
from geostore.store import GeoStore
from qagen.exceptions import TemplateError
from qagen.templates import load_catalog
from qagen.validation import validate_dataset
from toolcache.service import ToolCache


class Command(BaseCommand):
    help = (
        "Перепроверяет каждый экземпляр: выполняет SQL заново, воспроизводит "
        "вызовы из замороженного кеша и заново выводит ответ"
    )

    def add_arguments(self, parser):
        parser.add_argument("--dataset", type=Path, default=None, help="JSONL-файл датасета")
        parser.add_argument("--templates", type=Path, default=None, help="Каталог YAML-шаблонов")

    def handle(self, *args, **options):
        path = options["dataset"] or Path(settings.QA_DATASET_DIR) / "dataset.jsonl"
        try:
            templates = load_catalog(options["templates"] or settings.QA_TEMPLATE_DIR)
            instances = read_jsonl(path)
        except TemplateError as exc:
            raise CommandError(str(exc), returncode=2)
        except OSError as exc:
            raise CommandError(f"cannot read {path}: {exc}", returncode=2)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=1)

        failures = validate_dataset(instances, templates, GeoStore(), ToolCache())
        for instance_id, mismatches in failures.items():
            for mismatch in mismatches:
                self.stderr.write(f"{instance_id}: {mismatch}")
        self.stdout.write(f"checked={len(instances)} mismatched={len(failures)}")
        if failures:
            raise CommandError(f"{len(failures)} instances failed validation", returncode=1)
        self.stdout.write(self.style.SUCCESS("All instances verified"))
