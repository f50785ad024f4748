import json
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from domain.dataset import read_jsonl
from qagen.stats import dataset_stats


class Command(BaseCommand):
    help = "Печатает статистику датасета: вопросы, таблицы, интенты, слоты, типы"

    def add_arguments(self, parser):
        parser.add_argument("--dataset", type=Path, action="append", default=[], help="JSONL-файл датасета")
        parser.add_argument("--json", action="store_true", help="Вывести JSON")

    def handle(self, *args, **options):
        paths = options["dataset"] or [Path(settings.QA_DATASET_DIR) / "dataset.jsonl"]
        instances = []
        for path in paths:
            try:
                instances.extend(read_jsonl(path))
            except OSError as exc:
                raise CommandError(f"cannot read {path}: {exc}", returncode=2)
            except ValueError as exc:
                raise CommandError(str(exc), returncode=1)
        stats = dataset_stats(instances)
        if options["json"]:
            self.stdout.write(json.dumps(stats, indent=2, sort_keys=True))
            return
        for key, value in stats.items():
            self.stdout.write(f"{key}: {value}")
