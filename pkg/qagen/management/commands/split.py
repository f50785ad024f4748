from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from domain.dataset import read_jsonl, write_jsonl
from qagen.split import SPLIT_NAMES, SplitSpec, stratified_split


class Command(BaseCommand):
    help = "Делит датасет на train/val/test 8:1:1 со стратификацией по шаблону"

    def add_arguments(self, parser):
        parser.add_argument("--dataset", type=Path, default=None, help="JSONL-файл датасета")
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--output", type=Path, default=None, help="Каталог для train/val/test.jsonl")

    def handle(self, *args, **options):
        path = options["dataset"] or Path(settings.QA_DATASET_DIR) / "dataset.jsonl"
        try:
            instances = read_jsonl(path)
        except OSError as exc:
            raise CommandError(f"cannot read {path}: {exc}", returncode=2)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=1)

        splits = stratified_split(instances, SplitSpec.from_settings(options["seed"]))
        output = options["output"] or Path(path).parent
        for name in SPLIT_NAMES:
            write_jsonl(Path(output) / f"{name}.jsonl", splits[name])
            self.stdout.write(f"{name}: {len(splits[name])}")
        self.stdout.write(self.style.SUCCESS(f"Splits written to {output}"))
