import json
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from domain.dataset import read_jsonl
from qagen.exceptions import TemplateError
from qagen.templates import load_catalog
from slu.exceptions import GazetteerError
from slu.gazetteer import Gazetteer, build_gazetteer
from slu.lexicon import LexiconStrategy, signatures_from_catalog
from slu.metrics import slu_metrics


class Command(BaseCommand):
    help = "Считает метрики лексической стратегии SLU на файле датасета"

    def add_arguments(self, parser):
        parser.add_argument("--dataset", type=Path, help="JSONL-файл, по умолчанию test.jsonl")
        parser.add_argument("--gazetteer", type=Path, help="Файл словаря вместо сборки из хранилища")

    def handle(self, *args, **options):
        path = options["dataset"] or Path(settings.QA_DATASET_DIR) / "test.jsonl"
        try:
            instances = read_jsonl(path)
            templates = load_catalog(settings.QA_TEMPLATE_DIR)
        except OSError as exc:
            raise CommandError(f"cannot read inputs: {exc}", returncode=2)
        except (TemplateError, ValueError) as exc:
            raise CommandError(str(exc), returncode=1)
        try:
            gazetteer = Gazetteer.load(options["gazetteer"]) if options["gazetteer"] else build_gazetteer()
        except GazetteerError as exc:
            raise CommandError(str(exc), returncode=1)

        strategy = LexiconStrategy(gazetteer, signatures_from_catalog(templates.values()))
        predictions = [strategy.predict(instance.question) for instance in instances]
        self.stdout.write(json.dumps(slu_metrics(predictions, instances).to_dict(), indent=2, sort_keys=True))
