from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from domain.dataset import read_jsonl
from toolcache.exceptions import ProviderError
from toolcache.population import corpus_from_instances, populate_cache
from toolcache.providers import SyntheticProvider
from toolcache.service import dump_cache, load_cache


class Command(BaseCommand):
    help = (
        "Заполняет кеш инструментов по трассам датасета (каждый уникальный запрос "
        "выполняется один раз), загружает или выгружает кеш в JSONL"
    )

    def add_arguments(self, parser):
        parser.add_argument(
            "--dataset",
            type=Path,
            action="append",
            default=[],
            help="JSONL-файл датасета; по умолчанию все *.jsonl в QA_DATASET_DIR",
        )
        parser.add_argument("--load", type=Path, default=None, help="Загрузить кеш из JSONL")
        parser.add_argument("--dump", type=Path, nargs="?", const=True, default=None, help="Выгрузить кеш в JSONL")

    def handle(self, *args, **options):
        if options["load"] is not None:
            if not options["load"].exists():
                raise CommandError(f"cache file {options['load']} does not exist", returncode=2)
            try:
                loaded = load_cache(options["load"])
            except (ProviderError, ValueError, KeyError) as exc:
                raise CommandError(f"cache file is invalid: {exc}", returncode=1)
            self.stdout.write(f"Loaded {loaded} entries")
        else:
            paths = options["dataset"] or sorted(Path(settings.QA_DATASET_DIR).glob("*.jsonl"))
            if not paths:
                raise CommandError("no dataset files to collect tool calls from", returncode=2)
            instances = []
            for path in paths:
                try:
                    instances.extend(read_jsonl(path))
                except (OSError, ValueError) as exc:
                    raise CommandError(str(exc), returncode=2)
            report = populate_cache(SyntheticProvider(), corpus_from_instances(instances))
            self.stdout.write(
                f"requested={report.requested} unique={report.unique} "
                f"created={report.created} existing={report.existing} failed={len(report.failed)}"
            )
            if not report.complete:
                for key, error in report.failed[:20]:
                    self.stderr.write(f"{key}: {error}")
                raise CommandError("cache population is partial", returncode=3)

        if options["dump"] is not None:
            target = settings.QA_CACHE_FILE if options["dump"] is True else options["dump"]
            count = dump_cache(target)
            self.stdout.write(f"Dumped {count} entries to {target}")
        self.stdout.write(self.style.SUCCESS("Cache ready"))
