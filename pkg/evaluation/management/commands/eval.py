import json
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from domain.dataset import read_jsonl
from evaluation.exceptions import AlignmentError, RunDirectoryError
from evaluation.report import build_report
from evaluation.rundir import RunDirectory


class Command(BaseCommand):
    help = "Пересчитывает отчёт по журналам сохранённого прогона"

    def add_arguments(self, parser):
        parser.add_argument("--name", required=True, help="Имя прогона")
        parser.add_argument("--dataset-dir", type=Path, default=None, help="Каталог с файлами частей датасета")
        parser.add_argument("--json", action="store_true", help="Вывести JSON вместо таблицы")

    def handle(self, *args, **options):
        try:
            run_dir = RunDirectory.named(options["name"])
            config = run_dir.read_config()
            transcripts = run_dir.read_transcripts()
        except (RunDirectoryError, ValueError) as exc:
            raise CommandError(str(exc), returncode=2)
        dataset_dir = Path(options["dataset_dir"] or settings.QA_DATASET_DIR)
        try:
            golds = read_jsonl(dataset_dir / f"{config.split}.jsonl")
        except OSError as exc:
            raise CommandError(f"cannot read dataset: {exc}", returncode=2)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=1)

        # прогон мог идти с --limit: сверяются только экземпляры с журналами
        covered = {transcript.instance_id for transcript in transcripts}
        try:
            report = build_report(config, transcripts, [gold for gold in golds if gold.id in covered])
        except AlignmentError as exc:
            raise CommandError(str(exc), returncode=1)
        run_dir.write_report(report)
        if options["json"]:
            self.stdout.write(json.dumps(report.to_dict(), indent=2, sort_keys=True))
        else:
            self.stdout.write(report.render_text())
