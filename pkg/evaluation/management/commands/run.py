from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from agents.exceptions import ConfigurationError
from agents.episode import INJECTABLE_STAGES
from domain.dataset import read_jsonl
from evaluation.config import METHODS, RunConfig, build_backend
from evaluation.exceptions import RunDirectoryError
from evaluation.rundir import RunDirectory
from evaluation.runner import run_suite
from geostore.store import GeoStore
from qagen.exceptions import TemplateError
from qagen.templates import load_catalog
from slu.fewshot import sample_examples
from slu.strategies import STRATEGY_NAMES


def add_run_arguments(parser):
    parser.add_argument("--name", required=True, help="Имя прогона: каталог в QA_RUNS_DIR")
    backend = parser.add_mutually_exclusive_group()
    backend.add_argument("--oracle", action="store_true", help="Оракульный бэкенд вместо LLM")
    backend.add_argument("--failing-stage", help="Оракул, который ошибается на одной стадии")
    parser.add_argument("--split", default=None, help="train, val или test")
    parser.add_argument("--dataset-dir", type=Path, default=None, help="Каталог с файлами частей датасета")
    parser.add_argument("--slu", choices=STRATEGY_NAMES, default=None)
    parser.add_argument("--method", choices=METHODS, default=None)
    parser.add_argument("--step-cap", type=int, default=None)
    parser.add_argument("--parallelism", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--limit", type=int, default=None, help="Только первые N экземпляров")
    parser.add_argument("--judge-sufficiency", action="store_true")
    parser.add_argument("--overwrite", action="store_true", help="Заменить существующий прогон")


def config_from_options(options, injections=()) -> RunConfig:
    if options["oracle"]:
        backend = "oracle"
    elif options["failing_stage"]:
        backend = f"failing:{options['failing_stage']}"
    else:
        backend = "http"
    try:
        return RunConfig.from_settings(
            split=options["split"],
            backend=backend,
            slu=options["slu"],
            injections=frozenset(injections),
            step_cap=options["step_cap"],
            seed=options["seed"],
            parallelism=options["parallelism"],
            method=options["method"],
            judge_sufficiency=options["judge_sufficiency"],
        )
    except ValueError as exc:
        raise CommandError(str(exc), returncode=2)


def load_inputs(config: RunConfig, options):
    """
    Returns:
        (каталог шаблонов, бэкенд, экземпляры части, примеры few-shot)
    """

    try:
        templates = load_catalog(settings.QA_TEMPLATE_DIR)
    except TemplateError as exc:
        raise CommandError(str(exc), returncode=2)
    try:
        backend = build_backend(config.backend, templates)
    except ConfigurationError as exc:
        raise CommandError(str(exc), returncode=2)
    if not GeoStore().list_captions():
        raise CommandError("store is empty; run ingest first", returncode=2)

    dataset_dir = Path(options["dataset_dir"] or settings.QA_DATASET_DIR)
    try:
        instances = read_jsonl(dataset_dir / f"{config.split}.jsonl")
        examples = ()
        if config.slu == "fewshot" and "slu" not in config.injections:
            examples = sample_examples(read_jsonl(dataset_dir / "train.jsonl"), seed=config.seed)
    except OSError as exc:
        raise CommandError(f"cannot read dataset: {exc}", returncode=2)
    except ValueError as exc:
        raise CommandError(str(exc), returncode=1)
    if options["limit"] is not None:
        instances = instances[: options["limit"]]
    return templates, backend, instances, examples


class Command(BaseCommand):
    help = "Прогоняет агентов по части датасета и пишет журналы и отчёт в каталог прогона"

    def add_arguments(self, parser):
        add_run_arguments(parser)
        parser.add_argument("--inject", action="append", choices=INJECTABLE_STAGES, default=[], help="Подменить стадию эталоном")

    def handle(self, *args, **options):
        config = config_from_options(options, options["inject"])
        templates, backend, instances, examples = load_inputs(config, options)
        try:
            run_dir = RunDirectory.named(options["name"])
            run_dir.prepare(options["overwrite"])
        except (RunDirectoryError, ValueError) as exc:
            raise CommandError(str(exc), returncode=2)

        result = run_suite(config, instances, store=GeoStore(), templates=templates, backend=backend, examples=examples)
        run_dir.write_config(config)
        run_dir.write_transcripts(result.transcripts)
        run_dir.write_report(result.report)
        self.stdout.write(result.report.render_text())
        if result.all_backend_errors:
            raise CommandError("backend failed on every episode", returncode=3)
        self.stdout.write(self.style.SUCCESS(f"Run written to {run_dir.path}"))
