import json

from django.core.management.base import BaseCommand, CommandError

from evaluation.exceptions import RunDirectoryError
from evaluation.rundir import RunDirectory
from evaluation.runner import run_ladder
from geostore.store import GeoStore
from .run import add_run_arguments, config_from_options, load_inputs


class Command(BaseCommand):
    help = "Прогоняет лестницу подмен эталоном: none, slu, slu+sql, slu+sql+api"

    def add_arguments(self, parser):
        add_run_arguments(parser)

    def handle(self, *args, **options):
        config = config_from_options(options)
        templates, backend, instances, examples = load_inputs(config, options)
        try:
            parent = RunDirectory.named(options["name"])
            parent.prepare(options["overwrite"])
        except (RunDirectoryError, ValueError) as exc:
            raise CommandError(str(exc), returncode=2)

        results = run_ladder(config, instances, store=GeoStore(), templates=templates, backend=backend, examples=examples)
        summary = {}
        lines = [f"{'rung':<12} {'Acc':>7} {'F1':>7}"]
        for rung, result in results.items():
            run_dir = RunDirectory(parent.path / rung)
            run_dir.prepare(overwrite=True)
            run_dir.write_config(result.config)
            run_dir.write_transcripts(result.transcripts)
            run_dir.write_report(result.report)
            accuracy, f1 = result.report.metric("accuracy"), result.report.metric("f1")
            summary[rung] = {"accuracy": accuracy, "f1": f1}
            lines.append(f"{rung:<12} {accuracy or 0.0:>7.4f} {f1 or 0.0:>7.4f}")
        (parent.path / "ladder.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        (parent.path / "ladder.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        self.stdout.write("\n".join(lines))
        if all(result.all_backend_errors for result in results.values()):
            raise CommandError("backend failed on every episode", returncode=3)
        self.stdout.write(self.style.SUCCESS(f"Ladder written to {parent.path}"))
