from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from slu.exceptions import GazetteerError
from slu.gazetteer import Gazetteer, build_gazetteer


class Command(BaseCommand):
    help = "Собирает словарь SLU из хранилища в JSON или проверяет готовый файл"

    def add_arguments(self, parser):
        group = parser.add_mutually_exclusive_group(required=True)
        group.add_argument("--dump", type=Path, help="Записать словарь из хранилища в файл")
        group.add_argument("--load", type=Path, help="Прочитать и проверить файл словаря")
        parser.add_argument("--city", action="append", default=[], help="Ограничить городами")

    def handle(self, *args, **options):
        if options["dump"]:
            gazetteer = build_gazetteer(options["city"] or None)
            if not len(gazetteer.entries.get("community_name", ())):
                raise CommandError("store is empty; run ingest first", returncode=2)
            try:
                gazetteer.dump(options["dump"])
            except OSError as exc:
                raise CommandError(f"cannot write {options['dump']}: {exc}", returncode=2)
        else:
            try:
                gazetteer = Gazetteer.load(options["load"])
            except GazetteerError as exc:
                raise CommandError(str(exc), returncode=1)
        for slot_type, values in sorted(gazetteer.entries.items()):
            self.stdout.write(f"{slot_type}: {len(values)}")
        self.stdout.write(self.style.SUCCESS(f"{len(gazetteer)} entries"))
