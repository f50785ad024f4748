"""
Каталог прогона: config.json, transcripts.jsonl, report.json, report.txt
"""

import json
import logging
from pathlib import Path

from django.conf import settings

from agents.protocol import EpisodeTranscript
from .config import RunConfig
from .exceptions import RunDirectoryError


logger = logging.getLogger(__name__)

RUN_FILES = ("config.json", "transcripts.jsonl", "report.json", "report.txt")


class RunDirectory:
    """
    Attributes:
        path(Path): Каталог прогона
    """

    def __init__(self, path: Path) -> None:
        self.path = Path(path)

    @classmethod
    def named(cls, name: str) -> "RunDirectory":
        if not name or "/" in name or name.startswith("."):
            raise ValueError(f"invalid run name {name!r}")
        return cls(Path(settings.QA_RUNS_DIR) / name)

    def prepare(self, overwrite: bool = False) -> None:
        """
        Создаёт каталог; существующий прогон заменяется только с overwrite

        Raises:
            RunDirectoryError: каталог не пуст, а overwrite не задан
        """

        if self.path.exists() and any(self.path.iterdir()):
            if not overwrite:
                raise RunDirectoryError(self.path, "run already exists, pass --overwrite to replace it")
            for name in RUN_FILES:
                (self.path / name).unlink(missing_ok=True)
            logger.info("replacing run files in %s", self.path)
        self.path.mkdir(parents=True, exist_ok=True)

    def write_config(self, config: RunConfig) -> None:
        (self.path / "config.json").write_text(
            json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def write_transcripts(self, transcripts) -> None:
        ordered = sorted(transcripts, key=lambda transcript: transcript.instance_id)
        (self.path / "transcripts.jsonl").write_text(
            "".join(transcript.to_json() + "\n" for transcript in ordered), encoding="utf-8"
        )

    def write_report(self, report) -> None:
        (self.path / "report.json").write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        (self.path / "report.txt").write_text(report.render_text(), encoding="utf-8")

    def read_config(self) -> RunConfig:
        """
        Raises:
            RunDirectoryError: файла нет или он не разбирается
        """

        try:
            return RunConfig.from_dict(json.loads((self.path / "config.json").read_text(encoding="utf-8")))
        except (OSError, ValueError, TypeError) as exc:
            raise RunDirectoryError(self.path, f"cannot read config.json: {exc}") from exc

    def read_transcripts(self) -> list[EpisodeTranscript]:
        try:
            lines = (self.path / "transcripts.jsonl").read_text(encoding="utf-8").splitlines()
            return [EpisodeTranscript.from_json(line) for line in lines if line.strip()]
        except (OSError, ValueError, KeyError) as exc:
            raise RunDirectoryError(self.path, f"cannot read transcripts.jsonl: {exc}") from exc
