"""
Чтение и запись датасета и экспорт IOB-разметки
"""

import json
import logging
import re
from pathlib import Path
from typing import Iterable, Iterator

from .instances import QAInstance, SlotAnnotation


logger = logging.getLogger(__name__)

TOKENIZATION_ID = "regex-word-v1"
TOKEN_PATTERN = re.compile(r"\w+|[^\w\s]")


def write_jsonl(path: Path, instances: Iterable[QAInstance]) -> int:
    """
    Пишет экземпляры по одному на строку в UTF-8

    Returns:
        Количество записанных экземпляров
    """

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as stream:
        for instance in instances:
            stream.write(instance.to_json() + "\n")
            count += 1
    logger.info("wrote %d instances to %s", count, path)
    return count


def iter_jsonl(path: Path) -> Iterator[QAInstance]:
    with Path(path).open(encoding="utf-8") as stream:
        for number, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                yield QAInstance.from_json(line)
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{number}: {exc}") from exc


def read_jsonl(path: Path) -> list[QAInstance]:
    return list(iter_jsonl(path))


def tokenize(text: str) -> list[tuple[str, int, int]]:
    """Токены вместе со смещениями символов"""
    return [(match.group(), match.start(), match.end()) for match in TOKEN_PATTERN.finditer(text)]


def iob_tags(question: str, slots: Iterable[SlotAnnotation]) -> list[tuple[str, str]]:
    """
    Размечает токены вопроса по схеме IOB

    Первый токен, пересекающийся со спаном слота, получает B-, остальные I-
    """

    tagged = []
    spans = sorted(slots, key=lambda slot: slot.span)
    opened = set()
    for token, start, end in tokenize(question):
        tag = "O"
        for slot in spans:
            slot_start, slot_end = slot.span
            if start < slot_end and end > slot_start:
                prefix = "I" if slot.span in opened else "B"
                opened.add(slot.span)
                tag = f"{prefix}-{slot.slot_type}"
                break
        tagged.append((token, tag))
    return tagged


def export_iob(path: Path, instances: Iterable[QAInstance]) -> int:
    """
    Пишет IOB-разметку: строка на экземпляр с токенами, тегами и интентами
    """

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as stream:
        for instance in instances:
            tagged = iob_tags(instance.question, instance.slots)
            record = {
                "id": instance.id,
                "tokenization": TOKENIZATION_ID,
                "tokens": [token for token, _ in tagged],
                "tags": [tag for _, tag in tagged],
                "intents": list(instance.intents),
            }
            stream.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count
