"""
Перефразирование вопросов с проверкой сохранности слотов
"""

import dataclasses
import logging
from pathlib import Path
from typing import Optional

from agents.exceptions import BackendError
from domain.instances import QAInstance, SlotAnnotation, check_slots


logger = logging.getLogger(__name__)

PROMPT_PATH = Path(__file__).resolve().parent / "prompts" / "paraphrase_v1.txt"


def relocate_slots(question: str, slots) -> Optional[tuple[SlotAnnotation, ...]]:
    """
    Находит значения слотов в новом тексте без пересечений, начиная с самых длинных

    Returns:
        Слоты в исходном порядке или None, если какое-то значение потеряно
    """

    claimed: list[tuple[int, int]] = []
    located: dict[int, SlotAnnotation] = {}
    order = sorted(range(len(slots)), key=lambda index: (-len(slots[index].value), index))
    for index in order:
        slot = slots[index]
        start = question.find(slot.value)
        while start != -1:
            span = (start, start + len(slot.value))
            if all(span[1] <= left or span[0] >= right for left, right in claimed):
                break
            start = question.find(slot.value, start + 1)
        if start == -1:
            return None
        claimed.append(span)
        located[index] = SlotAnnotation(slot.slot_type, slot.value, span)
    return tuple(located[index] for index in range(len(slots)))


def paraphrase_hook(instance: QAInstance, backend=None) -> QAInstance:
    """
    Переписывает вопрос через чат-бэкенд; если хотя бы одно значение слота
    не сохранилось дословно или бэкенд недоступен, возвращает экземпляр как есть
    """

    if backend is None:
        return instance
    prompt = PROMPT_PATH.read_text(encoding="utf-8")
    try:
        reply = backend.complete(
            prompt,
            [{"role": "user", "content": instance.question}],
            role="qagen.paraphrase",
            context={"instance": instance},
        )
    except BackendError as exc:
        logger.warning("paraphrase backend failed on %s: %s", instance.id, exc)
        return instance
    rewritten = " ".join(str(reply or "").split())
    if not rewritten or rewritten == instance.question:
        return instance
    slots = relocate_slots(rewritten, list(instance.slots))
    if slots is None:
        logger.info("paraphrase of %s dropped a slot value, original kept", instance.id)
        return instance
    try:
        check_slots(rewritten, slots)
    except ValueError:
        return instance
    return dataclasses.replace(instance, question=rewritten, slots=slots)
