"""
Лексическая стратегия SLU: числовые шаблоны, словарь и сигнатуры шаблонов вопросов
"""

import logging
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from django.conf import settings

from domain.instances import SlotAnnotation
from .gazetteer import Gazetteer
from .prediction import UNKNOWN_INTENT, SluPrediction


logger = logging.getLogger(__name__)

WORD_PATTERN = re.compile(r"[a-z]+")


def _free(span: tuple[int, int], claimed: list[tuple[int, int]]) -> bool:
    return all(span[1] <= left or span[0] >= right for left, right in claimed)


def _bounded(text: str, start: int, end: int) -> bool:
    before = text[start - 1] if start > 0 else " "
    after = text[end] if end < len(text) else " "
    return not (before.isalnum() or before == "_") and not (after.isalnum() or after == "_")


def compile_patterns(patterns=None) -> tuple[tuple[str, re.Pattern], ...]:
    return tuple((slot_type, re.compile(pattern)) for slot_type, pattern in (patterns or settings.SLU_PATTERNS))


def tag_slots(question: str, gazetteer: Gazetteer, patterns=None) -> tuple[SlotAnnotation, ...]:
    """
    Сначала шаблоны чисел и контекстных слов, затем самые длинные совпадения
    словаря по границам слов; из равных по длине побеждает более раннее

    Args:
        patterns: Пары из compile_patterns; по умолчанию шаблоны из настроек

    Returns:
        Слоты без пересечений в порядке позиции в вопросе
    """

    claimed: list[tuple[int, int]] = []
    slots = []
    for slot_type, pattern in patterns if patterns is not None else compile_patterns():
        for match in pattern.finditer(question):
            span = match.span(1)
            if _free(span, claimed):
                claimed.append(span)
                slots.append(SlotAnnotation(slot_type, match.group(1), span))

    candidates = []
    for value, slot_type in gazetteer.surfaces:
        start = question.find(value)
        while start != -1:
            end = start + len(value)
            if _bounded(question, start, end):
                candidates.append((-(end - start), start, slot_type, value))
            start = question.find(value, start + 1)
    for negative_length, start, slot_type, value in sorted(candidates):
        span = (start, start - negative_length)
        if _free(span, claimed):
            claimed.append(span)
            slots.append(SlotAnnotation(slot_type, value, span))
    return tuple(sorted(slots, key=lambda slot: slot.span))


def mask_slots(question: str, slots: Iterable[SlotAnnotation]) -> str:
    """Вопрос с пробелами на месте значений слотов"""
    chars = list(question)
    for slot in slots:
        start, end = slot.span
        chars[start:end] = " " * (end - start)
    return "".join(chars)


def words(text: str) -> frozenset[str]:
    return frozenset(WORD_PATTERN.findall(text.lower()))


@dataclass(frozen=True)
class Signature:
    """
    Attributes:
        template_id(str): Шаблон, из которого получена сигнатура
        words(frozenset): Слова текста шаблона без плейсхолдеров
        slot_types(tuple): Мультимножество типов слотов как пары (тип, количество)
        intents(tuple): Интенты шаблона
    """

    template_id: str
    words: frozenset[str]
    slot_types: tuple[tuple[str, int], ...]
    intents: tuple[str, ...]

    @classmethod
    def from_template(cls, template) -> "Signature":
        counts = Counter(template.slot_types)
        return cls(template.template_id, words(template.skeleton), tuple(sorted(counts.items())), tuple(template.intents))


def signatures_from_catalog(templates) -> tuple[Signature, ...]:
    return tuple(sorted((Signature.from_template(template) for template in templates), key=lambda item: item.template_id))


def classify_intents(question: str, slots, signatures) -> tuple[str, ...]:
    """
    Лучшая сигнатура: сначала точное совпадение мультимножества типов слотов,
    затем сходство Жаккара по словам, затем id шаблона
    """

    if not slots or not signatures:
        return (UNKNOWN_INTENT,)
    observed_types = tuple(sorted(Counter(slot.slot_type for slot in slots).items()))
    observed_words = words(mask_slots(question, slots))

    def rank(signature: Signature):
        union = observed_words | signature.words
        jaccard = len(observed_words & signature.words) / len(union) if union else 0.0
        return (signature.slot_types != observed_types, -jaccard, signature.template_id)

    return min(signatures, key=rank).intents


class LexiconStrategy:
    """Детерминированная стратегия без бэкенда"""

    name = "lexicon"

    def __init__(self, gazetteer: Gazetteer, signatures, patterns=None) -> None:
        self.gazetteer = gazetteer
        self.signatures = tuple(signatures)
        self.patterns = compile_patterns(patterns)

    def predict(self, question: str, gold=None) -> SluPrediction:
        slots = tag_slots(question, self.gazetteer, self.patterns)
        return SluPrediction(classify_intents(question, slots, self.signatures), slots)
